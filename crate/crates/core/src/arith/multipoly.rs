//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are `z0, z1, ..., zN`; in the game pipeline `z0` is the discount
//! factor and `zs` the unknown value of state `s`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::rational::{fmt_rational, parse_rational, Rational};
use super::unipoly::UniPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("variable z{var} out of range for {nvars} variables")]
    VarOutOfRange { var: usize, nvars: usize },
    #[error("not univariate in z{var}: also involves z{other}")]
    NotUnivariate { var: usize, other: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("factor is constant")]
    ConstantFactor,
    #[error("invalid term order: {0}")]
    InvalidOrder(String),
}

/// Exponent vector; index `i` is the exponent of `zi`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`, if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        other
            .divides(self)
            .then(|| Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

/// Lexicographic term order given by a ranking of the variables,
/// most significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TermOrder {
    significance: Vec<usize>,
}

impl TermOrder {
    pub fn lex(significance: Vec<usize>) -> Result<Self, PolyError> {
        let n = significance.len();
        let mut seen = vec![false; n];
        for &v in &significance {
            if v >= n || seen[v] {
                return Err(PolyError::InvalidOrder(format!("{significance:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(TermOrder { significance })
    }

    /// Plain lex with `z0` most significant.
    pub fn natural(nvars: usize) -> Self {
        TermOrder { significance: (0..nvars).collect() }
    }

    /// The elimination order used for state `s` (1-based, `1 <= s < nvars`):
    /// `z0` is the least variable, `zs` the next, and the remaining state
    /// variables follow cyclically, `zs < z(s+1) < ... < zN < z1 < ... < z(s-1)`.
    pub fn for_state(nvars: usize, s: usize) -> Self {
        assert!(s >= 1 && s < nvars, "state index {s} out of range");
        let n = nvars - 1;
        // ascending chain, least first
        let mut ascending = vec![0];
        ascending.extend((0..n).map(|k| (s - 1 + k) % n + 1));
        ascending.reverse();
        TermOrder { significance: ascending }
    }

    pub fn nvars(&self) -> usize {
        self.significance.len()
    }

    pub fn significance(&self) -> &[usize] {
        &self.significance
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        for &v in &self.significance {
            match a.0[v].cmp(&b.0[v]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// Exponents rearranged so that plain lexicographic comparison of the
    /// result agrees with this order.
    pub fn permute(&self, m: &Monomial) -> Monomial {
        Monomial(self.significance.iter().map(|&v| m.0[v]).collect())
    }

    pub fn unpermute(&self, m: &Monomial) -> Monomial {
        let mut out = vec![0; m.0.len()];
        for (pos, &v) in self.significance.iter().enumerate() {
            out[v] = m.0[pos];
        }
        Monomial(out)
    }

    /// Human-readable form like `z2 > z1 > z0`.
    pub fn describe(&self) -> String {
        self.significance.iter().map(|v| format!("z{v}")).collect::<Vec<_>>().join(" > ")
    }
}

/// Canonical sparse polynomial: no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked binary arithmetic.
pub fn poly_arith(a: &MultiPoly, b: &MultiPoly, op: ArithOp) -> Result<MultiPoly, PolyError> {
    if a.nvars != b.nvars {
        return Err(PolyError::VarCountMismatch { left: a.nvars, right: b.nvars });
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    })
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, var: usize) -> Self {
        Self::monomial(nvars, Monomial::var(nvars, var), Rational::one())
    }

    pub fn monomial(nvars: usize, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.nvars(), nvars);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    /// Indices of the variables that occur with positive exponent.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.involves(v)).collect()
    }

    pub fn leading_term(&self, order: &TermOrder) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    /// Terms in descending order.
    pub fn sorted_terms(&self, order: &TermOrder) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| order.cmp(b.0, a.0));
        v
    }

    /// Divides by the leading coefficient under `order`.
    pub fn monic(&self, order: &TermOrder) -> MultiPoly {
        match self.leading_term(order) {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluation homomorphism `zvar := value`. The result keeps the same
    /// variable count with a zero exponent on `var`.
    pub fn substitute(&self, var: usize, value: &Rational) -> Result<MultiPoly, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::VarOutOfRange { var, nvars: self.nvars });
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            let mut m2 = m.clone();
            m2.0[var] = 0;
            out.add_term(m2, c * num_traits::pow(value.clone(), e as usize));
        }
        Ok(out)
    }

    /// Substitutes `zvar := zvar + shift`.
    pub fn translate(&self, var: usize, shift: &Rational) -> MultiPoly {
        let lin = &Self::var(self.nvars, var) + &Self::constant(self.nvars, shift.clone());
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            let mut rest = m.clone();
            rest.0[var] = 0;
            let part = lin.pow(e).mul_monomial(&rest, c);
            out = &out + &part;
        }
        out
    }

    pub fn to_univariate(&self, var: usize) -> Result<UniPoly, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::VarOutOfRange { var, nvars: self.nvars });
        }
        let mut coeffs = vec![Rational::zero(); self.degree_in(var) as usize + 1];
        for (m, c) in &self.terms {
            if let Some(other) = (0..self.nvars).find(|&v| v != var && m.0[v] > 0) {
                return Err(PolyError::NotUnivariate { var, other });
            }
            coeffs[m.0[var] as usize] = c.clone();
        }
        Ok(UniPoly::from_coeffs(coeffs))
    }

    pub fn from_univariate(nvars: usize, var: usize, p: &UniPoly) -> MultiPoly {
        let mut out = Self::zero(nvars);
        for (k, c) in p.coeffs().iter().enumerate() {
            let mut m = Monomial::one(nvars);
            m.0[var] = k as u32;
            out.add_term(m, c.clone());
        }
        out
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        assert_eq!(self.nvars, d.nvars);
        let (dm, dc) = d.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        // the natural BTreeMap order is itself a lex term order
        while let Some((m, c)) = rem.terms.iter().next_back() {
            let qm = m.div(dm)?;
            let qc = c / dc;
            rem = &rem - &d.mul_monomial(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Largest `l` with `factor^l | self`, and the cofactor.
    pub fn content_power(&self, factor: &MultiPoly) -> Result<(u32, MultiPoly), PolyError> {
        if self.is_zero() || factor.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if factor.is_constant() {
            return Err(PolyError::ConstantFactor);
        }
        let mut l = 0;
        let mut reduced = self.clone();
        while let Some(q) = reduced.div_exact(factor) {
            reduced = q;
            l += 1;
        }
        Ok((l, reduced))
    }

    /// Integer-coefficient multiple with coprime coefficients and positive
    /// leading coefficient under `order`.
    pub fn primitive(&self, order: &TermOrder) -> MultiPoly {
        use num_bigint::BigInt;
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(&(c.numer() * (&den / c.denom())));
        }
        let mut s = Rational::new(den, g);
        let lead_neg = self.leading_term(order).map(|(_, c)| c.is_negative()).unwrap_or(false);
        if lead_neg {
            s = -s;
        }
        self.scale(&s)
    }

    /// `Some(c)` when `self = c * other` for a nonzero rational `c`.
    pub fn proportionality(&self, other: &MultiPoly) -> Option<Rational> {
        if self.nvars != other.nvars || self.terms.len() != other.terms.len() || self.is_zero() {
            return None;
        }
        let (m0, c0) = other.terms.iter().next()?;
        let c = self.terms.get(m0)? / c0;
        (self == &other.scale(&c)).then_some(c)
    }

    pub fn fmt_with(&self, order: &TermOrder) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms(order).into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(fmt_rational(&a));
            }
            for &v in order.significance() {
                match m.0[v] {
                    0 => {}
                    1 => factors.push(format!("z{v}")),
                    e => factors.push(format!("z{v}^{e}")),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Parses the text form produced by [`MultiPoly::fmt_with`], e.g.
    /// `5*z0^2*z1 - 22/5*z0*z2 + 160`. Implicit products and repeated
    /// factors are accepted.
    pub fn parse(text: &str, nvars: usize) -> Result<MultiPoly, PolyError> {
        Parser { src: text.as_bytes(), pos: 0, nvars }.parse()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = TermOrder::lex((0..self.nvars).rev().collect()).expect("reverse permutation");
        f.write_str(&self.fmt_with(&order))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u64, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected integer"))
    }

    fn rational(&mut self) -> Result<Rational, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'/') {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).map_err(|_| self.err("bad utf-8"))?;
        parse_rational(s).map_err(|e| self.err(e.to_string()))
    }

    fn factor(&mut self, m: &mut Monomial, c: &mut Rational) -> Result<(), PolyError> {
        match self.peek() {
            Some(b'0'..=b'9') => {
                *c *= self.rational()?;
                Ok(())
            }
            Some(b'z') => {
                self.pos += 1;
                let v = self.number()? as usize;
                if v >= self.nvars {
                    return Err(self.err(format!("variable z{v} out of range")));
                }
                let mut e = 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.skip_ws();
                    e = self.number()? as u32;
                }
                m.0[v] += e;
                Ok(())
            }
            _ => Err(self.err("expected coefficient or variable")),
        }
    }

    fn parse(mut self) -> Result<MultiPoly, PolyError> {
        let mut out = MultiPoly::zero(self.nvars);
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            match self.peek() {
                None if !first => break,
                None => return Err(self.err("empty polynomial")),
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    sign = -sign;
                    self.pos += 1;
                }
                Some(_) if first => {}
                Some(_) => return Err(self.err("expected `+` or `-`")),
            }
            first = false;
            let mut m = Monomial::one(self.nvars);
            let mut c = sign;
            self.factor(&mut m, &mut c)?;
            loop {
                match self.peek() {
                    Some(b'*') => {
                        self.pos += 1;
                        self.factor(&mut m, &mut c)?;
                    }
                    Some(b'z') | Some(b'0'..=b'9') => self.factor(&mut m, &mut c)?,
                    _ => break,
                }
            }
            out.add_term(m, c);
        }
        Ok(out)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
