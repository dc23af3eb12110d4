//! Dense univariate polynomials over the rationals, with the Sturm machinery
//! used for real root counting.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::multipoly::PolyError;
use super::rational::{fmt_rational, Rational};

/// Coefficients lowest degree first; the leading coefficient is nonzero
/// unless the polynomial is zero (empty vector).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Rational]) -> Self {
        roots.iter().fold(Self::constant(Rational::one()), |acc, r| {
            &acc * &Self::from_coeffs(vec![-r, Rational::one()])
        })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &Rational) -> i8 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> UniPoly {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let q = &rem[rem.len() - 1] / &lc;
            for (i, c) in d.coeffs.iter().enumerate() {
                rem[k + i] -= &q * c;
            }
            quot[k] = q;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    pub fn monic(&self) -> UniPoly {
        match self.leading_coeff() {
            Some(lc) => self.scale(&lc.recip()),
            None => self.clone(),
        }
    }

    /// Monic gcd (zero only when both inputs are zero).
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.primitive();
        }
        a.monic()
    }

    /// Integer coefficients with gcd 1 and positive leading coefficient.
    pub fn primitive(&self) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let den = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let g = self
            .coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(&(c.numer() * (&den / c.denom()))));
        let mut s = Rational::new(den, g);
        if self.leading_coeff().is_some_and(Signed::is_negative) {
            s = -s;
        }
        self.scale(&s)
    }

    /// `p / gcd(p, p')`, made primitive.
    pub fn squarefree_part(&self) -> Result<UniPoly, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if self.degree() == Some(0) {
            return Ok(Self::constant(Rational::one()));
        }
        let g = self.gcd(&self.derivative());
        Ok(self.div_rem(&g).0.primitive())
    }

    /// Sturm chain `p0 = p, p1 = p', p(k+1) = -rem(p(k-1), pk)`.
    pub fn sturm_sequence(&self) -> Result<Vec<UniPoly>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut chain = vec![self.clone()];
        let d = self.derivative();
        if d.is_zero() {
            return Ok(chain);
        }
        chain.push(d);
        loop {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).1;
            if r.is_zero() {
                break;
            }
            chain.push(-&r);
        }
        Ok(chain)
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn cauchy_bound(&self) -> Rational {
        let lc = self.leading_coeff().expect("cauchy bound of zero polynomial").abs();
        let n = self.coeffs.len() - 1;
        let m = self.coeffs[..n].iter().map(|c| c.abs() / &lc).max().unwrap_or_else(Rational::zero);
        m + Rational::one()
    }

    /// Enclosure of `{p(x) : lo <= x <= hi}` by interval Horner evaluation.
    pub fn eval_interval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let mut acc = (Rational::zero(), Rational::zero());
        for c in self.coeffs.iter().rev() {
            let products = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
            let min = products.iter().min().unwrap().clone();
            let max = products.iter().max().unwrap().clone();
            acc = (min + c, max + c);
        }
        acc
    }

    pub fn fmt_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev().filter(|(_, c)| !c.is_zero()) {
            let neg = c.is_negative();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let mut parts = Vec::new();
            if !a.is_one() || k == 0 {
                parts.push(fmt_rational(&a));
            }
            match k {
                0 => {}
                1 => parts.push(var.to_string()),
                _ => parts.push(format!("{var}^{k}")),
            }
            out.push_str(&parts.join("*"));
        }
        out
    }
}

/// Number of sign changes in the chain evaluated at `x`, zeros skipped.
pub fn sign_variations(chain: &[UniPoly], x: &Rational) -> usize {
    let mut prev = 0i8;
    let mut count = 0;
    for p in chain {
        let s = p.sign_at(x);
        if s == 0 {
            continue;
        }
        if prev != 0 && s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// Distinct real roots in `(a, b]` for a square-free polynomial's chain.
pub fn count_roots(chain: &[UniPoly], a: &Rational, b: &Rational) -> usize {
    sign_variations(chain, a).saturating_sub(sign_variations(chain, b))
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        UniPoly::from_coeffs(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(out)
    }
}
