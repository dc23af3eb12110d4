//! Buchberger's algorithm for lexicographic orders and extraction of the
//! bivariate eliminants.
//!
//! Internally polynomials are monic with exponent vectors permuted so that
//! the term order is plain lexicographic comparison, and coefficients use
//! malachite rationals, whose subquadratic gcd matters once coefficients
//! reach thousands of bits. Pairs are chosen by the normal strategy (smallest
//! lcm in the term order) and pruned with the Gebauer–Möller form of
//! Buchberger's coprime and chain criteria.

use std::collections::BTreeMap;

use malachite_base::num::arithmetic::traits::Sign;
use malachite_base::num::basic::traits::{One as _, Zero as _};
use malachite_nz::natural::Natural;
use malachite_q::Rational as Coeff;
use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::One;
use thiserror::Error;

use crate::arith::multipoly::{Monomial, MultiPoly, TermOrder};
use crate::arith::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("no nonzero generators")]
    NoGenerators,
    #[error("inconsistent system: the ideal contains 1")]
    Inconsistent,
    #[error("generator has {found} variables, order has {expected}")]
    VarCountMismatch { expected: usize, found: usize },
    #[error("state {state}: no bivariate element in the basis")]
    NoBivariate { state: usize },
}

type Exps = Vec<u32>;

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn sub_exps(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add_exps(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn big_to_natural(n: &BigUint) -> Natural {
    Natural::from_limbs_asc(&n.to_u64_digits())
}

fn natural_to_big(n: &Natural) -> BigUint {
    let digits: Vec<u32> = n.to_limbs_asc().iter().flat_map(|&l| [l as u32, (l >> 32) as u32]).collect();
    BigUint::new(digits)
}

fn to_coeff(r: &Rational) -> Coeff {
    let sign = r.numer().sign() != BigSign::Minus;
    Coeff::from_sign_and_naturals(sign, big_to_natural(r.numer().magnitude()), big_to_natural(r.denom().magnitude()))
}

fn from_coeff(c: &Coeff) -> Rational {
    let num = BigInt::from_biguint(
        if c.sign() == std::cmp::Ordering::Less { BigSign::Minus } else { BigSign::Plus },
        natural_to_big(c.numerator_ref()),
    );
    Rational::new(num, BigInt::from_biguint(BigSign::Plus, natural_to_big(c.denominator_ref())))
}

/// Monic polynomial, terms ascending; the leading term is the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
struct QPoly {
    terms: Vec<(Exps, Coeff)>,
}

impl QPoly {
    fn from_multipoly(p: &MultiPoly, order: &TermOrder) -> QPoly {
        let map: BTreeMap<Exps, Coeff> =
            p.terms().map(|(m, c)| (order.permute(m).exponents().to_vec(), to_coeff(c))).collect();
        QPoly::monic_from(map)
    }

    fn monic_from(map: BTreeMap<Exps, Coeff>) -> QPoly {
        let mut terms: Vec<(Exps, Coeff)> = map.into_iter().collect();
        if let Some((_, lc)) = terms.last() {
            if *lc != Coeff::ONE {
                let inv = Coeff::ONE / lc;
                for t in &mut terms {
                    t.1 *= &inv;
                }
            }
        }
        QPoly { terms }
    }

    fn to_multipoly(&self, order: &TermOrder) -> MultiPoly {
        MultiPoly::from_terms(
            order.nvars(),
            self.terms
                .iter()
                .map(|(e, c)| (order.unpermute(&Monomial::from_exponents(e.clone())), from_coeff(c))),
        )
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lm(&self) -> &Exps {
        &self.terms.last().expect("nonzero").0
    }

    fn tail(&self) -> &[(Exps, Coeff)] {
        &self.terms[..self.terms.len() - 1]
    }

    fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.lm().iter().all(|&e| e == 0)
    }
}

/// Adds `c * x^shift * terms` into `work`, dropping cancelled entries.
fn add_scaled(work: &mut BTreeMap<Exps, Coeff>, c: &Coeff, terms: &[(Exps, Coeff)], shift: &[u32]) {
    for (e, t) in terms {
        let key = add_exps(e, shift);
        let term = c * t;
        match work.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(term);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += term;
                if *o.get() == Coeff::ZERO {
                    o.remove();
                }
            }
        }
    }
}

/// Full reduction of `work` by monic divisors tried in list order.
fn normal_form(mut work: BTreeMap<Exps, Coeff>, basis: &[&QPoly]) -> BTreeMap<Exps, Coeff> {
    let mut rem = BTreeMap::new();
    while let Some((m, c)) = work.pop_last() {
        match basis.iter().find(|d| divides(d.lm(), &m)) {
            Some(d) => add_scaled(&mut work, &-c, d.tail(), &sub_exps(&m, d.lm())),
            None => {
                rem.insert(m, c);
            }
        }
    }
    rem
}

fn reduce_q(p: &QPoly, basis: &[&QPoly]) -> QPoly {
    QPoly::monic_from(normal_form(p.terms.iter().cloned().collect(), basis))
}

fn s_poly_q(f: &QPoly, g: &QPoly) -> BTreeMap<Exps, Coeff> {
    let l = lcm(f.lm(), g.lm());
    let mut out = BTreeMap::new();
    add_scaled(&mut out, &Coeff::ONE, f.tail(), &sub_exps(&l, f.lm()));
    add_scaled(&mut out, &-Coeff::ONE, g.tail(), &sub_exps(&l, g.lm()));
    out
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Exps,
}

struct Engine {
    polys: Vec<QPoly>,
    active: Vec<usize>,
    pairs: Vec<Pair>,
}

impl Engine {
    /// Divisors by ascending leading monomial: the lower elements are the
    /// sparser eliminants, and trying them first keeps reductions short.
    fn active_refs(&self) -> Vec<&QPoly> {
        let mut refs: Vec<&QPoly> = self.active.iter().map(|&i| &self.polys[i]).collect();
        refs.sort_by(|a, b| a.lm().cmp(b.lm()));
        refs
    }

    /// Gebauer–Möller update for a new element `h`.
    fn insert(&mut self, h: QPoly) {
        let hl = h.lm().clone();
        let hidx = self.polys.len();
        self.polys.push(h);

        let mut cands: Vec<(usize, Exps)> =
            self.active.iter().map(|&g| (g, lcm(&hl, self.polys[g].lm()))).collect();
        let mut kept: Vec<(usize, Exps)> = Vec::new();
        while !cands.is_empty() {
            let (g1, l1) = cands.remove(0);
            let disjoint = coprime(&hl, self.polys[g1].lm());
            let dominated = cands.iter().chain(kept.iter()).any(|(_, l2)| divides(l2, &l1));
            if disjoint || !dominated {
                kept.push((g1, l1));
            }
        }
        kept.retain(|(g, _)| !coprime(&hl, self.polys[*g].lm()));

        let polys = &self.polys;
        self.pairs.retain(|p| {
            !(divides(&hl, &p.lcm)
                && lcm(polys[p.i].lm(), &hl) != p.lcm
                && lcm(&hl, polys[p.j].lm()) != p.lcm)
        });
        self.pairs.extend(kept.into_iter().map(|(g, l)| Pair { i: g, j: hidx, lcm: l }));
        self.active.retain(|&g| !divides(&hl, polys[g].lm()));
        self.active.push(hidx);
    }

    fn next_pair(&mut self) -> Option<Pair> {
        let best = (0..self.pairs.len()).min_by(|&a, &b| {
            let (p, q) = (&self.pairs[a], &self.pairs[b]);
            p.lcm.cmp(&q.lcm).then_with(|| (p.i, p.j).cmp(&(q.i, q.j)))
        })?;
        Some(self.pairs.swap_remove(best))
    }

    fn add(&mut self, work: BTreeMap<Exps, Coeff>) -> Result<(), GroebnerError> {
        let h = QPoly::monic_from(normal_form(work, &self.active_refs()));
        if h.is_zero() {
            return Ok(());
        }
        if h.is_constant() {
            return Err(GroebnerError::Inconsistent);
        }
        self.insert(h);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerBasis {
    /// Reduced, monic, sorted by descending leading monomial.
    pub generators: Vec<MultiPoly>,
    pub order: TermOrder,
}

impl GroebnerBasis {
    pub fn reduce(&self, p: &MultiPoly) -> MultiPoly {
        reduce(p, &self.generators, &self.order)
    }

    pub fn contains(&self, p: &MultiPoly) -> bool {
        self.reduce(p).is_zero()
    }

    /// Buchberger's criterion checked over every pair.
    pub fn s_pairs_reduce_to_zero(&self) -> bool {
        let q: Vec<QPoly> = self.generators.iter().map(|g| QPoly::from_multipoly(g, &self.order)).collect();
        let refs: Vec<&QPoly> = q.iter().collect();
        (0..q.len()).all(|i| (i + 1..q.len()).all(|j| normal_form(s_poly_q(&q[i], &q[j]), &refs).is_empty()))
    }

    pub fn is_reduced(&self) -> bool {
        self.generators.iter().enumerate().all(|(i, g)| {
            let lc_one = g.leading_term(&self.order).is_some_and(|(_, c)| c.is_one());
            let others: Vec<&MultiPoly> =
                self.generators.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, h)| h).collect();
            lc_one
                && g.terms().all(|(m, _)| {
                    others.iter().all(|h| !h.leading_term(&self.order).expect("nonzero").0.divides(m))
                })
        })
    }
}

/// Computes the reduced monic Gröbner basis of the ideal spanned by `gens`.
pub fn buchberger(gens: &[MultiPoly], order: &TermOrder) -> Result<GroebnerBasis, GroebnerError> {
    if let Some(bad) = gens.iter().find(|g| g.nvars() != order.nvars()) {
        return Err(GroebnerError::VarCountMismatch { expected: order.nvars(), found: bad.nvars() });
    }
    let mut inputs: Vec<QPoly> =
        gens.iter().filter(|g| !g.is_zero()).map(|g| QPoly::from_multipoly(g, order)).collect();
    if inputs.is_empty() {
        return Err(GroebnerError::NoGenerators);
    }
    inputs.sort_by(|a, b| a.lm().cmp(b.lm()).then_with(|| a.terms.len().cmp(&b.terms.len())));
    let mut engine = Engine { polys: Vec::new(), active: Vec::new(), pairs: Vec::new() };
    for p in inputs {
        engine.add(p.terms.into_iter().collect())?;
    }
    while let Some(pair) = engine.next_pair() {
        let s = s_poly_q(&engine.polys[pair.i], &engine.polys[pair.j]);
        if !s.is_empty() {
            engine.add(s)?;
        }
    }

    let minimal: Vec<&QPoly> = engine.active.iter().map(|&i| &engine.polys[i]).collect();
    let mut reduced: Vec<QPoly> = (0..minimal.len())
        .map(|i| {
            let others: Vec<&QPoly> = minimal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p).collect();
            reduce_q(minimal[i], &others)
        })
        .collect();
    reduced.sort_by(|a, b| b.lm().cmp(a.lm()));
    let generators = reduced.iter().map(|p| p.to_multipoly(order)).collect();
    Ok(GroebnerBasis { generators, order: order.clone() })
}

/// Exact normal form over the rationals: no term of the result is divisible
/// by a leading monomial of `basis`. Divisors are tried in list order.
pub fn reduce(p: &MultiPoly, basis: &[MultiPoly], order: &TermOrder) -> MultiPoly {
    let divisors: Vec<QPoly> =
        basis.iter().filter(|b| !b.is_zero()).map(|b| QPoly::from_multipoly(b, order)).collect();
    let refs: Vec<&QPoly> = divisors.iter().collect();
    let work = p.terms().map(|(m, c)| (order.permute(m).exponents().to_vec(), to_coeff(c))).collect();
    let rem = normal_form(work, &refs);
    QPoly { terms: rem.into_iter().collect() }.to_multipoly(order)
}

/// `S(f, g) = (L / lt f) f - (L / lt g) g` with `L` the lcm of leading monomials.
pub fn s_polynomial(f: &MultiPoly, g: &MultiPoly, order: &TermOrder) -> MultiPoly {
    let (fm, fc) = f.leading_term(order).expect("nonzero");
    let (gm, gc) = g.leading_term(order).expect("nonzero");
    let l = fm.lcm(gm);
    let a = f.mul_monomial(&l.div(fm).expect("lcm"), &fc.recip());
    let b = g.mul_monomial(&l.div(gm).expect("lcm"), &gc.recip());
    &a - &b
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariateCertificate {
    /// 1-based state index.
    pub state: usize,
    pub poly: MultiPoly,
    pub order: TermOrder,
}

/// Basis elements in `Q[z0, zs]` that involve `zs`, by ascending leading
/// monomial.
pub fn bivariate_candidates(basis: &GroebnerBasis, s: usize) -> Vec<&MultiPoly> {
    let mut out: Vec<&MultiPoly> = basis
        .generators
        .iter()
        .filter(|g| g.involves(s) && g.variables().iter().all(|&v| v == 0 || v == s))
        .collect();
    out.sort_by(|a, b| {
        let la = a.leading_term(&basis.order).expect("nonzero").0;
        let lb = b.leading_term(&basis.order).expect("nonzero").0;
        basis.order.cmp(la, lb)
    });
    out
}

pub fn extract_bivariate(basis: &GroebnerBasis, s: usize) -> Result<BivariateCertificate, GroebnerError> {
    let g = bivariate_candidates(basis, s).first().copied().ok_or(GroebnerError::NoBivariate { state: s })?;
    Ok(BivariateCertificate { state: s, poly: g.clone(), order: basis.order.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> MultiPoly {
        MultiPoly::parse(s, n).unwrap()
    }

    /// `x = z1`, `y = z0`, so `y < x` in the natural order.
    fn circle_order() -> TermOrder {
        TermOrder::lex(vec![1, 0]).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let ord = circle_order();
        let r = reduce(&p("z1^2 + z0^2 - 1", 2), &[p("z1 - z0", 2)], &ord);
        assert_eq!(r, p("2*z0^2 - 1", 2));
        assert!(reduce(&p("z0", 2), &[p("z0", 2)], &ord).is_zero());
        assert_eq!(reduce(&p("7/3", 2), &[p("z1 - z0", 2)], &ord), p("7/3", 2));
    }

    #[test]
    fn circle_and_line() {
        let ord = circle_order();
        let gb = buchberger(&[p("z1^2 + z0^2 - 1", 2), p("z1 - z0", 2)], &ord).unwrap();
        assert_eq!(gb.generators, vec![p("z1 - z0", 2), p("z0^2 - 1/2", 2)]);
        assert!(gb.is_reduced());
        assert!(gb.s_pairs_reduce_to_zero());
    }

    #[test]
    fn single_generator_is_made_monic() {
        let ord = TermOrder::natural(2);
        let gb = buchberger(&[p("3*z0*z1 - 6", 2)], &ord).unwrap();
        assert_eq!(gb.generators, vec![p("z0*z1 - 2", 2)]);
    }

    #[test]
    fn inconsistent_and_empty() {
        let ord = TermOrder::natural(2);
        assert_eq!(buchberger(&[p("z0 - 1", 2), p("z0 - 2", 2)], &ord), Err(GroebnerError::Inconsistent));
        assert_eq!(buchberger(&[MultiPoly::zero(2)], &ord), Err(GroebnerError::NoGenerators));
        assert!(matches!(buchberger(&[p("z0", 3)], &ord), Err(GroebnerError::VarCountMismatch { .. })));
    }

    #[test]
    fn one_state_system_is_its_own_certificate() {
        let f = p("z1 - z0*z1 - 5", 2);
        let ord = TermOrder::for_state(2, 1);
        let gb = buchberger(std::slice::from_ref(&f), &ord).unwrap();
        let cert = extract_bivariate(&gb, 1).unwrap();
        assert!(cert.poly.proportionality(&f).is_some());
    }

    #[test]
    fn no_bivariate_element() {
        let ord = TermOrder::for_state(3, 1);
        let gb = buchberger(&[p("z1*z2 - 1", 3)], &ord).unwrap();
        assert_eq!(extract_bivariate(&gb, 1), Err(GroebnerError::NoBivariate { state: 1 }));
        assert_eq!(s_polynomial(&p("z1", 3), &p("z1 + 1", 3), &ord), p("-1", 3));
    }
}
