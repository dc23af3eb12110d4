//! Determinants and cofactors over exact rings.
//!
//! Small matrices (k <= 4) use Laplace expansion with memoized minors, so the
//! determinant and all cofactors share sub-minors. Larger ones use
//! fraction-free Bareiss elimination.

use std::collections::HashMap;

use num_traits::{One, Zero};

use super::multipoly::MultiPoly;
use super::rational::Rational;

/// Commutative ring with exact division, as needed by Bareiss elimination.
pub trait ExactRing: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `self / d` where `d` is known to divide `self`.
    fn div_exact(&self, d: &Self) -> Self;
}

impl ExactRing for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
}

impl ExactRing for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.nvars())
    }
    fn one_like(&self) -> Self {
        MultiPoly::one(self.nvars())
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_exact(&self, d: &Self) -> Self {
        MultiPoly::div_exact(self, d).expect("Bareiss division is exact")
    }
}

const LAPLACE_MAX: usize = 4;

fn check_square<R>(m: &[Vec<R>]) -> usize {
    let k = m.len();
    assert!(k > 0, "empty matrix");
    assert!(m.iter().all(|r| r.len() == k), "matrix is not square");
    k
}

struct Minors<'a, R> {
    m: &'a [Vec<R>],
    memo: HashMap<(u32, u32), R>,
}

impl<R: ExactRing> Minors<'_, R> {
    /// Determinant of the submatrix on the given row and column masks
    /// (equal popcount), expanded along its first row.
    fn det(&mut self, rows: u32, cols: u32) -> R {
        if rows == 0 {
            return self.m[0][0].one_like();
        }
        if let Some(v) = self.memo.get(&(rows, cols)) {
            return v.clone();
        }
        let r = rows.trailing_zeros() as usize;
        let rest = rows & (rows - 1);
        let mut acc = self.m[0][0].zero_like();
        let mut sign_pos = true;
        for c in 0..32 {
            if cols & (1 << c) == 0 {
                continue;
            }
            let a = &self.m[r][c];
            if !a.is_zero_elem() {
                let term = a.mul(&self.det(rest, cols & !(1 << c)));
                acc = if sign_pos { acc.add(&term) } else { acc.sub(&term) };
            }
            sign_pos = !sign_pos;
        }
        self.memo.insert((rows, cols), acc.clone());
        acc
    }
}

fn bareiss_det<R: ExactRing>(m: &[Vec<R>]) -> R {
    let k = m.len();
    let mut a: Vec<Vec<R>> = m.to_vec();
    let mut prev = a[0][0].one_like();
    let mut negate = false;
    for i in 0..k {
        if a[i][i].is_zero_elem() {
            match (i + 1..k).find(|&r| !a[r][i].is_zero_elem()) {
                Some(r) => {
                    a.swap(i, r);
                    negate = !negate;
                }
                None => return a[0][0].zero_like(),
            }
        }
        for r in i + 1..k {
            for c in i + 1..k {
                let v = a[r][c].mul(&a[i][i]).sub(&a[r][i].mul(&a[i][c]));
                a[r][c] = v.div_exact(&prev);
            }
        }
        prev = a[i][i].clone();
    }
    let d = a[k - 1][k - 1].clone();
    if negate {
        d.neg()
    } else {
        d
    }
}

fn submatrix<R: Clone>(m: &[Vec<R>], skip_row: usize, skip_col: usize) -> Vec<Vec<R>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != skip_col).map(|(_, x)| x.clone()).collect())
        .collect()
}

pub fn determinant<R: ExactRing>(m: &[Vec<R>]) -> R {
    let k = check_square(m);
    if k <= LAPLACE_MAX {
        let full = (1u32 << k) - 1;
        Minors { m, memo: HashMap::new() }.det(full, full)
    } else {
        bareiss_det(m)
    }
}

/// Cofactor matrix `C[i][j] = (-1)^(i+j) det(M without row i, col j)`.
pub fn cofactor_matrix<R: ExactRing>(m: &[Vec<R>]) -> Vec<Vec<R>> {
    let k = check_square(m);
    if k == 1 {
        return vec![vec![m[0][0].one_like()]];
    }
    let sign = |i: usize, j: usize, v: R| if (i + j) % 2 == 0 { v } else { v.neg() };
    if k <= LAPLACE_MAX {
        let full = (1u32 << k) - 1;
        let mut minors = Minors { m, memo: HashMap::new() };
        (0..k)
            .map(|i| (0..k).map(|j| sign(i, j, minors.det(full & !(1 << i), full & !(1 << j)))).collect())
            .collect()
    } else {
        (0..k)
            .map(|i| (0..k).map(|j| sign(i, j, determinant(&submatrix(m, i, j)))).collect())
            .collect()
    }
}

/// Determinant together with the sum of all cofactors.
pub fn det_and_cofactor_sum<R: ExactRing>(m: &[Vec<R>]) -> (R, R) {
    let k = check_square(m);
    if k <= LAPLACE_MAX {
        let full = (1u32 << k) - 1;
        let mut minors = Minors { m, memo: HashMap::new() };
        let det = minors.det(full, full);
        let mut sum = m[0][0].zero_like();
        if k == 1 {
            return (det, m[0][0].one_like());
        }
        for i in 0..k {
            for j in 0..k {
                let v = minors.det(full & !(1 << i), full & !(1 << j));
                sum = if (i + j) % 2 == 0 { sum.add(&v) } else { sum.sub(&v) };
            }
        }
        (det, sum)
    } else {
        // det(M + J) = det(M) + sum of cofactors
        let det = bareiss_det(m);
        let one = m[0][0].one_like();
        let shifted: Vec<Vec<R>> = m.iter().map(|r| r.iter().map(|x| x.add(&one)).collect()).collect();
        let sum = bareiss_det(&shifted).sub(&det);
        (det, sum)
    }
}

/// Exact inverse by Gauss-Jordan; `None` if singular.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let k = check_square(m);
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * k {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// Solves `A x = b` exactly; `None` if `A` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let k = check_square(a);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, piv);
        for r in col + 1..k {
            if aug[r][col].is_zero() {
                continue;
            }
            let f = &aug[r][col] / &aug[col][col];
            for c in col..=k {
                let v = &f * &aug[col][c];
                aug[r][c] -= v;
            }
        }
    }
    let mut x = vec![Rational::zero(); k];
    for i in (0..k).rev() {
        let mut s = aug[i][k].clone();
        for j in i + 1..k {
            s -= &aug[i][j] * &x[j];
        }
        x[i] = s / &aug[i][i];
    }
    Some(x)
}
