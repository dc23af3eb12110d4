//! Exact matrix-game solver and Shapley–Snow kernel extraction.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::linalg::{cofactor_matrix, det_and_cofactor_sum};
use crate::arith::rational::Rational;
use crate::game::MatrixGame;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixGameError {
    #[error("degenerate kernel: cofactor sum is zero")]
    DegenerateKernel,
    #[error("singular kernel matrix")]
    SingularKernel,
    #[error("value is zero — shift first")]
    ZeroValue,
    #[error("no kernel found")]
    NoKernel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixGameSolution {
    pub value: Rational,
    /// Maximizer (row player).
    pub x: Vec<Rational>,
    /// Minimizer (column player).
    pub y: Vec<Rational>,
}

/// Solves the game by exact simplex with Bland's rule.
///
/// Entries are shifted to be at least 1, so `B w <= 1, w >= 0` is bounded
/// and `max sum(w) = 1 / val(B)`. The column strategy comes from `w`, the row
/// strategy from the slack reduced costs.
pub fn solve_matrix_game(a: &MatrixGame) -> MatrixGameSolution {
    let (m, n) = (a.rows(), a.cols());
    let c = (Rational::one() - a.min_entry()).max(Rational::zero());
    let b = a.affine(&Rational::one(), &c);

    // Columns 0..n are w, n..n+m are slacks; the last column is the rhs.
    let width = n + m + 1;
    let mut tab: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = vec![Rational::zero(); width];
            row[..n].clone_from_slice(&b.entries()[i]);
            row[n + i] = Rational::one();
            row[width - 1] = Rational::one();
            row
        })
        .collect();
    let mut obj = vec![Rational::zero(); width];
    for x in obj.iter_mut().take(n) {
        *x = -Rational::one();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[width - 1] / &row[enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let (r, _) = leave.expect("bounded: all shifted entries are positive");
        let piv = tab[r][enter].clone();
        for x in tab[r].iter_mut() {
            *x /= &piv;
        }
        let pivot_row = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (x, p) in obj.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        basis[r] = enter;
    }

    let total = obj[width - 1].clone();
    let val_b = total.recip();
    let mut y = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            y[bv] = &tab[i][width - 1] * &val_b;
        }
    }
    let x = (0..m).map(|i| &obj[n + i] * &val_b).collect();
    MatrixGameSolution { value: val_b - c, x, y }
}

/// `det / sum of cofactors` of a square matrix.
pub fn kernel_value(sub: &[Vec<Rational>]) -> Result<Rational, MatrixGameError> {
    let (det, sum) = det_and_cofactor_sum(sub);
    if sum.is_zero() {
        return Err(MatrixGameError::DegenerateKernel);
    }
    Ok(det / sum)
}

/// Kernel strategies `x = v 1^T A^-1`, `y = v A^-1 1`, written through the
/// cofactor matrix so that `x_k` is row sum `k` and `y_l` column sum `l`,
/// both over the cofactor sum.
pub fn kernel_strategies(sub: &[Vec<Rational>]) -> Result<(Vec<Rational>, Vec<Rational>), MatrixGameError> {
    let (det, sum) = det_and_cofactor_sum(sub);
    if det.is_zero() {
        return Err(MatrixGameError::SingularKernel);
    }
    if sum.is_zero() {
        return Err(MatrixGameError::DegenerateKernel);
    }
    let cof = cofactor_matrix(sub);
    let k = sub.len();
    let x = (0..k).map(|i| cof[i].iter().sum::<Rational>() / &sum).collect();
    let y = (0..k).map(|j| cof.iter().map(|r| &r[j]).sum::<Rational>() / &sum).collect();
    Ok((x, y))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub sub: Vec<Vec<Rational>>,
    pub value: Rational,
    /// Kernel strategies on the kernel coordinates.
    pub x0: Vec<Rational>,
    pub y0: Vec<Rational>,
}

impl Kernel {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_completely_mixed(&self) -> bool {
        self.x0.iter().chain(&self.y0).all(|p| p.is_positive())
    }

    /// Kernel strategies padded with zeros to the full action sets.
    pub fn extended(&self, m: usize, n: usize) -> (Vec<Rational>, Vec<Rational>) {
        let mut x = vec![Rational::zero(); m];
        let mut y = vec![Rational::zero(); n];
        for (k, &i) in self.rows.iter().enumerate() {
            x[i] = self.x0[k].clone();
        }
        for (k, &j) in self.cols.iter().enumerate() {
            y[j] = self.y0[k].clone();
        }
        (x, y)
    }
}

/// A kernel whose strategies are strictly positive on its rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmvKernel(pub Kernel);

impl std::ops::Deref for CmvKernel {
    type Target = Kernel;
    fn deref(&self) -> &Kernel {
        &self.0
    }
}

/// True if `(x, y)` is an optimal pair for `a` with value `v`.
pub fn is_optimal_pair(a: &MatrixGame, x: &[Rational], y: &[Rational], v: &Rational) -> bool {
    a.column_payoffs(x).iter().all(|p| p >= v) && a.row_payoffs(y).iter().all(|p| p <= v)
}

fn check_kernel(a: &MatrixGame, rows: &[usize], cols: &[usize], value: &Rational, strict: bool) -> Option<Kernel> {
    if rows.len() != cols.len() || rows.is_empty() {
        return None;
    }
    let sub = a.submatrix(rows, cols);
    let (det, sum) = det_and_cofactor_sum(&sub);
    if det.is_zero() || sum.is_zero() || &(&det / &sum) != value {
        return None;
    }
    let (x0, y0) = kernel_strategies(&sub).ok()?;
    let admissible = |p: &Rational| if strict { p.is_positive() } else { !p.is_negative() };
    if !x0.iter().chain(&y0).all(admissible) {
        return None;
    }
    let kernel = Kernel { rows: rows.to_vec(), cols: cols.to_vec(), sub, value: value.clone(), x0, y0 };
    let (x, y) = kernel.extended(a.rows(), a.cols());
    is_optimal_pair(a, &x, &y, value).then_some(kernel)
}

/// Checks every kernel condition for the given supports against the game
/// value; returns the kernel when it is completely mixed and optimal.
pub fn check_cmv_kernel(a: &MatrixGame, rows: &[usize], cols: &[usize], value: &Rational) -> Option<CmvKernel> {
    check_kernel(a, rows, cols, value, true).map(CmvKernel)
}

/// First kernel in the order size, row set, column set that passes `check`.
fn search_kernels(a: &MatrixGame, check: impl Fn(&[usize], &[usize]) -> Option<Kernel> + Sync) -> Option<Kernel> {
    (1..=a.rows().min(a.cols())).find_map(|k| {
        let rows = subsets(a.rows(), k);
        let cols = subsets(a.cols(), k);
        rows.par_iter().flat_map_iter(|r| cols.iter().map(move |c| (r, c))).find_map_first(|(r, c)| check(r, c))
    })
}

/// Lexicographically ordered `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Finds a completely mixed Shapley–Snow kernel: first from the supports of
/// the LP solution, then by exhaustive search ordered by size, then row set,
/// then column set.
pub fn find_cmv_kernel(a: &MatrixGame) -> Result<CmvKernel, MatrixGameError> {
    let sol = solve_matrix_game(a);
    find_cmv_kernel_with(a, &sol)
}

pub fn find_cmv_kernel_with(a: &MatrixGame, sol: &MatrixGameSolution) -> Result<CmvKernel, MatrixGameError> {
    if sol.value.is_zero() {
        return Err(MatrixGameError::ZeroValue);
    }
    let supp = |p: &[Rational]| (0..p.len()).filter(|&i| !p[i].is_zero()).collect::<Vec<_>>();
    if let Some(k) = check_cmv_kernel(a, &supp(&sol.x), &supp(&sol.y), &sol.value) {
        return Ok(k);
    }
    search_kernels(a, |r, c| check_kernel(a, r, c, &sol.value, true)).map(CmvKernel).ok_or(MatrixGameError::NoKernel)
}

/// A completely mixed kernel when one exists, otherwise a Shapley–Snow kernel
/// whose strategies may vanish somewhere. Degenerate games, where an optimal
/// strategy is unique but its opponent's optimal set is not a point, can
/// have no completely mixed kernel at all.
pub fn find_kernel_with(a: &MatrixGame, sol: &MatrixGameSolution) -> Result<Kernel, MatrixGameError> {
    match find_cmv_kernel_with(a, sol) {
        Ok(k) => Ok(k.0),
        Err(MatrixGameError::NoKernel) => {
            search_kernels(a, |r, c| check_kernel(a, r, c, &sol.value, false)).ok_or(MatrixGameError::NoKernel)
        }
        Err(e) => Err(e),
    }
}

pub fn find_kernel(a: &MatrixGame) -> Result<Kernel, MatrixGameError> {
    find_kernel_with(a, &solve_matrix_game(a))
}
