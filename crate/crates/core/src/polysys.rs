//! Kernel selections and the coupled polynomial fixed-point system.
//!
//! Variables are `z0 = beta` and `z1..zN` for the state values. For each
//! state the selected kernel of the symbolic auxiliary game `M_s` yields
//! `f_s = z_s * (sum of cofactors of M_s) - det(M_s)`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::linalg::{cofactor_matrix, det_and_cofactor_sum};
use crate::arith::multipoly::MultiPoly;
use crate::arith::rational::Rational;
use crate::game::{MatrixGame, Mode, StochasticGame};
use crate::matrix_game::{find_kernel_with, subsets, MatrixGameError, MatrixGameSolution};
use crate::shapley::{aux_game, solve_aux_games, DiscountFactor, ValueEstimate};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKernel {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl StateKernel {
    pub fn size(&self) -> usize {
        self.rows.len()
    }
}

impl fmt::Display for StateKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "({{{}}},{{{}}})", set(&self.rows), set(&self.cols))
    }
}

/// Per-state row and column index sets (0-based) of equal size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KernelSelection(pub Vec<StateKernel>);

impl KernelSelection {
    pub fn states(&self) -> &[StateKernel] {
        &self.0
    }

    pub fn total_size(&self) -> usize {
        self.0.iter().map(StateKernel::size).sum()
    }

    pub fn validate(&self, g: &StochasticGame) -> Result<(), PolySysError> {
        if self.0.len() != g.num_states() {
            return Err(PolySysError::InvalidSelection(format!(
                "selection covers {} states, game has {}",
                self.0.len(),
                g.num_states()
            )));
        }
        for (s, k) in self.0.iter().enumerate() {
            let st = g.state(s);
            let ok = |v: &[usize], bound: usize| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&i| i < bound);
            if k.rows.is_empty() || k.rows.len() != k.cols.len() || !ok(&k.rows, st.rows()) || !ok(&k.cols, st.cols())
            {
                return Err(PolySysError::InvalidSelection(format!("state {}: invalid kernel {k}", s + 1)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for KernelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolySysError {
    #[error("{0}")]
    InvalidSelection(String),
    #[error("ambiguous kernel at this tolerance (states {states:?})")]
    Ambiguous { candidate: KernelSelection, states: Vec<usize> },
    #[error("state {state}: {source}")]
    Kernel { state: usize, source: MatrixGameError },
    #[error(transparent)]
    Shapley(#[from] crate::shapley::ShapleyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledSystem {
    pub polys: Vec<MultiPoly>,
    pub kappa: KernelSelection,
    pub mode: Mode,
}

impl CoupledSystem {
    pub fn nvars(&self) -> usize {
        self.polys.len() + 1
    }
}

pub fn symbolic_kernel_matrix(
    g: &StochasticGame,
    s: usize,
    kappa: &KernelSelection,
    mode: Mode,
) -> Result<Vec<Vec<MultiPoly>>, PolySysError> {
    kappa.validate(g)?;
    let n = g.num_states() + 1;
    let z0 = MultiPoly::var(n, 0);
    let weight = match mode {
        Mode::Normalized => &MultiPoly::one(n) - &z0,
        Mode::Unnormalized => MultiPoly::one(n),
    };
    let st = g.state(s);
    let k = &kappa.0[s];
    Ok(k.rows
        .iter()
        .map(|&a| {
            k.cols
                .iter()
                .map(|&b| {
                    let cont = MultiPoly::from_terms(
                        n,
                        st.transitions[a][b]
                            .iter()
                            .enumerate()
                            .map(|(t, p)| (crate::arith::Monomial::var(n, t + 1), p.clone())),
                    );
                    &weight.scale(&st.rewards[a][b]) + &(&z0 * &cont)
                })
                .collect()
        })
        .collect())
}

pub fn build_system(g: &StochasticGame, kappa: &KernelSelection, mode: Mode) -> Result<CoupledSystem, PolySysError> {
    kappa.validate(g)?;
    let n = g.num_states() + 1;
    let polys = (0..g.num_states())
        .into_par_iter()
        .map(|s| {
            let m = symbolic_kernel_matrix(g, s, kappa, mode)?;
            let (det, sum) = det_and_cofactor_sum(&m);
            Ok(&(&MultiPoly::var(n, s + 1) * &sum) - &det)
        })
        .collect::<Result<Vec<_>, PolySysError>>()?;
    Ok(CoupledSystem { polys, kappa: kappa.clone(), mode })
}

/// Distance below which an inactive row or column, or a kernel strategy
/// entry, is treated as possibly active in the exact game.
fn ambiguity_slack(est: &ValueEstimate) -> Rational {
    &est.beta * &est.error_bound * Rational::from_integer(4.into())
}

/// Infers a kernel selection from the completely mixed kernels of the
/// auxiliary games at the estimate.
///
/// The auxiliary entries at the estimate are within `beta * bound` of the
/// exact ones. If a row or column outside a kernel is that close to active,
/// or a kernel strategy entry that close to zero, the returned error carries
/// the candidate so the caller can tighten the estimate or proceed.
pub fn infer_kernel(g: &StochasticGame, beta: &DiscountFactor, est: &ValueEstimate) -> Result<KernelSelection, PolySysError> {
    let sols = solve_aux_games(g, &est.values, beta, est.mode)?;
    let slack = ambiguity_slack(est);
    let mut kernels = Vec::with_capacity(g.num_states());
    let mut ambiguous = Vec::new();
    for (s, sol) in sols.iter().enumerate() {
        let aux = aux_game(g, s, &est.values, beta, est.mode)?;
        let c = (Rational::one() - aux.min_entry()).max(Rational::zero());
        let shifted = aux.affine(&Rational::one(), &c);
        let shifted_sol = MatrixGameSolution { value: &sol.value + &c, x: sol.x.clone(), y: sol.y.clone() };
        let k = find_kernel_with(&shifted, &shifted_sol).map_err(|e| PolySysError::Kernel { state: s + 1, source: e })?;
        let (x, y) = k.extended(aux.rows(), aux.cols());
        let close_row = aux
            .row_payoffs(&y)
            .iter()
            .enumerate()
            .any(|(i, p)| !k.rows.contains(&i) && &sol.value - p <= slack);
        let close_col = aux
            .column_payoffs(&x)
            .iter()
            .enumerate()
            .any(|(j, p)| !k.cols.contains(&j) && p - &sol.value <= slack);
        let thin = k.x0.iter().chain(&k.y0).any(|p| *p <= slack);
        if close_row || close_col || thin {
            ambiguous.push(s + 1);
        }
        kernels.push(StateKernel { rows: k.rows.clone(), cols: k.cols.clone() });
    }
    let kappa = KernelSelection(kernels);
    if ambiguous.is_empty() {
        Ok(kappa)
    } else {
        Err(PolySysError::Ambiguous { candidate: kappa, states: ambiguous })
    }
}

/// Whether the kernel formulas on `k` are consistent, within `tol`, with the
/// value estimate `v` of the auxiliary game `aux`.
fn plausible(aux: &MatrixGame, k: &StateKernel, v: &Rational, tol: &Rational) -> bool {
    let sub = aux.submatrix(&k.rows, &k.cols);
    let (det, sum) = det_and_cofactor_sum(&sub);
    if sum.is_zero() || (&det / &sum - v).abs() > *tol {
        return false;
    }
    let cof = cofactor_matrix(&sub);
    let mut x = vec![Rational::zero(); aux.rows()];
    let mut y = vec![Rational::zero(); aux.cols()];
    for (i, &r) in k.rows.iter().enumerate() {
        x[r] = cof[i].iter().sum::<Rational>() / &sum;
    }
    for (j, &c) in k.cols.iter().enumerate() {
        y[c] = cof.iter().map(|row| &row[j]).sum::<Rational>() / &sum;
    }
    let neg_tol = -tol.clone();
    x.iter().chain(&y).all(|p| p >= &neg_tol)
        && aux.row_payoffs(&y).iter().all(|p| p <= &(v + tol))
        && aux.column_payoffs(&x).iter().all(|p| p >= &(v - tol))
}

/// All kernel selections whose kernel formulas are consistent with the
/// estimate to within `tol`, ordered by total size, then lexicographically.
pub fn plausible_selections(
    g: &StochasticGame,
    beta: &DiscountFactor,
    est: &ValueEstimate,
    tol: &Rational,
) -> Result<Vec<KernelSelection>, PolySysError> {
    let per_state = (0..g.num_states())
        .into_par_iter()
        .map(|s| {
            let aux = aux_game(g, s, &est.values, beta, est.mode)?;
            let mut out = Vec::new();
            for k in 1..=aux.rows().min(aux.cols()) {
                for rows in subsets(aux.rows(), k) {
                    for cols in subsets(aux.cols(), k) {
                        let cand = StateKernel { rows: rows.clone(), cols };
                        if plausible(&aux, &cand, &est.values[s], tol) {
                            out.push(cand);
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, PolySysError>>()?;
    let mut all: Vec<Vec<StateKernel>> = vec![Vec::new()];
    for options in &per_state {
        all = all
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k.clone());
                    v
                })
            })
            .collect();
    }
    let mut sels: Vec<KernelSelection> = all.into_iter().map(KernelSelection).collect();
    sels.sort_by(|a, b| a.total_size().cmp(&b.total_size()).then_with(|| a.0.cmp(&b.0)));
    Ok(sels)
}
