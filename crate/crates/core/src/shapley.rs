//! Auxiliary games, the Shapley operator and certified value iteration.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::linalg;
use crate::arith::rational::{round_to_grid, sup_dist, Rational};
use crate::game::{MatrixGame, Mode, StochasticGame};
use crate::matrix_game::{solve_matrix_game, MatrixGameSolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapleyError {
    #[error("discount factor must lie strictly between 0 and 1")]
    InvalidDiscount,
    #[error("vector has {found} entries, game has {expected} states")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("tolerance not reached after {iterations} iterations (bound {bound})")]
    ToleranceNotReached { iterations: usize, bound: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountFactor(Rational);

impl DiscountFactor {
    pub fn new(beta: Rational) -> Result<Self, ShapleyError> {
        if beta.is_positive() && beta < Rational::one() {
            Ok(DiscountFactor(beta))
        } else {
            Err(ShapleyError::InvalidDiscount)
        }
    }

    pub fn get(&self) -> &Rational {
        &self.0
    }
}

fn stage_weight(beta: &Rational, mode: Mode) -> Rational {
    match mode {
        Mode::Normalized => Rational::one() - beta,
        Mode::Unnormalized => Rational::one(),
    }
}

fn check_len(g: &StochasticGame, u: &[Rational]) -> Result<(), ShapleyError> {
    if u.len() != g.num_states() {
        return Err(ShapleyError::DimensionMismatch { expected: g.num_states(), found: u.len() });
    }
    Ok(())
}

/// Entry `(a,b)` is `w r(s,a,b) + beta sum_t p(t|s,a,b) u_t`, with `w = 1 - beta`
/// in normalized mode and `w = 1` otherwise.
pub fn aux_game(
    g: &StochasticGame,
    s: usize,
    u: &[Rational],
    beta: &DiscountFactor,
    mode: Mode,
) -> Result<MatrixGame, ShapleyError> {
    check_len(g, u)?;
    let b = beta.get();
    let w = stage_weight(b, mode);
    let st = g.state(s);
    let entries = st
        .rewards
        .iter()
        .zip(&st.transitions)
        .map(|(rrow, prow)| {
            rrow.iter()
                .zip(prow)
                .map(|(r, p)| {
                    let cont: Rational = p.iter().zip(u).map(|(pt, ut)| pt * ut).sum();
                    &w * r + b * cont
                })
                .collect()
        })
        .collect();
    Ok(MatrixGame::new(entries).expect("reward matrices are nonempty"))
}

/// Solves every auxiliary game at `u`, in parallel over states.
pub fn solve_aux_games(
    g: &StochasticGame,
    u: &[Rational],
    beta: &DiscountFactor,
    mode: Mode,
) -> Result<Vec<MatrixGameSolution>, ShapleyError> {
    check_len(g, u)?;
    (0..g.num_states())
        .into_par_iter()
        .map(|s| aux_game(g, s, u, beta, mode).map(|a| solve_matrix_game(&a)))
        .collect()
}

pub fn shapley_operator(
    g: &StochasticGame,
    u: &[Rational],
    beta: &DiscountFactor,
    mode: Mode,
) -> Result<Vec<Rational>, ShapleyError> {
    Ok(solve_aux_games(g, u, beta, mode)?.into_iter().map(|s| s.value).collect())
}

/// `||T u - u||_inf`.
pub fn residual(g: &StochasticGame, u: &[Rational], beta: &DiscountFactor, mode: Mode) -> Result<Rational, ShapleyError> {
    Ok(sup_dist(&shapley_operator(g, u, beta, mode)?, u))
}

/// Exact payoff vector of a stationary pair: solves `(I - beta P) w = c r`.
pub fn evaluate_stationary(
    g: &StochasticGame,
    x: &[Vec<Rational>],
    y: &[Vec<Rational>],
    beta: &DiscountFactor,
    mode: Mode,
) -> Vec<Rational> {
    let n = g.num_states();
    let b = beta.get();
    let w = stage_weight(b, mode);
    let mut mat = vec![vec![Rational::zero(); n]; n];
    let mut rhs = vec![Rational::zero(); n];
    for s in 0..n {
        let st = g.state(s);
        mat[s][s] = Rational::one();
        for (a, xa) in x[s].iter().enumerate().filter(|(_, p)| !p.is_zero()) {
            for (bb, yb) in y[s].iter().enumerate().filter(|(_, p)| !p.is_zero()) {
                let q = xa * yb;
                rhs[s] += &q * &st.rewards[a][bb] * &w;
                for (t, p) in st.transitions[a][bb].iter().enumerate() {
                    mat[s][t] -= &q * b * p;
                }
            }
        }
    }
    linalg::solve(&mat, &rhs).expect("I - beta P is nonsingular for beta < 1")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationOptions {
    /// Iterates are rounded to the grid `2^-grid_bits Z`.
    pub grid_bits: u32,
    pub max_iterations: usize,
    /// Interleave exact evaluation of the current greedy strategies.
    pub accelerate: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { grid_bits: 128, max_iterations: 20_000, accelerate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueEstimate {
    pub values: Vec<Rational>,
    /// `||T u - u||` at the last iterate `u`; `values` is `T u` on the grid.
    pub residual: Rational,
    /// Certified `||values - v(beta)||_inf <= error_bound`.
    pub error_bound: Rational,
    pub mode: Mode,
    pub beta: Rational,
    pub iterations: usize,
}

impl ValueEstimate {
    /// The same estimate expressed in the other mode.
    pub fn in_mode(&self, mode: Mode) -> ValueEstimate {
        if mode == self.mode {
            return self.clone();
        }
        let gap = Rational::one() - &self.beta;
        let f = match mode {
            Mode::Normalized => gap,
            Mode::Unnormalized => gap.recip(),
        };
        ValueEstimate {
            values: self.values.iter().map(|v| v * &f).collect(),
            residual: &self.residual * &f,
            error_bound: &self.error_bound * &f,
            mode,
            beta: self.beta.clone(),
            iterations: self.iterations,
        }
    }
}

/// Value iteration from `u = 0` until the certified bound is at most `tol`.
///
/// With `t = T u` and `r = ||t - u||`, contraction gives
/// `||t - v|| <= beta/(1-beta) r`. Rounding `t` to the grid adds at most one
/// grid unit `h`, and the reported bound `beta/(1-beta) r + 2h/(1-beta)` also
/// dominates `beta/(1-beta) ||T t' - t'||` for the rounded `t'`.
pub fn value_iteration(
    g: &StochasticGame,
    beta: &DiscountFactor,
    mode: Mode,
    tol: &Rational,
    opts: &IterationOptions,
) -> Result<ValueEstimate, ShapleyError> {
    if !tol.is_positive() {
        return Err(ShapleyError::InvalidTolerance);
    }
    let b = beta.get();
    let gap = Rational::one() - b;
    let unit = Rational::new(1.into(), crate::arith::rational::pow2(opts.grid_bits));
    let slack = &unit * Rational::from_integer(2.into()) / &gap;
    let factor = b / &gap;
    let round = |v: &[Rational]| v.iter().map(|x| round_to_grid(x, opts.grid_bits)).collect::<Vec<_>>();

    let mut u = vec![Rational::zero(); g.num_states()];
    let mut sols = solve_aux_games(g, &u, beta, mode)?;
    let mut bound = Rational::zero();
    for it in 1..=opts.max_iterations {
        let t: Vec<Rational> = sols.iter().map(|s| s.value.clone()).collect();
        let res = sup_dist(&t, &u);
        bound = &factor * &res + &slack;
        if &bound <= tol {
            return Ok(ValueEstimate {
                values: round(&t),
                residual: res,
                error_bound: bound,
                mode,
                beta: b.clone(),
                iterations: it,
            });
        }
        let plain = round(&t);
        if opts.accelerate {
            let xs: Vec<_> = sols.iter().map(|s| s.x.clone()).collect();
            let ys: Vec<_> = sols.iter().map(|s| s.y.clone()).collect();
            let jump = round(&evaluate_stationary(g, &xs, &ys, beta, mode));
            let jump_sols = solve_aux_games(g, &jump, beta, mode)?;
            let jump_res = jump_sols.iter().zip(&jump).map(|(s, w)| (&s.value - w).abs()).max().unwrap_or_default();
            if jump_res < b * &res {
                u = jump;
                sols = jump_sols;
                continue;
            }
        }
        sols = solve_aux_games(g, &plain, beta, mode)?;
        u = plain;
    }
    Err(ShapleyError::ToleranceNotReached {
        iterations: opts.max_iterations,
        bound: crate::arith::rational::to_decimal_string(&bound, 12),
    })
}
