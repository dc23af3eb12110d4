//! Exact algebraic solver for finite zero-sum stochastic games with rational
//! data.
//!
//! The discounted pipeline estimates the value vector by value iteration,
//! infers the Shapley–Snow kernels of the auxiliary matrix games, builds the
//! coupled polynomial fixed-point system, eliminates it with lexicographic
//! Gröbner bases down to one bivariate polynomial per state, and isolates the
//! value among the real roots. The limiting-average pipeline repeats this
//! along a discount schedule tending to one.

pub mod arith;
pub mod game;
pub mod matrix_game;
pub mod shapley;
pub mod polysys;
pub mod groebner;
pub mod alg_solve;
pub mod limit_avg;
