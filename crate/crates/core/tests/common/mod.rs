#![allow(dead_code)]

use std::path::PathBuf;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use sg_alg_core::arith::multipoly::MultiPoly;
use sg_alg_core::arith::rational::{int, ratio, Rational};
use sg_alg_core::game::{parse_game, MatrixGame, StateData, StochasticGame};

pub mod oracle;
pub mod reference;

#[allow(unused_imports)]
pub use oracle::oracle_value;

pub fn games_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games")
}

pub fn load(name: &str) -> StochasticGame {
    let text = std::fs::read_to_string(games_dir().join(name)).expect("bundled game file");
    parse_game(&text).expect("bundled game parses")
}

pub fn poly(text: &str, nvars: usize) -> MultiPoly {
    MultiPoly::parse(text, nvars).expect("valid polynomial text")
}

/// `Some(c)` with `a = c * b`, `c != 0`.
pub fn proportional(a: &MultiPoly, b: &MultiPoly) -> Option<Rational> {
    a.proportionality(b).filter(|c| !c.is_zero())
}

pub fn close(a: &Rational, b: f64, tol: f64) -> bool {
    (sg_alg_core::arith::rational::to_f64(a) - b).abs() <= tol
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

pub fn matrix(max: usize) -> impl Strategy<Value = MatrixGame> {
    (1..=max, 1..=max).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(small_rational(), n), m)
            .prop_map(|rows| MatrixGame::new(rows).expect("nonempty"))
    })
}

/// A probability vector over `n` targets with denominators dividing 12.
pub fn distribution(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0i64..=6, n).prop_map(move |w| {
        let total: i64 = w.iter().sum();
        if total == 0 {
            let mut p = vec![Rational::zero(); n];
            p[0] = Rational::one();
            p
        } else {
            w.iter().map(|&x| ratio(x, total)).collect()
        }
    })
}

pub fn stochastic_game(states: usize, rows: usize, cols: usize) -> impl Strategy<Value = StochasticGame> {
    let state = (
        prop::collection::vec(prop::collection::vec(small_rational(), cols), rows),
        prop::collection::vec(prop::collection::vec(distribution(states), cols), rows),
    )
        .prop_map(|(rewards, transitions)| StateData { rewards, transitions });
    prop::collection::vec(state, states).prop_map(|s| StochasticGame::new(s).expect("valid by construction"))
}

pub fn discount() -> impl Strategy<Value = Rational> {
    (1i64..=19).prop_map(|n| ratio(n, 20))
}

pub fn vector(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-40i64..=40, 1i64..=8).prop_map(|(a, b)| ratio(a, b)), n)
}

pub fn sup(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(int(0), |m, d| if d > m { d } else { m })
}
