mod common;

use common::{load, matrix, oracle_value, stochastic_game};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use sg_alg_core::alg_solve::{solve_discounted, SolveOptions};
use sg_alg_core::arith::rational::{parse_decimal, ratio, Rational};
use sg_alg_core::game::{Mode, StateData, StochasticGame};
use sg_alg_core::limit_avg::{limit_polynomial, solve_limit, LimitError, LimitOptions};
use sg_alg_core::polysys::build_system;
use sg_alg_core::shapley::{residual, DiscountFactor};

fn repeated(a: &sg_alg_core::game::MatrixGame) -> StochasticGame {
    let one = vec![vec![vec![ratio(1, 1)]; a.cols()]; a.rows()];
    StochasticGame::new(vec![StateData { rewards: a.entries().to_vec(), transitions: one }]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_sound_on_small_games(g in stochastic_game(2, 2, 2), mode in prop_oneof![Just(Mode::Normalized), Just(Mode::Unnormalized)]) {
        let beta = ratio(1, 2);
        let opts = SolveOptions { mode, ..SolveOptions::default() };
        let rep = solve_discounted(&g, &beta, &opts).unwrap();
        let b = DiscountFactor::new(beta.clone()).unwrap();
        let v = rep.values();
        prop_assert!(residual(&g, &v, &b, mode).unwrap() <= parse_decimal("1e-8").unwrap());
        prop_assert_eq!(&rep.residual, &residual(&g, &v, &b, mode).unwrap());

        for st in &rep.states {
            let iv = &st.value.interval;
            match &iv.exact {
                Some(r) => prop_assert!(st.specialized.eval(r).is_zero()),
                None => {
                    let (lo, hi) = st.specialized.eval_interval(&iv.lo, &iv.hi);
                    prop_assert!(lo <= Rational::zero() && Rational::zero() <= hi);
                    prop_assert!(iv.width() <= opts.precision);
                }
            }
            // The certificate specializes to the reported univariate polynomial.
            let at_beta = st.certificate.substitute(0, &beta).unwrap().to_univariate(st.value.state).unwrap();
            prop_assert!(!at_beta.is_zero());
            prop_assert_eq!(at_beta.primitive(), st.specialized.primitive());
        }

        // Exact values satisfy the kernel system exactly.
        if rep.states.iter().all(|s| s.value.exact().is_some()) {
            let sys = build_system(&g, &rep.kappa, mode).unwrap();
            let mut point = vec![beta.clone()];
            point.extend(v.iter().cloned());
            prop_assert!(sys.polys.iter().all(|f| f.eval(&point).is_zero()));
        }
    }

    #[test]
    fn repeated_matrix_game_values(a in matrix(3)) {
        let g = repeated(&a);
        let val = oracle_value(&a);
        let rep = solve_discounted(&g, &ratio(3, 4), &SolveOptions { mode: Mode::Normalized, ..SolveOptions::default() }).unwrap();
        prop_assert_eq!(rep.values(), vec![val.clone()]);
        let lim = solve_limit(&g, &LimitOptions::default()).unwrap();
        prop_assert_eq!(lim.values(), vec![val]);
    }
}

#[test]
fn limit_of_reward_diagonal_game_is_consistent() {
    let rep = solve_limit(&load("reward_diagonal.game"), &LimitOptions::default()).unwrap();
    for st in &rep.states {
        assert!(st.consistent);
        let (lo, hi) = st.value.poly.eval_interval(&st.value.interval.lo, &st.value.interval.hi);
        assert!(lo <= Rational::zero() && Rational::zero() <= hi);
    }
    let v = rep.values();
    assert!((&v[0] - &v[1]).abs() < parse_decimal("1e-9").unwrap());
    let (_, lim) = limit_polynomial(&rep.states[0].certificate, 1).unwrap();
    assert_eq!(lim, rep.states[0].value.poly);
}

#[test]
fn limit_rejects_too_short_schedule() {
    let opts = LimitOptions { schedule: sg_alg_core::limit_avg::BetaSchedule { k0: 3, k_max: 3 }, ..LimitOptions::default() };
    assert!(matches!(solve_limit(&load("switching_controller.game"), &opts), Err(LimitError::NotStabilized { .. })));
}
