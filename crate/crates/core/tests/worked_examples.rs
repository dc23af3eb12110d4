mod common;

use common::reference::*;
use common::{close, load, poly, proportional};
use sg_alg_core::alg_solve::{solve_discounted, SolveOptions, SolveReport};
use sg_alg_core::arith::multipoly::MultiPoly;
use sg_alg_core::arith::rational::{ratio, Rational};
use sg_alg_core::game::Mode;
use sg_alg_core::limit_avg::{solve_limit, stable_kernel, BetaSchedule, LimitOptions};
use sg_alg_core::polysys::{KernelSelection, StateKernel};
use sg_alg_core::shapley::IterationOptions;

fn solve(name: &str, beta: Rational, mode: Mode) -> SolveReport {
    let opts = SolveOptions { mode, ..SolveOptions::default() };
    solve_discounted(&load(name), &beta, &opts).expect("solve succeeds")
}

fn full(n: usize) -> StateKernel {
    StateKernel { rows: (0..n).collect(), cols: (0..n).collect() }
}

// Switching controller game.

#[test]
fn switching_system_and_certificates_match_print_at_small_discount() {
    let rep = solve("switching_controller.game", ratio(1, 10), Mode::Unnormalized);
    assert_eq!(rep.kappa, KernelSelection(vec![full(3), full(3)]));
    for (f, reference) in rep.system.polys.iter().zip([E1F1, E1F2]) {
        assert!(proportional(f, &poly(reference, 3)).is_some(), "{f}");
    }
    for (st, reference) in rep.states.iter().zip([E1G1, E1G2]) {
        assert!(proportional(&st.certificate, &poly(reference, 3)).is_some(), "{}", st.certificate);
    }
}

#[test]
fn switching_closed_forms_hold_while_both_kernels_are_full() {
    for beta in [ratio(1, 10), ratio(1, 5), ratio(20, 97)] {
        let rep = solve("switching_controller.game", beta.clone(), Mode::Normalized);
        let v1 = (ratio(160, 1) - ratio(88, 1) * &beta) / (ratio(5, 1) * (&beta + ratio(12, 1)));
        let v2 = ratio(72, 1) * &beta / (ratio(5, 1) * (&beta + ratio(12, 1)));
        assert_eq!(rep.values(), vec![v1, v2], "beta = {beta}");
        assert_eq!(rep.residual, ratio(0, 1));
    }
}

// Values on the later kernel regimes were derived independently from the
// exact optimality conditions of each auxiliary game.
#[test]
fn switching_values_after_support_changes() {
    let rep = solve("switching_controller.game", ratio(1, 2), Mode::Normalized);
    assert_eq!(rep.values(), vec![ratio(145, 71), ratio(45, 71)]);
    assert_eq!(rep.kappa.0[0], StateKernel { rows: vec![0, 2], cols: vec![0, 1] });
    assert_eq!(rep.kappa.0[1], full(3));

    let rep = solve("switching_controller.game", ratio(9, 10), Mode::Normalized);
    assert_eq!(rep.values(), vec![ratio(505, 319), ratio(405, 319)]);
    assert_eq!(rep.kappa.0[1], full(3));

    let beta = ratio(19, 20);
    let rep = solve("switching_controller.game", beta.clone(), Mode::Normalized);
    let den = ratio(120, 1) - ratio(41, 1) * &beta;
    let v1 = (ratio(300, 1) - ratio(187, 1) * &beta) / &den;
    let v2 = (ratio(73, 1) * &beta + ratio(40, 1)) / &den;
    assert_eq!(rep.values(), vec![v1, v2]);
    assert_eq!(rep.kappa.0[1], StateKernel { rows: vec![1, 2], cols: vec![1, 2] });

    let rep = solve("switching_controller.game", ratio(1, 2), Mode::Unnormalized);
    assert_eq!(rep.values(), vec![ratio(290, 71), ratio(90, 71)]);
}

#[test]
fn switching_kernel_stabilizes_from_second_schedule_point() {
    let g = load("switching_controller.game");
    let st = stable_kernel(&g, &BetaSchedule::default(), &IterationOptions::default()).unwrap();
    assert_eq!(st.agreement, 5);
    assert_ne!(st.points[0].kappa, st.kappa);
}

#[test]
fn switching_limit_average_is_exact() {
    let rep = solve_limit(&load("switching_controller.game"), &LimitOptions::default()).unwrap();
    assert_eq!(rep.values(), vec![ratio(113, 79), ratio(113, 79)]);
    assert!(rep.states.iter().all(|s| s.consistent && s.value.exact().is_some()));
}

// Reward-diagonal game.

#[test]
fn reward_diagonal_reproduces_printed_pipeline() {
    let rep = solve("reward_diagonal.game", ratio(1, 2), Mode::Unnormalized);
    assert_eq!(rep.kappa, KernelSelection(vec![full(3), full(3)]));
    for (f, reference) in rep.system.polys.iter().zip([E2F1, E2F2]) {
        assert!(proportional(f, &poly(reference, 3)).is_some(), "{f}");
    }
    for (s, (g, q)) in [(E2G1, E2Q1), (E2G2, E2Q2)].into_iter().enumerate() {
        let st = &rep.states[s];
        assert!(proportional(&st.certificate, &poly(g, 3)).is_some(), "state {}", s + 1);
        let spec = MultiPoly::from_univariate(3, s + 1, &st.specialized);
        assert!(proportional(&spec, &poly(q, 3)).is_some(), "state {}", s + 1);
    }

    let reference_roots = [[-1900.653702, 4.969443147, 71.41363761], [-643.7311436, 1.742768501, 28.64701004]];
    for (st, expected) in rep.states.iter().zip(reference_roots) {
        assert_eq!(st.roots.len(), 3);
        for (iv, r) in st.roots.iter().zip(expected) {
            assert!(close(&iv.midpoint(), r, 1e-5), "{} vs {r}", iv.midpoint());
        }
    }

    // Half of the selected roots. The reference second value, 0.67138250, is
    // not half of the reference root 1.742768501.
    let normalized = rep.values_in(Mode::Normalized);
    assert!(close(&normalized[0].midpoint(), 2.484721573, 1e-6));
    assert!(close(&normalized[1].midpoint(), 0.8713842505, 1e-6));
}
