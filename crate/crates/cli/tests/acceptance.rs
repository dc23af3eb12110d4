//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;
#[path = "../../core/tests/common/reference.rs"]
#[allow(dead_code)]
mod reference;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use sg_alg_core::alg_solve::{solve_discounted, SolveOptions};
use sg_alg_core::arith::linalg::det_and_cofactor_sum;
use sg_alg_core::arith::multipoly::{Monomial, MultiPoly, TermOrder};
use sg_alg_core::arith::rational::{parse_decimal, parse_rational, ratio, to_f64, Rational};
use sg_alg_core::game::{parse_game, MatrixGame, Mode, StateData, StochasticGame};
use sg_alg_core::groebner::{buchberger, GroebnerError};
use sg_alg_core::matrix_game::{find_kernel, is_optimal_pair, solve_matrix_game};
use sg_alg_core::polysys::build_system;
use sg_alg_core::shapley::{residual, shapley_operator, DiscountFactor};

type Outcome = Result<String, String>;

fn game_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name).display().to_string()
}

fn cli(args: &[&str]) -> Result<Value, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_sg-alg")).args(args).arg("--json").output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr).trim()));
    }
    serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())
}

fn text(v: &Value) -> &str {
    v.as_str().unwrap_or("")
}

fn poly(s: &str) -> MultiPoly {
    MultiPoly::parse(s, 3).expect("polynomial text")
}

fn proportional(a: &MultiPoly, b: &MultiPoly) -> bool {
    a.proportionality(b).is_some_and(|c| !c.is_zero())
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs()));
    }
    Ok(())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_rational(r: &mut ChaCha8Rng) -> Rational {
    ratio(r.gen_range(-9..=9), r.gen_range(1..=4))
}

fn rand_matrix(r: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<Rational>> {
    (0..m).map(|_| (0..n).map(|_| rand_rational(r)).collect()).collect()
}

fn rand_distribution(r: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n).map(|_| r.gen_range(0..=6)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| ratio(x, total)).collect();
        }
    }
}

fn rand_game(r: &mut ChaCha8Rng, states: usize, rows: usize, cols: usize) -> StochasticGame {
    let data = (0..states)
        .map(|_| StateData {
            rewards: rand_matrix(r, rows, cols),
            transitions: (0..rows).map(|_| (0..cols).map(|_| rand_distribution(r, states)).collect()).collect(),
        })
        .collect();
    StochasticGame::new(data).expect("valid by construction")
}

// 1. Switching controller certificates and system against the reference ones.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let beta = "1/10";
    let r = cli(&["solve", &game_path("switching_controller.game"), "--beta", beta, "--mode", "unnormalized", "--emit-system", "--emit-groebner"])?;
    within(Duration::from_secs(5), start)?;
    for (s, reference) in [reference::E1G1, reference::E1G2].into_iter().enumerate() {
        let cert = poly(text(&r["states"][s]["certificate"]));
        if !proportional(&cert, &poly(reference)) {
            return Err(format!("g{} = {cert}", s + 1));
        }
        let in_basis = r["groebner"][s]["generators"].as_array().into_iter().flatten().any(|g| proportional(&poly(text(g)), &cert));
        if !in_basis {
            return Err(format!("g{} not among the basis generators", s + 1));
        }
    }
    for (s, reference) in [reference::E1F1, reference::E1F2].into_iter().enumerate() {
        let f = poly(text(&r["system"][s]));
        if !proportional(&f, &poly(reference)) {
            return Err(format!("f{} = {f}", s + 1));
        }
    }
    Ok(format!("beta = {beta}: g1, g2, f1, f2 proportional to the reference polynomials ({:.2} s)", start.elapsed().as_secs_f64()))
}

// 2. Switching controller normalized values against the reference closed forms.
fn criterion_2() -> Outcome {
    let mut report = Vec::new();
    let mut failed = false;
    for beta in ["1/10", "1/2", "9/10"] {
        let start = Instant::now();
        let r = cli(&["solve", &game_path("switching_controller.game"), "--beta", beta, "--mode", "normalized"])?;
        within(Duration::from_secs(5), start)?;
        let b = parse_rational(beta).unwrap();
        let den = ratio(5, 1) * (&b + ratio(12, 1));
        let want = [(ratio(160, 1) - ratio(88, 1) * &b) / &den, ratio(72, 1) * &b / &den];
        let got: Vec<String> = (0..2).map(|s| text(&r["states"][s]["value"]).to_string()).collect();
        let ok = got.iter().zip(&want).all(|(g, w)| parse_rational(g).ok().as_ref() == Some(w));
        failed |= !ok;
        report.push(format!(
            "beta {beta}: {} (got {}, {}; closed form {}, {})",
            if ok { "match" } else { "MISMATCH" },
            got[0],
            got[1],
            want[0],
            want[1]
        ));
    }
    if failed {
        Err(report.join("; "))
    } else {
        Ok(report.join("; "))
    }
}

// 3 and 4 share one solve of the reward-diagonal game.
fn reward_diagonal() -> Result<(Value, f64), String> {
    let start = Instant::now();
    let r = cli(&["solve", &game_path("reward_diagonal.game"), "--beta", "1/2", "--mode", "unnormalized"])?;
    Ok((r, start.elapsed().as_secs_f64()))
}

fn criterion_3(run: &Result<(Value, f64), String>) -> Outcome {
    let (r, secs) = run.as_ref().map_err(Clone::clone)?;
    if *secs > 120.0 {
        return Err(format!("took {secs:.1} s, limit 120 s"));
    }
    let reference_roots = [[-1900.653702, 4.969443147, 71.41363761], [-643.7311436, 1.742768501, 28.64701004]];
    let reference_values = [2.484721573, 0.67138250];
    let mut problems = Vec::new();
    let mut values = Vec::new();
    for s in 0..2 {
        let roots: Vec<f64> = r["states"][s]["roots"].as_array().into_iter().flatten().map(|v| text(v).parse().unwrap_or(f64::NAN)).collect();
        let roots_ok = roots.len() == 3 && roots.iter().zip(reference_roots[s]).all(|(a, b)| (a - b).abs() <= 1e-5);
        if !roots_ok {
            problems.push(format!("g{} roots {roots:?}", s + 1));
        }
        // Normalized value is half the unnormalized one at beta = 1/2.
        let v = parse_decimal(text(&r["states"][s]["value"])).map(|x| to_f64(&x) / 2.0).unwrap_or(f64::NAN);
        values.push(v);
        if (v - reference_values[s]).abs() > 1e-6 {
            problems.push(format!("v{} = {v:.9}, reference {}", s + 1, reference_values[s]));
        }
    }
    if problems.is_empty() {
        Ok(format!("roots within 1e-5, values {:.9}, {:.9} ({secs:.1} s)", values[0], values[1]))
    } else {
        Err(format!("{} ({secs:.1} s)", problems.join("; ")))
    }
}

fn criterion_4(run: &Result<(Value, f64), String>) -> Outcome {
    let (r, _) = run.as_ref().map_err(Clone::clone)?;
    for (s, reference) in [reference::E2Q1, reference::E2Q2].into_iter().enumerate() {
        let spec = poly(text(&r["states"][s]["specialized"]));
        let c = spec.proportionality(&poly(reference)).filter(|c| !c.is_zero());
        match c {
            Some(_) => {}
            None => return Err(format!("g{}(1/2, z) = {spec}", s + 1)),
        }
    }
    Ok("g1(1/2, z1) and g2(1/2, z2) proportional to the reference quintics".into())
}

// 5. Limiting average of the switching controller game.
fn criterion_5() -> Outcome {
    let start = Instant::now();
    let r = cli(&["limit", &game_path("switching_controller.game")])?;
    within(Duration::from_secs(60), start)?;
    let got: Vec<&str> = (0..2).map(|s| text(&r["states"][s]["value"])).collect();
    let detail = format!("got {}, {} (expected 72/65 both)", got[0], got[1]);
    if got.iter().all(|g| *g == "72/65") {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 6. Matrix games: exact minimax, oracle agreement, cofactor identity.
fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let n = 256;
    let mut kernels_not_cmv = 0;
    for case in 0..n {
        let (m, k) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let a = MatrixGame::new(rand_matrix(&mut r, m, k)).unwrap();
        let sol = solve_matrix_game(&a);
        if !is_optimal_pair(&a, &sol.x, &sol.y, &sol.value)
            || sol.x.iter().chain(&sol.y).any(|p| p.is_negative())
            || !sol.x.iter().sum::<Rational>().is_one()
            || !sol.y.iter().sum::<Rational>().is_one()
        {
            return Err(format!("case {case}: minimax inequalities fail"));
        }
        if sol.value != oracle::oracle_value(&a) {
            return Err(format!("case {case}: value {} differs from enumeration", sol.value));
        }
        let shifted = a.affine(&Rational::one(), &(Rational::one() - a.min_entry()));
        let v = solve_matrix_game(&shifted).value;
        let kern = find_kernel(&shifted).map_err(|e| format!("case {case}: {e}"))?;
        let (det, sum) = det_and_cofactor_sum(&kern.sub);
        if sum.is_zero() || det != &v * &sum {
            return Err(format!("case {case}: cofactor identity fails"));
        }
        if !kern.is_completely_mixed() {
            kernels_not_cmv += 1;
        }
    }
    Ok(format!("{n} games up to 4x4; {kernels_not_cmv} degenerate games had no completely mixed kernel"))
}

// 7. Groebner bases of the reference systems and of random ideals.
fn check_basis(gens: &[MultiPoly], order: &TermOrder, rev_seed: usize) -> Result<bool, String> {
    let gb = match buchberger(gens, order) {
        Ok(gb) => gb,
        Err(GroebnerError::Inconsistent) => {
            let mut p = gens.to_vec();
            let k = rev_seed % p.len().max(1);
            p.rotate_left(k);
            p.reverse();
            return match buchberger(&p, order) {
                Err(GroebnerError::Inconsistent) => Ok(false),
                other => Err(format!("permuted generators disagree on consistency: {other:?}")),
            };
        }
        Err(e) => return Err(e.to_string()),
    };
    if !gens.iter().all(|g| gb.contains(g)) {
        return Err("a generator does not reduce to zero".into());
    }
    if !gb.s_pairs_reduce_to_zero() || !gb.is_reduced() {
        return Err("basis not reduced or an S-pair does not reduce to zero".into());
    }
    let mut p = gens.to_vec();
    let k = rev_seed % p.len().max(1);
    p.rotate_left(k);
    p.reverse();
    if buchberger(&p, order).map_err(|e| e.to_string())? != gb {
        return Err("basis changes under generator permutation".into());
    }
    Ok(true)
}

fn criterion_7() -> Outcome {
    for name in ["switching_controller.game", "reward_diagonal.game"] {
        let g = parse_game(&std::fs::read_to_string(game_path(name)).unwrap()).unwrap();
        let full = sg_alg_core::polysys::StateKernel { rows: vec![0, 1, 2], cols: vec![0, 1, 2] };
        let sys = build_system(&g, &sg_alg_core::polysys::KernelSelection(vec![full.clone(), full]), Mode::Unnormalized)
            .map_err(|e| e.to_string())?;
        for s in 1..=2 {
            check_basis(&sys.polys, &TermOrder::for_state(3, s), 1).map_err(|e| format!("{name}, order {s}: {e}"))?;
        }
    }
    let mut r = rng(7);
    let (mut consistent, mut unit) = (0, 0);
    while consistent < 64 {
        let gens: Vec<MultiPoly> = (0..r.gen_range(1..=3))
            .map(|_| {
                let terms: Vec<(Monomial, Rational)> = (0..r.gen_range(1..=3))
                    .map(|_| {
                        let d = r.gen_range(0..=3u32);
                        let a = r.gen_range(0..=d);
                        let b = r.gen_range(0..=d - a);
                        let c: i64 = r.gen_range(1..=5) * if r.gen_bool(0.5) { 1 } else { -1 };
                        (Monomial::from_exponents(vec![a, b, d - a - b]), ratio(c, 1))
                    })
                    .collect();
                MultiPoly::from_terms(3, terms)
            })
            .filter(|p| !p.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let mut perm = vec![0usize, 1, 2];
        for i in (1..3).rev() {
            perm.swap(i, r.gen_range(0..=i));
        }
        let order = TermOrder::lex(perm).unwrap();
        if check_basis(&gens, &order, r.gen_range(0..3))? {
            consistent += 1;
        } else {
            unit += 1;
        }
    }
    Ok(format!("both reference systems under both orders; {consistent} random ideals (+{unit} unit ideals)"))
}

// 8. Solve on random two-state games.
fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let beta = ratio(1, 2);
    let b = DiscountFactor::new(beta.clone()).unwrap();
    let bound = parse_decimal("1e-8").unwrap();
    let n = 24;
    let mut irrational = 0;
    for case in 0..n {
        let g = rand_game(&mut r, 2, 2, 2);
        let rep = solve_discounted(&g, &beta, &SolveOptions::default()).map_err(|e| format!("case {case}: {e}"))?;
        let res = residual(&g, &rep.values(), &b, rep.mode).unwrap();
        if res > bound {
            return Err(format!("case {case}: residual {}", to_f64(&res)));
        }
        for st in &rep.states {
            let iv = &st.value.interval;
            let encloses = match &iv.exact {
                Some(x) => st.specialized.eval(x).is_zero(),
                None => {
                    irrational += 1;
                    let (lo, hi) = st.specialized.eval_interval(&iv.lo, &iv.hi);
                    lo <= Rational::zero() && Rational::zero() <= hi
                }
            };
            if !encloses {
                return Err(format!("case {case}, state {}: certificate does not enclose 0", st.value.state));
            }
        }
    }
    Ok(format!("{n} games, residual <= 1e-8, all certificates enclose 0 ({irrational} irrational state values)"))
}

// 9. The Shapley operator contracts by beta in the sup norm.
fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let n = 128;
    for case in 0..n {
        let states = r.gen_range(1..=3);
        let (rows, cols) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let g = rand_game(&mut r, states, rows, cols);
        let beta = ratio(r.gen_range(1..=19), 20);
        let b = DiscountFactor::new(beta.clone()).unwrap();
        let vec = |r: &mut ChaCha8Rng| (0..states).map(|_| ratio(r.gen_range(-40..=40), r.gen_range(1..=8))).collect::<Vec<_>>();
        let (u, w) = (vec(&mut r), vec(&mut r));
        let mode = if r.gen_bool(0.5) { Mode::Normalized } else { Mode::Unnormalized };
        let tu = shapley_operator(&g, &u, &b, mode).unwrap();
        let tw = shapley_operator(&g, &w, &b, mode).unwrap();
        let sup = |a: &[Rational], c: &[Rational]| a.iter().zip(c).map(|(x, y)| (x - y).abs()).max().unwrap();
        if sup(&tu, &tw) > &beta * sup(&u, &w) {
            return Err(format!("case {case}: contraction fails"));
        }
    }
    Ok(format!("{n} random tuples"))
}

fn main() {
    let started = Instant::now();
    let guarded = |f: &dyn Fn() -> Outcome| -> Outcome {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        })
    };
    let rd = reward_diagonal();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "switching controller certificates", guarded(&criterion_1)),
        (2, "switching controller exact values", guarded(&criterion_2)),
        (3, "reward-diagonal roots and values", guarded(&|| criterion_3(&rd))),
        (4, "reward-diagonal quintic scaling", guarded(&|| criterion_4(&rd))),
        (5, "switching controller limiting average", guarded(&criterion_5)),
        (6, "matrix-game property suite", guarded(&criterion_6)),
        (7, "Groebner property suite", guarded(&criterion_7)),
        (8, "pipeline soundness", guarded(&criterion_8)),
        (9, "contraction", guarded(&criterion_9)),
    ];
    let mut failures = 0;
    for (n, name, res) in &results {
        match res {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {n} FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1} s", results.len() - failures, results.len(), started.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
