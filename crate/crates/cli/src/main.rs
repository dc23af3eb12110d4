mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde_json::{json, Value};

use sg_alg_core::alg_solve::{solve_discounted, AlgSolveError, AlgebraicValue, IsolatingInterval, SolveOptions, SolveReport};
use sg_alg_core::arith::multipoly::TermOrder;
use sg_alg_core::arith::rational::{digits_for, fmt_rational, parse_decimal, parse_rational, to_decimal_string, to_f64, Rational};
use sg_alg_core::game::{parse_game, unshift_value, GameError, MatrixGame, Mode, StochasticGame};
use sg_alg_core::limit_avg::{solve_limit, BetaSchedule, LimitError, LimitOptions, LimitReport};
use sg_alg_core::matrix_game::{find_kernel_with, solve_matrix_game, MatrixGameSolution};
use sg_alg_core::polysys::{KernelSelection, PolySysError};
use sg_alg_core::shapley::{value_iteration, DiscountFactor, IterationOptions, ShapleyError};

use report::Report;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_AMBIGUOUS: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "sg-alg", version, about = "Exact and algebraic values of zero-sum stochastic games")]
struct Cli {
    /// Emit the report as JSON instead of key-value text.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timings (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Normalized,
    Unnormalized,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Normalized => Mode::Normalized,
            ModeArg::Unnormalized => Mode::Unnormalized,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a game file and check its invariants.
    Validate { path: PathBuf },
    /// Discounted values as algebraic numbers with certificates.
    Solve {
        path: PathBuf,
        /// Discount factor in (0,1), e.g. 1/2.
        #[arg(long)]
        beta: String,
        #[arg(long, value_enum, default_value = "unnormalized")]
        mode: ModeArg,
        /// Width of the reported isolating intervals.
        #[arg(long, default_value = "1e-9")]
        precision: String,
        /// Print the coupled polynomial system.
        #[arg(long)]
        emit_system: bool,
        /// Print the reduced Groebner basis of every state.
        #[arg(long)]
        emit_groebner: bool,
    },
    /// Value iteration with a certified error bound.
    Iterate {
        path: PathBuf,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value = "1e-9")]
        tol: String,
        #[arg(long, value_enum, default_value = "unnormalized")]
        mode: ModeArg,
    },
    /// Limiting-average values.
    Limit {
        path: PathBuf,
        #[arg(long, default_value = "1e-9")]
        precision: String,
        /// Largest schedule exponent k for discounts 1 - 10^-k.
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
    /// Value and optimal strategies of a matrix game file.
    MatrixValue { path: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Failure { code: EXIT_PARSE, message: e.to_string() }
    }
}

fn shapley_code(e: &ShapleyError) -> u8 {
    match e {
        ShapleyError::ToleranceNotReached { .. } => EXIT_CAP,
        _ => EXIT_USAGE,
    }
}

fn polysys_code(e: &PolySysError) -> u8 {
    match e {
        PolySysError::Shapley(s) => shapley_code(s),
        _ => EXIT_AMBIGUOUS,
    }
}

impl From<AlgSolveError> for Failure {
    fn from(e: AlgSolveError) -> Self {
        let code = match &e {
            AlgSolveError::InvalidPrecision => EXIT_USAGE,
            AlgSolveError::KernelSearchExhausted { .. } => EXIT_CAP,
            AlgSolveError::Shapley(s) => shapley_code(s),
            AlgSolveError::PolySys(p) => polysys_code(p),
            _ => EXIT_AMBIGUOUS,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<LimitError> for Failure {
    fn from(e: LimitError) -> Self {
        let code = match &e {
            LimitError::NotStabilized { .. } => EXIT_CAP,
            LimitError::InvalidSchedule(_) => EXIT_USAGE,
            LimitError::Shapley(s) => shapley_code(s),
            LimitError::PolySys(p) => polysys_code(p),
            LimitError::Solve(s) => Failure::from(s.clone()).code,
            _ => EXIT_AMBIGUOUS,
        };
        let mut message = e.to_string();
        if code == EXIT_CAP || code == EXIT_AMBIGUOUS {
            message.push_str("; try a larger --kmax");
        }
        Failure { code, message }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.json));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() {
    let n = std::env::var("SG_ALG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Solve { path, beta, mode, precision, emit_system, emit_groebner } => {
            let beta = parse_beta(beta)?;
            let precision = parse_positive("precision", precision)?;
            let opts = SolveOptions { mode: (*mode).into(), precision, ..SolveOptions::default() };
            let g = load_game(path)?;
            cmd_solve(path, &g, &beta, &opts, *emit_system, *emit_groebner, cli.timings)
        }
        Command::Iterate { path, beta, tol, mode } => {
            let beta = parse_beta(beta)?;
            let tol = parse_positive("tol", tol)?;
            let g = load_game(path)?;
            cmd_iterate(path, &g, &beta, &tol, (*mode).into(), cli.timings)
        }
        Command::Limit { path, precision, kmax } => {
            let precision = parse_positive("precision", precision)?;
            if *kmax < 2 {
                return Err(Failure::usage("--kmax must be at least 2"));
            }
            let defaults = LimitOptions::default();
            let opts = LimitOptions {
                precision,
                schedule: BetaSchedule::new(1, *kmax)?,
                k_cap: defaults.k_cap.max(*kmax),
                ..defaults
            };
            let g = load_game(path)?;
            cmd_limit(path, &g, &opts, cli.timings)
        }
        Command::MatrixValue { path } => cmd_matrix_value(path),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) })
}

fn load_game(path: &Path) -> Result<StochasticGame, Failure> {
    Ok(parse_game(&read(path)?)?)
}

fn parse_number(text: &str) -> Option<Rational> {
    parse_rational(text).ok().or_else(|| parse_decimal(text).ok())
}

fn parse_beta(text: &str) -> Result<Rational, Failure> {
    let b = parse_number(text).ok_or_else(|| Failure::usage(format!("--beta: cannot parse `{text}`")))?;
    DiscountFactor::new(b.clone()).map_err(|_| Failure::usage(format!("--beta must lie strictly between 0 and 1, got {text}")))?;
    Ok(b)
}

fn parse_positive(name: &str, text: &str) -> Result<Rational, Failure> {
    let r = parse_number(text).ok_or_else(|| Failure::usage(format!("--{name}: cannot parse `{text}`")))?;
    if r <= Rational::from_integer(0.into()) {
        return Err(Failure::usage(format!("--{name} must be positive, got {text}")));
    }
    Ok(r)
}

fn q(r: &Rational) -> Value {
    Value::String(fmt_rational(r))
}

fn dec(r: &Rational, digits: u32) -> Value {
    Value::String(to_decimal_string(r, digits))
}

fn sci(r: &Rational) -> Value {
    if r == &Rational::from_integer(0.into()) {
        return Value::String("0".into());
    }
    Value::String(format!("{:.3e}", to_f64(r)))
}

fn ms(d: Duration) -> Value {
    json!(format!("{:.1}", d.as_secs_f64() * 1e3))
}

fn kernel_json(kappa: &KernelSelection) -> Value {
    Value::Array(kappa.states().iter().map(|k| Value::String(k.to_string())).collect())
}

fn interval_json(iv: &IsolatingInterval) -> Value {
    match &iv.exact {
        Some(r) => json!({ "exact": fmt_rational(r) }),
        None => json!({ "lo": fmt_rational(&iv.lo), "hi": fmt_rational(&iv.hi) }),
    }
}

fn value_json(v: &AlgebraicValue) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("value".into(), Value::String(v.display()));
    m.insert("exact".into(), Value::Bool(v.exact().is_some()));
    if v.exact().is_none() {
        m.insert("interval".into(), interval_json(&v.interval));
    }
    m.insert("polynomial".into(), Value::String(v.poly.fmt_var(&format!("z{}", v.state))));
    Value::Object(m)
}

fn cmd_validate(path: &Path) -> Result<Report, Failure> {
    let g = load_game(path)?;
    let mut r = Report::new("validate");
    r.set("game", path.display().to_string());
    r.set("status", "ok");
    r.set("states", g.num_states());
    r.set("actions", Value::Array(g.states().iter().map(|s| json!(format!("{}x{}", s.rows(), s.cols()))).collect()));
    Ok(r)
}

fn strategy_json(p: &[Rational], exact: bool, digits: u32) -> Value {
    Value::Array(p.iter().map(|x| if exact { q(x) } else { dec(x, digits) }).collect())
}

fn cmd_solve(
    path: &Path,
    g: &StochasticGame,
    beta: &Rational,
    opts: &SolveOptions,
    emit_system: bool,
    emit_groebner: bool,
    timings: bool,
) -> Result<Report, Failure> {
    let rep: SolveReport = solve_discounted(g, beta, opts)?;
    let digits = digits_for(&opts.precision);
    let mut r = Report::new("solve");
    r.set("game", path.display().to_string());
    r.set("beta", q(beta));
    r.set("mode", opts.mode.as_str());
    r.set("precision", q(&opts.precision));
    r.set("variables", "z0 = discount factor, zs = value of state s");
    r.set("shift", q(&rep.shift));
    r.set("kernel", kernel_json(&rep.kappa));
    r.set("kernel_source", if rep.kappa_inferred { "inferred" } else { "fallback search" });
    let est = rep.estimate.in_mode(opts.mode);
    let unshift = |v: &Rational| unshift_value(v, &rep.shift, opts.mode, beta).expect("beta below one");
    r.set(
        "estimate",
        json!({
            "values": est.values.iter().map(|v| dec(&unshift(v), digits + 2)).collect::<Vec<_>>(),
            "error_bound": sci(&est.error_bound),
            "iterations": rep.estimate.iterations,
        }),
    );
    if emit_system {
        r.set("system", Value::Array(rep.system.polys.iter().map(|p| Value::String(p.to_string())).collect()));
    }
    if emit_groebner {
        let bases: Vec<Value> = rep
            .bases
            .iter()
            .enumerate()
            .map(|(s, b)| {
                json!({
                    "state": s + 1,
                    "order": b.order.describe(),
                    "generators": b.generators.iter().map(|p| p.fmt_with(&b.order)).collect::<Vec<_>>(),
                })
            })
            .collect();
        r.set("groebner", Value::Array(bases));
    }
    let states: Vec<Value> = rep
        .states
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let order = TermOrder::for_state(rep.system.nvars(), s + 1);
            let exact = st.value.exact().is_some();
            let mut m = serde_json::Map::new();
            m.insert("state".into(), json!(s + 1));
            m.insert("certificate".into(), Value::String(st.certificate.fmt_with(&order)));
            m.insert("specialized".into(), Value::String(st.specialized.fmt_var(&format!("z{}", s + 1))));
            m.insert("roots".into(), Value::Array(st.roots.iter().map(|iv| root_text(iv, digits)).collect()));
            if let Value::Object(v) = value_json(&st.value) {
                m.extend(v);
            }
            m.insert("row_strategy".into(), strategy_json(&st.row_strategy, exact, digits));
            m.insert("column_strategy".into(), strategy_json(&st.column_strategy, exact, digits));
            m.insert("strategy_source".into(), json!(if st.from_kernel { "kernel" } else { "linear program" }));
            Value::Object(m)
        })
        .collect();
    r.set("states", Value::Array(states));
    r.set("residual", sci(&rep.residual));
    r.set("diagnostics", Value::Array(rep.diagnostics.iter().map(|d| json!(d)).collect()));
    if timings {
        r.set(
            "timings_ms",
            json!({
                "value_iteration": ms(rep.timings.value_iteration),
                "kernel": ms(rep.timings.kernel),
                "groebner": rep.timings.groebner.iter().map(|d| ms(*d)).collect::<Vec<_>>(),
                "total": ms(rep.timings.total),
            }),
        );
    }
    Ok(r)
}

fn root_text(iv: &IsolatingInterval, digits: u32) -> Value {
    match &iv.exact {
        Some(r) => q(r),
        None => dec(&iv.midpoint(), digits),
    }
}

fn cmd_iterate(path: &Path, g: &StochasticGame, beta: &Rational, tol: &Rational, mode: Mode, timings: bool) -> Result<Report, Failure> {
    let start = Instant::now();
    let b = DiscountFactor::new(beta.clone()).map_err(|e| Failure::usage(e.to_string()))?;
    let est = value_iteration(g, &b, mode, tol, &IterationOptions::default())
        .map_err(|e| Failure { code: shapley_code(&e), message: e.to_string() })?;
    let digits = digits_for(tol) + 2;
    let mut r = Report::new("iterate");
    r.set("game", path.display().to_string());
    r.set("beta", q(beta));
    r.set("mode", mode.as_str());
    r.set("tol", q(tol));
    r.set("values", Value::Array(est.values.iter().map(|v| dec(v, digits)).collect()));
    r.set("error_bound", sci(&est.error_bound));
    r.set("residual", sci(&est.residual));
    r.set("iterations", est.iterations);
    if timings {
        r.set("timings_ms", json!({ "total": ms(start.elapsed()) }));
    }
    Ok(r)
}

fn cmd_limit(path: &Path, g: &StochasticGame, opts: &LimitOptions, timings: bool) -> Result<Report, Failure> {
    let start = Instant::now();
    let rep: LimitReport = solve_limit(g, opts)?;
    let digits = digits_for(&opts.precision);
    let mut r = Report::new("limit");
    r.set("game", path.display().to_string());
    r.set("precision", q(&opts.precision));
    r.set("mode", Mode::Normalized.as_str());
    r.set("schedule", format!("beta_k = 1 - 10^-k, k = {}..{}", opts.schedule.k0, rep.k_max));
    r.set("drift_allowance", format!("{} * (1 - beta)^(1/{}), rounded up to a power of ten", fmt_rational(&rep.drift.c), rep.drift.m));
    r.set("shift", q(&rep.shift));
    r.set("kernel", kernel_json(&rep.kernel.kappa));
    r.set("kernel_agreement", rep.kernel.agreement);
    let points: Vec<Value> = rep
        .kernel
        .points
        .iter()
        .map(|p| {
            json!({
                "k": p.k,
                "kernel": kernel_json(&p.kappa),
                "near_support_change": p.ambiguous,
                "estimate": p.estimate.values.iter().map(|v| dec(&(v - &rep.shift), digits)).collect::<Vec<_>>(),
                "error_bound": sci(&p.estimate.error_bound),
            })
        })
        .collect();
    r.set("schedule_points", Value::Array(points));
    let nvars = g.num_states() + 1;
    let states: Vec<Value> = rep
        .states
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let order = TermOrder::for_state(nvars, s + 1);
            let mut m = serde_json::Map::new();
            m.insert("state".into(), json!(s + 1));
            m.insert("certificate".into(), Value::String(st.certificate.fmt_with(&order)));
            m.insert("one_minus_z0_power".into(), json!(st.power));
            if let Value::Object(v) = value_json(&st.value) {
                m.extend(v);
            }
            m.insert("consistent_with_schedule".into(), json!(st.consistent));
            Value::Object(m)
        })
        .collect();
    r.set("states", Value::Array(states));
    r.set("diagnostics", Value::Array(rep.diagnostics.iter().map(|d| json!(d)).collect()));
    if timings {
        r.set("timings_ms", json!({ "total": ms(start.elapsed()) }));
    }
    Ok(r)
}

fn cmd_matrix_value(path: &Path) -> Result<Report, Failure> {
    let a = MatrixGame::parse(&read(path)?)?;
    let sol = solve_matrix_game(&a);
    let mut r = Report::new("matrix-value");
    r.set("game", path.display().to_string());
    r.set("size", format!("{}x{}", a.rows(), a.cols()));
    r.set("value", q(&sol.value));
    r.set("row_strategy", Value::Array(sol.x.iter().map(q).collect()));
    r.set("column_strategy", Value::Array(sol.y.iter().map(q).collect()));
    // Kernels need a nonzero value; the shift leaves supports unchanged.
    let c = Rational::one() - a.min_entry();
    let shifted_sol = MatrixGameSolution { value: &sol.value + &c, x: sol.x.clone(), y: sol.y.clone() };
    if let Ok(k) = find_kernel_with(&a.affine(&Rational::one(), &c), &shifted_sol) {
        let set = |v: &[usize]| Value::Array(v.iter().map(|i| json!(i + 1)).collect());
        r.set(
            "kernel",
            json!({ "rows": set(&k.rows), "cols": set(&k.cols), "completely_mixed": k.is_completely_mixed() }),
        );
    }
    Ok(r)
}
