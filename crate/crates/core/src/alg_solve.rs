//! The discounted pipeline: certificates from Gröbner bases, real root
//! isolation, selection of the value root and verification.

use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::multipoly::{MultiPoly, TermOrder};
use crate::arith::rational::{digits_for, fmt_rational, parse_decimal, pow10, to_decimal_string, Rational};
use crate::arith::unipoly::{count_roots, UniPoly};
use crate::arith::PolyError;
use crate::game::{shift_rewards, unshift_value, Mode, StochasticGame};
use crate::groebner::{bivariate_candidates, buchberger, GroebnerBasis, GroebnerError};
use crate::matrix_game::{kernel_strategies, solve_matrix_game};
use crate::polysys::{build_system, infer_kernel, plausible_selections, CoupledSystem, KernelSelection, PolySysError};
use crate::shapley::{aux_game, residual, value_iteration, DiscountFactor, IterationOptions, ShapleyError, ValueEstimate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgSolveError {
    #[error("zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("precision must be positive")]
    InvalidPrecision,
    #[error("state {state}: no root near the estimate")]
    NoRoot { state: usize },
    #[error("state {state}: {count} roots within the estimate's bound")]
    Ambiguous { state: usize, count: usize },
    #[error("no kernel selection produced a verified solution ({tried} tried): {last}")]
    KernelSearchExhausted { tried: usize, last: String },
    #[error(transparent)]
    Shapley(#[from] ShapleyError),
    #[error(transparent)]
    PolySys(#[from] PolySysError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

impl From<PolyError> for AlgSolveError {
    fn from(_: PolyError) -> Self {
        AlgSolveError::ZeroPolynomial
    }
}

/// An interval `(lo, hi)` holding exactly one real root of a square-free
/// polynomial. Endpoints are never roots. When the root is known to be
/// rational it is carried in `exact`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsolatingInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub exact: Option<Rational>,
}

impl IsolatingInterval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        match &self.exact {
            Some(r) => r.clone(),
            None => (&self.lo + &self.hi) / Rational::from_integer(2.into()),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    /// The image under `x -> f x` for `f > 0`.
    pub fn scaled(&self, f: &Rational) -> IsolatingInterval {
        IsolatingInterval { lo: &self.lo * f, hi: &self.hi * f, exact: self.exact.as_ref().map(|r| r * f) }
    }

    fn around(r: Rational, lo: &Rational, hi: &Rational, width: &Rational) -> IsolatingInterval {
        let two = Rational::from_integer(2.into());
        let d = (&r - lo).min(hi - &r).min(width / &two);
        IsolatingInterval { lo: &r - &d, hi: &r + &d, exact: Some(r) }
    }
}

/// Isolates every distinct real root, ascending.
///
/// Bisects `(-B, B]` with Sturm counts, `B` the Cauchy bound. A split point
/// that is itself a root is recorded exactly in a window shrunk until it
/// holds no other root.
pub fn isolate_real_roots(p: &UniPoly) -> Result<Vec<IsolatingInterval>, AlgSolveError> {
    if p.is_zero() {
        return Err(AlgSolveError::ZeroPolynomial);
    }
    let q = p.squarefree_part()?;
    match q.degree() {
        Some(0) => return Ok(Vec::new()),
        Some(1) => {
            let c = q.coeffs();
            let r = -&c[0] / &c[1];
            let one = Rational::one();
            return Ok(vec![IsolatingInterval { lo: &r - &one, hi: &r + &one, exact: Some(r) }]);
        }
        _ => {}
    }
    let chain = q.sturm_sequence()?;
    let b = q.cauchy_bound();
    let two = Rational::from_integer(2.into());
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b.clone())];
    while let Some((lo, hi)) = stack.pop() {
        match count_roots(&chain, &lo, &hi) {
            0 => {}
            1 => out.push(IsolatingInterval { lo, hi, exact: None }),
            _ => {
                let m = (&lo + &hi) / &two;
                if q.sign_at(&m) == 0 {
                    // shrink a window around the exact root until it is isolated
                    let mut d = (&m - &lo) / &two;
                    while q.sign_at(&(&m - &d)) == 0
                        || q.sign_at(&(&m + &d)) == 0
                        || count_roots(&chain, &(&m - &d), &(&m + &d)) != 1
                    {
                        d /= &two;
                    }
                    let (a, b) = (&m - &d, &m + &d);
                    stack.push((b.clone(), hi));
                    stack.push((lo, a.clone()));
                    out.push(IsolatingInterval { lo: a, hi: b, exact: Some(m) });
                    continue;
                }
                stack.push((m.clone(), hi));
                stack.push((lo, m));
            }
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(out)
}

/// Narrows `iv` around its root of the square-free `p` until the width is at
/// most `width`.
pub fn refine(p: &UniPoly, iv: &IsolatingInterval, width: &Rational) -> IsolatingInterval {
    if let Some(r) = &iv.exact {
        return IsolatingInterval::around(r.clone(), &iv.lo, &iv.hi, width);
    }
    let two = Rational::from_integer(2.into());
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    let s_lo = p.sign_at(&lo);
    while &(&hi - &lo) > width {
        let m = (&lo + &hi) / &two;
        match p.sign_at(&m) {
            0 => return IsolatingInterval::around(m, &lo, &hi, width),
            s if s == s_lo => lo = m,
            _ => hi = m,
        }
    }
    IsolatingInterval { lo, hi, exact: None }
}

/// The unique root whose interval meets `[target - bound, target + bound]`.
/// Candidates are refined to width `bound` before giving up as ambiguous.
pub fn select_value_root(
    p: &UniPoly,
    roots: &[IsolatingInterval],
    target: &Rational,
    bound: &Rational,
    state: usize,
) -> Result<IsolatingInterval, AlgSolveError> {
    let lo = target - bound;
    let hi = target + bound;
    let meets = |iv: &IsolatingInterval| match &iv.exact {
        Some(r) => &lo <= r && r <= &hi,
        None => iv.lo < hi && lo < iv.hi,
    };
    let near: Vec<IsolatingInterval> =
        roots.iter().filter(|iv| meets(iv)).map(|iv| refine(p, iv, bound)).filter(|iv| meets(iv)).collect();
    match near.len() {
        0 => Err(AlgSolveError::NoRoot { state }),
        1 => Ok(near.into_iter().next().expect("one")),
        count => Err(AlgSolveError::Ambiguous { state, count }),
    }
}

/// Shortest decimal, with at least two guard digits beyond the precision,
/// that lies within `precision` of every point of the interval.
pub fn decimal_in(iv: &IsolatingInterval, precision: &Rational) -> String {
    let mut d = digits_for(precision) + 2;
    if let Some(r) = &iv.exact {
        return to_decimal_string(r, d);
    }
    let m = iv.midpoint();
    loop {
        let s = to_decimal_string(&m, d);
        let v = parse_decimal(&s).expect("rendered decimal parses");
        if (&v - &iv.lo).abs() <= *precision && (&iv.hi - &v).abs() <= *precision {
            return s;
        }
        d += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicValue {
    /// 1-based state index.
    pub state: usize,
    /// Square-free, integer-cleared defining polynomial.
    pub poly: UniPoly,
    pub interval: IsolatingInterval,
    pub decimal: String,
    pub mode: Mode,
}

impl AlgebraicValue {
    /// The rational used downstream: the exact root when known, otherwise
    /// the reported decimal.
    pub fn representative(&self) -> Rational {
        match &self.interval.exact {
            Some(r) => r.clone(),
            None => parse_decimal(&self.decimal).expect("rendered decimal parses"),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        self.interval.exact.as_ref()
    }

    /// Exact text when rational, otherwise the decimal.
    pub fn display(&self) -> String {
        match &self.interval.exact {
            Some(r) => fmt_rational(r),
            None => self.decimal.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub precision: Rational,
    pub iteration: IterationOptions,
    /// Kernel selections tried after the inferred one.
    pub max_fallback: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: Mode::Unnormalized,
            precision: parse_decimal("1e-9").expect("literal"),
            iteration: IterationOptions::default(),
            max_fallback: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSolution {
    /// The certificate `g_s(z0, z_s)`, integer-cleared.
    pub certificate: MultiPoly,
    /// `g_s(beta, z_s)`, integer-cleared.
    pub specialized: UniPoly,
    /// Every real root of the square-free part, ascending, refined to the
    /// requested precision.
    pub roots: Vec<IsolatingInterval>,
    pub value: AlgebraicValue,
    pub row_strategy: Vec<Rational>,
    pub column_strategy: Vec<Rational>,
    /// Whether the strategies came from the kernel formulas (otherwise LP).
    pub from_kernel: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Timings {
    pub value_iteration: Duration,
    pub kernel: Duration,
    pub groebner: Vec<Duration>,
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub beta: Rational,
    pub mode: Mode,
    pub precision: Rational,
    /// Uniform reward shift used for value iteration and kernel inference.
    pub shift: Rational,
    pub estimate: ValueEstimate,
    pub kappa: KernelSelection,
    pub kappa_inferred: bool,
    pub system: CoupledSystem,
    pub bases: Vec<GroebnerBasis>,
    pub states: Vec<StateSolution>,
    /// `||T v - v||_inf` at the reported values, in the solve mode.
    pub residual: Rational,
    pub diagnostics: Vec<String>,
    pub timings: Timings,
}

impl SolveReport {
    pub fn values(&self) -> Vec<Rational> {
        self.states.iter().map(|s| s.value.representative()).collect()
    }

    /// Reported values converted to `mode` (multiplied or divided by `1 - beta`).
    pub fn values_in(&self, mode: Mode) -> Vec<IsolatingInterval> {
        let gap = Rational::one() - &self.beta;
        let f = match (self.mode, mode) {
            (a, b) if a == b => Rational::one(),
            (Mode::Unnormalized, Mode::Normalized) => gap,
            _ => gap.recip(),
        };
        self.states.iter().map(|s| s.value.interval.scaled(&f)).collect()
    }
}

fn integer_cleared_uni(p: &UniPoly) -> UniPoly {
    p.primitive()
}

/// Per-state certificate work for one kernel selection.
struct StateAttempt {
    basis: GroebnerBasis,
    solution: Result<StateSolution, AlgSolveError>,
    diagnostics: Vec<String>,
    elapsed: Duration,
}

fn solve_state(
    system: &CoupledSystem,
    s: usize,
    beta: &DiscountFactor,
    target: &Rational,
    bound: &Rational,
    opts: &SolveOptions,
) -> Result<StateAttempt, AlgSolveError> {
    let start = Instant::now();
    let nvars = system.nvars();
    let order = TermOrder::for_state(nvars, s + 1);
    let basis = buchberger(&system.polys, &order)?;
    let mut diagnostics = Vec::new();
    let mut solution = Err(AlgSolveError::NoRoot { state: s + 1 });
    let cands: Vec<MultiPoly> = bivariate_candidates(&basis, s + 1).into_iter().cloned().collect();
    if cands.is_empty() {
        solution = Err(GroebnerError::NoBivariate { state: s + 1 }.into());
    }
    for cand in cands {
        let cert = cand.primitive(&order);
        let spec = cert.substitute(0, beta.get())?.to_univariate(s + 1)?;
        let full = cert.degree_in(s + 1) as usize;
        match spec.degree() {
            None | Some(0) => {
                diagnostics.push(format!(
                    "state {}: certificate vanishes or is constant at beta = {}",
                    s + 1,
                    fmt_rational(beta.get())
                ));
                continue;
            }
            Some(d) if d < full => diagnostics.push(format!(
                "state {}: certificate degree drops from {full} to {d} at beta = {}",
                s + 1,
                fmt_rational(beta.get())
            )),
            _ => {}
        }
        let spec = integer_cleared_uni(&spec);
        let sqfree = spec.squarefree_part()?;
        let roots = isolate_real_roots(&sqfree)?;
        match select_value_root(&sqfree, &roots, target, bound, s + 1) {
            Ok(iv) => {
                let iv = refine(&sqfree, &iv, &opts.precision);
                let decimal = decimal_in(&iv, &opts.precision);
                let roots = roots.iter().map(|r| refine(&sqfree, r, &opts.precision)).collect();
                let value = AlgebraicValue { state: s + 1, poly: sqfree, interval: iv, decimal, mode: opts.mode };
                solution = Ok(StateSolution {
                    certificate: cert,
                    specialized: spec,
                    roots,
                    value,
                    row_strategy: Vec::new(),
                    column_strategy: Vec::new(),
                    from_kernel: false,
                });
                break;
            }
            Err(e) => solution = Err(e),
        }
    }
    Ok(StateAttempt { basis, solution, diagnostics, elapsed: start.elapsed() })
}

/// Strategies from the kernel formulas on the auxiliary game at `values`,
/// or from the LP when the formulas leave the simplex.
fn recover_strategies(
    g: &StochasticGame,
    kappa: &KernelSelection,
    values: &[Rational],
    beta: &DiscountFactor,
    mode: Mode,
) -> Result<Vec<(Vec<Rational>, Vec<Rational>, bool)>, AlgSolveError> {
    (0..g.num_states())
        .into_par_iter()
        .map(|s| {
            let aux = aux_game(g, s, values, beta, mode)?;
            let k = &kappa.0[s];
            if let Ok((x0, y0)) = kernel_strategies(&aux.submatrix(&k.rows, &k.cols)) {
                if x0.iter().chain(&y0).all(|p| !p.is_negative()) {
                    let mut x = vec![Rational::zero(); aux.rows()];
                    let mut y = vec![Rational::zero(); aux.cols()];
                    for (i, &r) in k.rows.iter().enumerate() {
                        x[r] = x0[i].clone();
                    }
                    for (j, &c) in k.cols.iter().enumerate() {
                        y[c] = y0[j].clone();
                    }
                    return Ok((x, y, true));
                }
            }
            let sol = solve_matrix_game(&aux);
            Ok((sol.x, sol.y, false))
        })
        .collect()
}

struct Attempt {
    system: CoupledSystem,
    bases: Vec<GroebnerBasis>,
    states: Vec<StateSolution>,
    residual: Rational,
    diagnostics: Vec<String>,
    groebner: Vec<Duration>,
}

fn attempt(
    g: &StochasticGame,
    kappa: &KernelSelection,
    beta: &DiscountFactor,
    targets: &[Rational],
    bound: &Rational,
    opts: &SolveOptions,
) -> Result<Attempt, (AlgSolveError, Vec<String>)> {
    let system = build_system(g, kappa, opts.mode).map_err(|e| (e.into(), Vec::new()))?;
    let per_state: Vec<StateAttempt> = (0..g.num_states())
        .into_par_iter()
        .map(|s| solve_state(&system, s, beta, &targets[s], bound, opts))
        .collect::<Result<_, _>>()
        .map_err(|e| (e, Vec::new()))?;
    let mut diagnostics = Vec::new();
    let mut bases = Vec::new();
    let mut states = Vec::new();
    let mut groebner = Vec::new();
    let mut failure = None;
    for a in per_state {
        diagnostics.extend(a.diagnostics);
        bases.push(a.basis);
        groebner.push(a.elapsed);
        match a.solution {
            Ok(s) => states.push(s),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(e) = failure {
        return Err((e, diagnostics));
    }
    let values: Vec<Rational> = states.iter().map(|s| s.value.representative()).collect();
    let strategies = recover_strategies(g, kappa, &values, beta, opts.mode).map_err(|e| (e, diagnostics.clone()))?;
    for (st, (x, y, k)) in states.iter_mut().zip(strategies) {
        st.row_strategy = x;
        st.column_strategy = y;
        st.from_kernel = k;
    }
    let res = residual(g, &values, beta, opts.mode).map_err(|e| (e.into(), diagnostics.clone()))?;
    let allowed = &opts.precision * Rational::from_integer(10.into());
    if res > allowed {
        diagnostics.push(format!("residual {} exceeds {}", to_decimal_string(&res, 12), fmt_rational(&allowed)));
        return Err((AlgSolveError::NoRoot { state: 0 }, diagnostics));
    }
    Ok(Attempt { system, bases, states, residual: res, diagnostics, groebner })
}

/// Value iteration on the shifted game, then kernel inference, tightening
/// the tolerance while the inferred kernel is ambiguous.
fn estimate_and_kernel(
    shifted: &StochasticGame,
    beta: &DiscountFactor,
    opts: &SolveOptions,
    diagnostics: &mut Vec<String>,
) -> Result<(ValueEstimate, KernelSelection, bool), AlgSolveError> {
    let mut tol = (&opts.precision / pow10(3)).min(parse_decimal("1e-12").expect("literal"));
    let mut tries = 0;
    loop {
        let est = value_iteration(shifted, beta, opts.mode, &tol, &opts.iteration)?;
        match infer_kernel(shifted, beta, &est) {
            Ok(k) => return Ok((est, k, true)),
            Err(PolySysError::Ambiguous { candidate, states }) => {
                tries += 1;
                if tries > 3 {
                    diagnostics.push(format!(
                        "kernel near a support change in states {states:?}; proceeding with {candidate}"
                    ));
                    return Ok((est, candidate, false));
                }
                tol /= pow10(8);
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Solves the discounted game exactly up to the algebraic representation of
/// the values.
pub fn solve_discounted(g: &StochasticGame, beta: &Rational, opts: &SolveOptions) -> Result<SolveReport, AlgSolveError> {
    if !opts.precision.is_positive() {
        return Err(AlgSolveError::InvalidPrecision);
    }
    let start = Instant::now();
    let beta_f = DiscountFactor::new(beta.clone())?;
    let (shifted, shift) = shift_rewards(g);
    let mut diagnostics = Vec::new();
    let mut timings = Timings::default();

    let t = Instant::now();
    let (est, kappa0, confident) = estimate_and_kernel(&shifted, &beta_f, opts, &mut diagnostics)?;
    timings.value_iteration = t.elapsed();
    let targets: Vec<Rational> = est
        .values
        .iter()
        .map(|v| unshift_value(v, &shift.c, opts.mode, beta).expect("beta below one"))
        .collect();
    let bound = est.error_bound.clone();

    let mut tried = vec![kappa0.clone()];
    let mut last = String::new();
    let mut candidate = Some(kappa0);
    let mut fallback: Option<std::vec::IntoIter<KernelSelection>> = None;
    let t = Instant::now();
    while let Some(kappa) = candidate.take() {
        match attempt(g, &kappa, &beta_f, &targets, &bound, opts) {
            Ok(a) => {
                diagnostics.extend(a.diagnostics);
                timings.kernel = t.elapsed();
                timings.groebner = a.groebner;
                timings.total = start.elapsed();
                return Ok(SolveReport {
                    beta: beta.clone(),
                    mode: opts.mode,
                    precision: opts.precision.clone(),
                    shift: shift.c,
                    estimate: est,
                    kappa_inferred: confident && tried.len() == 1,
                    kappa,
                    system: a.system,
                    bases: a.bases,
                    states: a.states,
                    residual: a.residual,
                    diagnostics,
                    timings,
                });
            }
            Err((e, diags)) => {
                diagnostics.extend(diags);
                diagnostics.push(format!("kernel {kappa} rejected: {e}"));
                last = e.to_string();
            }
        }
        if fallback.is_none() {
            let slack = &bound * Rational::from_integer(4.into()) + &opts.precision;
            let sels = plausible_selections(&shifted, &beta_f, &est, &slack)?;
            fallback = Some(sels.into_iter().take(opts.max_fallback).collect::<Vec<_>>().into_iter());
        }
        let iter = fallback.as_mut().expect("set above");
        candidate = iter.find(|k| !tried.contains(k));
        if let Some(k) = &candidate {
            tried.push(k.clone());
        }
    }
    Err(AlgSolveError::KernelSearchExhausted { tried: tried.len(), last })
}
