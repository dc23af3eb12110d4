//! Limiting-average values from the normalized certificates at `z0 = 1`,
//! with the kernel taken from a discount schedule approaching one.

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::alg_solve::{decimal_in, isolate_real_roots, refine, AlgSolveError, AlgebraicValue, IsolatingInterval};
use crate::arith::multipoly::{MultiPoly, TermOrder};
use crate::arith::rational::{parse_decimal, pow10, Rational};
use crate::arith::unipoly::UniPoly;
use crate::arith::PolyError;
use crate::game::{shift_rewards, Mode, StochasticGame};
use crate::groebner::{bivariate_candidates, buchberger, GroebnerError};
use crate::polysys::{build_system, infer_kernel, KernelSelection, PolySysError};
use crate::shapley::{value_iteration, DiscountFactor, IterationOptions, ShapleyError, ValueEstimate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("kernel did not stabilize on the schedule up to k = {k_max}")]
    NotStabilized { k_max: u32 },
    #[error("state {state}: certificate vanishes at z0 = 1")]
    DegenerateLimit { state: usize },
    #[error("state {state}: {count} limit roots within the drift allowance up to k = {k_max}")]
    Ambiguous { state: usize, count: usize, k_max: u32 },
    #[error("state {state}: no limit root near the estimate")]
    NoRoot { state: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Shapley(#[from] ShapleyError),
    #[error(transparent)]
    PolySys(#[from] PolySysError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
    #[error(transparent)]
    Solve(#[from] AlgSolveError),
}

impl From<PolyError> for LimitError {
    fn from(e: PolyError) -> Self {
        LimitError::Solve(e.into())
    }
}

/// Discounts `1 - 10^-k` for `k = k0..=k_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaSchedule {
    pub k0: u32,
    pub k_max: u32,
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule { k0: 1, k_max: 6 }
    }
}

impl BetaSchedule {
    pub fn new(k0: u32, k_max: u32) -> Result<Self, LimitError> {
        if k0 == 0 || k0 > k_max {
            return Err(LimitError::InvalidSchedule(format!("need 1 <= k0 <= k_max, got {k0}..{k_max}")));
        }
        Ok(BetaSchedule { k0, k_max })
    }

    pub fn beta(k: u32) -> Rational {
        Rational::one() - pow10(k).recip()
    }

    pub fn points(&self) -> Vec<(u32, Rational)> {
        (self.k0..=self.k_max).map(|k| (k, Self::beta(k))).collect()
    }
}

/// Drift envelope `C (1-beta)^(1/M)` at `beta = 1 - 10^-k`, rounded up to
/// `C 10^-floor(k/M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftAllowance {
    pub c: Rational,
    pub m: u32,
}

impl Default for DriftAllowance {
    fn default() -> Self {
        DriftAllowance { c: Rational::from_integer(10.into()), m: 4 }
    }
}

impl DriftAllowance {
    pub fn at(&self, k: u32) -> Rational {
        &self.c / pow10(k / self.m.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulePoint {
    pub k: u32,
    pub beta: Rational,
    /// Estimate for the shifted game, normalized.
    pub estimate: ValueEstimate,
    pub kappa: KernelSelection,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableKernel {
    pub kappa: KernelSelection,
    /// Number of consecutive largest schedule points that agree.
    pub agreement: usize,
    pub points: Vec<SchedulePoint>,
}

fn estimate_point(shifted: &StochasticGame, k: u32, iteration: &IterationOptions) -> Result<SchedulePoint, LimitError> {
    let beta = BetaSchedule::beta(k);
    let b = DiscountFactor::new(beta.clone())?;
    let mut tol = parse_decimal("1e-15").expect("literal");
    let mut tries = 0;
    loop {
        let est = value_iteration(shifted, &b, Mode::Normalized, &tol, iteration)?;
        match infer_kernel(shifted, &b, &est) {
            Ok(kappa) => return Ok(SchedulePoint { k, beta, estimate: est, kappa, ambiguous: false }),
            Err(PolySysError::Ambiguous { candidate, .. }) if tries >= 2 => {
                return Ok(SchedulePoint { k, beta, estimate: est, kappa: candidate, ambiguous: true })
            }
            Err(PolySysError::Ambiguous { .. }) => {
                tries += 1;
                tol /= pow10(8);
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Infers the kernel at each schedule point and keeps the one shared by the
/// largest discounts, which must agree on at least two consecutive points.
pub fn stable_kernel(
    g: &StochasticGame,
    schedule: &BetaSchedule,
    iteration: &IterationOptions,
) -> Result<StableKernel, LimitError> {
    let (shifted, _) = shift_rewards(g);
    let points: Vec<SchedulePoint> = (schedule.k0..=schedule.k_max)
        .into_par_iter()
        .map(|k| estimate_point(&shifted, k, iteration))
        .collect::<Result<_, _>>()?;
    let last = &points.last().expect("nonempty schedule").kappa;
    let agreement = points.iter().rev().take_while(|p| &p.kappa == last).count();
    if agreement < 2 {
        return Err(LimitError::NotStabilized { k_max: schedule.k_max });
    }
    Ok(StableKernel { kappa: last.clone(), agreement, points })
}

/// Divides out the largest power of `1 - z0` and sets `z0 = 1`.
pub fn limit_polynomial(g: &MultiPoly, s: usize) -> Result<(u32, UniPoly), PolyError> {
    let n = g.nvars();
    let one_minus = &MultiPoly::one(n) - &MultiPoly::var(n, 0);
    let (l, reduced) = g.content_power(&one_minus)?;
    let at_one = reduced.substitute(0, &Rational::one())?.to_univariate(s)?;
    if at_one.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    Ok((l, at_one.primitive()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitOptions {
    pub precision: Rational,
    pub schedule: BetaSchedule,
    /// Largest `k` the schedule may be extended to on ambiguity.
    pub k_cap: u32,
    pub drift: DriftAllowance,
    pub iteration: IterationOptions,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            precision: parse_decimal("1e-9").expect("literal"),
            schedule: BetaSchedule::default(),
            k_cap: 10,
            drift: DriftAllowance::default(),
            iteration: IterationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitState {
    /// Normalized certificate `g_s(z0, z_s)`, integer-cleared.
    pub certificate: MultiPoly,
    /// Power of `1 - z0` divided out before setting `z0 = 1`.
    pub power: u32,
    pub value: AlgebraicValue,
    /// Whether `|value - estimate(k)| <= bound(k) + drift(k)` held at every
    /// schedule point from the stable run.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitReport {
    pub shift: Rational,
    pub kernel: StableKernel,
    pub k_max: u32,
    pub drift: DriftAllowance,
    pub states: Vec<LimitState>,
    pub diagnostics: Vec<String>,
}

impl LimitReport {
    pub fn values(&self) -> Vec<Rational> {
        self.states.iter().map(|s| s.value.representative()).collect()
    }
}

enum StateOutcome {
    Done(LimitState),
    Ambiguous(usize),
}

fn solve_limit_state(
    certificates: &[MultiPoly],
    s: usize,
    stable: &StableKernel,
    shift: &Rational,
    opts: &LimitOptions,
    drift_k: u32,
    diagnostics: &mut Vec<String>,
) -> Result<StateOutcome, LimitError> {
    let last = stable.points.last().expect("nonempty");
    let target = &last.estimate.values[s] - shift;
    let window = &last.estimate.error_bound + opts.drift.at(drift_k);
    let mut worst_ambiguity = None;
    for cert in certificates {
        let (power, poly) = match limit_polynomial(cert, s + 1) {
            Ok(r) => r,
            Err(_) => {
                diagnostics.push(format!("state {}: a certificate vanishes at z0 = 1", s + 1));
                continue;
            }
        };
        let sqfree = poly.squarefree_part()?;
        let roots = isolate_real_roots(&sqfree)?;
        let lo = &target - &window;
        let hi = &target + &window;
        let near: Vec<IsolatingInterval> = roots
            .iter()
            .map(|iv| refine(&sqfree, iv, &window))
            .filter(|iv| match &iv.exact {
                Some(r) => &lo <= r && r <= &hi,
                None => iv.lo < hi && lo < iv.hi,
            })
            .collect();
        match near.len() {
            0 => continue,
            1 => {
                let iv = refine(&sqfree, &near[0], &opts.precision);
                let decimal = decimal_in(&iv, &opts.precision);
                let value = AlgebraicValue { state: s + 1, poly: sqfree, interval: iv, decimal, mode: Mode::Normalized };
                let v = value.representative();
                let consistent = stable.points.iter().rev().take(stable.agreement).all(|p| {
                    let est = &p.estimate.values[s] - shift;
                    let gap = if v > est { &v - &est } else { &est - &v };
                    gap <= &p.estimate.error_bound + opts.drift.at(p.k) + &opts.precision
                });
                if !consistent {
                    diagnostics.push(format!("state {}: limit value outside the drift envelope at some k", s + 1));
                }
                return Ok(StateOutcome::Done(LimitState { certificate: cert.clone(), power, value, consistent }));
            }
            n => worst_ambiguity = Some(n),
        }
    }
    match worst_ambiguity {
        Some(n) => Ok(StateOutcome::Ambiguous(n)),
        None => Err(LimitError::NoRoot { state: s + 1 }),
    }
}

/// Limiting-average values of every state.
pub fn solve_limit(g: &StochasticGame, opts: &LimitOptions) -> Result<LimitReport, LimitError> {
    if opts.precision <= Rational::zero() {
        return Err(AlgSolveError::InvalidPrecision.into());
    }
    let (_, shift) = shift_rewards(g);
    let mut schedule = opts.schedule.clone();
    let mut diagnostics = Vec::new();
    loop {
        let stable = stable_kernel(g, &schedule, &opts.iteration)?;
        let system = build_system(g, &stable.kappa, Mode::Normalized)?;
        let n = system.nvars();
        let certs: Vec<Vec<MultiPoly>> = (0..g.num_states())
            .into_par_iter()
            .map(|s| {
                let order = TermOrder::for_state(n, s + 1);
                let basis = buchberger(&system.polys, &order)?;
                let cands = bivariate_candidates(&basis, s + 1);
                if cands.is_empty() {
                    return Err(GroebnerError::NoBivariate { state: s + 1 });
                }
                Ok(cands.into_iter().map(|c| c.primitive(&order)).collect::<Vec<_>>())
            })
            .collect::<Result<_, _>>()?;
        let mut states = Vec::new();
        let mut ambiguous = None;
        for (s, cs) in certs.iter().enumerate() {
            match solve_limit_state(cs, s, &stable, &shift.c, opts, schedule.k_max, &mut diagnostics)? {
                StateOutcome::Done(st) => states.push(st),
                StateOutcome::Ambiguous(count) => {
                    ambiguous = Some((s + 1, count));
                    break;
                }
            }
        }
        match ambiguous {
            None => {
                for p in stable.points.iter().filter(|p| p.ambiguous) {
                    diagnostics.push(format!("k = {}: kernel close to a support change", p.k));
                }
                return Ok(LimitReport {
                    shift: shift.c,
                    k_max: schedule.k_max,
                    kernel: stable,
                    drift: opts.drift.clone(),
                    states,
                    diagnostics,
                });
            }
            Some((state, count)) if schedule.k_max >= opts.k_cap => {
                return Err(LimitError::Ambiguous { state, count, k_max: schedule.k_max });
            }
            Some((state, count)) => {
                diagnostics.push(format!(
                    "state {state}: {count} roots within the allowance at k_max = {}, extending",
                    schedule.k_max
                ));
                schedule.k_max += 1;
            }
        }
    }
}
