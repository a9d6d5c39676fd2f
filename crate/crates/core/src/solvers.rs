//! Fixed-point engines.
//!
//! * [`fixed_point`]: plain iteration `x <- T(x)` from the origin.
//! * [`solve_canonical`]: normalized iteration
//!   `p <- (p_bar / ||T(p)||_a) T(p)` for the max-min utility problem
//!   `max c  s.t.  p = c T(p), ||p||_a <= p_bar`.
//! * [`conditional_eigen`]: `x <- T(x)/||T(x)||_a` for `T(x) = lambda x`,
//!   `||x||_a = 1`, on either an interference mapping or its asymptotic
//!   mapping.
//! * [`spectral_radius`]: Collatz-Wielandt bracketing of a nonnegative matrix,
//!   or the power-budget ladder `lambda_pbar = 1/U(p_bar)` which decreases to
//!   `rho(T_inf)` as the budget grows.

use serde::{Deserialize, Serialize};

use crate::asymptotic::AsymptoticMapping;
use crate::mappings::InterferenceMapping;
use crate::norms::{MonotoneNorm, NonnegVector, PositiveVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// `fixed_point` gives up once `||x||_inf` exceeds this.
    pub growth_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            growth_guard: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be > 0, found {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if !(self.growth_guard > 0.0) {
            return Err(Error::InvalidParameter("growth_guard must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Tolerance,
    MaxIterations,
    DivergenceGuard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub stop: StopReason,
}

impl SolveReport {
    fn new(iterations: usize, residual: f64, stop: StopReason) -> Self {
        Self {
            iterations,
            residual,
            converged: stop == StopReason::Tolerance,
            stop,
        }
    }
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Iterates `x <- T(x)` from `x0` (the origin by default).
///
/// Converges when `||x - T(x)||_inf / max(1, ||x||_inf) <= tol`. The returned
/// vector is the iterate whose residual was measured. Divergence and the
/// iteration cap are reported in the [`SolveReport`], not as errors.
pub fn fixed_point(
    m: &dyn InterferenceMapping,
    x0: Option<&NonnegVector>,
    cfg: &SolverConfig,
) -> Result<(NonnegVector, SolveReport)> {
    cfg.validate()?;
    let n = m.dim();
    let mut x = match x0 {
        Some(x0) if x0.dim() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.dim(),
            })
        }
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let tx = m.apply(&x);
        if tx.iter().any(|v| !v.is_finite()) {
            return Ok((
                NonnegVector::from_clamped(x)?,
                SolveReport::new(it, residual, StopReason::DivergenceGuard),
            ));
        }
        residual = sup_diff(&tx, &x) / sup(&x).max(1.0);
        if residual <= cfg.tol {
            return Ok((
                NonnegVector::from_clamped(x)?,
                SolveReport::new(it, residual, StopReason::Tolerance),
            ));
        }
        x = tx;
        if sup(&x) > cfg.growth_guard {
            return Ok((
                NonnegVector::from_clamped(x)?,
                SolveReport::new(it, residual, StopReason::DivergenceGuard),
            ));
        }
    }
    Ok((
        NonnegVector::from_clamped(x)?,
        SolveReport::new(cfg.max_iter, residual, StopReason::MaxIterations),
    ))
}

/// Solution of the canonical utility problem at one power budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalSolution {
    /// Optimal power vector `P(p_bar)`, with `||p_star||_a = p_bar`.
    pub p_star: PositiveVector,
    /// Optimal utility `U(p_bar)`.
    pub c_star: f64,
    pub report: SolveReport,
}

/// Consecutive sign-flipping steps before switching to damping.
const OSCILLATION_RUN: usize = 3;

/// Watches successive steps of a normalized iteration. Periodic mappings make
/// the iterate flip back and forth; once that is seen, callers average each
/// step with the current iterate, which keeps the fixed points and kills the
/// oscillation.
#[derive(Default)]
struct Damper {
    prev_step: Vec<f64>,
    run: usize,
    damped: bool,
}

impl Damper {
    /// Records the step `next - cur`; returns whether to damp it.
    fn update(&mut self, cur: &[f64], next: &[f64]) -> bool {
        if self.damped {
            return true;
        }
        let step: Vec<f64> = next.iter().zip(cur).map(|(a, b)| a - b).collect();
        let dot: f64 = step.iter().zip(&self.prev_step).map(|(a, b)| a * b).sum();
        self.run = if dot < 0.0 { self.run + 1 } else { 0 };
        self.damped = self.run >= OSCILLATION_RUN;
        self.prev_step = step;
        self.damped
    }
}

/// Solves `max c  s.t.  p = c T(p), ||p||_a <= p_bar` by the normalized
/// iteration, started from the uniform vector on the budget sphere.
///
/// The iterate is renormalized every step so `||p_star||_a = p_bar` up to
/// rounding; convergence means `||p - c T(p)||_inf / ||p||_inf <= tol` with
/// `c = p_bar / ||T(p)||_a`.
pub fn solve_canonical(
    m: &dyn InterferenceMapping,
    norm_a: &MonotoneNorm,
    p_bar: f64,
    cfg: &SolverConfig,
) -> Result<CanonicalSolution> {
    cfg.validate()?;
    if !(p_bar > 0.0 && p_bar.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power budget must be > 0, found {p_bar}"
        )));
    }
    let n = m.dim();
    norm_a.check_dim(n)?;
    let ones = vec![1.0; n];
    let scale = p_bar / norm_a.eval_slice(&ones);
    let mut p: Vec<f64> = ones.iter().map(|v| v * scale).collect();
    let mut residual = f64::INFINITY;
    let mut c = f64::NAN;
    let mut damper = Damper::default();
    for it in 1..=cfg.max_iter {
        let tp = m.apply(&p);
        c = p_bar / norm_a.eval_slice(&tp);
        let next: Vec<f64> = tp.iter().map(|v| c * v).collect();
        residual = sup_diff(&p, &next) / sup(&p);
        if residual <= cfg.tol {
            return Ok(CanonicalSolution {
                p_star: PositiveVector::new(p)?,
                c_star: c,
                report: SolveReport::new(it, residual, StopReason::Tolerance),
            });
        }
        p = if damper.update(&p, &next) {
            let avg: Vec<f64> = next.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).collect();
            let k = p_bar / norm_a.eval_slice(&avg);
            avg.into_iter().map(|v| k * v).collect()
        } else {
            next
        };
    }
    Ok(CanonicalSolution {
        p_star: PositiveVector::new(p)?,
        c_star: c,
        report: SolveReport::new(cfg.max_iter, residual, StopReason::MaxIterations),
    })
}

/// Normalized eigenvector `x` (`||x||_a = 1`) and eigenvalue `lambda >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub x: NonnegVector,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenOutcome {
    pub pair: EigenPair,
    pub report: SolveReport,
    /// The mapping sent an iterate to the origin twice (once after a
    /// perturbed restart); `lambda` is then reported as 0.
    pub zero_direction: bool,
}

/// What [`conditional_eigen`] iterates on.
#[derive(Clone, Copy)]
pub enum EigenTarget<'a> {
    Asymptotic(&'a AsymptoticMapping),
    Mapping(&'a dyn InterferenceMapping),
}

impl EigenTarget<'_> {
    fn dim(&self) -> usize {
        match self {
            EigenTarget::Asymptotic(a) => a.dim(),
            EigenTarget::Mapping(m) => m.dim(),
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            EigenTarget::Asymptotic(a) => a.apply(x),
            EigenTarget::Mapping(m) => Ok(m.apply(x)),
        }
    }
}

const RESTART_EPS: f64 = 1e-9;

/// Solves `T(x) = lambda x`, `||x||_a = 1` by `x <- T(x)/||T(x)||_a` from the
/// normalized all-ones vector, stopping once `||T(x) - lambda x||_inf <= tol * lambda`.
pub fn conditional_eigen(target: EigenTarget<'_>, norm_a: &MonotoneNorm, cfg: &SolverConfig) -> Result<EigenOutcome> {
    conditional_eigen_from(target, norm_a, None, cfg)
}

/// [`conditional_eigen`] from a caller-supplied start; only its direction
/// matters.
pub fn conditional_eigen_from(
    target: EigenTarget<'_>,
    norm_a: &MonotoneNorm,
    start: Option<&NonnegVector>,
    cfg: &SolverConfig,
) -> Result<EigenOutcome> {
    cfg.validate()?;
    let n = target.dim();
    norm_a.check_dim(n)?;
    let normalize = |v: Vec<f64>| -> Vec<f64> {
        let s = norm_a.eval_slice(&v);
        v.into_iter().map(|t| t / s).collect()
    };
    let mut x = match start {
        Some(s) if s.dim() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.dim(),
            })
        }
        Some(s) if sup(s) > 0.0 => normalize(s.to_vec()),
        _ => normalize(vec![1.0; n]),
    };
    let mut restarted = false;
    let mut residual = f64::INFINITY;
    let mut damper = Damper::default();
    for it in 1..=cfg.max_iter {
        let y = target.apply(&x)?;
        let lambda = norm_a.eval_slice(&y);
        if lambda == 0.0 {
            if restarted {
                return Ok(EigenOutcome {
                    pair: EigenPair {
                        x: NonnegVector::from_clamped(x)?,
                        lambda: 0.0,
                    },
                    report: SolveReport::new(it, 0.0, StopReason::Tolerance),
                    zero_direction: true,
                });
            }
            restarted = true;
            x = normalize(x.iter().map(|v| v + RESTART_EPS).collect());
            continue;
        }
        residual = y
            .iter()
            .zip(&x)
            .fold(0.0_f64, |m, (t, v)| m.max((t - lambda * v).abs()));
        if residual <= cfg.tol * lambda {
            return Ok(EigenOutcome {
                pair: EigenPair {
                    x: NonnegVector::from_clamped(x)?,
                    lambda,
                },
                report: SolveReport::new(it, residual, StopReason::Tolerance),
                zero_direction: false,
            });
        }
        let next: Vec<f64> = y.into_iter().map(|t| t / lambda).collect();
        x = if damper.update(&x, &next) {
            normalize(next.iter().zip(&x).map(|(t, v)| t + v).collect())
        } else {
            next
        };
    }
    let lambda = norm_a.eval_slice(&target.apply(&x)?);
    Ok(EigenOutcome {
        pair: EigenPair {
            x: NonnegVector::from_clamped(x)?,
            lambda,
        },
        report: SolveReport::new(cfg.max_iter, residual, StopReason::MaxIterations),
        zero_direction: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetLadderConfig {
    pub budgets: Vec<f64>,
    pub rtol: f64,
    #[serde(skip)]
    pub norm: MonotoneNorm,
    pub solver: SolverConfig,
}

impl Default for BudgetLadderConfig {
    fn default() -> Self {
        Self {
            budgets: (2..=15).map(|e| 10f64.powi(e)).collect(),
            rtol: 1e-6,
            norm: MonotoneNorm::max(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralMethod {
    /// Collatz-Wielandt bracketing; needs an exact linear mapping.
    LinearPower,
    /// `1/U(p_bar)` along increasing budgets; needs the base mapping.
    BudgetLadder(BudgetLadderConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub rho: f64,
    pub method: &'static str,
    pub iterations: usize,
    /// Certified Collatz-Wielandt bracket (linear-power only).
    pub lower: f64,
    pub upper: f64,
    /// The bracket stagnated above the width target; `rho` is its upper end.
    pub flagged: bool,
    /// `(p_bar, 1/U(p_bar))` rungs (budget-ladder only).
    pub ladder: Vec<(f64, f64)>,
    /// Ladder values never increased from one rung to the next.
    pub ladder_monotone: bool,
}

const CW_MAX_ITER: usize = 100_000;
const CW_STALL: usize = 2_000;

/// Collatz-Wielandt bracketing of `rho(A)` for a nonnegative matrix.
///
/// Iterates on `sI + A` with `s` the largest row sum: positive vectors stay
/// positive, the Perron root shifts by exactly `s`, and periodic matrices no
/// longer oscillate. At each positive iterate `x`,
/// `min_i (Ax)_i/x_i <= rho(A) <= max_i (Ax)_i/x_i`.
fn collatz_wielandt(a: &crate::Matrix) -> SpectralEstimate {
    let n = a.nrows();
    let shift = (0..n).map(|i| a.row(i).sum()).fold(0.0_f64, f64::max);
    let done = |rho: f64, lower: f64, upper: f64, iterations: usize, flagged: bool| SpectralEstimate {
        rho,
        method: "linear-power",
        iterations,
        lower,
        upper,
        flagged,
        ladder: Vec::new(),
        ladder_monotone: true,
    };
    if shift == 0.0 {
        return done(0.0, 0.0, 0.0, 0, false);
    }
    let mut x = vec![1.0 / n as f64; n];
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut best_width = f64::INFINITY;
    let mut since_progress = 0;
    for it in 1..=CW_MAX_ITER {
        let y = crate::mappings::mat_vec(a, &x);
        let (mut l, mut h) = (f64::INFINITY, 0.0_f64);
        for (yi, xi) in y.iter().zip(&x) {
            if *xi > 0.0 {
                let r = yi / xi;
                l = l.min(r);
                h = h.max(r);
            }
        }
        lo = lo.max(l);
        hi = hi.min(h);
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if width < 1e-9 * mid.max(1.0) {
            return done(mid, lo, hi, it, false);
        }
        if width < best_width * (1.0 - 1e-12) {
            best_width = width;
            since_progress = 0;
        } else {
            since_progress += 1;
            if since_progress >= CW_STALL {
                return done(hi, lo, hi, it, true);
            }
        }
        let z: Vec<f64> = y.iter().zip(&x).map(|(yi, xi)| yi + shift * xi).collect();
        let s: f64 = z.iter().sum();
        x = z.into_iter().map(|v| v / s).collect();
    }
    done(hi, lo, hi, CW_MAX_ITER, true)
}

/// Spectral radius of an asymptotic mapping.
pub fn spectral_radius(
    a: &AsymptoticMapping,
    method: &SpectralMethod,
    base: Option<&dyn InterferenceMapping>,
) -> Result<SpectralEstimate> {
    match method {
        SpectralMethod::LinearPower => {
            let m = a.matrix().ok_or(Error::NotLinear)?;
            Ok(collatz_wielandt(m))
        }
        SpectralMethod::BudgetLadder(cfg) => {
            let base = base.ok_or(Error::MissingBaseMapping)?;
            if base.dim() != a.dim() {
                return Err(Error::DimensionMismatch {
                    expected: a.dim(),
                    found: base.dim(),
                });
            }
            budget_ladder(base, cfg)
        }
    }
}

fn budget_ladder(base: &dyn InterferenceMapping, cfg: &BudgetLadderConfig) -> Result<SpectralEstimate> {
    if cfg.budgets.len() < 2 || cfg.budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "budget ladder needs >= 2 increasing budgets".into(),
        ));
    }
    let mut ladder: Vec<(f64, f64)> = Vec::with_capacity(cfg.budgets.len());
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    for &p_bar in &cfg.budgets {
        let sol = solve_canonical(base, &cfg.norm, p_bar, &cfg.solver)?;
        iterations += sol.report.iterations;
        if !sol.report.converged {
            return Err(Error::NoConvergence {
                iterations: sol.report.iterations,
                residual: sol.report.residual,
            });
        }
        let lambda = 1.0 / sol.c_star;
        if let Some(&(_, prev)) = ladder.last() {
            change = (prev - lambda).abs() / lambda;
            ladder.push((p_bar, lambda));
            if change < cfg.rtol {
                let ladder_monotone = ladder.windows(2).all(|w| w[1].1 <= w[0].1);
                return Ok(SpectralEstimate {
                    rho: lambda,
                    method: "budget-ladder",
                    iterations,
                    lower: f64::NAN,
                    upper: ladder[0].1,
                    flagged: false,
                    ladder,
                    ladder_monotone,
                });
            }
        } else {
            ladder.push((p_bar, lambda));
        }
    }
    Err(Error::LadderNonConvergence { change })
}
