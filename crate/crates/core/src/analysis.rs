//! Feasibility verdicts, utility and energy-efficiency sweeps, and
//! bottleneck ranking built on the solvers.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotic::{exact_asymptotic_load, AsymptoticMapping};
use crate::mappings::{InterferenceMapping, LoadScenario};
use crate::norms::{norm_equivalence_alpha, MonotoneNorm, NonnegVector};
use crate::solvers::{
    conditional_eigen, fixed_point, solve_canonical, spectral_radius, BudgetLadderConfig, EigenOutcome, EigenTarget,
    SolveReport, SolverConfig, SpectralEstimate, SpectralMethod, StopReason,
};
use crate::{Error, Result};

/// `|rho - 1|` below this is too close to call.
pub const NEAR_CRITICAL_BAND: f64 = 1e-6;

/// Relative slack allowed when checking the utility and efficiency bounds.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub rho: f64,
    /// `rho < 1`.
    pub feasible: bool,
    /// `|rho - 1| < NEAR_CRITICAL_BAND`; the boolean verdict is not reliable.
    pub near_critical: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<NonnegVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_report: Option<SolveReport>,
    pub spectral: SpectralEstimate,
}

/// Decides whether `m` has a fixed point from `rho(T_inf)`.
///
/// `a` must be the asymptotic mapping of `m`. Exact linear mappings use
/// Collatz-Wielandt bracketing; numeric ones fall back to the budget ladder
/// on `m`. With `compute_fp`, a feasible verdict also carries the fixed point.
pub fn feasibility_check(
    m: &dyn InterferenceMapping,
    a: &AsymptoticMapping,
    compute_fp: bool,
    cfg: &SolverConfig,
) -> Result<FeasibilityVerdict> {
    if a.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: a.dim(),
        });
    }
    let spectral = match a {
        AsymptoticMapping::Linear(_) => spectral_radius(a, &SpectralMethod::LinearPower, None)?,
        AsymptoticMapping::Numeric { .. } => spectral_radius(
            a,
            &SpectralMethod::BudgetLadder(BudgetLadderConfig {
                solver: *cfg,
                ..Default::default()
            }),
            Some(m),
        )?,
    };
    let rho = spectral.rho;
    let feasible = rho < 1.0;
    let near_critical = (rho - 1.0).abs() < NEAR_CRITICAL_BAND;
    let (fixed_point, fixed_point_report) = if feasible && compute_fp {
        let (x, report) = fixed_point(m, None, cfg)?;
        (Some(x), Some(report))
    } else {
        (None, None)
    };
    Ok(FeasibilityVerdict {
        rho,
        feasible,
        near_critical,
        margin: 1.0 - rho,
        fixed_point,
        fixed_point_report,
        spectral,
    })
}

/// Location test: `m` has a fixed point with `||x|| <= 1` iff the conditional
/// eigenvalue `lambda'` of `T(x') = lambda' x'`, `||x'|| = 1`, is at most 1.
pub fn unit_ball_fixed_point_test(
    m: &dyn InterferenceMapping,
    norm: &MonotoneNorm,
    cfg: &SolverConfig,
) -> Result<(EigenOutcome, bool)> {
    let out = conditional_eigen(EigenTarget::Mapping(m), norm, cfg)?;
    if !out.report.converged {
        return Err(Error::NoConvergence {
            iterations: out.report.iterations,
            residual: out.report.residual,
        });
    }
    let inside = out.pair.lambda <= 1.0;
    Ok((out, inside))
}

/// `||T(0)||_a / lambda_inf`: budgets at or below it are noise limited,
/// above it interference limited.
pub fn transition_point(m: &dyn InterferenceMapping, norm_a: &MonotoneNorm, lambda_inf: f64) -> Result<f64> {
    if !(lambda_inf > 0.0 && lambda_inf.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "transition point needs a positive spectral radius, found {lambda_inf}"
        )));
    }
    norm_a.check_dim(m.dim())?;
    Ok(norm_a.eval_slice(&m.apply(&vec![0.0; m.dim()])) / lambda_inf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LowPower,
    HighPower,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::LowPower => "low-power",
            Regime::HighPower => "high-power",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_bar: f64,
    pub utility: f64,
    pub power: Vec<f64>,
    pub ee: f64,
    pub utility_bound: f64,
    pub ee_bound: f64,
    pub regime: Regime,
    /// `None` when the canonical solve failed outright.
    pub report: Option<SolveReport>,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.report.is_some_and(|r| r.converged)
    }

    /// Status word for tabular output.
    pub fn status(&self) -> &'static str {
        match self.report {
            Some(r) => match r.stop {
                StopReason::Tolerance => "ok",
                StopReason::MaxIterations => "max-iterations",
                StopReason::DivergenceGuard => "divergence-guard",
            },
            None => "error",
        }
    }

    /// `lambda_pbar = 1/U(p_bar)`.
    pub fn lambda(&self) -> f64 {
        1.0 / self.utility
    }

    pub fn within_bounds(&self) -> bool {
        self.utility <= self.utility_bound * (1.0 + BOUND_SLACK) && self.ee <= self.ee_bound * (1.0 + BOUND_SLACK)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub lambda_inf: f64,
    /// Absent when `lambda_inf = 0`.
    pub transition_point: Option<f64>,
    pub alpha: f64,
    pub t0_norm_a: f64,
    pub t0_norm_b: f64,
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SweepResult {
    /// `sup U = 1/lambda_inf` (infinite when `lambda_inf = 0`).
    pub fn sup_utility(&self) -> f64 {
        1.0 / self.lambda_inf
    }

    /// `sup E = 1/||T(0)||_b`.
    pub fn sup_ee(&self) -> f64 {
        1.0 / self.t0_norm_b
    }
}

/// Solves the canonical problem on every budget of `grid` and evaluates
/// utility, power, `||.||_b`-energy efficiency and their upper bounds
/// `min{p_bar/||T(0)||_a, 1/lambda_inf}` and
/// `min{1/||T(0)||_b, alpha/(lambda_inf p_bar)}`.
///
/// Rows are solved in parallel and returned in grid order. A failed row is
/// kept and marked; the sweep carries on.
pub fn sweep(
    m: &dyn InterferenceMapping,
    lambda_inf: f64,
    norm_a: &MonotoneNorm,
    norm_b: &MonotoneNorm,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("power budget grid is empty".into()));
    }
    if grid.iter().any(|p| !(*p > 0.0 && p.is_finite())) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "power budget grid must be positive and strictly increasing".into(),
        ));
    }
    if !(lambda_inf >= 0.0 && lambda_inf.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid spectral radius {lambda_inf}")));
    }
    let n = m.dim();
    let alpha = norm_equivalence_alpha(norm_a, norm_b, n)?;
    let t0 = m.apply(&vec![0.0; n]);
    let t0_norm_a = norm_a.eval_slice(&t0);
    let t0_norm_b = norm_b.eval_slice(&t0);
    let (transition, note) = if lambda_inf > 0.0 {
        (Some(t0_norm_a / lambda_inf), None)
    } else {
        (
            None,
            Some(
                "spectral radius is 0: utility is unbounded, no transition point; every budget is low-power"
                    .to_string(),
            ),
        )
    };
    let inv_lambda = 1.0 / lambda_inf;

    let rows = grid
        .par_iter()
        .map(|&p_bar| {
            let utility_bound = (p_bar / t0_norm_a).min(inv_lambda);
            let ee_bound = (1.0 / t0_norm_b).min(alpha / (lambda_inf * p_bar));
            let regime = match transition {
                Some(pt) if p_bar > pt => Regime::HighPower,
                _ => Regime::LowPower,
            };
            match solve_canonical(m, norm_a, p_bar, cfg) {
                Ok(sol) => {
                    let ee = sol.c_star / norm_b.eval_slice(&sol.p_star);
                    SweepRow {
                        p_bar,
                        utility: sol.c_star,
                        power: sol.p_star.into_vec(),
                        ee,
                        utility_bound,
                        ee_bound,
                        regime,
                        report: Some(sol.report),
                    }
                }
                Err(_) => SweepRow {
                    p_bar,
                    utility: f64::NAN,
                    power: vec![f64::NAN; n],
                    ee: f64::NAN,
                    utility_bound,
                    ee_bound,
                    regime,
                    report: None,
                },
            }
        })
        .collect();

    Ok(SweepResult {
        lambda_inf,
        transition_point: transition,
        alpha,
        t0_norm_a,
        t0_norm_b,
        rows,
        note,
    })
}

/// Least-squares log-log slopes of utility and efficiency on one tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub points: usize,
    pub utility_slope: f64,
    pub ee_slope: f64,
    /// `|slope - expected|` for the utility and efficiency slopes.
    pub utility_deviation: f64,
    pub ee_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    /// Rows at least two decades below the transition point; expected
    /// slopes are 1 (utility) and 0 (efficiency).
    pub low: Option<TailFit>,
    /// Rows at least two decades above it; expected slopes 0 and -1.
    pub high: Option<TailFit>,
    /// `|1/U(p_max) - lambda_inf| / lambda_inf` at the largest budget.
    pub lambda_gap: f64,
    /// Tails without at least two points.
    pub insufficient: Vec<&'static str>,
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn fit_tail(rows: &[&SweepRow], expected_u: f64, expected_e: f64) -> Option<TailFit> {
    if rows.len() < 2 {
        return None;
    }
    let u: Vec<(f64, f64)> = rows.iter().map(|r| (r.p_bar.ln(), r.utility.ln())).collect();
    let e: Vec<(f64, f64)> = rows.iter().map(|r| (r.p_bar.ln(), r.ee.ln())).collect();
    let (us, es) = (slope(&u), slope(&e));
    Some(TailFit {
        points: rows.len(),
        utility_slope: us,
        ee_slope: es,
        utility_deviation: (us - expected_u).abs(),
        ee_deviation: (es - expected_e).abs(),
    })
}

/// Fits the low- and high-power tails of a sweep, taking rows at least two
/// decades away from the transition point.
pub fn scaling_diagnostics(result: &SweepResult) -> Result<ScalingReport> {
    let pt = result
        .transition_point
        .ok_or_else(|| Error::InvalidParameter("scaling diagnostics need a positive spectral radius".into()))?;
    let ok: Vec<&SweepRow> = result.rows.iter().filter(|r| r.converged()).collect();
    let last = ok
        .last()
        .ok_or_else(|| Error::InvalidParameter("no converged sweep rows".into()))?;
    let lambda_gap = (last.lambda() - result.lambda_inf).abs() / result.lambda_inf;
    let low_rows: Vec<&SweepRow> = ok.iter().copied().filter(|r| r.p_bar <= pt / 100.0).collect();
    let high_rows: Vec<&SweepRow> = ok.iter().copied().filter(|r| r.p_bar >= pt * 100.0).collect();
    let low = fit_tail(&low_rows, 1.0, 0.0);
    let high = fit_tail(&high_rows, 0.0, -1.0);
    let mut insufficient = Vec::new();
    if low.is_none() {
        insufficient.push("low-power");
    }
    if high.is_none() {
        insufficient.push("high-power");
    }
    Ok(ScalingReport {
        low,
        high,
        lambda_gap,
        insufficient,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub base_station: usize,
    pub load: f64,
    /// Load above 1: the station cannot serve its demand.
    pub overloaded: bool,
}

/// Base stations sorted by load, heaviest first (ties keep index order).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottleneckRanking {
    pub entries: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BottleneckOutcome {
    Ranked(BottleneckRanking),
    /// No fixed point (or too close to call); the verdict explains why.
    Unavailable(FeasibilityVerdict),
}

/// Ranks base stations by their fixed-point load.
pub fn bottleneck_ranking(s: &LoadScenario, cfg: &SolverConfig) -> Result<BottleneckOutcome> {
    let m = s.mapping()?;
    let a = exact_asymptotic_load(s)?;
    let verdict = feasibility_check(m.as_ref(), &a, true, cfg)?;
    let loads = match (&verdict.fixed_point, &verdict.fixed_point_report) {
        (Some(x), Some(r)) if r.converged && !verdict.near_critical => x.clone(),
        _ => return Ok(BottleneckOutcome::Unavailable(verdict)),
    };
    let mut entries: Vec<RankEntry> = loads
        .iter()
        .enumerate()
        .map(|(i, &load)| RankEntry {
            base_station: i,
            load,
            overloaded: load > 1.0,
        })
        .collect();
    entries.sort_by(|a, b| b.load.total_cmp(&a.load));
    Ok(BottleneckOutcome::Ranked(BottleneckRanking { entries }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::exact_asymptotic_affine;
    use crate::mappings::tests::{anti_diagonal, two_bs};
    use crate::mappings::{AffineMapping, LoadMapping};
    use crate::norms::PositiveVector;
    use crate::Matrix;

    fn scaled_anti_diagonal(c: f64, u: f64) -> AffineMapping {
        AffineMapping::new(
            Matrix::from_row_slice(2, 2, &[0.0, 0.5 * c, 0.5 * c, 0.0]),
            PositiveVector::new(vec![u, u]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let cfg = SolverConfig::default();
        let t = anti_diagonal();
        let v = feasibility_check(&t, &exact_asymptotic_affine(&t), true, &cfg).unwrap();
        assert!(v.feasible && !v.near_critical);
        let x = v.fixed_point.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-8 && (x[1] - 2.0).abs() < 1e-8);

        let t3 = scaled_anti_diagonal(3.0, 1.0);
        let v = feasibility_check(&t3, &exact_asymptotic_affine(&t3), true, &cfg).unwrap();
        assert!(!v.feasible);
        assert!((v.rho - 1.5).abs() < 1e-9);
        assert!(v.fixed_point.is_none());

        let s = two_bs();
        let load = LoadMapping::new(s.clone()).unwrap();
        let v = feasibility_check(&load, &exact_asymptotic_load(&s).unwrap(), false, &cfg).unwrap();
        let m12 = std::f64::consts::LN_2 * 1e6 * 0.5 / (100.0 * 1.8e5);
        assert!((v.rho - m12).abs() < 1e-9);
        assert!((v.margin - 0.9807).abs() < 1e-4);
    }

    #[test]
    fn near_critical_flag() {
        let cfg = SolverConfig::default();
        let t = scaled_anti_diagonal(2.0 * (1.0 + 1e-8), 1.0);
        let v = feasibility_check(&t, &exact_asymptotic_affine(&t), false, &cfg).unwrap();
        assert!(v.near_critical);
    }

    #[test]
    fn numeric_asymptotic_feasibility_uses_ladder() {
        let cfg = SolverConfig::default();
        let t = anti_diagonal();
        let a = AsymptoticMapping::numeric(std::sync::Arc::new(t.clone()), Default::default()).unwrap();
        let v = feasibility_check(&t, &a, false, &cfg).unwrap();
        assert_eq!(v.spectral.method, "budget-ladder");
        assert!((v.rho - 0.5).abs() < 1e-6);
    }

    #[test]
    fn unit_ball_examples() {
        let cfg = SolverConfig::default();
        let (out, inside) = unit_ball_fixed_point_test(&anti_diagonal(), &MonotoneNorm::max(), &cfg).unwrap();
        assert!((out.pair.lambda - 1.5).abs() < 1e-12);
        assert!(!inside);

        let small = scaled_anti_diagonal(1.0, 0.2);
        let (out, inside) = unit_ball_fixed_point_test(&small, &MonotoneNorm::max(), &cfg).unwrap();
        assert!((out.pair.lambda - 0.7).abs() < 1e-12);
        assert!(inside);
        let (fp, _) = fixed_point(&small, None, &cfg).unwrap();
        assert!((fp[0] - 0.4).abs() < 1e-9);

        let load = LoadMapping::new(two_bs()).unwrap();
        let (_, inside) = unit_ball_fixed_point_test(&load, &MonotoneNorm::max(), &cfg).unwrap();
        let (fp, _) = fixed_point(&load, None, &cfg).unwrap();
        assert_eq!(inside, MonotoneNorm::max().eval(&fp).unwrap() <= 1.0);
    }

    #[test]
    fn transition_point_examples() {
        let max = MonotoneNorm::max();
        assert_eq!(transition_point(&anti_diagonal(), &max, 0.5).unwrap(), 2.0);
        assert_eq!(
            transition_point(&scaled_anti_diagonal(1.0, 2.0), &max, 0.5).unwrap(),
            4.0
        );
        assert_eq!(transition_point(&anti_diagonal(), &max, 1.0).unwrap(), 1.0);
        assert!(transition_point(&anti_diagonal(), &max, 0.0).is_err());
    }

    #[test]
    fn sweep_examples() {
        let cfg = SolverConfig::default();
        let max = MonotoneNorm::max();
        let r = sweep(&anti_diagonal(), 0.5, &max, &max, &[0.1, 2.0, 1e3], &cfg).unwrap();
        assert_eq!(r.transition_point, Some(2.0));
        let u: Vec<f64> = r.rows.iter().map(|r| r.utility).collect();
        let closed = |p: f64| p / (0.5 * p + 1.0);
        for (row, &p) in r.rows.iter().zip(&[0.1, 2.0, 1e3]) {
            assert!((row.utility - closed(p)).abs() < 1e-12);
            assert!((row.ee - closed(p) / p).abs() < 1e-12);
            assert!(row.utility <= p.min(2.0) + 1e-12);
            assert!(row.within_bounds());
        }
        assert!((u[0] - 0.0952380952).abs() < 1e-9);
        assert_eq!(r.rows[1].regime, Regime::LowPower);
        assert_eq!(r.rows[2].regime, Regime::HighPower);
        assert!((r.rows[2].utility - 1.996).abs() < 1e-3);

        let r = sweep(&anti_diagonal(), 0.5, &max, &max, &[1e-6], &cfg).unwrap();
        assert!((r.rows[0].ee - 1.0).abs() < 1e-6);
        assert!(sweep(&anti_diagonal(), 0.5, &max, &max, &[1.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn sweep_zero_spectral_radius() {
        let cfg = SolverConfig::default();
        let c = AffineMapping::new(Matrix::zeros(2, 2), PositiveVector::new(vec![1.0, 2.0]).unwrap()).unwrap();
        let max = MonotoneNorm::max();
        let r = sweep(&c, 0.0, &max, &max, &[0.5, 5.0, 50.0], &cfg).unwrap();
        assert!(r.transition_point.is_none() && r.note.is_some());
        assert!(r
            .rows
            .iter()
            .all(|row| row.regime == Regime::LowPower && row.within_bounds()));
        assert!(r.sup_utility().is_infinite());
        assert!(scaling_diagnostics(&r).is_err());
    }

    #[test]
    fn scaling_examples() {
        let cfg = SolverConfig::default();
        let max = MonotoneNorm::max();
        let r = sweep(&anti_diagonal(), 0.5, &max, &max, &[1e3, 1e4, 1e5], &cfg).unwrap();
        let s = scaling_diagnostics(&r).unwrap();
        let high = s.high.unwrap();
        assert!(high.utility_slope.abs() < 0.01 && (high.ee_slope + 1.0).abs() < 0.01);
        assert_eq!(s.insufficient, vec!["low-power"]);
        assert!(s.lambda_gap < 0.01);

        let r = sweep(&anti_diagonal(), 0.5, &max, &max, &[1e-4, 1e-3, 1e-2], &cfg).unwrap();
        let low = scaling_diagnostics(&r).unwrap().low.unwrap();
        assert!((low.utility_slope - 1.0).abs() < 0.01 && low.ee_slope.abs() < 0.01);
    }

    #[test]
    fn ranking_examples() {
        let cfg = SolverConfig::default();
        let BottleneckOutcome::Ranked(r) = bottleneck_ranking(&two_bs(), &cfg).unwrap() else {
            panic!("expected a ranking");
        };
        assert_eq!(r.entries[0].load, r.entries[1].load);
        assert_eq!(r.entries[0].base_station, 0);

        let mut s = two_bs();
        s.demands[1] *= 2.0;
        let BottleneckOutcome::Ranked(r) = bottleneck_ranking(&s, &cfg).unwrap() else {
            panic!("expected a ranking");
        };
        assert_eq!(r.entries[0].base_station, 1);
        let (fp, _) = fixed_point(s.mapping().unwrap().as_ref(), None, &cfg).unwrap();
        for e in &r.entries {
            assert!((e.load - fp[e.base_station]).abs() < 1e-9);
        }

        let mut s = two_bs();
        s.demands = vec![1e8, 1e8];
        assert!(matches!(bottleneck_ranking(&s, &cfg).unwrap(), BottleneckOutcome::Unavailable(v) if !v.feasible));
    }
}
