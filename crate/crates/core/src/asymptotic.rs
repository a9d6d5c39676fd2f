//! Asymptotic mappings `T_inf(x) = lim_{h->inf} T(h x) / h`.
//!
//! For a standard interference mapping the quotient `T(h x)/h` is
//! nonincreasing in `h` (scalability), so the limit is approached from above.
//! [`estimate_asymptotic`] walks a ladder of scales and stops at the first
//! rung that agrees with the previous one. The affine and load-coupled
//! families have exact linear asymptotic mappings.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mappings::{
    mat_vec, AffineMapping, Check, InterferenceMapping, LoadScenario, PointSampler, PropertyReport, Violation,
};
use crate::norms::NonnegVector;
use crate::{Error, Matrix, Result};

/// Coordinates below this fraction of the largest one are snapped to zero.
const SNAP_RATIO: f64 = 1e-12;

/// Scales at which `T(h x)/h` is sampled and the agreement tolerances.
///
/// Consecutive rungs agree when every coordinate changes by at most
/// `max(rtol * ||v||_inf, atol * ||x||_inf)`, where `v` is the current rung.
/// The `atol` floor lets coordinates whose limit is zero settle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub scales: Vec<f64>,
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_atol() -> f64 {
    1e-9
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            scales: (3..=9).map(|e| 10f64.powi(e)).collect(),
            rtol: 1e-6,
            atol: default_atol(),
        }
    }
}

impl LadderConfig {
    /// Decades `10^lo ..= 10^hi`.
    pub fn decades(lo: i32, hi: i32) -> Self {
        Self {
            scales: (lo..=hi).map(|e| 10f64.powi(e)).collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.len() < 2 {
            return Err(Error::InvalidParameter("ladder needs at least two scales".into()));
        }
        if self.scales.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidParameter("ladder scales must be finite and > 0".into()));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "ladder scales must be strictly increasing".into(),
            ));
        }
        if !(self.rtol > 0.0) || !(self.atol >= 0.0) {
            return Err(Error::InvalidParameter("ladder tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub value: NonnegVector,
    /// Index of the accepted rung in the ladder.
    pub rung: usize,
    pub scale: f64,
    /// Largest coordinate change between the last two rungs.
    pub deviation: f64,
    /// Some coordinate increased between rungs, which a standard interference
    /// mapping cannot do; treat the estimate with suspicion.
    pub non_monotone: bool,
}

/// Estimates `T_inf(x)` as `T(h x)/h` on the ladder.
pub fn estimate_asymptotic(
    m: &dyn InterferenceMapping,
    x: &NonnegVector,
    cfg: &LadderConfig,
) -> Result<AsymptoticEstimate> {
    cfg.validate()?;
    if x.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: x.dim(),
        });
    }
    let x_scale = x.iter().fold(0.0_f64, |a, v| a.max(*v));
    if x_scale == 0.0 {
        return Ok(AsymptoticEstimate {
            value: NonnegVector::zeros(x.dim())?,
            rung: 0,
            scale: cfg.scales[0],
            deviation: 0.0,
            non_monotone: false,
        });
    }

    let sample = |h: f64| -> Result<Vec<f64>> {
        let hx: Vec<f64> = x.iter().map(|v| h * v).collect();
        let v: Vec<f64> = m.apply(&hx).into_iter().map(|t| t / h).collect();
        if v.iter().any(|t| !t.is_finite()) || hx.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite { scale: h });
        }
        Ok(v)
    };

    let mut prev = sample(cfg.scales[0])?;
    let mut non_monotone = false;
    let mut deviation = f64::INFINITY;
    for (rung, &h) in cfg.scales.iter().enumerate().skip(1) {
        let cur = sample(h)?;
        let top = cur.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let bound = (cfg.rtol * top).max(cfg.atol * x_scale);
        deviation = 0.0;
        for (p, c) in prev.iter().zip(&cur) {
            deviation = deviation.max((p - c).abs());
            if *c > *p + 4.0 * f64::EPSILON * p.abs() {
                non_monotone = true;
            }
        }
        if deviation <= bound {
            let cutoff = SNAP_RATIO * top;
            let value = cur.into_iter().map(|v| if v < cutoff { 0.0 } else { v }).collect();
            return Ok(AsymptoticEstimate {
                value: NonnegVector::from_clamped(value)?,
                rung,
                scale: h,
                deviation,
                non_monotone,
            });
        }
        prev = cur;
    }
    Err(Error::AsymptoticNonConvergence {
        deviation,
        scale: *cfg.scales.last().unwrap(),
    })
}

/// The asymptotic mapping of a standard interference mapping, either exact
/// (a nonnegative matrix) or estimated point by point on a ladder.
#[derive(Clone)]
pub enum AsymptoticMapping {
    Linear(Matrix),
    Numeric {
        base: Arc<dyn InterferenceMapping>,
        ladder: LadderConfig,
    },
}

impl fmt::Debug for AsymptoticMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymptoticMapping::Linear(m) => f.debug_tuple("Linear").field(m).finish(),
            AsymptoticMapping::Numeric { base, ladder } => f
                .debug_struct("Numeric")
                .field("family", &base.family())
                .field("dim", &base.dim())
                .field("ladder", ladder)
                .finish(),
        }
    }
}

impl AsymptoticMapping {
    pub fn numeric(base: Arc<dyn InterferenceMapping>, ladder: LadderConfig) -> Result<Self> {
        ladder.validate()?;
        Ok(AsymptoticMapping::Numeric { base, ladder })
    }

    pub fn dim(&self) -> usize {
        match self {
            AsymptoticMapping::Linear(m) => m.nrows(),
            AsymptoticMapping::Numeric { base, .. } => base.dim(),
        }
    }

    /// The matrix of an exact linear mapping.
    pub fn matrix(&self) -> Option<&Matrix> {
        match self {
            AsymptoticMapping::Linear(m) => Some(m),
            AsymptoticMapping::Numeric { .. } => None,
        }
    }

    pub fn eval(&self, x: &NonnegVector) -> Result<NonnegVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        match self {
            AsymptoticMapping::Linear(m) => NonnegVector::from_clamped(mat_vec(m, x)),
            AsymptoticMapping::Numeric { base, ladder } => Ok(estimate_asymptotic(base.as_ref(), x, ladder)?.value),
        }
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            AsymptoticMapping::Linear(m) => Ok(mat_vec(m, x)),
            AsymptoticMapping::Numeric { .. } => Ok(self.eval(&NonnegVector::from_clamped(x.to_vec())?)?.into_vec()),
        }
    }
}

/// `T(x) = Xx + u` has `T_inf(x) = Xx`.
pub fn exact_asymptotic_affine(m: &AffineMapping) -> AsymptoticMapping {
    AsymptoticMapping::Linear(m.matrix().clone())
}

/// Load-coupling matrix `M` with zero diagonal and
/// `M[i][k] = sum_{j in N_i} ln(2) d_j g_kj / (K B g_ij)` for `i != k`.
pub fn load_coupling_matrix(s: &LoadScenario) -> Result<Matrix> {
    s.validate()?;
    let m = s.num_base_stations();
    let kb = f64::from(s.resource_blocks) * s.rb_bandwidth;
    let mut out = Matrix::zeros(m, m);
    for (i, users) in s.assignment.iter().enumerate() {
        for k in (0..m).filter(|&k| k != i) {
            out[(i, k)] = users
                .iter()
                .map(|&j| std::f64::consts::LN_2 * s.demands[j] * s.gains[(k, j)] / (kb * s.gains[(i, j)]))
                .sum();
        }
    }
    Ok(out)
}

/// `T_inf(x) = diag(p)^-1 M diag(p) x` for the load mapping. The rate cap
/// washes out in the limit, so capped scenarios get the same matrix.
pub fn exact_asymptotic_load(s: &LoadScenario) -> Result<AsymptoticMapping> {
    let mut m = load_coupling_matrix(s)?;
    let n = m.nrows();
    for i in 0..n {
        for k in 0..n {
            m[(i, k)] *= s.powers[k] / s.powers[i];
        }
    }
    Ok(AsymptoticMapping::Linear(m))
}

/// Samples positive homogeneity and monotonicity of `a`.
///
/// Exact mappings are held to rounding error; numeric ones to ten times the
/// ladder tolerance. Points and factors are drawn as in
/// [`check_standard_properties`](crate::mappings::check_standard_properties).
pub fn check_asymptotic_properties(a: &AsymptoticMapping, samples: usize, seed: u64) -> Result<PropertyReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let tol = match a {
        AsymptoticMapping::Linear(_) => 1e-12,
        AsymptoticMapping::Numeric { ladder, .. } => 10.0 * ladder.rtol,
    };
    let n = a.dim();
    let mut sampler = PointSampler::new(seed);
    let mut violations = Vec::new();
    for _ in 0..samples {
        let x = sampler.point(n);
        let c = sampler.factor();
        let tx = a.apply(&x)?;
        let scale = tx.iter().fold(0.0_f64, |m, v| m.max(*v)) * c;

        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let tcx = a.apply(&cx)?;
        for i in 0..n {
            if !((tcx[i] - c * tx[i]).abs() <= tol * scale) {
                violations.push(Violation {
                    check: Check::Homogeneity,
                    coordinate: i,
                    input: x.clone(),
                    other: None,
                    factor: Some(c),
                    observed: (tcx[i], c * tx[i]),
                });
            }
        }

        let big = sampler.dominating(&x);
        let tbig = a.apply(&big)?;
        let floor = tol * tbig.iter().fold(0.0_f64, |m, v| m.max(*v));
        for i in 0..n {
            if !(tbig[i] >= tx[i] - floor) {
                violations.push(Violation {
                    check: Check::Monotonicity,
                    coordinate: i,
                    input: x.clone(),
                    other: Some(big.clone()),
                    factor: None,
                    observed: (tbig[i], tx[i]),
                });
            }
        }
    }
    Ok(PropertyReport {
        property: "asymptotic-homogeneous-monotone".into(),
        samples,
        seed,
        violations,
    })
}
