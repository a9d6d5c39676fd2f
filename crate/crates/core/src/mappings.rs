//! Standard interference mappings.
//!
//! A mapping `T: R^N_+ -> R^N_++` is a standard interference mapping when
//! every coordinate is positive, monotone (`x1 >= x2` implies
//! `T(x1) >= T(x2)`) and scalable (`a*T(x) > T(a*x)` for every `a > 1`).
//! Built-in families: affine `x -> Xx + u` and the load-coupled cellular
//! model, with or without a per-resource-block rate cap.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::norms::{NonnegVector, PositiveVector};
use crate::{Error, Matrix, Result};

pub const DEFAULT_PROPERTY_SAMPLES: usize = 1000;
pub const DEFAULT_PROPERTY_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Affine,
    Load,
    LoadCapped,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Affine => "affine",
            Family::Load => "load",
            Family::LoadCapped => "load-capped",
            Family::Custom => "custom",
        })
    }
}

/// Evaluation contract for `T: R^N_+ -> R^N_++`.
pub trait InterferenceMapping: Send + Sync {
    fn dim(&self) -> usize;

    fn family(&self) -> Family;

    /// Evaluates `T(x)`. `x` must have length [`dim`](Self::dim) with
    /// nonnegative entries; use [`eval`](Self::eval) for a checked call.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    fn eval(&self, x: &NonnegVector) -> Result<Vec<f64>> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(self.apply(x))
    }
}

pub(crate) fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|k| m[(i, k)] * x[k]).sum())
        .collect()
}

/// `x -> Xx + u` with `X >= 0` and `u > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMapping {
    matrix: Matrix,
    offset: PositiveVector,
}

impl AffineMapping {
    pub fn new(matrix: Matrix, offset: PositiveVector) -> Result<Self> {
        let n = offset.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if matrix.nrows() != n {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        if let Some(bad) = matrix.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "affine matrix entries must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { matrix, offset })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn offset(&self) -> &PositiveVector {
        &self.offset
    }
}

impl InterferenceMapping for AffineMapping {
    fn dim(&self) -> usize {
        self.offset.dim()
    }

    fn family(&self) -> Family {
        Family::Affine
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = mat_vec(&self.matrix, x);
        for (y, u) in y.iter_mut().zip(self.offset.iter()) {
            *y += u;
        }
        y
    }
}

/// Parameters of the load-coupled interference model.
///
/// `gains` is `M x N` (base stations by users) in linear units, `noise` is
/// the noise power per resource block in Watt and `powers` the transmit power
/// per resource block. `caps`, when present, is the maximum rate one resource
/// block can carry at each base station (bits/s).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadScenario {
    /// Users served by each base station (0-based user indices).
    pub assignment: Vec<Vec<usize>>,
    pub gains: Matrix,
    /// Requested rate of each user in bits/s.
    pub demands: Vec<f64>,
    pub resource_blocks: u32,
    /// Bandwidth of one resource block in Hz.
    pub rb_bandwidth: f64,
    pub noise: f64,
    pub powers: Vec<f64>,
    pub caps: Option<Vec<f64>>,
}

fn check_positive(name: &str, values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "{name}[{i}] must be finite and > 0, found {v}"
            )));
        }
    }
    Ok(())
}

impl LoadScenario {
    pub fn num_base_stations(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_users(&self) -> usize {
        self.demands.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.num_base_stations();
        let n = self.num_users();
        if m == 0 {
            return Err(Error::InvalidScenario("at least one base station is required".into()));
        }
        if n == 0 {
            return Err(Error::InvalidScenario("at least one user is required".into()));
        }
        if self.gains.nrows() != m || self.gains.ncols() != n {
            return Err(Error::InvalidScenario(format!(
                "gains must be {m}x{n} (base stations x users), found {}x{}",
                self.gains.nrows(),
                self.gains.ncols()
            )));
        }
        if self.powers.len() != m {
            return Err(Error::InvalidScenario(format!(
                "powers must have {m} entries, found {}",
                self.powers.len()
            )));
        }
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for (i, users) in self.assignment.iter().enumerate() {
            if users.is_empty() {
                return Err(Error::InvalidScenario(format!(
                    "base station {i} has no assigned users"
                )));
            }
            for &j in users {
                if j >= n {
                    return Err(Error::InvalidScenario(format!(
                        "base station {i} lists user {j}, but there are only {n} users"
                    )));
                }
                if let Some(prev) = owner[j] {
                    return Err(Error::InvalidScenario(format!(
                        "user {j} is assigned to both base station {prev} and {i}"
                    )));
                }
                owner[j] = Some(i);
            }
        }
        if let Some(j) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidScenario(format!(
                "user {j} is not assigned to any base station"
            )));
        }
        for i in 0..m {
            for j in 0..n {
                let g = self.gains[(i, j)];
                if !g.is_finite() || g <= 0.0 {
                    return Err(Error::InvalidScenario(format!(
                        "gains[{i}][{j}] must be finite and > 0, found {g}"
                    )));
                }
            }
        }
        check_positive("demands", &self.demands)?;
        check_positive("powers", &self.powers)?;
        check_positive("rb_bandwidth", &[self.rb_bandwidth])?;
        check_positive("noise", &[self.noise])?;
        if self.resource_blocks == 0 {
            return Err(Error::InvalidScenario("resource_blocks must be > 0".into()));
        }
        if let Some(caps) = &self.caps {
            if caps.len() != m {
                return Err(Error::InvalidScenario(format!(
                    "caps must have {m} entries, found {}",
                    caps.len()
                )));
            }
            check_positive("caps", caps)?;
        }
        Ok(())
    }

    /// The load mapping of this scenario: capped when caps are present.
    pub fn mapping(&self) -> Result<Arc<dyn InterferenceMapping>> {
        Ok(match self.caps {
            Some(_) => Arc::new(CappedLoadMapping::new(self.clone())?),
            None => Arc::new(LoadMapping::new(self.clone())?),
        })
    }
}

/// Achievable rate of one resource block from base station `i` to user `j`
/// at load `x`:
/// `B * log2(1 + p_i g_ij / (sum_{k != i} x_k p_k g_kj + sigma2))`.
///
/// The own load `x_i` does not enter the expression.
pub fn rate_per_rb(s: &LoadScenario, x: &[f64], i: usize, j: usize) -> f64 {
    let interference: f64 = (0..s.num_base_stations())
        .filter(|&k| k != i)
        .map(|k| x[k] * s.powers[k] * s.gains[(k, j)])
        .sum();
    let sinr = s.powers[i] * s.gains[(i, j)] / (interference + s.noise);
    // ln_1p keeps full precision when the SINR is tiny (large loads)
    s.rb_bandwidth * sinr.ln_1p() / LN_2
}

/// The load mapping `t_i(x) = sum_{j in N_i} d_j / (K * omega_ij(x))`.
#[derive(Debug, Clone)]
pub struct LoadMapping {
    scenario: LoadScenario,
}

impl LoadMapping {
    pub fn new(scenario: LoadScenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self { scenario })
    }

    pub fn scenario(&self) -> &LoadScenario {
        &self.scenario
    }
}

impl InterferenceMapping for LoadMapping {
    fn dim(&self) -> usize {
        self.scenario.num_base_stations()
    }

    fn family(&self) -> Family {
        Family::Load
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let s = &self.scenario;
        let k = f64::from(s.resource_blocks);
        s.assignment
            .iter()
            .enumerate()
            .map(|(i, users)| {
                users
                    .iter()
                    .map(|&j| s.demands[j] / (k * rate_per_rb(s, x, i, j)))
                    .sum()
            })
            .collect()
    }
}

/// Load mapping with a per-resource-block rate cap at every base station:
/// `t_i(x) = sum_j max{d_j / (K omega_ij(x)), d_j / (K cap_i)}`.
#[derive(Debug, Clone)]
pub struct CappedLoadMapping {
    scenario: LoadScenario,
}

impl CappedLoadMapping {
    pub fn new(scenario: LoadScenario) -> Result<Self> {
        scenario.validate()?;
        if scenario.caps.is_none() {
            return Err(Error::MissingCaps);
        }
        Ok(Self { scenario })
    }

    pub fn scenario(&self) -> &LoadScenario {
        &self.scenario
    }
}

impl InterferenceMapping for CappedLoadMapping {
    fn dim(&self) -> usize {
        self.scenario.num_base_stations()
    }

    fn family(&self) -> Family {
        Family::LoadCapped
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let s = &self.scenario;
        let caps = s.caps.as_deref().expect("caps checked at construction");
        let k = f64::from(s.resource_blocks);
        s.assignment
            .iter()
            .enumerate()
            .map(|(i, users)| {
                users
                    .iter()
                    .map(|&j| {
                        let rate = rate_per_rb(s, x, i, j).min(caps[i]);
                        s.demands[j] / (k * rate)
                    })
                    .sum()
            })
            .collect()
    }
}

/// A user-supplied mapping. Nothing about it is guaranteed; run
/// [`check_standard_properties`] on it before relying on the theory.
pub struct FnMapping<F> {
    dim: usize,
    f: F,
}

impl<F> FnMapping<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> InterferenceMapping for FnMapping<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn family(&self) -> Family {
        Family::Custom
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Positivity,
    Scalability,
    Monotonicity,
    Homogeneity,
    Dimension,
}

/// One failed sampled check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: Check,
    pub coordinate: usize,
    pub input: Vec<f64>,
    /// Second point of a monotonicity pair (the larger one).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// The two compared values; the check required `observed.0 > observed.1`
    /// (`>=` for monotonicity and homogeneity within tolerance).
    pub observed: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub samples: usize,
    pub seed: u64,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Deterministic sampler of points in `R^N_+` with log-uniform coordinates
/// in `[1e-6, 1e3]`.
pub(crate) struct PointSampler {
    rng: ChaCha8Rng,
}

impl PointSampler {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub(crate) fn coordinate(&mut self) -> f64 {
        10f64.powf(-6.0 + 9.0 * self.rng.gen::<f64>())
    }

    pub(crate) fn point(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.coordinate()).collect()
    }

    /// `x + d` where each increment is zero with probability 1/2.
    pub(crate) fn dominating(&mut self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&v| {
                if self.rng.gen_bool(0.5) {
                    v
                } else {
                    v + self.coordinate()
                }
            })
            .collect()
    }

    /// Uniform in `(1, 10]`.
    pub(crate) fn factor(&mut self) -> f64 {
        1.0 + 9.0 * (1.0 - self.rng.gen::<f64>())
    }
}

fn positivity(out: &mut Vec<Violation>, input: &[f64], values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            out.push(Violation {
                check: Check::Positivity,
                coordinate: i,
                input: input.to_vec(),
                other: None,
                factor: None,
                observed: (v, 0.0),
            });
        }
    }
}

/// Samples positivity, scalability and monotonicity of `m`.
///
/// Positivity is also checked at the origin. Points have log-uniform
/// coordinates in `[1e-6, 1e3]`, scaling factors are uniform in `(1, 10]`,
/// and each monotonicity pair adds a nonnegative increment to the sample.
pub fn check_standard_properties(m: &dyn InterferenceMapping, samples: usize, seed: u64) -> Result<PropertyReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let n = m.dim();
    let mut sampler = PointSampler::new(seed);
    let mut violations = Vec::new();

    let zero = vec![0.0; n];
    let t0 = m.apply(&zero);
    if t0.len() != n {
        violations.push(Violation {
            check: Check::Dimension,
            coordinate: 0,
            input: zero,
            other: None,
            factor: None,
            observed: (t0.len() as f64, n as f64),
        });
        return Ok(PropertyReport {
            property: "standard-interference".into(),
            samples,
            seed,
            violations,
        });
    }
    positivity(&mut violations, &zero, &t0);

    for _ in 0..samples {
        let x = sampler.point(n);
        let alpha = sampler.factor();
        let tx = m.apply(&x);
        positivity(&mut violations, &x, &tx);

        let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let tax = m.apply(&ax);
        for i in 0..n {
            let lhs = alpha * tx[i];
            if !(lhs > tax[i]) {
                violations.push(Violation {
                    check: Check::Scalability,
                    coordinate: i,
                    input: x.clone(),
                    other: None,
                    factor: Some(alpha),
                    observed: (lhs, tax[i]),
                });
            }
        }

        let big = sampler.dominating(&x);
        let tbig = m.apply(&big);
        for i in 0..n {
            if !(tbig[i] >= tx[i]) {
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
        property: "standard-interference".into(),
        samples,
        seed,
        violations,
    })
}
