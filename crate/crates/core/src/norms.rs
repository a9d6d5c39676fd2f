//! Nonnegative vectors and monotone norms.
//!
//! Every norm here is monotone on the nonnegative orthant:
//! `0 <= x <= y` implies `||x|| <= ||y||`. Weighted kinds take strictly
//! positive weights so that definiteness is preserved.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn validate(values: &[f64], strict: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyVector);
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::InvalidEntry {
                index,
                value,
                reason: "not finite",
            });
        }
        if strict && value <= 0.0 {
            return Err(Error::InvalidEntry {
                index,
                value,
                reason: "must be > 0",
            });
        }
        if !strict && value < 0.0 {
            return Err(Error::InvalidEntry {
                index,
                value,
                reason: "must be >= 0",
            });
        }
    }
    Ok(())
}

/// A finite vector in `R^N_+` with `N >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NonnegVector(Vec<f64>);

impl NonnegVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate(&values, false)?;
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Result<Self> {
        Self::new(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Negative zeros and tiny negative rounding residue are clamped to 0.
    pub(crate) fn from_clamped(mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Self::new(values)
    }
}

impl Deref for NonnegVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<PositiveVector> for NonnegVector {
    fn from(v: PositiveVector) -> Self {
        Self(v.0)
    }
}

/// A finite vector in `R^N_++`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate(&values, true)?;
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PositiveVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Max,
    Sum,
    Euclidean,
    WeightedMax,
    WeightedSum,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Max => "max",
            NormKind::Sum => "sum",
            NormKind::Euclidean => "euclidean",
            NormKind::WeightedMax => "weighted-max",
            NormKind::WeightedSum => "weighted-sum",
        }
    }

    pub fn is_weighted(self) -> bool {
        matches!(self, NormKind::WeightedMax | NormKind::WeightedSum)
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(NormKind::Max),
            "sum" => Ok(NormKind::Sum),
            "euclidean" => Ok(NormKind::Euclidean),
            "weighted-max" => Ok(NormKind::WeightedMax),
            "weighted-sum" => Ok(NormKind::WeightedSum),
            other => Err(Error::InvalidNorm(format!(
                "unknown norm '{other}' (expected max, sum, euclidean, weighted-max or weighted-sum)"
            ))),
        }
    }
}

/// A norm that is monotone on `R^N_+`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneNorm {
    kind: NormKind,
    weights: Option<PositiveVector>,
}

impl MonotoneNorm {
    pub fn max() -> Self {
        Self {
            kind: NormKind::Max,
            weights: None,
        }
    }

    pub fn sum() -> Self {
        Self {
            kind: NormKind::Sum,
            weights: None,
        }
    }

    pub fn euclidean() -> Self {
        Self {
            kind: NormKind::Euclidean,
            weights: None,
        }
    }

    pub fn weighted_max(weights: PositiveVector) -> Self {
        Self {
            kind: NormKind::WeightedMax,
            weights: Some(weights),
        }
    }

    pub fn weighted_sum(weights: PositiveVector) -> Self {
        Self {
            kind: NormKind::WeightedSum,
            weights: Some(weights),
        }
    }

    /// Builds a norm from its kind, checking that weights are given exactly
    /// when the kind is weighted.
    pub fn from_parts(kind: NormKind, weights: Option<PositiveVector>) -> Result<Self> {
        match (kind.is_weighted(), weights.is_some()) {
            (true, false) => Err(Error::InvalidNorm(format!("'{kind}' requires weights"))),
            (false, true) => Err(Error::InvalidNorm(format!("'{kind}' does not take weights"))),
            _ => Ok(Self { kind, weights }),
        }
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&PositiveVector> {
        self.weights.as_ref()
    }

    /// Checks that the norm can be evaluated on vectors of dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match &self.weights {
            Some(w) if w.dim() != dim => Err(Error::DimensionMismatch {
                expected: w.dim(),
                found: dim,
            }),
            _ => Ok(()),
        }
    }

    /// `||x||` for a nonnegative vector.
    pub fn eval(&self, x: &NonnegVector) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok(self.eval_slice(x))
    }

    /// Evaluation without the dimension check. Entries are taken in absolute
    /// value, so this is a norm on all of `R^N`.
    pub(crate) fn eval_slice(&self, x: &[f64]) -> f64 {
        match (self.kind, &self.weights) {
            (NormKind::Max, _) => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            (NormKind::Sum, _) => x.iter().map(|v| v.abs()).sum(),
            (NormKind::Euclidean, _) => {
                let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if scale == 0.0 || !scale.is_finite() {
                    return scale;
                }
                let s: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
                scale * s.sqrt()
            }
            (NormKind::WeightedMax, Some(w)) => x.iter().zip(w.iter()).fold(0.0, |m, (v, w)| m.max(w * v.abs())),
            (NormKind::WeightedSum, Some(w)) => x.iter().zip(w.iter()).map(|(v, w)| w * v.abs()).sum(),
            (NormKind::WeightedMax | NormKind::WeightedSum, None) => {
                unreachable!("weighted norm without weights")
            }
        }
    }
}

impl fmt::Display for MonotoneNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.weights {
            None => write!(f, "{}", self.kind),
            Some(w) => write!(f, "{}{:?}", self.kind, w.as_slice()),
        }
    }
}

/// Per-coordinate weights of a max- or sum-type norm; unweighted kinds use 1.
enum Shape<'a> {
    Max(Option<&'a [f64]>),
    Sum(Option<&'a [f64]>),
    Euclidean,
}

fn shape(n: &MonotoneNorm) -> Shape<'_> {
    let w = n.weights.as_ref().map(|w| w.as_slice());
    match n.kind {
        NormKind::Max | NormKind::WeightedMax => Shape::Max(w),
        NormKind::Sum | NormKind::WeightedSum => Shape::Sum(w),
        NormKind::Euclidean => Shape::Euclidean,
    }
}

/// Smallest constant `alpha` with `||x||_a <= alpha * ||x||_b` for every `x`
/// in `R^dim`.
///
/// All pairs of supported kinds have closed-form tight constants; the only
/// failure is a weight vector whose length differs from `dim`.
pub fn norm_equivalence_alpha(a: &MonotoneNorm, b: &MonotoneNorm, dim: usize) -> Result<f64> {
    if dim == 0 {
        return Err(Error::EmptyVector);
    }
    a.check_dim(dim)?;
    b.check_dim(dim)?;
    let ones = vec![1.0; dim];
    let wa = |w: Option<&[f64]>| -> Vec<f64> { w.map_or_else(|| ones.clone(), |w| w.to_vec()) };

    let max_ratio = |num: &[f64], den: &[f64]| num.iter().zip(den).map(|(n, d)| n / d).fold(0.0_f64, f64::max);

    let alpha = match (shape(a), shape(b)) {
        // extreme points of the unit ball of b are scaled basis vectors
        (Shape::Max(x), Shape::Max(y)) | (Shape::Max(x), Shape::Sum(y)) | (Shape::Sum(x), Shape::Sum(y)) => {
            max_ratio(&wa(x), &wa(y))
        }
        // attained at x_i = 1 / wb_i
        (Shape::Sum(x), Shape::Max(y)) => wa(x).iter().zip(wa(y)).map(|(n, d)| n / d).sum(),
        (Shape::Euclidean, Shape::Max(y)) => wa(y).iter().map(|d| 1.0 / (d * d)).sum::<f64>().sqrt(),
        (Shape::Euclidean, Shape::Sum(y)) => 1.0 / wa(y).iter().copied().fold(f64::INFINITY, f64::min),
        (Shape::Max(x), Shape::Euclidean) => wa(x).iter().copied().fold(0.0, f64::max),
        // Cauchy-Schwarz
        (Shape::Sum(x), Shape::Euclidean) => wa(x).iter().map(|v| v * v).sum::<f64>().sqrt(),
        (Shape::Euclidean, Shape::Euclidean) => 1.0,
    };
    Ok(alpha)
}
