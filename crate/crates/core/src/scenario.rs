//! JSON scenario files.
//!
//! A scenario holds exactly one model section, `"affine"` or `"load"`, plus
//! the two norms and optional solver overrides:
//!
//! ```json
//! {
//!   "load": {
//!     "base_stations": 2, "users": 2,
//!     "assignment": [[0], [1]],
//!     "gains": [[1.0, 0.5], [0.5, 1.0]], "gains_unit": "linear",
//!     "demands": [1e6, 1e6],
//!     "resource_blocks": 100, "rb_bandwidth": 180000,
//!     "noise": 1e-9, "noise_unit": "watt",
//!     "powers": [1.0, 1.0]
//!   },
//!   "norm_a": "max",
//!   "norm_b": {"kind": "weighted-sum", "weights": [1.0, 2.0]},
//!   "solver": {"tol": 1e-10, "max_iter": 100000}
//! }
//! ```
//!
//! Gains may be given in dB (`"gains_unit": "db"`, linear = `10^(dB/10)`)
//! and noise in dBm per resource block (`"dbm"`) or as a dBm/Hz density
//! (`"dbm_per_hz"`, multiplied by the resource-block bandwidth). Everything
//! is converted to linear units at ingestion and serialized back in linear
//! units.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymptotic::{exact_asymptotic_affine, exact_asymptotic_load, AsymptoticMapping, LadderConfig};
use crate::mappings::{AffineMapping, InterferenceMapping, LoadScenario};
use crate::norms::{MonotoneNorm, NormKind, PositiveVector};
use crate::solvers::SolverConfig;
use crate::{Error, Matrix, Result};

/// Linear power ratio of a dB value.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Watt of a dBm value.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainsUnit {
    #[default]
    Linear,
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseUnit {
    #[default]
    Watt,
    Dbm,
    DbmPerHz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Name(NormKind),
    Weighted { kind: NormKind, weights: Vec<f64> },
}

impl NormSpec {
    fn build(&self, field: &str) -> Result<MonotoneNorm> {
        let (kind, weights) = match self {
            NormSpec::Name(kind) => (*kind, None),
            NormSpec::Weighted { kind, weights } => (
                *kind,
                Some(
                    PositiveVector::new(weights.clone())
                        .map_err(|e| Error::InvalidScenario(format!("{field}.weights: {e}")))?,
                ),
            ),
        };
        MonotoneNorm::from_parts(kind, weights).map_err(|e| Error::InvalidScenario(format!("{field}: {e}")))
    }

    fn of(norm: &MonotoneNorm) -> Self {
        match norm.weights() {
            None => NormSpec::Name(norm.kind()),
            Some(w) => NormSpec::Weighted {
                kind: norm.kind(),
                weights: w.to_vec(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSection {
    pub matrix: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    #[serde(alias = "M")]
    pub base_stations: usize,
    #[serde(alias = "N")]
    pub users: usize,
    pub assignment: Vec<Vec<usize>>,
    pub gains: Vec<Vec<f64>>,
    #[serde(default)]
    pub gains_unit: GainsUnit,
    pub demands: Vec<f64>,
    #[serde(alias = "K")]
    pub resource_blocks: u32,
    #[serde(alias = "B")]
    pub rb_bandwidth: f64,
    #[serde(alias = "sigma2")]
    pub noise: f64,
    #[serde(default)]
    pub noise_unit: NoiseUnit,
    pub powers: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_guard: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderConfig>,
}

/// The on-disk document, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<AffineSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<LoadSection>,
    pub norm_a: NormSpec,
    pub norm_b: NormSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Affine(AffineMapping),
    Load(LoadScenario),
}

/// A validated scenario in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: Model,
    pub norm_a: MonotoneNorm,
    pub norm_b: MonotoneNorm,
    pub solver: SolverConfig,
    pub ladder: LadderConfig,
    /// Non-fatal ingestion notes (e.g. overflow risk on the ladder).
    pub warnings: Vec<String>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidScenario(msg.into())
}

fn matrix_from_rows(field: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<Matrix> {
    if rows.len() != nrows {
        return Err(invalid(format!("{field}: expected {nrows} rows, found {}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(invalid(format!(
                "{field}[{i}]: expected {ncols} entries, found {}",
                r.len()
            )));
        }
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, k| rows[i][k]))
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|k| m[(i, k)]).collect())
        .collect()
}

fn check_len(field: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(invalid(format!("{field}: expected {n} entries, found {}", v.len())));
    }
    Ok(())
}

impl AffineSection {
    fn build(&self) -> Result<AffineMapping> {
        let n = self.u.len();
        if n == 0 {
            return Err(invalid("affine.u: must not be empty"));
        }
        let x = matrix_from_rows("affine.matrix", &self.matrix, n, n)?;
        for i in 0..n {
            for k in 0..n {
                let v = x[(i, k)];
                if !v.is_finite() || v < 0.0 {
                    return Err(invalid(format!(
                        "affine.matrix[{i}][{k}]: must be finite and >= 0, found {v}"
                    )));
                }
            }
        }
        let u = PositiveVector::new(self.u.clone()).map_err(|e| invalid(format!("affine.u: {e}")))?;
        AffineMapping::new(x, u)
    }
}

impl LoadSection {
    fn build(&self) -> Result<LoadScenario> {
        let (m, n) = (self.base_stations, self.users);
        if self.assignment.len() != m {
            return Err(invalid(format!(
                "load.assignment: expected {m} base stations, found {}",
                self.assignment.len()
            )));
        }
        check_len("load.demands", &self.demands, n)?;
        check_len("load.powers", &self.powers, m)?;
        if let Some(caps) = &self.caps {
            check_len("load.caps", caps, m)?;
        }
        let mut gains = matrix_from_rows("load.gains", &self.gains, m, n)?;
        if self.gains_unit == GainsUnit::Db {
            gains.apply(|g| *g = db_to_linear(*g));
        }
        let noise = match self.noise_unit {
            NoiseUnit::Watt => self.noise,
            NoiseUnit::Dbm => dbm_to_watt(self.noise),
            NoiseUnit::DbmPerHz => dbm_to_watt(self.noise) * self.rb_bandwidth,
        };
        let s = LoadScenario {
            assignment: self.assignment.clone(),
            gains,
            demands: self.demands.clone(),
            resource_blocks: self.resource_blocks,
            rb_bandwidth: self.rb_bandwidth,
            noise,
            powers: self.powers.clone(),
            caps: self.caps.clone(),
        };
        s.validate().map_err(|e| match e {
            Error::InvalidScenario(msg) if msg.starts_with("base station") || msg.starts_with("user ") => {
                invalid(format!("load.assignment: {msg}"))
            }
            Error::InvalidScenario(msg) => invalid(format!("load.{msg}")),
            other => other,
        })?;
        Ok(s)
    }

    fn of(s: &LoadScenario) -> Self {
        Self {
            base_stations: s.num_base_stations(),
            users: s.num_users(),
            assignment: s.assignment.clone(),
            gains: matrix_to_rows(&s.gains),
            gains_unit: GainsUnit::Linear,
            demands: s.demands.clone(),
            resource_blocks: s.resource_blocks,
            rb_bandwidth: s.rb_bandwidth,
            noise: s.noise,
            noise_unit: NoiseUnit::Watt,
            powers: s.powers.clone(),
            caps: s.caps.clone(),
        }
    }
}

/// Line of the field named by the leading path of `msg` (`load.gains[0][1]: ...`).
fn locate(text: &str, msg: &str) -> Option<usize> {
    let path = msg.split([':', ' ']).next()?;
    if !path.contains('.') && !path.starts_with("norm_") && path != "solver" {
        return None;
    }
    let mut pos = 0;
    for key in path.split('.') {
        let key = key.split('[').next()?;
        pos += text[pos..].find(&format!("\"{key}\""))?;
    }
    Some(text[..pos].matches('\n').count() + 1)
}

/// `h * x` above this during the asymptotic ladder is treated as an overflow risk.
const OVERFLOW_WARN: f64 = 1e300;

impl Scenario {
    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let model = match (&file.affine, &file.load) {
            (Some(a), None) => Model::Affine(a.build()?),
            (None, Some(l)) => Model::Load(l.build()?),
            (Some(_), Some(_)) => return Err(invalid("give either an \"affine\" or a \"load\" section, not both")),
            (None, None) => return Err(invalid("missing model: add an \"affine\" or a \"load\" section")),
        };
        let norm_a = file.norm_a.build("norm_a")?;
        let norm_b = file.norm_b.build("norm_b")?;
        let mut solver = SolverConfig::default();
        let mut ladder = LadderConfig::default();
        if let Some(s) = &file.solver {
            solver.tol = s.tol.unwrap_or(solver.tol);
            solver.max_iter = s.max_iter.unwrap_or(solver.max_iter);
            solver.growth_guard = s.growth_guard.unwrap_or(solver.growth_guard);
            if let Some(l) = &s.ladder {
                ladder = l.clone();
            }
        }
        solver.validate().map_err(|e| invalid(format!("solver: {e}")))?;
        ladder.validate().map_err(|e| invalid(format!("solver.ladder: {e}")))?;

        let mut scenario = Scenario {
            model,
            norm_a,
            norm_b,
            solver,
            ladder,
            warnings: Vec::new(),
        };
        let dim = scenario.dim();
        scenario
            .norm_a
            .check_dim(dim)
            .map_err(|e| invalid(format!("norm_a.weights: {e}")))?;
        scenario
            .norm_b
            .check_dim(dim)
            .map_err(|e| invalid(format!("norm_b.weights: {e}")))?;
        scenario.warnings = scenario.overflow_warnings();
        Ok(scenario)
    }

    /// Parses and validates a scenario. Validation errors name the offending
    /// field and, when it can be found in `text`, its line.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Self::from_file(&file).map_err(|e| match e {
            Error::InvalidScenario(msg) => match locate(text, &msg) {
                Some(line) => invalid(format!("line {line}: {msg}")),
                None => invalid(msg),
            },
            other => other,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// The document for this scenario, in linear units.
    pub fn to_file(&self) -> ScenarioFile {
        let (affine, load) = match &self.model {
            Model::Affine(a) => (
                Some(AffineSection {
                    matrix: matrix_to_rows(a.matrix()),
                    u: a.offset().to_vec(),
                }),
                None,
            ),
            Model::Load(s) => (None, Some(LoadSection::of(s))),
        };
        let defaults = SolverConfig::default();
        let solver = SolverSection {
            tol: (self.solver.tol != defaults.tol).then_some(self.solver.tol),
            max_iter: (self.solver.max_iter != defaults.max_iter).then_some(self.solver.max_iter),
            growth_guard: (self.solver.growth_guard != defaults.growth_guard).then_some(self.solver.growth_guard),
            ladder: (self.ladder != LadderConfig::default()).then(|| self.ladder.clone()),
        };
        ScenarioFile {
            affine,
            load,
            norm_a: NormSpec::of(&self.norm_a),
            norm_b: NormSpec::of(&self.norm_b),
            solver: (solver != SolverSection::default()).then_some(solver),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }

    pub fn dim(&self) -> usize {
        match &self.model {
            Model::Affine(a) => a.dim(),
            Model::Load(s) => s.num_base_stations(),
        }
    }

    pub fn mapping(&self) -> Result<Arc<dyn InterferenceMapping>> {
        match &self.model {
            Model::Affine(a) => Ok(Arc::new(a.clone())),
            Model::Load(s) => s.mapping(),
        }
    }

    /// The exact linear asymptotic mapping of the model.
    pub fn asymptotic(&self) -> Result<AsymptoticMapping> {
        match &self.model {
            Model::Affine(a) => Ok(exact_asymptotic_affine(a)),
            Model::Load(s) => exact_asymptotic_load(s),
        }
    }

    fn overflow_warnings(&self) -> Vec<String> {
        let top = self.ladder.scales.last().copied().unwrap_or(1.0);
        let mut out = Vec::new();
        if let Ok(a) = self.asymptotic() {
            let biggest = a.matrix().map_or(0.0, |m| m.iter().fold(0.0_f64, |x, v| x.max(*v)));
            if biggest * top > OVERFLOW_WARN {
                out.push(format!(
                    "asymptotic matrix entry {biggest:e} times ladder scale {top:e} may overflow; rescale demands or gains"
                ));
            }
        }
        if let Model::Load(s) = &self.model {
            for i in 0..s.num_base_stations() {
                for j in 0..s.num_users() {
                    let snr = s.powers[i] * s.gains[(i, j)] / s.noise;
                    if snr > OVERFLOW_WARN {
                        out.push(format!(
                            "interference-free SNR {snr:e} (base station {i}, user {j}) may overflow"
                        ));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BS: &str = r#"{
        "load": {
            "base_stations": 2, "users": 2,
            "assignment": [[0], [1]],
            "gains": [[1.0, 0.5], [0.5, 1.0]],
            "demands": [1e6, 1e6],
            "resource_blocks": 100, "rb_bandwidth": 180000,
            "noise": 1e-9,
            "powers": [1.0, 1.0]
        },
        "norm_a": "max",
        "norm_b": "max"
    }"#;

    #[test]
    fn unit_conversions() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watt(30.0) - 1.0).abs() < 1e-15);
        let per_rb = dbm_to_watt(-154.0) * 180_000.0;
        assert!((per_rb - 7.17e-14).abs() < 0.01e-14, "{per_rb:e}");
    }

    #[test]
    fn parses_load_scenario() {
        let s = Scenario::from_json_str(TWO_BS).unwrap();
        let Model::Load(l) = &s.model else { panic!() };
        assert_eq!(l.num_base_stations(), 2);
        assert_eq!(s.norm_a, MonotoneNorm::max());
        assert_eq!(s.solver, SolverConfig::default());
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn db_and_dbm_inputs() {
        let text = TWO_BS
            .replace(
                "[[1.0, 0.5], [0.5, 1.0]]",
                "[[0.0, -3.0], [-3.0, 0.0]], \"gains_unit\": \"db\"",
            )
            .replace("\"noise\": 1e-9", "\"noise\": -154, \"noise_unit\": \"dbm_per_hz\"");
        let s = Scenario::from_json_str(&text).unwrap();
        let Model::Load(l) = &s.model else { panic!() };
        assert_eq!(l.gains[(0, 0)], 1.0);
        assert!((l.gains[(0, 1)] - 0.501187).abs() < 1e-6);
        assert!((l.noise - 7.17e-14).abs() < 0.01e-14);
    }

    #[test]
    fn rejects_empty_cell_with_station_name() {
        let text = TWO_BS.replace("[[0], [1]]", "[[0, 1], []]");
        let err = Scenario::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("base station 1 has no assigned users"), "{err}");
    }

    #[test]
    fn rejects_zero_and_negative_gains() {
        for bad in ["[[1.0, 0.0], [0.5, 1.0]]", "[[1.0, -0.5], [0.5, 1.0]]"] {
            let err = Scenario::from_json_str(&TWO_BS.replace("[[1.0, 0.5], [0.5, 1.0]]", bad))
                .unwrap_err()
                .to_string();
            assert!(err.contains("load.gains[0][1]"), "{err}");
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = Scenario::from_json_str("{\n  \"norm_a\": \"max\",\n  \"norm_b\": oops\n}")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = Scenario::from_json_str(&TWO_BS.replace("\"norm_b\": \"max\"", "\"norm_b\": \"l7\"")).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn section_exclusivity_and_norm_weights() {
        let both = TWO_BS.replace(
            "\"norm_a\"",
            "\"affine\": {\"matrix\": [[0.0]], \"u\": [1.0]}, \"norm_a\"",
        );
        assert!(Scenario::from_json_str(&both).is_err());
        let none = r#"{"norm_a": "max", "norm_b": "sum"}"#;
        assert!(Scenario::from_json_str(none).is_err());
        let wrong = TWO_BS.replace(
            "\"norm_b\": \"max\"",
            "\"norm_b\": {\"kind\": \"weighted-sum\", \"weights\": [1, 2, 3]}",
        );
        let err = Scenario::from_json_str(&wrong).unwrap_err().to_string();
        assert!(err.contains("norm_b.weights"), "{err}");
        let ok = TWO_BS.replace(
            "\"norm_b\": \"max\"",
            "\"norm_b\": {\"kind\": \"weighted-sum\", \"weights\": [1, 2]}",
        );
        assert!(Scenario::from_json_str(&ok).is_ok());
    }

    #[test]
    fn affine_validation() {
        let good = r#"{"affine": {"matrix": [[0, 0.5], [0.5, 0]], "u": [1, 1]}, "norm_a": "max", "norm_b": "sum"}"#;
        assert!(Scenario::from_json_str(good).is_ok());
        let zero_u = good.replace("\"u\": [1, 1]", "\"u\": [1, 0]");
        assert!(Scenario::from_json_str(&zero_u)
            .unwrap_err()
            .to_string()
            .contains("affine.u"));
        let ragged = good.replace("[0.5, 0]]", "[0.5]]");
        assert!(Scenario::from_json_str(&ragged)
            .unwrap_err()
            .to_string()
            .contains("affine.matrix[1]"));
    }

    #[test]
    fn round_trip_preserves_values() {
        let text = TWO_BS
            .replace("\"noise\": 1e-9", "\"noise\": -154, \"noise_unit\": \"dbm_per_hz\"")
            .replace("\"powers\": [1.0, 1.0]", "\"powers\": [1.0, 1.0], \"caps\": [3e5, 4e5]")
            .replace("\"norm_b\": \"max\"", "\"norm_b\": \"euclidean\", \"solver\": {\"tol\": 1e-9, \"ladder\": {\"scales\": [1e2, 1e4, 1e6], \"rtol\": 1e-5}}");
        let a = Scenario::from_json_str(&text).unwrap();
        let b = Scenario::from_json_str(&a.to_json_string()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn overflow_warning() {
        let text = TWO_BS.replace("\"demands\": [1e6, 1e6]", "\"demands\": [1e300, 1e300]");
        let s = Scenario::from_json_str(&text).unwrap();
        assert!(!s.warnings.is_empty());
    }
}
