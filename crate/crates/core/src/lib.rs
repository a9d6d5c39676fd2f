//! Asymptotic mappings of standard interference mappings.
//!
//! A standard interference mapping `T: R^N_+ -> R^N_++` is positive, monotone
//! and scalable (`a*T(x) > T(a*x)` for `a > 1`). Its asymptotic mapping
//! `T_inf(x) = lim_{h->inf} T(h*x)/h` is positively homogeneous and monotone,
//! and its spectral radius decides whether `T` has a fixed point at all
//! (`Fix(T)` is nonempty iff `rho(T_inf) < 1`).
//!
//! The crate provides:
//!
//! * [`norms`]: nonnegative vectors and the monotone norms used for budgets.
//! * [`mappings`]: the mapping contract plus affine and load-coupled
//!   (optionally rate-capped) families, and sampled property checks.
//! * [`asymptotic`]: numeric ladder estimate of `T_inf` and exact linear
//!   forms for the affine and load-coupled families.
//! * [`solvers`]: fixed-point iteration, the normalized iteration for the
//!   canonical max-min utility problem, conditional eigenpairs and spectral
//!   radius (Collatz-Wielandt bracketing or the power-budget ladder).
//! * [`analysis`]: feasibility verdicts, utility/energy-efficiency sweeps with
//!   their upper bounds, transition point, tail scaling and bottleneck ranking.
//! * [`scenario`] and [`cli`]: JSON scenario ingestion and the command set
//!   behind the `asymap` binary.
//!
//! ```
//! use asymap::prelude::*;
//!
//! let x = Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
//! let t = AffineMapping::new(x, PositiveVector::new(vec![1.0, 1.0]).unwrap()).unwrap();
//! let asym = exact_asymptotic_affine(&t);
//! let verdict = feasibility_check(&t, &asym, true, &SolverConfig::default()).unwrap();
//! assert!(verdict.feasible);
//! assert!((verdict.rho - 0.5).abs() < 1e-9);
//! ```

// `!(a > b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asymptotic;
pub mod cli;
mod error;
pub mod mappings;
pub mod norms;
pub mod scenario;
pub mod solvers;

pub use error::{Error, Result};

/// Dense real matrix used for linear asymptotic mappings.
pub type Matrix = nalgebra::DMatrix<f64>;

pub mod prelude {
    pub use crate::analysis::{
        bottleneck_ranking, feasibility_check, scaling_diagnostics, sweep, transition_point,
        unit_ball_fixed_point_test, BottleneckOutcome, BottleneckRanking, FeasibilityVerdict, Regime, ScalingReport,
        SweepResult, SweepRow,
    };
    pub use crate::asymptotic::{
        check_asymptotic_properties, estimate_asymptotic, exact_asymptotic_affine, exact_asymptotic_load,
        load_coupling_matrix, AsymptoticEstimate, AsymptoticMapping, LadderConfig,
    };
    pub use crate::mappings::{
        check_standard_properties, rate_per_rb, AffineMapping, CappedLoadMapping, Family, FnMapping,
        InterferenceMapping, LoadMapping, LoadScenario, PropertyReport,
    };
    pub use crate::norms::{norm_equivalence_alpha, MonotoneNorm, NonnegVector, NormKind, PositiveVector};
    pub use crate::scenario::{Model, Scenario};
    pub use crate::solvers::{
        conditional_eigen, fixed_point, solve_canonical, spectral_radius, BudgetLadderConfig, CanonicalSolution,
        EigenOutcome, EigenPair, EigenTarget, SolveReport, SolverConfig, SpectralEstimate, SpectralMethod, StopReason,
    };
    pub use crate::{Error, Matrix, Result};
}
