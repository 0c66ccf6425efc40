//! Poincaré constants on graph balls: exact at σ = 2, empirical lower
//! estimates for every σ, the explicit upper bounds, and the comparison of
//! the two.

mod bounds;
mod eigen;
mod empirical;
mod instance;
mod ploc;
mod verify;

pub use bounds::{bound_evaluate, BoundKind, BoundParams, BoundSpec, BoundValue, ProfileRead};
pub use eigen::{optimal_constant_sigma2, optimal_constant_sigma2_with_limit, OptimalConstant, DEFAULT_EIGEN_LIMIT};
pub use empirical::{best_ratio, empirical_constant, EmpiricalConstant, EmpiricalOptions, Family};
pub use instance::{InstanceParams, PoincareInstance};
pub use ploc::{ploc_estimate, PlocEstimate};
pub use verify::{
    mean_minimization, reports_to_csv, verify_bounds, verify_instance, MeanMinimization, PoincareReport, ReportFlag,
    TestFunctions, VerifyOptions,
};
