//! Finitely generated groups with exact element arithmetic: Cayley balls,
//! growth series, entropy, Gromov `δ` and pointwise systoles.

mod cayley;
mod element;
mod entropy;
mod hyperbolicity;
mod model;
mod systole;

pub use cayley::{cayley_ball, growth_series, CayleyBall, MeasureRule, DEFAULT_ELEMENT_BUDGET};
pub use element::{Element, IntMatrix};
pub use entropy::{entropy_estimate, polynomial_degree_estimate, EntropyEstimate};
pub use hyperbolicity::{hyperbolicity_delta, DeltaEstimate, QuadrupleSample, DEFAULT_QUADRUPLE_BUDGET};
pub use model::{GroupModel, GroupSpec};
pub use systole::{systole_estimate, SystoleEstimate};
