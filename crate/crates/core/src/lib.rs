//! Discrete Poincaré inequalities on finite measured graphs.
//!
//! The crate works at desk scale: every space is a finite, connected,
//! vertex-measured graph with unit edge lengths. On top of that substrate it
//! provides
//!
//! - [`mmgraph`]: distances, closed balls, the discrete gradient
//!   `|δu|(x) = (Σ_{y∼x} |u(x) − u(y)|²)^{1/2}`, integration against the
//!   vertex measure, and tabulated growth functions;
//! - [`groups`]: finitely generated groups with exact element arithmetic,
//!   Cayley balls, growth series, entropy estimates, Gromov δ and systoles;
//! - [`covering`]: balls in universal covers of finite quotient graphs,
//!   orbit growth of the deck group and the quotient volume inequality;
//! - [`discretize`]: ε-nets of a host graph and numerical checks of the
//!   multiplicity, quasi-isometry, volume-transfer and gradient-transfer
//!   inequalities;
//! - [`poincare`]: optimal (σ = 2) and empirical Poincaré constants on
//!   balls, every explicit bound formula, and tightness reports;
//! - [`pipeline`]: the end-to-end chain from a host graph to the uniform
//!   inequality constants, with every intermediate quantity recorded.

// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod covering;
pub mod discretize;
mod error;
pub mod groups;
pub mod mmgraph;
mod par;
pub mod pipeline;
pub mod poincare;

pub use error::{Error, Result};
pub use mmgraph::{GrowthMode, GrowthProfile, MeasuredGraph, VertexFunction};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
