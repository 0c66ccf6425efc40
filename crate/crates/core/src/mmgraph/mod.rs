//! Finite measured metric graphs.
//!
//! Distance is the combinatorial (edge-count) metric, balls are closed, and
//! integrals are sums against the vertex measure.

pub mod generators;
mod graph;
mod growth;
pub mod io;

pub(crate) use graph::{radius_to_depth, BallWalker};
pub use graph::{MeasuredGraph, VertexFunction};
pub use growth::{integer_radii, GrowthMode, GrowthProfile};
