use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::mmgraph::{radius_to_depth, BallWalker};
use crate::{Error, MeasuredGraph, Result};

/// Parameters of a ball-to-dilated-ball problem, independent of any graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub center: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub sigma: f64,
    pub lambda: f64,
}

/// `LHS(u) = Σ_{B̄(p,R)} |u − u_R|^σ ν` against
/// `RHS(u) = Σ_{B̄(p,λR)} |δu|^σ ν` on a finite measured graph.
///
/// Functions live on the domain: the closed 1-neighborhood of `B̄(p,λR)`,
/// listed in breadth-first order from `p`. That order puts `B̄(p,R)` first,
/// then the rest of `B̄(p,λR)`, then the outer layer, so each set is a prefix.
/// Gradients at vertices of `B̄(p,λR)` use the full stencil of the graph.
#[derive(Clone, Debug)]
pub struct PoincareInstance<'g> {
    graph: &'g MeasuredGraph,
    params: InstanceParams,
    domain: Vec<usize>,
    distance: Vec<u32>,
    ball_len: usize,
    dilated_len: usize,
    measure: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    truncated: bool,
}

impl<'g> PoincareInstance<'g> {
    pub fn new(graph: &'g MeasuredGraph, center: usize, radius: f64, sigma: f64, lambda: f64) -> Result<Self> {
        Self::from_params(graph, InstanceParams { center, radius, sigma, lambda })
    }

    pub fn from_params(graph: &'g MeasuredGraph, params: InstanceParams) -> Result<Self> {
        let InstanceParams { center, radius, sigma, lambda } = params;
        graph.check_vertex(center)?;
        if !(sigma >= 1.0 && sigma.is_finite()) {
            return Err(Error::input(format!("sigma must be a finite real ≥ 1, got {sigma}")));
        }
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::input(format!("lambda must be a finite real ≥ 1, got {lambda}")));
        }
        let ball_depth = radius_to_depth(radius)?;
        let dilated_depth = radius_to_depth(lambda * radius)?.min(graph.vertex_count());

        let mut walker = BallWalker::new(graph.vertex_count());
        walker.run(graph, center, Some(dilated_depth as u32 + 1));
        let domain = walker.order().to_vec();
        let distance: Vec<u32> = domain.iter().map(|&v| walker.dist(v).unwrap()).collect();
        let ball_len = distance.partition_point(|&d| d as usize <= ball_depth);
        let dilated_len = distance.partition_point(|&d| d as usize <= dilated_depth);

        let local: HashMap<usize, usize> = domain.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adjacency =
            domain.iter().map(|&v| graph.neighbors(v).iter().filter_map(|w| local.get(w).copied()).collect()).collect();
        let measure = domain.iter().map(|&v| graph.measure(v)).collect();
        let truncated = domain.iter().any(|&v| graph.is_degree_deficient(v));
        Ok(PoincareInstance { graph, params, domain, distance, ball_len, dilated_len, measure, adjacency, truncated })
    }

    pub fn graph(&self) -> &'g MeasuredGraph {
        self.graph
    }

    pub fn params(&self) -> InstanceParams {
        self.params
    }

    pub fn center(&self) -> usize {
        self.params.center
    }

    pub fn radius(&self) -> f64 {
        self.params.radius
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    /// Same window, different exponent.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        if !(sigma >= 1.0 && sigma.is_finite()) {
            return Err(Error::input(format!("sigma must be a finite real ≥ 1, got {sigma}")));
        }
        let mut out = self.clone();
        out.params.sigma = sigma;
        Ok(out)
    }

    /// Host ids of the domain in breadth-first order; local index `i` refers
    /// to `domain()[i]`.
    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    /// Local indices `0..ball_len()` form `B̄(p,R)`.
    pub fn ball_len(&self) -> usize {
        self.ball_len
    }

    /// Local indices `0..dilated_len()` form `B̄(p,λR)`.
    pub fn dilated_len(&self) -> usize {
        self.dilated_len
    }

    /// Graph distance from the center, per local index.
    pub fn distances(&self) -> &[u32] {
        &self.distance
    }

    pub fn local_measure(&self) -> &[f64] {
        &self.measure
    }

    /// Neighbors of a local vertex that lie in the domain. For vertices of
    /// `B̄(p,λR)` this is the full stencil.
    pub fn local_neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Whether the domain meets a vertex whose stencil is cut short by the
    /// edge of the finite graph.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Restriction of a function on the whole graph to the domain.
    pub fn restrict(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.graph.check_function_len(u)?;
        Ok(self.domain.iter().map(|&v| u[v]).collect())
    }

    /// Extension of a domain function by zero.
    pub fn extend(&self, local: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.graph.vertex_count()];
        for (&v, &x) in self.domain.iter().zip(local) {
            u[v] = x;
        }
        u
    }

    fn check_local(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.domain.len() {
            return Err(Error::input(format!(
                "domain function has {} values but the domain has {} vertices",
                u.len(),
                self.domain.len()
            )));
        }
        Ok(())
    }

    /// `u_R`, the ν-mean of `u` over `B̄(p,R)`.
    pub fn ball_mean(&self, u: &[f64]) -> Result<f64> {
        self.check_local(u)?;
        Ok(self.ball_mean_unchecked(u))
    }

    fn ball_mean_unchecked(&self, u: &[f64]) -> f64 {
        let b = self.ball_len;
        let mass: f64 = self.measure[..b].iter().sum();
        u[..b].iter().zip(&self.measure[..b]).map(|(x, m)| x * m).sum::<f64>() / mass
    }

    /// `Σ_{B̄(p,R)} |u − τ|^σ ν`.
    pub fn deviation(&self, u: &[f64], tau: f64) -> Result<f64> {
        self.check_local(u)?;
        Ok(self.deviation_unchecked(u, tau))
    }

    fn deviation_unchecked(&self, u: &[f64], tau: f64) -> f64 {
        let sigma = self.params.sigma;
        let b = self.ball_len;
        u[..b].iter().zip(&self.measure[..b]).map(|(x, m)| (x - tau).abs().powf(sigma) * m).sum()
    }

    pub fn lhs(&self, u: &[f64]) -> Result<f64> {
        self.check_local(u)?;
        Ok(self.lhs_unchecked(u))
    }

    pub(crate) fn lhs_unchecked(&self, u: &[f64]) -> f64 {
        self.deviation_unchecked(u, self.ball_mean_unchecked(u))
    }

    /// `|δu|` at a local vertex of `B̄(p,λR)`.
    pub fn gradient_norm(&self, u: &[f64], i: usize) -> f64 {
        let x = u[i];
        self.adjacency[i].iter().map(|&j| (x - u[j]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn rhs(&self, u: &[f64]) -> Result<f64> {
        self.check_local(u)?;
        Ok(self.rhs_unchecked(u))
    }

    pub(crate) fn rhs_unchecked(&self, u: &[f64]) -> f64 {
        let sigma = self.params.sigma;
        (0..self.dilated_len).map(|i| self.gradient_norm(u, i).powf(sigma) * self.measure[i]).sum()
    }

    /// `LHS/RHS`, or `None` when `RHS = 0` (then `u` is constant on the
    /// domain and `LHS = 0` as well).
    pub fn ratio(&self, u: &[f64]) -> Result<Option<f64>> {
        self.check_local(u)?;
        Ok(self.ratio_unchecked(u))
    }

    pub(crate) fn ratio_unchecked(&self, u: &[f64]) -> Option<f64> {
        let rhs = self.rhs_unchecked(u);
        (rhs > 0.0).then(|| self.lhs_unchecked(u) / rhs)
    }
}
