use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::{Error, Result};

/// A real-valued function on (some of) the vertices of a graph.
///
/// Slices are total on their index range; maps may be partial. Operations
/// that need a value the function does not define fail with
/// [`Error::MissingValue`].
pub trait VertexFunction {
    fn value_at(&self, vertex: usize) -> Option<f64>;

    fn require(&self, vertex: usize) -> Result<f64> {
        self.value_at(vertex).ok_or(Error::MissingValue(vertex))
    }
}

impl VertexFunction for [f64] {
    fn value_at(&self, vertex: usize) -> Option<f64> {
        self.get(vertex).copied()
    }
}

impl VertexFunction for Vec<f64> {
    fn value_at(&self, vertex: usize) -> Option<f64> {
        self.get(vertex).copied()
    }
}

impl VertexFunction for HashMap<usize, f64> {
    fn value_at(&self, vertex: usize) -> Option<f64> {
        self.get(&vertex).copied()
    }
}

impl VertexFunction for BTreeMap<usize, f64> {
    fn value_at(&self, vertex: usize) -> Option<f64> {
        self.get(&vertex).copied()
    }
}

/// A finite connected simple graph with unit edge lengths and a positive
/// measure on its vertices.
///
/// Immutable after construction. Neighbor lists are sorted, so every
/// traversal is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredGraph {
    adjacency: Vec<Vec<usize>>,
    measure: Vec<f64>,
    labels: Option<Vec<String>>,
    edge_count: usize,
    max_degree: usize,
}

impl MeasuredGraph {
    /// Builds a graph from a vertex measure and an undirected edge list.
    ///
    /// Repeated edges (in either orientation) are collapsed. Self-loops,
    /// out-of-range endpoints, non-positive measures and disconnected graphs
    /// are rejected.
    pub fn new(measure: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = measure.len();
        if n == 0 {
            return Err(Error::input("a graph needs at least one vertex"));
        }
        for (v, &m) in measure.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::input(format!("vertex {v} has measure {m}; measures must be finite and positive")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::UnknownVertex { vertex: a.max(b), count: n });
            }
            if a == b {
                return Err(Error::input(format!("self-loop at vertex {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_sorted_adjacency(adjacency, measure)
    }

    /// Same as [`MeasuredGraph::new`] with the counting measure.
    pub fn counting(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(vec![1.0; vertex_count], edges)
    }

    pub(crate) fn from_sorted_adjacency(adjacency: Vec<Vec<usize>>, measure: Vec<f64>) -> Result<Self> {
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let graph = MeasuredGraph { adjacency, measure, labels: None, edge_count, max_degree };
        let reached = graph.bfs_order(0, None).len();
        if reached != graph.vertex_count() {
            return Err(Error::input(format!(
                "graph is disconnected: {reached} of {} vertices reachable from vertex 0",
                graph.vertex_count()
            )));
        }
        Ok(graph)
    }

    /// Replaces the vertex measure, keeping the combinatorial structure.
    pub fn with_measure(mut self, measure: Vec<f64>) -> Result<Self> {
        if measure.len() != self.vertex_count() {
            return Err(Error::input(format!(
                "measure has {} entries for {} vertices",
                measure.len(),
                self.vertex_count()
            )));
        }
        if let Some(v) = measure.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::input(format!("vertex {v} has a non-positive measure")));
        }
        self.measure = measure;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vertex_count() {
            return Err(Error::input(format!("{} labels for {} vertices", labels.len(), self.vertex_count())));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn measure(&self, v: usize) -> f64 {
        self.measure[v]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v].as_str())
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn min_measure(&self) -> f64 {
        self.measure.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Undirected edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count + 1 == self.vertex_count()
    }

    /// A vertex whose degree is below the maximum degree of the graph.
    ///
    /// On finite pieces of regular spaces (grids, Cayley balls, cover balls)
    /// these are exactly the vertices where the finite graph has been cut.
    pub fn is_degree_deficient(&self, v: usize) -> bool {
        self.degree(v) < self.max_degree
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::UnknownVertex { vertex: v, count: self.vertex_count() })
        }
    }

    /// Exact shortest-path distances from `source` to every vertex.
    pub fn bfs_distances(&self, source: usize) -> Result<Vec<usize>> {
        self.check_vertex(source)?;
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    fn bfs_order(&self, source: usize, max_depth: Option<usize>) -> Vec<usize> {
        let mut walker = BallWalker::new(self.vertex_count());
        walker.run(self, source, max_depth.map(|d| d as u32));
        walker.order().to_vec()
    }

    /// Closed ball `{y : ρ(center, y) ≤ radius}`, sorted by vertex id.
    pub fn ball(&self, center: usize, radius: f64) -> Result<Vec<usize>> {
        self.check_vertex(center)?;
        let depth = radius_to_depth(radius)?;
        let mut ball = self.bfs_order(center, Some(depth));
        ball.sort_unstable();
        Ok(ball)
    }

    pub fn eccentricity(&self, v: usize) -> Result<usize> {
        Ok(self.bfs_distances(v)?.into_iter().max().unwrap_or(0))
    }

    /// Exact diameter by a BFS from every vertex.
    pub fn diameter(&self) -> usize {
        let mut walker = BallWalker::new(self.vertex_count());
        (0..self.vertex_count())
            .map(|v| {
                walker.run(self, v, None);
                walker.max_depth() as usize
            })
            .max()
            .unwrap_or(0)
    }

    /// Length of the discrete gradient, `(Σ_{y∼x} |u(x) − u(y)|²)^{1/2}`.
    pub fn gradient_norm<F: VertexFunction + ?Sized>(&self, u: &F, x: usize) -> Result<f64> {
        self.check_vertex(x)?;
        let ux = u.require(x)?;
        let mut sum = 0.0;
        for &y in &self.adjacency[x] {
            let d = ux - u.require(y)?;
            sum += d * d;
        }
        Ok(sum.sqrt())
    }

    /// `|δu|` at every vertex for a total function.
    pub fn gradient_norms(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_function_len(u)?;
        Ok((0..self.vertex_count()).map(|x| self.gradient_norm_unchecked(u, x)).collect())
    }

    pub(crate) fn gradient_norm_unchecked(&self, u: &[f64], x: usize) -> f64 {
        let ux = u[x];
        self.adjacency[x]
            .iter()
            .map(|&y| {
                let d = ux - u[y];
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_function_len(&self, u: &[f64]) -> Result<()> {
        if u.len() == self.vertex_count() {
            Ok(())
        } else {
            Err(Error::input(format!("function has {} values for {} vertices", u.len(), self.vertex_count())))
        }
    }

    /// `Σ_{x∈S} w(x) ν(x)`.
    pub fn integrate<F: VertexFunction + ?Sized>(&self, w: &F, set: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for &x in set {
            self.check_vertex(x)?;
            total += w.require(x)? * self.measure[x];
        }
        Ok(total)
    }

    /// `ν(S)`.
    pub fn measure_of(&self, set: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for &x in set {
            self.check_vertex(x)?;
            total += self.measure[x];
        }
        Ok(total)
    }

    /// The ν-weighted mean of `u` on the closed ball `B̄(center, radius)`.
    pub fn ball_mean<F: VertexFunction + ?Sized>(&self, u: &F, center: usize, radius: f64) -> Result<f64> {
        let ball = self.ball(center, radius)?;
        Ok(self.integrate(u, &ball)? / self.measure_of(&ball)?)
    }
}

/// Number of whole edges a closed ball of real radius reaches.
pub(crate) fn radius_to_depth(radius: f64) -> Result<usize> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::input(format!("radius must be nonnegative, got {radius}")));
    }
    Ok(if radius >= u32::MAX as f64 { u32::MAX as usize } else { radius.floor() as usize })
}

/// Reusable breadth-first search state.
///
/// Repeated truncated searches only touch the vertices they reach, so a
/// sweep over all centers of a large graph costs the sum of the ball sizes.
pub(crate) struct BallWalker {
    dist: Vec<u32>,
    order: Vec<usize>,
}

impl BallWalker {
    pub(crate) fn new(vertex_count: usize) -> Self {
        BallWalker { dist: vec![u32::MAX; vertex_count], order: Vec::new() }
    }

    pub(crate) fn run(&mut self, graph: &MeasuredGraph, source: usize, max_depth: Option<u32>) {
        for &v in &self.order {
            self.dist[v] = u32::MAX;
        }
        self.order.clear();
        let limit = max_depth.unwrap_or(u32::MAX);
        self.dist[source] = 0;
        self.order.push(source);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head];
            head += 1;
            let dv = self.dist[v];
            if dv >= limit {
                continue;
            }
            for &w in graph.neighbors(v) {
                if self.dist[w] == u32::MAX {
                    self.dist[w] = dv + 1;
                    self.order.push(w);
                }
            }
        }
    }

    /// Vertices reached by the last run, in nondecreasing distance order.
    pub(crate) fn order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn dist(&self, v: usize) -> Option<u32> {
        let d = self.dist[v];
        (d != u32::MAX).then_some(d)
    }

    pub(crate) fn max_depth(&self) -> u32 {
        self.order.last().map_or(0, |&v| self.dist[v])
    }

    /// Cumulative measure by distance: entry `d` is `ν(B̄(source, d))`.
    pub(crate) fn layer_masses(&self, graph: &MeasuredGraph) -> Vec<f64> {
        let mut masses: Vec<f64> = Vec::new();
        for &v in &self.order {
            let d = self.dist[v] as usize;
            if masses.len() <= d {
                let carry = masses.last().copied().unwrap_or(0.0);
                masses.resize(d + 1, carry);
            }
            masses[d] += graph.measure(v);
        }
        masses
    }
}
