//! Balls in the universal cover of a finite quotient graph.
//!
//! Cover vertices are non-backtracking dart walks from a base vertex, so the
//! cover is a tree and deck-group orbits are read off as fibers of the
//! projection. Quotients may carry loops and parallel edges; the cover is
//! always simple.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Read;

use serde::Serialize;

use crate::mmgraph::io::GraphDocument;
use crate::mmgraph::{integer_radii, GrowthMode, GrowthProfile};
use crate::{Error, MeasuredGraph, Result};

/// Default cap on the number of cover vertices.
pub const DEFAULT_VERTEX_BUDGET: usize = 1_000_000;

/// A finite connected multigraph with positive vertex measure. Loops and
/// parallel edges are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientGraph {
    measure: Vec<f64>,
    edges: Vec<(usize, usize)>,
    /// Dart `2k` runs `edges[k].0 → edges[k].1`, dart `2k+1` the reverse.
    darts_at: Vec<Vec<usize>>,
}

impl QuotientGraph {
    pub fn new(measure: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = measure.len();
        if n == 0 {
            return Err(Error::input("quotient needs at least one vertex"));
        }
        if let Some(m) = measure.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::input(format!("vertex measures must be positive and finite, got {m}")));
        }
        let mut darts_at = vec![Vec::new(); n];
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::input(format!("edge ({a}, {b}) has an endpoint outside 0..{n}")));
            }
            darts_at[a].push(2 * k);
            darts_at[b].push(2 * k + 1);
        }
        let q = QuotientGraph { measure, edges, darts_at };
        if q.simple_distances(0).contains(&usize::MAX) {
            return Err(Error::input("quotient graph is disconnected"));
        }
        Ok(q)
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        Self::new(doc.measures()?, doc.edge_pairs())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_reader(reader)?;
        Self::from_document(&doc)
    }

    pub fn from_graph(graph: &MeasuredGraph) -> Self {
        Self::new(graph.measures().to_vec(), graph.edges().collect()).expect("measured graphs are valid quotients")
    }

    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn measure(&self, v: usize) -> f64 {
        self.measure[v]
    }

    /// Degree with each loop counted twice.
    pub fn degree(&self, v: usize) -> usize {
        self.darts_at[v].len()
    }

    /// `V₀`, the total measure.
    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    fn dart_target(&self, dart: usize) -> usize {
        let (a, b) = self.edges[dart / 2];
        if dart.is_multiple_of(2) {
            b
        } else {
            a
        }
    }

    fn simple_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &d in &self.darts_at[v] {
                let w = self.dart_target(d);
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// `D`, the combinatorial diameter. Loops do not shorten or lengthen
    /// anything, so a one-vertex quotient has `D = 0`.
    pub fn diameter(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.simple_distances(v).into_iter().max().unwrap_or(0)).max().unwrap_or(0)
    }

    /// Length of the shortest closed non-backtracking walk (loops give 1,
    /// parallel edges 2); `None` for a tree.
    pub fn girth(&self) -> Option<usize> {
        if self.edges.iter().any(|&(a, b)| a == b) {
            return Some(1);
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &self.edges {
            if !seen.insert((a.min(b), a.max(b))) {
                return Some(2);
            }
        }
        // simple graph: shortest cycle through BFS from every vertex
        let n = self.vertex_count();
        let mut best = usize::MAX;
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            let mut via = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &d in &self.darts_at[v] {
                    if d / 2 == via[v] {
                        continue;
                    }
                    let w = self.dart_target(d);
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        via[w] = d / 2;
                        queue.push_back(w);
                    } else {
                        best = best.min(dist[v] + dist[w] + 1);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }

    /// The underlying simple graph: loops dropped, parallel edges merged.
    /// Each label records what was collapsed at that vertex.
    pub fn simplified(&self) -> MeasuredGraph {
        let n = self.vertex_count();
        let mut loops = vec![0usize; n];
        let mut merged = vec![0usize; n];
        let mut seen = std::collections::BTreeSet::new();
        let mut simple = Vec::new();
        for &(a, b) in &self.edges {
            if a == b {
                loops[a] += 1;
            } else if seen.insert((a.min(b), a.max(b))) {
                simple.push((a, b));
            } else {
                merged[a] += 1;
                merged[b] += 1;
            }
        }
        let labels = (0..n).map(|v| format!("loops={};merged={}", loops[v], merged[v])).collect();
        MeasuredGraph::new(self.measure.clone(), &simple)
            .and_then(|g| g.with_labels(labels))
            .expect("simplifying a connected quotient keeps it connected")
    }
}

/// A ball around a lift `x̃₀` of `base` in the universal cover.
///
/// Expansion is lazy: [`CoverBall::expand_to`] grows it in place.
#[derive(Clone, Debug)]
pub struct CoverBall {
    quotient: QuotientGraph,
    base: usize,
    radius: usize,
    /// Parent vertex and the dart used to reach each cover vertex.
    parent: Vec<Option<(usize, usize)>>,
    projection: Vec<usize>,
    depth: Vec<usize>,
    budget: usize,
}

/// Builds `B̄(x̃₀, R)` in the universal cover of `quotient`, with `x̃₀` a lift
/// of `base`.
pub fn universal_cover_ball(quotient: &QuotientGraph, base: usize, radius: usize, budget: usize) -> Result<CoverBall> {
    if base >= quotient.vertex_count() {
        return Err(Error::UnknownVertex { vertex: base, count: quotient.vertex_count() });
    }
    let mut ball = CoverBall {
        quotient: quotient.clone(),
        base,
        radius: 0,
        parent: vec![None],
        projection: vec![base],
        depth: vec![0],
        budget,
    };
    ball.expand_to(radius)?;
    Ok(ball)
}

impl CoverBall {
    /// Extends the ball to radius `radius` (no-op if already that large).
    pub fn expand_to(&mut self, radius: usize) -> Result<()> {
        while self.radius < radius {
            let start = self.depth.partition_point(|&d| d < self.radius);
            let end = self.depth.len();
            for v in start..end {
                let at = self.projection[v];
                let back = self.parent[v].map(|(_, d)| d ^ 1);
                for &dart in &self.quotient.darts_at[at] {
                    if Some(dart) == back {
                        continue;
                    }
                    if self.depth.len() >= self.budget {
                        return Err(Error::Budget { what: "cover vertices", limit: self.budget as u64 });
                    }
                    self.parent.push(Some((v, dart)));
                    self.projection.push(self.quotient.dart_target(dart));
                    self.depth.push(self.radius + 1);
                }
            }
            self.radius += 1;
        }
        Ok(())
    }

    pub fn quotient(&self) -> &QuotientGraph {
        &self.quotient
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertex_count(&self) -> usize {
        self.depth.len()
    }

    /// Projection `p` to the quotient.
    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    /// Distance from `x̃₀`.
    pub fn depth(&self) -> &[usize] {
        &self.depth
    }

    /// Parent in the walk tree; `None` for `x̃₀`.
    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v].map(|(p, _)| p)
    }

    /// Number of cover vertices within distance `r` of `x̃₀`.
    pub fn ball_size(&self, r: usize) -> usize {
        self.depth.partition_point(|&d| d <= r)
    }

    /// `μ̃(B̄(x̃₀, r))` with the lifted measure.
    pub fn ball_measure(&self, r: usize) -> f64 {
        self.projection[..self.ball_size(r)].iter().map(|&q| self.quotient.measure(q)).sum()
    }

    /// The ball as a measured tree, vertex 0 being `x̃₀`. Labels are the
    /// projected quotient vertices.
    pub fn tree(&self) -> MeasuredGraph {
        let edges: Vec<(usize, usize)> = (1..self.vertex_count()).map(|v| (self.parent[v].unwrap().0, v)).collect();
        let measure = self.projection.iter().map(|&q| self.quotient.measure(q)).collect();
        let labels = self.projection.iter().map(ToString::to_string).collect();
        MeasuredGraph::new(measure, &edges).and_then(|g| g.with_labels(labels)).expect("walk tree is connected")
    }
}

/// `F_Γ(R)`: the number of lifts of the base within distance `R` of `x̃₀`,
/// for `R = 0..=r_max`.
pub fn deck_growth(cover: &CoverBall, r_max: usize) -> Result<GrowthProfile> {
    if r_max > cover.radius() {
        return Err(Error::input(format!(
            "deck growth to radius {r_max} needs a cover expanded that far (currently {})",
            cover.radius()
        )));
    }
    let mut counts = vec![0.0; r_max + 1];
    for (v, &d) in cover.depth.iter().enumerate() {
        if d <= r_max && cover.projection[v] == cover.base {
            counts[d] += 1.0;
        }
    }
    for r in 1..=r_max {
        counts[r] += counts[r - 1];
    }
    GrowthProfile::new(integer_radii(r_max), counts, GrowthMode::Absolute)
}

/// One (center, R) cell of the volume comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeCell {
    /// Quotient vertex whose lift is the center.
    pub center: usize,
    pub radius: usize,
    /// `μ̃(B̄(x̃, R))`.
    pub lhs: f64,
    /// `V₀ · F_Γ(R + D)` with the orbit of the center itself.
    pub rhs: f64,
    pub ratio: f64,
    /// `V₀ · F_Γ(R + D)` with the orbit of the report's base vertex. Differs
    /// from `rhs` on quotients that are not vertex-transitive.
    pub base_orbit_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeComparison {
    pub base: usize,
    /// `V₀`.
    pub total_measure: f64,
    /// `D`, combinatorial; the metric-graph diameter can be larger by ½,
    /// which only loosens the inequality.
    pub diameter: usize,
    /// Girth of the quotient, reported as the systole surrogate.
    pub girth: Option<usize>,
    pub cells: Vec<VolumeCell>,
    pub violations: usize,
}

impl VolumeComparison {
    /// CSV `R,lhs,rhs,ratio`, one row per radius holding the worst center.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,lhs,rhs,ratio\n");
        let max_r = self.cells.iter().map(|c| c.radius).max();
        for r in 0..=max_r.unwrap_or(0) {
            let worst = self.cells.iter().filter(|c| c.radius == r).max_by(|a, b| a.ratio.total_cmp(&b.ratio));
            if let Some(c) = worst {
                let _ = writeln!(out, "{},{},{},{}", c.radius, c.lhs, c.rhs, c.ratio);
            }
        }
        out
    }
}

/// Checks `μ̃(B̄(x̃, R)) ≤ V₀ · F_Γ(R + D)` for every `R` in `radii` and every
/// center in `centers` (quotient vertices; all lifts of a vertex look alike,
/// so one lift per vertex covers every cover center). `F_Γ` is counted on
/// the orbit of the center.
pub fn volume_comparison_check(
    quotient: &QuotientGraph,
    base: usize,
    centers: &[usize],
    radii: &[usize],
    budget: usize,
) -> Result<VolumeComparison> {
    let v0 = quotient.total_measure();
    let diameter = quotient.diameter();
    let r_top = radii.iter().copied().max().unwrap_or(0) + diameter;
    let base_growth = deck_growth(&universal_cover_ball(quotient, base, r_top, budget)?, r_top)?;
    let mut cells = Vec::new();
    for &center in centers {
        let cover = universal_cover_ball(quotient, center, r_top, budget)?;
        let growth = deck_growth(&cover, r_top)?;
        for &r in radii {
            let lhs = cover.ball_measure(r);
            let rhs = v0 * growth.eval((r + diameter) as f64)?;
            let base_orbit_rhs = v0 * base_growth.eval((r + diameter) as f64)?;
            cells.push(VolumeCell { center, radius: r, lhs, rhs, ratio: lhs / rhs, base_orbit_rhs });
        }
    }
    let violations = cells.iter().filter(|c| c.lhs > c.rhs * (1.0 + 1e-12)).count();
    Ok(VolumeComparison { base, total_measure: v0, diameter, girth: quotient.girth(), cells, violations })
}
