//! ε-discretizations of a host graph and numerical checks of the
//! inequalities that relate a host to its net.

mod checks;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::mmgraph::io::GraphDocument;
use crate::mmgraph::{integer_radii, radius_to_depth, BallWalker, GrowthMode};
use crate::{Error, GrowthProfile, MeasuredGraph, Result};

pub use checks::{
    covering_multiplicity, discretized_gradient_check, qi_distortion_check, volume_transfer_check, CheckFlag,
    CheckReport, CheckRow, Multiplicity, PairSample, QiReport,
};

/// Largest integer distance strictly below `r` (for `r > 0`).
pub(crate) fn strict_depth(r: f64) -> usize {
    (r.ceil() as usize).saturating_sub(1)
}

/// An ε-separated, ε-covering set of host vertices made into a measured
/// graph: centers are joined when their host distance is below `2ε`, and a
/// center carries the host measure of its closed `ε`-ball.
#[derive(Clone, Debug)]
pub struct Net {
    host: MeasuredGraph,
    epsilon: f64,
    centers: Vec<usize>,
    center_of_host: Vec<Option<usize>>,
    quotient: MeasuredGraph,
    assignment: Vec<Vec<usize>>,
}

/// Greedy net: host vertices are scanned in ascending id order and a vertex
/// becomes a center iff every current center is at distance `≥ ε`.
pub fn build_net(host: &MeasuredGraph, epsilon: f64) -> Result<Net> {
    if !(epsilon >= 1.0 && epsilon.is_finite()) {
        return Err(Error::input(format!("epsilon must be a finite real ≥ 1, got {epsilon}")));
    }
    let n = host.vertex_count();
    let mut walker = BallWalker::new(n);
    let mut blocked = vec![false; n];
    let mut centers = Vec::new();
    let separation = strict_depth(epsilon) as u32;
    for v in 0..n {
        if blocked[v] {
            continue;
        }
        centers.push(v);
        walker.run(host, v, Some(separation));
        for &w in walker.order() {
            blocked[w] = true;
        }
    }
    let mut center_of_host = vec![None; n];
    for (i, &c) in centers.iter().enumerate() {
        center_of_host[c] = Some(i);
    }

    let cover_depth = radius_to_depth(epsilon)? as u32;
    let edge_depth = strict_depth(2.0 * epsilon) as u32;
    let mut assignment = vec![Vec::new(); n];
    let mut measure = Vec::with_capacity(centers.len());
    let mut edges = Vec::new();
    for (i, &c) in centers.iter().enumerate() {
        walker.run(host, c, Some(edge_depth.max(cover_depth)));
        let mut mass = 0.0;
        for &w in walker.order() {
            let d = walker.dist(w).unwrap();
            if d <= cover_depth {
                mass += host.measure(w);
                assignment[w].push(c);
            }
            if d <= edge_depth {
                if let Some(j) = center_of_host[w] {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        measure.push(mass);
    }
    if let Some(v) = assignment.iter().position(Vec::is_empty) {
        return Err(Error::Internal(format!("host vertex {v} is not covered by the net")));
    }
    let labels = centers.iter().map(ToString::to_string).collect();
    let quotient = MeasuredGraph::new(measure, &edges)
        .map_err(|e| Error::Internal(format!("net quotient is invalid: {e}")))?
        .with_labels(labels)?;
    Ok(Net { host: host.clone(), epsilon, centers, center_of_host, quotient, assignment })
}

#[derive(Serialize)]
struct NetDocument<'a> {
    epsilon: f64,
    centers: &'a [usize],
    quotient: GraphDocument,
    assignment: BTreeMap<usize, &'a [usize]>,
}

impl Net {
    pub fn host(&self) -> &MeasuredGraph {
        &self.host
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Host ids of the centers; quotient vertex `i` is `centers()[i]`.
    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn quotient(&self) -> &MeasuredGraph {
        &self.quotient
    }

    /// Quotient vertex of a host vertex that is a center.
    pub fn center_index(&self, host_vertex: usize) -> Option<usize> {
        self.center_of_host.get(host_vertex).copied().flatten()
    }

    /// Host ids of the centers whose closed `ε`-ball contains `host_vertex`.
    pub fn assignment(&self, host_vertex: usize) -> &[usize] {
        &self.assignment[host_vertex]
    }

    /// `ũ(y)`, the host-measure mean of `u` on `B̄(y, ε)`, for every center.
    pub fn ball_means(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.host.check_function_len(u)?;
        let mut sums = vec![0.0; self.centers.len()];
        for (v, owners) in self.assignment.iter().enumerate() {
            for &c in owners {
                sums[self.center_of_host[c].unwrap()] += u[v] * self.host.measure(v);
            }
        }
        Ok(sums.iter().zip(self.quotient.measures()).map(|(s, m)| s / m).collect())
    }

    /// Vertex-ratio growth profile of the host over integer radii up to
    /// `ceil(up_to)`. On graphs this equals the half-ball ratio.
    pub fn host_profile(&self, up_to: f64) -> Result<GrowthProfile> {
        self.host.growth_function(&integer_radii(up_to.ceil() as usize), GrowthMode::VertexRatio)
    }

    /// JSON `{"epsilon", "centers", "quotient", "assignment"}`; assignment
    /// keys are host ids.
    pub fn to_json(&self) -> Result<String> {
        let doc = NetDocument {
            epsilon: self.epsilon,
            centers: &self.centers,
            quotient: GraphDocument::from_graph(&self.quotient),
            assignment: self.assignment.iter().enumerate().map(|(v, a)| (v, a.as_slice())).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::generators::{grid_graph, path_graph, random_connected_graph};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Checks every defining property of a net against all-pairs distances.
    #[allow(clippy::needless_range_loop)]
    fn assert_net_invariants(net: &Net) {
        let host = net.host();
        let eps = net.epsilon();
        let dist: Vec<Vec<usize>> = (0..host.vertex_count()).map(|v| host.bfs_distances(v).unwrap()).collect();
        for (i, &a) in net.centers().iter().enumerate() {
            for &b in &net.centers()[i + 1..] {
                assert!(dist[a][b] as f64 >= eps, "centers {a},{b} too close");
            }
        }
        for v in 0..host.vertex_count() {
            let owners: Vec<usize> = net.centers().iter().copied().filter(|&c| dist[c][v] as f64 <= eps).collect();
            assert!(!owners.is_empty());
            assert_eq!(net.assignment(v), owners.as_slice());
        }
        let q = net.quotient();
        for (i, &a) in net.centers().iter().enumerate() {
            for (j, &b) in net.centers().iter().enumerate() {
                let joined = q.neighbors(i).contains(&j);
                assert_eq!(joined, i != j && (dist[a][b] as f64) < 2.0 * eps);
            }
            let ball: f64 =
                (0..host.vertex_count()).filter(|&v| dist[a][v] as f64 <= eps).map(|v| host.measure(v)).sum();
            assert!((q.measure(i) - ball).abs() <= 1e-12 * ball);
        }
    }

    #[test]
    fn path_example() {
        let net = build_net(&path_graph(9), 2.0).unwrap();
        assert_eq!(net.centers(), &[0, 2, 4, 6, 8]);
        assert_eq!(net.quotient().measures(), &[2.0 + 1.0, 5.0, 5.0, 5.0, 3.0]);
        assert_eq!(net.quotient().edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_net_invariants(&net);
    }

    #[test]
    fn unit_epsilon_reproduces_host() {
        let host = grid_graph(6, 5);
        let net = build_net(&host, 1.0).unwrap();
        assert_eq!(net.centers().len(), host.vertex_count());
        assert_eq!(net.quotient().edges().collect::<Vec<_>>(), host.edges().collect::<Vec<_>>());
        for v in 0..host.vertex_count() {
            assert_eq!(net.quotient().measure(v), host.ball(v, 1.0).unwrap().len() as f64);
        }
        let single = build_net(&MeasuredGraph::counting(1, &[]).unwrap(), 3.0).unwrap();
        assert_eq!(single.centers(), &[0]);
        assert!(build_net(&host, 0.5).is_err());
    }

    #[test]
    fn ball_means_and_export() {
        let net = build_net(&path_graph(9), 2.0).unwrap();
        let u: Vec<f64> = (0..9).map(f64::from).collect();
        assert_eq!(net.ball_means(&u).unwrap(), vec![1.0, 2.0, 4.0, 6.0, 7.0]);
        let json: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        assert_eq!(json["centers"], serde_json::json!([0, 2, 4, 6, 8]));
        assert_eq!(json["assignment"]["3"], serde_json::json!([2, 4]));
        assert_eq!(json["quotient"]["vertices"][1]["measure"], 5.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn invariants_on_random_hosts(seed in 0u64..10_000, eps in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let host = random_connected_graph(&mut rng, 40, 0.03, (0.1, 10.0)).unwrap();
            let net = build_net(&host, eps as f64).unwrap();
            assert_net_invariants(&net);
            let again = build_net(&host, eps as f64).unwrap();
            prop_assert_eq!(net.centers(), again.centers());
        }
    }
}
