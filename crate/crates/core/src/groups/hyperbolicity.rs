use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::mmgraph::BallWalker;
use crate::{par, Error, MeasuredGraph, Result};

/// Default cap on the number of examined quadruples.
pub const DEFAULT_QUADRUPLE_BUDGET: u64 = 10_000_000;

/// Which quadruples enter the four-point computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadrupleSample {
    /// Every unordered quadruple; the result is exact.
    All,
    /// `count` uniformly random quadruples; the result is a lower estimate.
    Random { count: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub quadruples: u64,
    /// True when every quadruple was examined (or the graph is a tree).
    pub exact: bool,
    /// A quadruple attaining `delta`, if one was examined.
    pub witness: Option<[usize; 4]>,
}

/// Half the gap between the two largest of the three pair sums. This equals
/// the least `δ` for which the Gromov-product inequality holds on the
/// quadruple for every choice of base point.
fn four_point(d: impl Fn(usize, usize) -> u32, q: [usize; 4]) -> u32 {
    let [x, y, z, w] = q;
    let mut s = [d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)];
    s.sort_unstable();
    s[2] - s[1]
}

fn choose4(n: u64) -> u64 {
    if n < 4 {
        return 0;
    }
    let n = n as u128;
    (n * (n - 1) * (n - 2) * (n - 3) / 24).min(u64::MAX as u128) as u64
}

fn distance_matrix(graph: &MeasuredGraph) -> Vec<Vec<u32>> {
    let n = graph.vertex_count();
    par::map_indexed(
        n,
        || BallWalker::new(n),
        |walker, s| {
            walker.run(graph, s, None);
            (0..n).map(|v| walker.dist(v).expect("graph is connected")).collect()
        },
    )
}

/// Gromov `δ` by the four-point condition. Trees return 0 without
/// enumerating quadruples.
pub fn hyperbolicity_delta(graph: &MeasuredGraph, sample: QuadrupleSample, budget: u64) -> Result<DeltaEstimate> {
    if graph.is_tree() {
        return Ok(DeltaEstimate { delta: 0.0, quadruples: 0, exact: true, witness: None });
    }
    let n = graph.vertex_count();
    match sample {
        QuadrupleSample::All => {
            let total = choose4(n as u64);
            if total > budget {
                return Err(Error::Budget { what: "quadruples", limit: budget });
            }
            let dist = distance_matrix(graph);
            // one task per smallest index, reduced in index order
            let per_first = par::map_indexed(
                n,
                || (),
                |_, x| {
                    let mut best: (u32, Option<[usize; 4]>) = (0, None);
                    for y in x + 1..n {
                        for z in y + 1..n {
                            for w in z + 1..n {
                                let q = [x, y, z, w];
                                let gap = four_point(|a, b| dist[a][b], q);
                                if best.1.is_none() || gap > best.0 {
                                    best = (gap, Some(q));
                                }
                            }
                        }
                    }
                    best
                },
            );
            let best = per_first.into_iter().fold((0, None), |acc, cur| match (acc.1, cur.1) {
                (None, _) => cur,
                (Some(_), Some(_)) if cur.0 > acc.0 => cur,
                _ => acc,
            });
            Ok(DeltaEstimate { delta: f64::from(best.0) / 2.0, quadruples: total, exact: true, witness: best.1 })
        }
        QuadrupleSample::Random { count, seed } => {
            if count > budget {
                return Err(Error::Budget { what: "quadruples", limit: budget });
            }
            if n < 4 {
                return Ok(DeltaEstimate { delta: 0.0, quadruples: 0, exact: true, witness: None });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let quads: Vec<[usize; 4]> = (0..count)
                .map(|_| {
                    let mut q = [0; 4];
                    for i in 0..4 {
                        q[i] = loop {
                            let v = rng.random_range(0..n);
                            if !q[..i].contains(&v) {
                                break v;
                            }
                        };
                    }
                    q
                })
                .collect();
            let gaps = par::map_indexed(
                quads.len(),
                || [BallWalker::new(n), BallWalker::new(n), BallWalker::new(n)],
                |walkers, i| {
                    let q = quads[i];
                    for (k, walker) in walkers.iter_mut().enumerate() {
                        walker.run(graph, q[k], None);
                    }
                    let d = |a: usize, b: usize| {
                        let k = q.iter().position(|&v| v == a).unwrap();
                        walkers[k].dist(b).unwrap()
                    };
                    four_point(d, q)
                },
            );
            let mut best: (u32, Option<[usize; 4]>) = (0, None);
            for (gap, q) in gaps.into_iter().zip(&quads) {
                if best.1.is_none() || gap > best.0 {
                    best = (gap, Some(*q));
                }
            }
            Ok(DeltaEstimate { delta: f64::from(best.0) / 2.0, quadruples: count, exact: false, witness: best.1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{cayley_ball, GroupModel, MeasureRule, DEFAULT_ELEMENT_BUDGET};
    use crate::mmgraph::generators::{
        complete_graph, cycle_graph, grid_graph, path_graph, random_connected_graph, star_graph,
    };
    use proptest::prelude::*;
    use rand::Rng;

    /// Smallest δ with (x|y)_w ≥ min((x|z)_w, (y|z)_w) − δ over all ordered
    /// quadruples, straight from the Gromov-product definition.
    fn gromov_product_oracle(g: &MeasuredGraph) -> f64 {
        let n = g.vertex_count();
        let d: Vec<Vec<f64>> =
            (0..n).map(|s| g.bfs_distances(s).unwrap().into_iter().map(|x| x as f64).collect()).collect();
        let gp = |x: usize, y: usize, w: usize| (d[x][w] + d[y][w] - d[x][y]) / 2.0;
        let mut delta: f64 = 0.0;
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        delta = delta.max(gp(x, z, w).min(gp(y, z, w)) - gp(x, y, w));
                    }
                }
            }
        }
        delta
    }

    #[test]
    fn known_values() {
        let all = |g: &MeasuredGraph| hyperbolicity_delta(g, QuadrupleSample::All, DEFAULT_QUADRUPLE_BUDGET).unwrap();
        let c4 = all(&cycle_graph(4));
        assert_eq!(c4.delta, 1.0);
        assert!(c4.exact);
        assert_eq!(all(&path_graph(12)).delta, 0.0);
        assert_eq!(all(&star_graph(5)).delta, 0.0);
        assert_eq!(all(&complete_graph(6)).delta, 0.0);
        let tree = cayley_ball(&GroupModel::free(2), 5, &MeasureRule::Counting, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(all(&tree.graph).delta, 0.0);
    }

    #[test]
    fn matches_gromov_product_definition() {
        for g in [cycle_graph(5), cycle_graph(8), grid_graph(3, 4), complete_graph(4)] {
            let est = hyperbolicity_delta(&g, QuadrupleSample::All, DEFAULT_QUADRUPLE_BUDGET).unwrap();
            assert_eq!(est.delta, gromov_product_oracle(&g));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let g = random_connected_graph(&mut rng, 12, 0.2, (1.0, 1.0)).unwrap();
            let est = hyperbolicity_delta(&g, QuadrupleSample::All, DEFAULT_QUADRUPLE_BUDGET).unwrap();
            assert_eq!(est.delta, gromov_product_oracle(&g));
        }
    }

    #[test]
    fn sampling_and_budget() {
        let g = grid_graph(6, 6);
        let exact = hyperbolicity_delta(&g, QuadrupleSample::All, DEFAULT_QUADRUPLE_BUDGET).unwrap();
        let sample = QuadrupleSample::Random { count: 2000, seed: 3 };
        let est = hyperbolicity_delta(&g, sample, DEFAULT_QUADRUPLE_BUDGET).unwrap();
        assert!(!est.exact);
        assert!(est.delta <= exact.delta);
        assert_eq!(est, hyperbolicity_delta(&g, sample, DEFAULT_QUADRUPLE_BUDGET).unwrap());
        let err = hyperbolicity_delta(&g, QuadrupleSample::All, 100).unwrap_err();
        assert!(matches!(err, Error::Budget { limit: 100, .. }));
    }

    proptest! {
        #[test]
        fn invariant_under_relabeling(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(4..14);
            let g = random_connected_graph(&mut rng, n, 0.25, (1.0, 1.0)).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let edges: Vec<(usize, usize)> = g.edges().map(|(a, b)| (perm[a], perm[b])).collect();
            let h = MeasuredGraph::counting(n, &edges).unwrap();
            let a = hyperbolicity_delta(&g, QuadrupleSample::All, DEFAULT_QUADRUPLE_BUDGET).unwrap();
            let b = hyperbolicity_delta(&h, QuadrupleSample::All, DEFAULT_QUADRUPLE_BUDGET).unwrap();
            prop_assert_eq!(a.delta, b.delta);
        }
    }
}
