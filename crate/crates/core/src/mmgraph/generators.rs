//! Standard test graphs, all with the counting measure unless stated.

use rand::Rng;

use super::MeasuredGraph;
use crate::{Error, Result};

fn build(n: usize, edges: &[(usize, usize)]) -> MeasuredGraph {
    MeasuredGraph::counting(n, edges).expect("generator produces a connected simple graph")
}

/// Path `0 – 1 – … – (n−1)`.
pub fn path_graph(n: usize) -> MeasuredGraph {
    assert!(n >= 1, "path needs a vertex");
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    build(n, &edges)
}

/// Cycle on `n ≥ 3` vertices.
pub fn cycle_graph(n: usize) -> MeasuredGraph {
    assert!(n >= 3, "cycle needs three vertices");
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    build(n, &edges)
}

/// `width × height` grid; vertex `(col, row)` has id `row * width + col`.
pub fn grid_graph(width: usize, height: usize) -> MeasuredGraph {
    assert!(width >= 1 && height >= 1, "grid needs a vertex");
    let mut edges = Vec::with_capacity(2 * width * height);
    for row in 0..height {
        for col in 0..width {
            let v = row * width + col;
            if col + 1 < width {
                edges.push((v, v + 1));
            }
            if row + 1 < height {
                edges.push((v, v + width));
            }
        }
    }
    build(width * height, &edges)
}

pub fn complete_graph(n: usize) -> MeasuredGraph {
    assert!(n >= 1, "complete graph needs a vertex");
    let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    build(n, &edges)
}

/// Star `K_{1,leaves}` with center 0.
pub fn star_graph(leaves: usize) -> MeasuredGraph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    build(leaves + 1, &edges)
}

/// A random connected graph on `n` vertices: a uniformly random recursive
/// tree plus each remaining pair independently with probability
/// `extra_edge_prob`, with measures uniform in `measure_range`.
pub fn random_connected_graph<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    extra_edge_prob: f64,
    measure_range: (f64, f64),
) -> Result<MeasuredGraph> {
    if n == 0 {
        return Err(Error::input("random graph needs at least one vertex"));
    }
    let (lo, hi) = measure_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::input("measure range must be positive and ordered"));
    }
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    if extra_edge_prob > 0.0 {
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(extra_edge_prob.min(1.0)) {
                    edges.push((a, b));
                }
            }
        }
    }
    let measure = (0..n).map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect();
    MeasuredGraph::new(measure, &edges)
}
