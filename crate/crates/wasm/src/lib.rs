//! Browser bindings: three operations on small spaces, each returning a JSON
//! string for the page to draw. The inner functions are plain Rust so they
//! are tested natively.

use poincarekit::discretize::{build_net, covering_multiplicity, qi_distortion_check, PairSample};
use poincarekit::groups::{entropy_estimate, growth_series, GroupModel, GroupSpec};
use poincarekit::mmgraph::generators::{cycle_graph, grid_graph, path_graph};
use poincarekit::poincare::{
    bound_evaluate, empirical_constant, optimal_constant_sigma2, BoundKind, BoundParams, BoundSpec, EmpiricalOptions,
    Family, PoincareInstance,
};
use poincarekit::{Error, GrowthMode, MeasuredGraph, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Caps that keep every call interactive in a browser tab.
const MAX_ELEMENTS: usize = 200_000;
const MAX_VERTICES: usize = 2_500;
const MAX_EXACT: usize = 400;

#[derive(Debug, Serialize)]
pub struct GrowthCurve {
    pub radii: Vec<f64>,
    pub sizes: Vec<f64>,
    /// Slope of `ln F` over the upper half of the radii.
    pub slope: Option<f64>,
}

pub fn growth_curve(group: &str, rmax: usize) -> Result<GrowthCurve> {
    let spec: GroupSpec = group.parse()?;
    let profile = growth_series(&GroupModel::from_spec(&spec)?, rmax, MAX_ELEMENTS)?;
    let window = ((rmax / 2) as f64, rmax as f64);
    let slope = entropy_estimate(&profile, window).ok().map(|e| e.slope);
    Ok(GrowthCurve { radii: profile.radii().to_vec(), sizes: profile.values().to_vec(), slope })
}

#[derive(Debug, Serialize)]
pub struct GridNet {
    pub width: usize,
    pub height: usize,
    pub epsilon: f64,
    /// `[column, row]` of each center.
    pub centers: Vec<[usize; 2]>,
    pub edges: Vec<[usize; 2]>,
    pub multiplicity: usize,
    pub multiplicity_bound: f64,
    pub qi_lower_ratio: f64,
    pub qi_upper_ratio: f64,
}

pub fn grid_net(width: usize, height: usize, epsilon: f64) -> Result<GridNet> {
    if width == 0 || height == 0 || width * height > MAX_VERTICES {
        return Err(Error::Input(format!("grid must have between 1 and {MAX_VERTICES} vertices")));
    }
    let host = grid_graph(width, height);
    let net = build_net(&host, epsilon)?;
    let f = host.saturated_growth(GrowthMode::VertexRatio, 0, 6.0 * epsilon + 1.0)?;
    let multiplicity = covering_multiplicity(&net, 1.0, &f)?;
    let qi = qi_distortion_check(&net, PairSample::Random { count: 4_000, seed: 0 }, &f)?;
    Ok(GridNet {
        width,
        height,
        epsilon,
        centers: net.centers().iter().map(|&c| [c % width, c / width]).collect(),
        edges: net.quotient().edges().map(|(a, b)| [a, b]).collect(),
        multiplicity: multiplicity.multiplicity,
        multiplicity_bound: multiplicity.bound,
        qi_lower_ratio: qi.lower.ratio,
        qi_upper_ratio: qi.upper.ratio,
    })
}

#[derive(Debug, Serialize)]
pub struct ConstantRow {
    #[serde(rename = "R")]
    pub radius: usize,
    pub optimal: Option<f64>,
    pub empirical: f64,
    pub bound: f64,
}

fn demo_graph(shape: &str, size: usize) -> Result<MeasuredGraph> {
    match shape {
        "path" if (2..=MAX_VERTICES).contains(&size) => Ok(path_graph(size)),
        "cycle" if (3..=MAX_VERTICES).contains(&size) => Ok(cycle_graph(size)),
        "grid" if size >= 1 && size * size <= MAX_VERTICES => Ok(grid_graph(size, size)),
        _ => Err(Error::Input(format!("unsupported graph {shape} of size {size}"))),
    }
}

/// Optimal (σ = 2, small domains) and empirical constants on balls around
/// vertex 0 of `shape`, next to the finite-graph bound `2^σ R^{σ−1} f(2R)`.
pub fn constant_sweep(shape: &str, size: usize, sigma: f64, seed: u64) -> Result<Vec<ConstantRow>> {
    let graph = demo_graph(shape, size)?;
    let center = 0;
    let f = graph.saturated_growth(GrowthMode::VertexRatio, 0, 2.0 * graph.diameter() as f64 + 2.0)?;
    let spec = BoundSpec::new(BoundKind::GraphStrong, BoundParams { f: Some(f), ..Default::default() });
    let options = EmpiricalOptions::new(Family::ALL.to_vec(), 4, seed);
    let mut rows = Vec::new();
    for r in 1..=graph.eccentricity(center)?.max(1) {
        let inst = PoincareInstance::new(&graph, center, r as f64, sigma, 1.0)?;
        let optimal = if sigma == 2.0 && inst.domain().len() <= MAX_EXACT {
            Some(optimal_constant_sigma2(&inst)?.value)
        } else {
            None
        };
        rows.push(ConstantRow {
            radius: r,
            optimal,
            empirical: empirical_constant(&inst, &options)?.value,
            bound: bound_evaluate(&spec, r as f64, sigma)?.value,
        });
    }
    Ok(rows)
}

fn to_js<T: Serialize>(result: Result<T>) -> std::result::Result<String, JsError> {
    let value = result.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = growthCurve)]
pub fn growth_curve_js(group: &str, rmax: usize) -> std::result::Result<String, JsError> {
    to_js(growth_curve(group, rmax))
}

#[wasm_bindgen(js_name = gridNet)]
pub fn grid_net_js(width: usize, height: usize, epsilon: f64) -> std::result::Result<String, JsError> {
    to_js(grid_net(width, height, epsilon))
}

#[wasm_bindgen(js_name = constantSweep)]
pub fn constant_sweep_js(shape: &str, size: usize, sigma: f64, seed: u64) -> std::result::Result<String, JsError> {
    to_js(constant_sweep(shape, size, sigma, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_group_curve() {
        let curve = growth_curve("free:2", 6).unwrap();
        assert_eq!(curve.sizes, vec![1.0, 5.0, 17.0, 53.0, 161.0, 485.0, 1457.0]);
        assert!((curve.slope.unwrap() - 3f64.ln()).abs() < 0.05);
        assert!(growth_curve("free:2", 40).is_err());
        assert!(growth_curve("nonsense", 3).is_err());
    }

    #[test]
    fn net_of_small_grid() {
        let net = grid_net(6, 4, 2.0).unwrap();
        assert!(net.centers.iter().all(|&[x, y]| x < 6 && y < 4));
        assert!(net.multiplicity as f64 <= net.multiplicity_bound);
        assert!(net.qi_lower_ratio <= 1.0 && net.qi_upper_ratio <= 1.0);
        assert!(grid_net(100, 100, 1.0).is_err());
    }

    #[test]
    fn cycle_sweep_stays_below_bound() {
        let rows = constant_sweep("cycle", 16, 2.0, 1).unwrap();
        assert_eq!(rows.len(), 8);
        for row in &rows {
            let optimal = row.optimal.unwrap();
            assert!(row.empirical <= optimal * (1.0 + 1e-9));
            assert!(optimal <= row.bound);
        }
        assert!(constant_sweep("torus", 4, 2.0, 1).is_err());
    }
}
