use serde::Serialize;

use super::eigen::optimal_constant_sigma2;
use super::empirical::{empirical_constant, EmpiricalOptions};
use super::PoincareInstance;
use crate::{par, Error, MeasuredGraph, Result};

/// Local Poincaré constant of a finite graph: the worst instance constant
/// over every center and every integer radius `1 ≤ R ≤ r0`, with `λ = L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlocEstimate {
    pub constant: f64,
    /// Center and radius of the worst instance.
    pub center: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub r0: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub sigma: f64,
    /// True at σ = 2, where each instance constant is computed exactly. For
    /// other σ the value is an empirical lower estimate.
    pub exact: bool,
}

/// Computes `C` in the local inequality. At σ = 2 every cell is solved
/// exactly; otherwise each cell uses [`empirical_constant`] with `options`,
/// reseeded per cell.
pub fn ploc_estimate(
    graph: &MeasuredGraph,
    r0: f64,
    l: f64,
    sigma: f64,
    options: &EmpiricalOptions,
) -> Result<PlocEstimate> {
    if !(r0 >= 1.0 && r0.is_finite()) {
        return Err(Error::input(format!("r0 must be a finite real ≥ 1, got {r0}")));
    }
    if !(l >= 1.0 && l.is_finite()) {
        return Err(Error::input(format!("L must be a finite real ≥ 1, got {l}")));
    }
    let radii: Vec<f64> = (1..=r0.floor() as usize).map(|r| r as f64).collect();
    let n = graph.vertex_count();
    let cells = par::map_indexed(
        n,
        || (),
        |_, x| -> Result<Vec<(f64, usize, f64)>> {
            radii
                .iter()
                .map(|&r| {
                    let inst = PoincareInstance::new(graph, x, r, sigma, l)?;
                    if inst.ball_len() < 2 {
                        // a one-point ball has LHS ≡ 0
                        return Ok((0.0, x, r));
                    }
                    let value = if sigma == 2.0 {
                        optimal_constant_sigma2(&inst)?.value
                    } else {
                        empirical_constant(&inst, &options.salted((x as u64) << 20 | r as u64))?.value
                    };
                    Ok((value, x, r))
                })
                .collect()
        },
    );
    let mut best = (0.0, 0, radii[0]);
    for cell in cells {
        for c in cell? {
            if c.0 > best.0 {
                best = c;
            }
        }
    }
    Ok(PlocEstimate { constant: best.0, center: best.1, radius: best.2, r0, l, sigma, exact: sigma == 2.0 })
}
