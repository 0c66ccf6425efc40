use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::eigen::optimal_constant_sigma2;
use super::PoincareInstance;
use crate::{Error, Result};

/// Generator of test functions on an instance domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Independent standard normal values.
    RandomGaussian,
    /// Graph distance to a point of the domain.
    DistanceFromPoint,
    /// A tent `max(0, 1 − d(q,·)/s)` around a point.
    IndicatorSmoothed,
    /// The σ = 2 extremal function of the same window.
    Sigma2Extremal,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::RandomGaussian, Family::DistanceFromPoint, Family::IndicatorSmoothed, Family::Sigma2Extremal];

    pub fn name(self) -> &'static str {
        match self {
            Family::RandomGaussian => "random-gaussian",
            Family::DistanceFromPoint => "distance-from-point",
            Family::IndicatorSmoothed => "indicator-smoothed",
            Family::Sigma2Extremal => "sigma2-extremal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::input(format!("unknown test-function family `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOptions {
    pub families: Vec<Family>,
    /// Candidates per family (the extremal family always yields one).
    pub trials: usize,
    pub seed: u64,
    /// Random perturbation steps applied to the best candidate.
    pub ascent_steps: usize,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        EmpiricalOptions { families: Family::ALL.to_vec(), trials: 8, seed: 0, ascent_steps: 0 }
    }
}

impl EmpiricalOptions {
    pub fn new(families: Vec<Family>, trials: usize, seed: u64) -> Self {
        EmpiricalOptions { families, trials, seed, ascent_steps: 0 }
    }

    pub fn with_ascent(mut self, steps: usize) -> Self {
        self.ascent_steps = steps;
        self
    }

    /// Same options with a seed mixed with `salt`, so that a sweep gives
    /// each cell its own reproducible stream.
    pub(crate) fn salted(&self, salt: u64) -> Self {
        let mut out = self.clone();
        out.seed = splitmix(self.seed ^ splitmix(salt));
        out
    }

    fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::input("at least one test-function family is needed"));
        }
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        Ok(())
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Best ratio found and the function attaining it.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalConstant {
    pub value: f64,
    pub family: Family,
    /// Candidates with a nonzero gradient that were compared.
    pub candidates: usize,
    #[serde(skip)]
    pub witness: Vec<f64>,
}

/// Distances inside the domain from a local vertex.
fn local_distances(inst: &PoincareInstance<'_>, source: usize) -> Vec<f64> {
    let n = inst.domain().len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in inst.local_neighbors(v) {
            if dist[w].is_infinite() {
                dist[w] = dist[v] + 1.0;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Points for distance and tent families: the center first, then random
/// domain vertices.
fn anchor_points(inst: &PoincareInstance<'_>, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let all: Vec<usize> = (0..inst.domain().len()).collect();
    let mut points = vec![0];
    points.extend((1..count).map(|_| *all.choose(rng).unwrap()));
    points
}

fn candidates(
    inst: &PoincareInstance<'_>,
    family: Family,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let n = inst.domain().len();
    Ok(match family {
        Family::RandomGaussian => (0..trials).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect(),
        Family::DistanceFromPoint => {
            anchor_points(inst, trials, rng).into_iter().map(|q| local_distances(inst, q)).collect()
        }
        Family::IndicatorSmoothed => {
            let widths = inst.radius().ceil().max(1.0) as usize;
            anchor_points(inst, trials, rng)
                .into_iter()
                .enumerate()
                .map(|(t, q)| {
                    let s = (1 + t % widths) as f64;
                    local_distances(inst, q).into_iter().map(|d| (1.0 - d / s).max(0.0)).collect()
                })
                .collect()
        }
        Family::Sigma2Extremal => vec![optimal_constant_sigma2(&inst.with_sigma(2.0)?)?.extremal],
    })
}

/// Maximum of `LHS/RHS` over explicit domain functions; functions with zero
/// gradient are skipped. `None` when every function has zero gradient.
pub fn best_ratio(inst: &PoincareInstance<'_>, functions: &[Vec<f64>]) -> Result<Option<(f64, usize)>> {
    let mut best: Option<(f64, usize)> = None;
    for (i, u) in functions.iter().enumerate() {
        if let Some(r) = inst.ratio(u)? {
            if best.is_none_or(|(b, _)| r > b) {
                best = Some((r, i));
            }
        }
    }
    Ok(best)
}

/// Normalized random ascent: perturb, recenter, rescale, keep improvements.
fn ascend(
    inst: &PoincareInstance<'_>,
    start: Vec<f64>,
    value: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64) {
    let normalize = |u: &mut Vec<f64>| {
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        u.iter_mut().for_each(|x| *x -= mean);
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            u.iter_mut().for_each(|x| *x /= norm);
        }
    };
    let mut best = start;
    normalize(&mut best);
    let mut best_value = value;
    let mut step = 0.5;
    for _ in 0..steps {
        let mut trial: Vec<f64> = best.iter().map(|x| x + step * rng.sample::<f64, _>(StandardNormal)).collect();
        normalize(&mut trial);
        match inst.ratio_unchecked(&trial) {
            Some(r) if r > best_value => {
                best = trial;
                best_value = r;
            }
            _ => step = (step * 0.9).max(1e-4),
        }
    }
    (best, best_value)
}

/// Largest `LHS/RHS` among the generated test functions. This is a lower
/// bound for the optimal constant of the instance for every σ.
pub fn empirical_constant(inst: &PoincareInstance<'_>, options: &EmpiricalOptions) -> Result<EmpiricalConstant> {
    options.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<EmpiricalConstant> = None;
    let mut compared = 0;
    let mut families = options.families.clone();
    families.sort_unstable();
    families.dedup();
    for family in families {
        for u in candidates(inst, family, options.trials, &mut rng)? {
            if let Some(r) = inst.ratio_unchecked(&u) {
                compared += 1;
                if best.as_ref().is_none_or(|b| r > b.value) {
                    best = Some(EmpiricalConstant { value: r, family, candidates: 0, witness: u });
                }
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::input("every test function has zero gradient on the window"))?;
    best.candidates = compared;
    if options.ascent_steps > 0 {
        let start = std::mem::take(&mut best.witness);
        let (u, value) = ascend(inst, start, best.value, options.ascent_steps, &mut rng);
        best.witness = u;
        best.value = value;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::generators::{cycle_graph, grid_graph, path_graph, random_connected_graph};

    #[test]
    fn extremal_family_reaches_the_optimum() {
        let g = grid_graph(6, 5);
        let inst = PoincareInstance::new(&g, 14, 2.0, 2.0, 1.0).unwrap();
        let opt = optimal_constant_sigma2(&inst).unwrap().value;
        let emp = empirical_constant(&inst, &EmpiricalOptions::default()).unwrap();
        assert_eq!(emp.family, Family::Sigma2Extremal);
        assert!(emp.value >= opt * (1.0 - 1e-9) && emp.value <= opt * (1.0 + 1e-12), "{} vs {opt}", emp.value);
    }

    #[test]
    fn constant_functions_are_degenerate() {
        let g = path_graph(3);
        let inst = PoincareInstance::new(&g, 1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(best_ratio(&inst, &[vec![2.0; 3]]).unwrap(), None);
        let single = crate::MeasuredGraph::counting(1, &[]).unwrap();
        let inst = PoincareInstance::new(&single, 0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(empirical_constant(&inst, &EmpiricalOptions::default()), Err(Error::Input(_))));
    }

    #[test]
    fn distance_function_on_path() {
        // domain order 1, 0, 2; u = distance from vertex 0 = (1, 0, 2)
        let g = path_graph(3);
        let inst = PoincareInstance::new(&g, 1, 1.0, 1.0, 1.0).unwrap();
        let u = vec![1.0, 0.0, 2.0];
        // LHS = 2·1 = 2 (mean 1), RHS = √2 + 1 + 1
        let (r, _) = best_ratio(&inst, &[u]).unwrap().unwrap();
        assert!((r - 2.0 / (2.0 + 2f64.sqrt())).abs() < 1e-12);
        let emp = empirical_constant(&inst, &EmpiricalOptions::new(vec![Family::DistanceFromPoint], 5, 1)).unwrap();
        assert!(emp.value >= r - 1e-12);
        let opt = optimal_constant_sigma2(&inst.with_sigma(2.0).unwrap()).unwrap().value;
        let emp2 =
            empirical_constant(&inst.with_sigma(2.0).unwrap(), &EmpiricalOptions::default().with_ascent(200)).unwrap();
        assert!(emp2.value <= opt * (1.0 + 1e-12));
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_connected_graph(&mut rng, 40, 0.05, (0.1, 10.0)).unwrap();
        let inst = PoincareInstance::new(&g, 5, 2.0, 1.5, 2.0).unwrap();
        let opts =
            EmpiricalOptions::new(vec![Family::RandomGaussian, Family::IndicatorSmoothed], 6, 42).with_ascent(50);
        let a = empirical_constant(&inst, &opts).unwrap();
        let b = empirical_constant(&inst, &opts).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn ascent_never_passes_the_optimum() {
        let g = cycle_graph(16);
        let inst = PoincareInstance::new(&g, 0, 3.0, 2.0, 2.0).unwrap();
        let opt = optimal_constant_sigma2(&inst).unwrap().value;
        let opts = EmpiricalOptions::new(vec![Family::RandomGaussian], 4, 9).with_ascent(400);
        let emp = empirical_constant(&inst, &opts).unwrap();
        assert!(emp.value <= opt * (1.0 + 1e-12));
        let plain = empirical_constant(&inst, &EmpiricalOptions::new(vec![Family::RandomGaussian], 4, 9)).unwrap();
        assert!(emp.value >= plain.value);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{f}\""));
        }
        assert!("laplacian".parse::<Family>().is_err());
    }
}
