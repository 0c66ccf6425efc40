use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::graph::{radius_to_depth, BallWalker, MeasuredGraph};
use crate::{par, Error, Result};

/// What a tabulated growth value measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMode {
    /// `sup_x ν(B̄(x,R)) / ν(x)`.
    VertexRatio,
    /// `sup_x ν(B̄(x,R)) / ν(B̄(x,1/2))`. On graphs `B̄(x,1/2) = {x}`, so this
    /// coincides with [`GrowthMode::VertexRatio`].
    HalfBallRatio,
    /// `sup_x ν(B̄(x,R))`, or any externally supplied bound.
    #[default]
    Absolute,
    /// `sup_x ν(B̄(x,2r)) / ν(B̄(x,r))`. Not monotone in general.
    DoublingRatio,
}

impl GrowthMode {
    fn is_ratio(self) -> bool {
        matches!(self, GrowthMode::VertexRatio | GrowthMode::HalfBallRatio | GrowthMode::DoublingRatio)
    }
}

#[derive(Deserialize)]
struct RawProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    mode: GrowthMode,
}

impl TryFrom<RawProfile> for GrowthProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        GrowthProfile::new(raw.radii, raw.values, raw.mode)
    }
}

/// A tabulated radius → value function (`f(R)`, `V(R)`, `F_Γ(R)`, …).
///
/// Between tabulated radii the profile is a right step function: `eval(r)`
/// returns the value at the smallest tabulated radius `≥ r`. Evaluating past
/// the last radius is an error, so a bound is never silently extrapolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct GrowthProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    mode: GrowthMode,
}

impl GrowthProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>, mode: GrowthMode) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::input("a growth profile needs at least one radius"));
        }
        if radii.len() != values.len() {
            return Err(Error::input(format!("{} radii but {} values", radii.len(), values.len())));
        }
        check_radii(&radii)?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::input(format!("profile value {v} is not a finite nonnegative number")));
        }
        if mode != GrowthMode::DoublingRatio && values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::input("profile values must be nondecreasing in the radius"));
        }
        if mode.is_ratio() && values[0] < 1.0 {
            return Err(Error::input(format!(
                "a ratio profile must be at least 1, got {} at radius {}",
                values[0], radii[0]
            )));
        }
        Ok(GrowthProfile { radii, values, mode })
    }

    /// The constant profile `value` on `[0, up_to]`.
    pub fn constant(value: f64, up_to: f64, mode: GrowthMode) -> Result<Self> {
        Self::new(vec![up_to], vec![value], mode)
    }

    /// Tabulates `f` at the given radii.
    pub fn from_fn(radii: Vec<f64>, mode: GrowthMode, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = radii.iter().map(|&r| f(r)).collect();
        Self::new(radii, values, mode)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> GrowthMode {
        self.mode
    }

    pub fn last_radius(&self) -> f64 {
        *self.radii.last().expect("profiles are nonempty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at the smallest tabulated radius `≥ r`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::input(format!("profile evaluated at invalid radius {r}")));
        }
        let idx = self.radii.partition_point(|&t| t < r);
        self.values.get(idx).copied().ok_or(Error::ProfileExhausted { radius: r, last: self.last_radius() })
    }

    /// Value at exactly the tabulated radius `r`, if present.
    pub fn at(&self, r: f64) -> Option<f64> {
        self.radii.iter().position(|&t| t == r).map(|i| self.values[i])
    }

    /// Profile restricted to radii inside `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.iter().filter(|&(r, _)| r >= lo && r <= hi).collect()
    }

    /// `radius,value` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,value\n");
        for (r, v) in self.iter() {
            let _ = writeln!(out, "{r},{v}");
        }
        out
    }

    pub fn from_csv<R: Read>(reader: R, mode: GrowthMode) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::input("profile rows need two columns"))?
                    .parse::<f64>()
                    .map_err(|e| Error::input(format!("bad profile number: {e}")))
            };
            radii.push(field(0)?);
            values.push(field(1)?);
        }
        Self::new(radii, values, mode)
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::input(format!("radius {r} is not a finite nonnegative number")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("radii must be strictly increasing"));
    }
    Ok(())
}

fn mass_at(masses: &[f64], depth: usize) -> f64 {
    masses[depth.min(masses.len() - 1)]
}

impl MeasuredGraph {
    /// Exact growth profile: the value at `R` is the maximum over all
    /// vertices of the mode's ball quantity at radius `R`.
    pub fn growth_function(&self, radii: &[f64], mode: GrowthMode) -> Result<GrowthProfile> {
        if radii.is_empty() {
            return Err(Error::input("growth_function needs at least one radius"));
        }
        if mode == GrowthMode::DoublingRatio {
            return Err(Error::input("use doubling_constant for doubling ratios"));
        }
        check_radii(radii)?;
        let depths: Vec<usize> = radii.iter().map(|&r| radius_to_depth(r)).collect::<Result<_>>()?;
        let max_depth = depths.last().copied().unwrap_or(0).min(self.vertex_count());
        let n = self.vertex_count();
        let per_vertex = par::map_indexed(
            n,
            || BallWalker::new(n),
            |walker, x| {
                walker.run(self, x, Some(max_depth as u32));
                let masses = walker.layer_masses(self);
                let denom = match mode {
                    GrowthMode::Absolute => 1.0,
                    _ => self.measure(x),
                };
                depths.iter().map(|&d| mass_at(&masses, d) / denom).collect::<Vec<f64>>()
            },
        );
        let values = max_columns(&per_vertex, radii.len());
        GrowthProfile::new(radii.to_vec(), values, mode)
    }

    /// Exact profile at integer radii up to `max(diameter, min_exact)`,
    /// extended by one radius `up_to` carrying the final value: past the
    /// diameter every ball is the whole graph.
    pub fn saturated_growth(&self, mode: GrowthMode, min_exact: usize, up_to: f64) -> Result<GrowthProfile> {
        let exact = self.growth_function(&integer_radii(self.diameter().max(min_exact)), mode)?;
        if !(up_to > exact.last_radius()) {
            return Ok(exact);
        }
        if !up_to.is_finite() {
            return Err(Error::input(format!("profile radius {up_to} is not finite")));
        }
        let mut radii = exact.radii().to_vec();
        let mut values = exact.values().to_vec();
        radii.push(up_to.ceil());
        values.push(*values.last().unwrap());
        GrowthProfile::new(radii, values, mode)
    }

    /// `sup_x ν(B̄(x,2r)) / ν(B̄(x,r))` at each of the given positive radii.
    pub fn doubling_constant(&self, radii: &[f64]) -> Result<GrowthProfile> {
        if radii.is_empty() {
            return Err(Error::input("doubling_constant needs at least one radius"));
        }
        check_radii(radii)?;
        if radii[0] <= 0.0 {
            return Err(Error::input("doubling radii must be positive"));
        }
        let pairs: Vec<(usize, usize)> =
            radii.iter().map(|&r| Ok((radius_to_depth(r)?, radius_to_depth(2.0 * r)?))).collect::<Result<_>>()?;
        let max_depth = pairs.last().map_or(0, |p| p.1).min(self.vertex_count());
        let n = self.vertex_count();
        let per_vertex = par::map_indexed(
            n,
            || BallWalker::new(n),
            |walker, x| {
                walker.run(self, x, Some(max_depth as u32));
                let masses = walker.layer_masses(self);
                pairs.iter().map(|&(r, r2)| mass_at(&masses, r2) / mass_at(&masses, r)).collect::<Vec<f64>>()
            },
        );
        let values = max_columns(&per_vertex, radii.len());
        GrowthProfile::new(radii.to_vec(), values, GrowthMode::DoublingRatio)
    }
}

fn max_columns(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; width];
    for row in rows {
        for (o, &v) in out.iter_mut().zip(row) {
            if v > *o {
                *o = v;
            }
        }
    }
    out
}

/// Integer radii `0, 1, …, max`.
pub fn integer_radii(max: usize) -> Vec<f64> {
    (0..=max).map(|r| r as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::generators::{complete_graph, grid_graph, path_graph};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Ball measures by brute force over all-pairs distances.
    fn ball_mass_oracle(g: &MeasuredGraph, x: usize, r: usize) -> f64 {
        let d = g.bfs_distances(x).unwrap();
        (0..g.vertex_count()).filter(|&y| d[y] <= r).map(|y| g.measure(y)).sum()
    }

    fn sweep_oracle(g: &MeasuredGraph, r: usize, ratio: bool) -> f64 {
        (0..g.vertex_count())
            .map(|x| ball_mass_oracle(g, x, r) / if ratio { g.measure(x) } else { 1.0 })
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_vertex_ratio_growth() {
        let g = grid_graph(41, 41);
        let f = g.growth_function(&integer_radii(2), GrowthMode::VertexRatio).unwrap();
        assert_eq!(f.values(), &[1.0, 5.0, 13.0]);
        assert_eq!(sweep_oracle(&g, 2, true), 13.0);
    }

    #[test]
    fn single_vertex_growth_is_one() {
        let g = MeasuredGraph::counting(1, &[]).unwrap();
        let f = g.growth_function(&integer_radii(5), GrowthMode::VertexRatio).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn long_path_growth() {
        let g = path_graph(101);
        let f = g.growth_function(&[1.0, 2.0, 3.5], GrowthMode::VertexRatio).unwrap();
        assert_eq!(f.eval(2.0).unwrap(), 5.0);
        assert_eq!(f.eval(3.5).unwrap(), sweep_oracle(&g, 3, true));
    }

    #[test]
    fn empty_radii_rejected() {
        assert!(path_graph(3).growth_function(&[], GrowthMode::Absolute).is_err());
        assert!(path_graph(3).growth_function(&[2.0, 1.0], GrowthMode::Absolute).is_err());
    }

    #[test]
    fn doubling_examples() {
        let g = grid_graph(61, 61);
        let c = g.doubling_constant(&[2.0]).unwrap();
        assert_eq!(c.values()[0], 41.0 / 13.0);
        let oracle =
            (0..g.vertex_count()).map(|x| ball_mass_oracle(&g, x, 4) / ball_mass_oracle(&g, x, 2)).fold(0.0, f64::max);
        assert_eq!(oracle, 41.0 / 13.0);

        assert_eq!(complete_graph(6).doubling_constant(&[1.0]).unwrap().values()[0], 1.0);
        assert_eq!(path_graph(101).doubling_constant(&[3.0]).unwrap().values()[0], 13.0 / 7.0);
    }

    #[test]
    fn step_extension_and_exhaustion() {
        let f = GrowthProfile::new(vec![1.0, 2.0, 4.0], vec![5.0, 13.0, 41.0], GrowthMode::VertexRatio).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 5.0);
        assert_eq!(f.eval(1.0).unwrap(), 5.0);
        assert_eq!(f.eval(1.5).unwrap(), 13.0);
        assert_eq!(f.eval(3.5).unwrap(), 41.0);
        assert!(matches!(f.eval(4.5), Err(Error::ProfileExhausted { .. })));
        assert!(f.eval(-1.0).is_err());
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(GrowthProfile::new(vec![1.0, 2.0], vec![3.0, 2.0], GrowthMode::Absolute).is_err());
        assert!(GrowthProfile::new(vec![0.0], vec![0.5], GrowthMode::VertexRatio).is_err());
        assert!(GrowthProfile::new(vec![1.0, 1.0], vec![1.0, 1.0], GrowthMode::Absolute).is_err());
        assert!(GrowthProfile::new(vec![2.0, 1.0], vec![1.0, 2.0], GrowthMode::Absolute).is_err());
        assert!(GrowthProfile::new(vec![1.0, 2.0], vec![3.0, 2.0], GrowthMode::DoublingRatio).is_ok());
    }

    #[test]
    fn json_and_csv_forms() {
        let f: GrowthProfile = serde_json::from_str(r#"{"radii":[0,1,2],"values":[1,5,13]}"#).unwrap();
        assert_eq!(f.mode(), GrowthMode::Absolute);
        assert!(serde_json::from_str::<GrowthProfile>(r#"{"radii":[0,1],"values":[3,2]}"#).is_err());
        let csv = f.to_csv();
        assert_eq!(csv, "radius,value\n0,1\n1,5\n2,13\n");
        assert_eq!(GrowthProfile::from_csv(csv.as_bytes(), GrowthMode::Absolute).unwrap(), f);
    }

    proptest! {
        #[test]
        fn growth_is_monotone_and_dominates_one(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = crate::mmgraph::generators::random_connected_graph(&mut rng, 30, 0.1, (0.1, 10.0)).unwrap();
            let f = g.growth_function(&integer_radii(12), GrowthMode::VertexRatio).unwrap();
            prop_assert!(f.values().windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.values().iter().all(|&v| v >= 1.0));
            for r in [0usize, 3, 7] {
                let oracle = sweep_oracle(&g, r, true);
                prop_assert!((f.values()[r] - oracle).abs() <= 1e-12 * oracle);
            }
        }
    }
}
