use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Net;
use crate::mmgraph::{radius_to_depth, BallWalker};
use crate::{par, Error, GrowthProfile, MeasuredGraph, Result};

/// Relative slack allowed for floating-point round-off in `lhs ≤ rhs`.
const ROUND_OFF: f64 = 1e-12;

/// Why a row is informational rather than asserted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckFlag {
    /// The right-hand ball already covers the whole finite quotient, so the
    /// inequality holds for a reason unrelated to the lemma.
    Saturated,
    /// The host window reaches the cut edge of the finite graph.
    Truncated,
}

impl fmt::Display for CheckFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckFlag::Saturated => "saturated",
            CheckFlag::Truncated => "truncated",
        })
    }
}

/// One instance `lhs ≤ rhs` of a checked inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    /// Host id of the center, when the inequality has one.
    pub center: Option<usize>,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub flag: Option<CheckFlag>,
}

impl CheckRow {
    pub fn new(name: &'static str, center: Option<usize>, radius: f64, lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        CheckRow { name, center, radius, lhs, rhs, ratio, flag: None }
    }

    pub fn flagged(mut self, flag: Option<CheckFlag>) -> Self {
        self.flag = flag;
        self
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + ROUND_OFF)
    }

    /// A failed inequality on an asserted (unflagged) row.
    pub fn is_violation(&self) -> bool {
        self.flag.is_none() && !self.holds()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.is_violation()).count()
    }

    pub fn asserted(&self) -> usize {
        self.rows.iter().filter(|r| r.flag.is_none()).count()
    }

    /// Largest ratio over asserted rows with the given name.
    pub fn worst(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().filter(|r| r.name == name && r.flag.is_none()).max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    /// CSV `name,center,R,lhs,rhs,ratio,flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,center,R,lhs,rhs,ratio,flag\n");
        for r in &self.rows {
            let center = r.center.map(|c| c.to_string()).unwrap_or_default();
            let flag = r.flag.map(|f| f.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{center},{},{},{},{},{flag}", r.name, r.radius, r.lhs, r.rhs, r.ratio);
        }
        out
    }
}

/// Largest number of `Lε`-balls around centers that share a host vertex,
/// against the bound `f(3Lε + ½)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Multiplicity {
    pub multiplicity: usize,
    pub bound: f64,
    /// `3Lε + ½`, where the host profile was read.
    pub bound_radius: f64,
}

impl Multiplicity {
    pub fn row(&self, l: f64, epsilon: f64) -> CheckRow {
        CheckRow::new("multiplicity", None, l * epsilon, self.multiplicity as f64, self.bound)
    }
}

pub fn covering_multiplicity(net: &Net, l: f64, f: &GrowthProfile) -> Result<Multiplicity> {
    if !(l >= 1.0) {
        return Err(Error::input(format!("L must be ≥ 1, got {l}")));
    }
    let eps = net.epsilon();
    let bound_radius = 3.0 * l * eps + 0.5;
    let bound = f.eval(bound_radius)?;
    let host = net.host();
    let depth = radius_to_depth(l * eps)? as u32;
    let mut counts = vec![0usize; host.vertex_count()];
    let mut walker = BallWalker::new(host.vertex_count());
    for &c in net.centers() {
        walker.run(host, c, Some(depth));
        for &v in walker.order() {
            counts[v] += 1;
        }
    }
    let multiplicity = counts.into_iter().max().unwrap_or(0);
    Ok(Multiplicity { multiplicity, bound, bound_radius })
}

/// Which center pairs enter the quasi-isometry check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSample {
    All,
    Random { count: usize, seed: u64 },
}

/// Worst cases of `d ≤ 2ρ` and `2ρ ≤ 2f(6ε+½)(d + 2ε)` over the tested
/// center pairs, `d` the host distance and `ρ` the quotient distance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QiReport {
    pub pairs: usize,
    /// `f(6ε + ½)`.
    pub stretch: f64,
    pub lower: CheckRow,
    pub upper: CheckRow,
    pub violations: usize,
}

#[derive(Clone, Copy)]
struct QiCell {
    lower: (f64, f64),
    upper: (f64, f64),
    violations: usize,
}

impl QiCell {
    fn new() -> Self {
        QiCell { lower: (0.0, 1.0), upper: (0.0, 1.0), violations: 0 }
    }

    fn add(&mut self, d: f64, rho: f64, eps: f64, stretch: f64) {
        let lower = (d, 2.0 * rho);
        let upper = (2.0 * rho, 2.0 * stretch * (d + 2.0 * eps));
        if lower.0 > lower.1 * (1.0 + ROUND_OFF) || upper.0 > upper.1 * (1.0 + ROUND_OFF) {
            self.violations += 1;
        }
        // compare ratios by cross-multiplication; all quantities are ≥ 0
        if lower.0 * self.lower.1 > self.lower.0 * lower.1 {
            self.lower = lower;
        }
        if upper.0 * self.upper.1 > self.upper.0 * upper.1 {
            self.upper = upper;
        }
    }

    fn merge(mut self, other: QiCell) -> Self {
        if other.lower.0 * self.lower.1 > self.lower.0 * other.lower.1 {
            self.lower = other.lower;
        }
        if other.upper.0 * self.upper.1 > self.upper.0 * other.upper.1 {
            self.upper = other.upper;
        }
        self.violations += other.violations;
        self
    }
}

fn distances_from(graph: &MeasuredGraph, walker: &mut BallWalker, source: usize) -> Vec<f64> {
    walker.run(graph, source, None);
    (0..graph.vertex_count()).map(|v| f64::from(walker.dist(v).expect("graph is connected"))).collect()
}

pub fn qi_distortion_check(net: &Net, sample: PairSample, f: &GrowthProfile) -> Result<QiReport> {
    let eps = net.epsilon();
    let stretch = f.eval(6.0 * eps + 0.5)?;
    let host = net.host();
    let q = net.quotient();
    let k = net.centers().len();
    let (cell, pairs) = match sample {
        PairSample::All => {
            let cells = par::map_indexed(
                k,
                || (BallWalker::new(host.vertex_count()), BallWalker::new(k)),
                |(hw, qw), i| {
                    let d = distances_from(host, hw, net.centers()[i]);
                    let rho = distances_from(q, qw, i);
                    let mut cell = QiCell::new();
                    for j in 0..k {
                        cell.add(d[net.centers()[j]], eps * rho[j], eps, stretch);
                    }
                    cell
                },
            );
            (cells.into_iter().fold(QiCell::new(), QiCell::merge), k * k)
        }
        PairSample::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs: Vec<(usize, usize)> =
                (0..count).map(|_| (rng.random_range(0..k), rng.random_range(0..k))).collect();
            let cells = par::map_indexed(
                pairs.len(),
                || (BallWalker::new(host.vertex_count()), BallWalker::new(k)),
                |(hw, qw), p| {
                    let (i, j) = pairs[p];
                    let d = distances_from(host, hw, net.centers()[i])[net.centers()[j]];
                    let rho = distances_from(q, qw, i)[j];
                    let mut cell = QiCell::new();
                    cell.add(d, eps * rho, eps, stretch);
                    cell
                },
            );
            (cells.into_iter().fold(QiCell::new(), QiCell::merge), count)
        }
    };
    Ok(QiReport {
        pairs,
        stretch,
        lower: CheckRow::new("qi-lower", None, eps, cell.lower.0, cell.lower.1),
        upper: CheckRow::new("qi-upper", None, eps, cell.upper.0, cell.upper.1),
        violations: cell.violations,
    })
}

/// Volume transfer between host and net at each center in `centers` (host
/// ids) and each radius:
///
/// - `ri-a`: `ν(B_Y(x,R)) ≤ f(ε) μ(B_X(x, 2R+½))`, and `ri-a-wide` with `2R+1`;
/// - `ri-b`: `ν(B_Y(x,R)) / ν(x) ≤ f(ε) f(2R+½)`;
/// - `ri-c`: `μ(B_X(x,R)) ≤ ν(B_Y(x,R'))` with `R' = f(6ε+½)(R+3ε)`;
/// - `ri-d`: `μ(B_X(x,R)) / μ(x) ≤ f(ε) ν(B_Y(x,R')) / ν(x)`.
///
/// `ri-c` and `ri-d` are flagged [`CheckFlag::Saturated`] when `B_Y(x,R')`
/// is the whole quotient.
pub fn volume_transfer_check(net: &Net, centers: &[usize], radii: &[f64], f: &GrowthProfile) -> Result<CheckReport> {
    let eps = net.epsilon();
    let f_eps = f.eval(eps)?;
    let stretch = f.eval(6.0 * eps + 0.5)?;
    let max_r = radii.iter().copied().fold(0.0, f64::max);
    f.eval(2.0 * max_r + 0.5)?;
    let indices = centers
        .iter()
        .map(|&c| net.center_index(c).ok_or_else(|| Error::input(format!("host vertex {c} is not a center"))))
        .collect::<Result<Vec<_>>>()?;
    let host = net.host();
    let q = net.quotient();
    let per_center = par::map_indexed(
        indices.len(),
        || (BallWalker::new(host.vertex_count()), BallWalker::new(q.vertex_count())),
        |(hw, qw), k| -> Result<Vec<CheckRow>> {
            let i = indices[k];
            let x = centers[k];
            hw.run(host, x, None);
            let mu = hw.layer_masses(host);
            qw.run(q, i, None);
            let nu = qw.layer_masses(q);
            let ecc = nu.len() - 1;
            let mu_ball = |r: f64| -> Result<f64> { Ok(mu[radius_to_depth(r)?.min(mu.len() - 1)]) };
            let nu_ball = |r: f64| -> Result<f64> { Ok(nu[radius_to_depth(r / eps)?.min(ecc)]) };
            let (mu_x, nu_x) = (host.measure(x), q.measure(i));
            let mut rows = Vec::with_capacity(5 * radii.len());
            for &r in radii {
                let ny = nu_ball(r)?;
                rows.push(CheckRow::new("ri-a", Some(x), r, ny, f_eps * mu_ball(2.0 * r + 0.5)?));
                rows.push(CheckRow::new("ri-a-wide", Some(x), r, ny, f_eps * mu_ball(2.0 * r + 1.0)?));
                rows.push(CheckRow::new("ri-b", Some(x), r, ny / nu_x, f_eps * f.eval(2.0 * r + 0.5)?));
                let r_prime = stretch * (r + 3.0 * eps);
                let saturated = (radius_to_depth(r_prime / eps)? >= ecc).then_some(CheckFlag::Saturated);
                let mx = mu_ball(r)?;
                let ny_wide = nu_ball(r_prime)?;
                rows.push(CheckRow::new("ri-c", Some(x), r, mx, ny_wide).flagged(saturated));
                rows.push(CheckRow::new("ri-d", Some(x), r, mx / mu_x, f_eps * ny_wide / nu_x).flagged(saturated));
            }
            Ok(rows)
        },
    );
    let mut report = CheckReport::default();
    for rows in per_center {
        report.rows.extend(rows?);
    }
    Ok(report)
}

/// Gradient transfer from the host to the net at center `x` (a host id):
///
/// `‖δũ‖_{σ, B(x,R)} ≤ 2 C^{1/σ} f(3ε+½) f(3ε)^{1/σ} ‖δu‖_{σ, B_X(x, R+(L+2)ε)}`
///
/// with `ũ` the `ε`-ball means, the left norm over centers within host
/// distance `R` of `x` (measure `ν`), and `|δu|` standing in for the upper
/// gradient. Flagged [`CheckFlag::Truncated`] when the host window touches
/// a degree-deficient vertex.
#[allow(clippy::too_many_arguments)]
pub fn discretized_gradient_check(
    net: &Net,
    u: &[f64],
    x: usize,
    radius: f64,
    sigma: f64,
    c_loc: f64,
    l: f64,
    f: &GrowthProfile,
) -> Result<CheckRow> {
    if !(sigma >= 1.0) || !(l >= 1.0) || !(c_loc >= 0.0) {
        return Err(Error::input("need sigma ≥ 1, L ≥ 1 and C ≥ 0"));
    }
    net.center_index(x).ok_or_else(|| Error::input(format!("host vertex {x} is not a center")))?;
    let eps = net.epsilon();
    let host = net.host();
    let q = net.quotient();
    let means = net.ball_means(u)?;
    let grad_means = q.gradient_norms(&means)?;
    let mut lhs = 0.0;
    for y in host.ball(x, radius)? {
        if let Some(j) = net.center_index(y) {
            lhs += grad_means[j].powf(sigma) * q.measure(j);
        }
    }
    let window = host.ball(x, radius + (l + 2.0) * eps)?;
    let mut rhs = 0.0;
    for &v in &window {
        rhs += host.gradient_norm_unchecked(u, v).powf(sigma) * host.measure(v);
    }
    let factor = 2.0 * c_loc.powf(1.0 / sigma) * f.eval(3.0 * eps + 0.5)? * f.eval(3.0 * eps)?.powf(1.0 / sigma);
    let truncated = window.iter().any(|&v| host.is_degree_deficient(v)).then_some(CheckFlag::Truncated);
    Ok(CheckRow::new("gradient-transfer", Some(x), radius, lhs.powf(1.0 / sigma), factor * rhs.powf(1.0 / sigma))
        .flagged(truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::build_net;
    use crate::mmgraph::generators::{grid_graph, path_graph};

    #[test]
    fn path_multiplicity() {
        let net = build_net(&path_graph(9), 2.0).unwrap();
        let f = net.host_profile(8.0).unwrap();
        let m = covering_multiplicity(&net, 1.0, &f).unwrap();
        assert_eq!(m.multiplicity, 3);
        // f(6.5) on P₉ reads the tabulated radius 7, where the middle vertex sees all 9
        assert_eq!(m.bound, 9.0);
        assert!(m.row(1.0, 2.0).holds());
        let whole = build_net(&path_graph(9), 8.0).unwrap();
        assert_eq!(whole.centers(), &[0, 8]);
        let short = net.host_profile(3.0).unwrap();
        assert!(matches!(covering_multiplicity(&net, 1.0, &short), Err(Error::ProfileExhausted { .. })));
    }

    #[test]
    fn path_qi_pair() {
        let net = build_net(&path_graph(9), 2.0).unwrap();
        let f = net.host_profile(13.0).unwrap();
        let report = qi_distortion_check(&net, PairSample::All, &f).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.pairs, 25);
        // pair (0, 4): d = 4, ρ = 2·2 = 4
        assert_eq!(report.lower.ratio, 0.5);
        assert!(report.upper.ratio < 1.0);
        let sampled = qi_distortion_check(&net, PairSample::Random { count: 30, seed: 1 }, &f).unwrap();
        assert_eq!(sampled.violations, 0);
    }

    #[test]
    fn path_volume_transfer() {
        let net = build_net(&path_graph(9), 2.0).unwrap();
        let f = net.host_profile(20.0).unwrap();
        let report = volume_transfer_check(&net, &[4], &[0.0, 1.0, 2.0], &f).unwrap();
        assert_eq!(report.violations(), 0);
        let a = report.rows.iter().find(|r| r.name == "ri-a" && r.radius == 2.0).unwrap();
        // centers 2, 4, 6 are within ρ ≤ 2 of 4
        assert_eq!(a.lhs, 15.0);
        assert_eq!(a.rhs, f.eval(2.0).unwrap() * 9.0);
        let a0 = report.rows.iter().find(|r| r.name == "ri-a" && r.radius == 0.0).unwrap();
        assert_eq!(a0.lhs, 5.0);
        assert!(volume_transfer_check(&net, &[3], &[1.0], &f).is_err());
    }

    #[test]
    fn constant_function_has_no_gradient() {
        let net = build_net(&grid_graph(12, 12), 1.0).unwrap();
        let f = net.host_profile(4.0).unwrap();
        let row = discretized_gradient_check(&net, &vec![3.0; 144], 78, 1.0, 2.0, 1.0, 1.0, &f).unwrap();
        assert_eq!(row.lhs, 0.0);
        assert_eq!(row.ratio, 0.0);
        assert_eq!(row.flag, None);
        let edge = discretized_gradient_check(&net, &vec![3.0; 144], 0, 2.0, 2.0, 1.0, 1.0, &f).unwrap();
        assert_eq!(edge.flag, Some(CheckFlag::Truncated));
    }

    #[test]
    fn csv_layout() {
        let report = CheckReport {
            rows: vec![CheckRow::new("ri-c", Some(3), 1.0, 2.0, 4.0).flagged(Some(CheckFlag::Saturated))],
        };
        assert_eq!(report.to_csv(), "name,center,R,lhs,rhs,ratio,flag\nri-c,3,1,2,4,0.5,saturated\n");
        assert_eq!(report.asserted(), 0);
    }
}
