//! End-to-end run on a host graph: unit net, growth profile, local constant,
//! the constants of the growth-function bound, the ingredient inequalities,
//! and empirical constants against that bound.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::{
    build_net, covering_multiplicity, discretized_gradient_check, qi_distortion_check, volume_transfer_check,
    CheckReport, CheckRow, PairSample, QiReport,
};
use crate::mmgraph::integer_radii;
use crate::poincare::{
    bound_evaluate, ploc_estimate, verify_instance, BoundKind, BoundParams, BoundSpec, EmpiricalOptions, Family,
    PlocEstimate, PoincareInstance, PoincareReport, TestFunctions, VerifyOptions,
};
use crate::{Error, GrowthMode, GrowthProfile, MeasuredGraph, Result, SCHEMA_VERSION};

/// Above this many centers the quasi-isometry check samples pairs.
const ALL_PAIRS_LIMIT: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sigmas: Vec<f64>,
    pub r0: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub seed: u64,
    /// Centers sampled for the per-center checks and constants.
    pub centers: usize,
    /// Random functions per center in the gradient-transfer check.
    pub functions: usize,
    /// Test functions per family for empirical constants.
    pub trials: usize,
    /// Radii of the volume-transfer check.
    pub transfer_radii: Vec<f64>,
    /// Radii of the gradient-transfer check.
    pub gradient_radii: Vec<f64>,
    /// Largest `R` for empirical constants; defaults to each center's
    /// eccentricity.
    pub max_radius: Option<usize>,
    /// Domains up to this size also get exact σ = 2 constants.
    pub exact_limit: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sigmas: vec![1.0],
            r0: 1.0,
            l: 1.0,
            seed: 0,
            centers: 3,
            functions: 10,
            trials: 6,
            transfer_radii: (1..=10).map(f64::from).collect(),
            gradient_radii: vec![1.0, 2.0, 4.0],
            max_radius: None,
            exact_limit: 400,
        }
    }
}

impl PipelineConfig {
    fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() || self.sigmas.iter().any(|&s| !(s >= 1.0 && s.is_finite())) {
            return Err(Error::input("sigmas must be a nonempty list of finite reals ≥ 1"));
        }
        if !(self.r0 >= 1.0 && self.r0.is_finite()) {
            return Err(Error::input(format!("r0 must be a finite real ≥ 1, got {}", self.r0)));
        }
        if !(self.l >= 1.0 && self.l.is_finite()) {
            return Err(Error::input(format!("L must be a finite real ≥ 1, got {}", self.l)));
        }
        if self.centers == 0 || self.trials == 0 {
            return Err(Error::input("centers and trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HostSummary {
    pub vertices: usize,
    pub edges: usize,
    pub diameter: usize,
    pub min_measure: f64,
    pub total_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetSummary {
    pub epsilon: f64,
    pub centers: usize,
    pub quotient_edges: usize,
}

/// Growth profile of the host together with the values the bound reads at
/// half-integer radii (right-step lookups).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSummary {
    pub f_3_5: f64,
    pub f_7_5: f64,
    pub profile: GrowthProfile,
}

/// Constants of the growth-function bound for one σ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainConstants {
    pub sigma: f64,
    #[serde(rename = "C")]
    pub c_loc: f64,
    pub lambda: f64,
    pub c0: f64,
    pub valid_from: f64,
    /// Largest radius with a ball still inside the host.
    pub max_computable_radius: usize,
    /// Whether some computable radius lies in the proved regime.
    pub reachable: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PipelineSummary {
    pub lemma_checks: usize,
    pub lemma_violations: usize,
    pub bound_reports: usize,
    pub bound_violations: usize,
    pub informational_max_ratio: f64,
    pub regime_reachable: bool,
}

/// Everything the pipeline computed, in stage order. Stages that did not
/// run are `None` or empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub host: HostSummary,
    pub sample_centers: Vec<usize>,
    pub net: Option<NetSummary>,
    pub growth: Option<GrowthSummary>,
    pub multiplicity: Option<CheckRow>,
    pub quasi_isometry: Option<QiReport>,
    pub volume_transfer: Option<CheckReport>,
    pub ploc: Vec<PlocEstimate>,
    pub gradient_transfer: Option<CheckReport>,
    pub main_constants: Vec<MainConstants>,
    pub reports: Vec<PoincareReport>,
    pub summary: Option<PipelineSummary>,
}

/// A pipeline error together with the stages completed before it.
#[derive(Debug)]
pub struct PipelineFailure {
    pub partial: Box<PipelineReport>,
    pub error: Error,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for PipelineFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub fn run_pipeline(
    host: &MeasuredGraph,
    config: &PipelineConfig,
) -> std::result::Result<PipelineReport, PipelineFailure> {
    let diameter = host.diameter();
    let mut report = PipelineReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        host: HostSummary {
            vertices: host.vertex_count(),
            edges: host.edge_count(),
            diameter,
            min_measure: host.min_measure(),
            total_measure: host.total_measure(),
        },
        sample_centers: Vec::new(),
        net: None,
        growth: None,
        multiplicity: None,
        quasi_isometry: None,
        volume_transfer: None,
        ploc: Vec::new(),
        gradient_transfer: None,
        main_constants: Vec::new(),
        reports: Vec::new(),
        summary: None,
    };
    match run_stages(host, config, diameter, &mut report) {
        Ok(()) => Ok(report),
        Err(error) => Err(PipelineFailure { partial: Box::new(report), error }),
    }
}

fn run_stages(
    host: &MeasuredGraph,
    config: &PipelineConfig,
    diameter: usize,
    report: &mut PipelineReport,
) -> Result<()> {
    config.validate()?;
    let n = host.vertex_count();
    if n < 2 {
        return Err(Error::Degenerate("the host needs at least two vertices to have a ball structure".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centers = sample(&mut rng, n, config.centers.min(n)).into_vec();
    centers.sort_unstable();
    report.sample_centers = centers.clone();

    let net = build_net(host, 1.0)?;
    report.net =
        Some(NetSummary { epsilon: 1.0, centers: net.centers().len(), quotient_edges: net.quotient().edge_count() });

    // λ depends on f(7.5), and the far lookup f(4λR) on λ.
    let head = host.growth_function(&integer_radii(8), GrowthMode::VertexRatio)?;
    let lambda = head.eval(7.5)? + 1.0;
    let max_radius = config.max_radius.unwrap_or(diameter).max(1);
    let reach = 4.0 * lambda * max_radius as f64 + 2.0 * config.transfer_radii.iter().copied().fold(10.0, f64::max);
    let f = host.saturated_growth(GrowthMode::VertexRatio, 8, reach)?;
    report.growth = Some(GrowthSummary { f_3_5: f.eval(3.5)?, f_7_5: f.eval(7.5)?, profile: f.clone() });

    let multiplicity = covering_multiplicity(&net, config.l, &f)?;
    report.multiplicity = Some(multiplicity.row(config.l, 1.0));
    let pairs = if net.centers().len() <= ALL_PAIRS_LIMIT {
        PairSample::All
    } else {
        PairSample::Random { count: 20_000, seed: config.seed }
    };
    report.quasi_isometry = Some(qi_distortion_check(&net, pairs, &f)?);
    report.volume_transfer = Some(volume_transfer_check(&net, &centers, &config.transfer_radii, &f)?);

    let empirical = EmpiricalOptions::new(Family::ALL.to_vec(), config.trials, config.seed);
    for &sigma in &config.sigmas {
        report.ploc.push(ploc_estimate(host, config.r0, config.l, sigma, &empirical)?);
    }

    let mut gradient = CheckReport::default();
    for (estimate, &sigma) in report.ploc.iter().zip(&config.sigmas) {
        for &x in &centers {
            for _ in 0..config.functions {
                let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                for &r in &config.gradient_radii {
                    gradient.rows.push(discretized_gradient_check(
                        &net,
                        &u,
                        x,
                        r,
                        sigma,
                        estimate.constant,
                        config.l,
                        &f,
                    )?);
                }
            }
        }
    }
    report.gradient_transfer = Some(gradient);

    let verify = VerifyOptions { tests: TestFunctions::Families(empirical), exact_limit: config.exact_limit };
    let mut reports = Vec::new();
    for (estimate, &sigma) in report.ploc.iter().zip(&config.sigmas) {
        let params = BoundParams {
            big_c: Some(estimate.constant),
            l: Some(config.l),
            r0: Some(config.r0),
            f: Some(f.clone()),
            ..Default::default()
        };
        let spec = BoundSpec::new(BoundKind::Main, params).with_override(true);
        let head = bound_evaluate(&spec, 1.0, sigma)?;
        report.main_constants.push(MainConstants {
            sigma,
            c_loc: estimate.constant,
            lambda: head.lambda,
            c0: head.c0.expect("main bound derives C0"),
            valid_from: head.valid_from,
            max_computable_radius: diameter,
            reachable: head.valid_from <= diameter as f64,
        });
        for &x in &centers {
            let top = config.max_radius.unwrap_or(host.eccentricity(x)?);
            for r in 1..=top {
                let inst = PoincareInstance::new(host, x, r as f64, sigma, head.lambda)?;
                reports.push(verify_instance(&inst, &spec, &verify)?);
            }
        }
    }
    reports
        .sort_by(|a, b| a.center.cmp(&b.center).then(a.radius.total_cmp(&b.radius)).then(a.sigma.total_cmp(&b.sigma)));
    report.reports = reports;

    let lemma_rows: Vec<&CheckRow> = report
        .multiplicity
        .iter()
        .chain([&report.quasi_isometry.as_ref().unwrap().lower, &report.quasi_isometry.as_ref().unwrap().upper])
        .chain(report.volume_transfer.iter().flat_map(|r| &r.rows))
        .chain(report.gradient_transfer.iter().flat_map(|r| &r.rows))
        .collect();
    report.summary = Some(PipelineSummary {
        lemma_checks: lemma_rows.len(),
        lemma_violations: lemma_rows.iter().filter(|r| r.is_violation()).count()
            + report.quasi_isometry.as_ref().map_or(0, |q| q.violations),
        bound_reports: report.reports.len(),
        bound_violations: report.reports.iter().filter(|r| r.violation).count(),
        informational_max_ratio: report.reports.iter().filter(|r| !r.asserted).map(|r| r.ratio).fold(0.0, f64::max),
        regime_reachable: report.main_constants.iter().any(|m| m.reachable),
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmgraph::generators::{cycle_graph, grid_graph};

    #[test]
    fn small_grid_end_to_end() {
        let host = grid_graph(10, 10);
        let config = PipelineConfig { centers: 2, functions: 3, trials: 3, ..Default::default() };
        let report = run_pipeline(&host, &config).unwrap();
        let growth = report.growth.as_ref().unwrap();
        assert_eq!(growth.f_3_5, host.growth_function(&[4.0], GrowthMode::VertexRatio).unwrap().values()[0]);
        let main = &report.main_constants[0];
        assert_eq!(main.lambda, growth.f_7_5 + 1.0);
        assert!(!main.reachable);
        let summary = report.summary.as_ref().unwrap();
        assert_eq!(summary.lemma_violations, 0);
        assert_eq!(summary.bound_violations, 0);
        assert!(summary.informational_max_ratio <= 1.0);
        assert!(report.reports.iter().all(|r| !r.asserted));
        let again = run_pipeline(&host, &config).unwrap();
        assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn cycle_constants_match_the_eigensolver() {
        let host = cycle_graph(20);
        let config = PipelineConfig { sigmas: vec![2.0], centers: 2, functions: 2, trials: 2, ..Default::default() };
        let report = run_pipeline(&host, &config).unwrap();
        for r in &report.reports {
            let opt = r.optimal.unwrap();
            assert!((r.empirical - opt).abs() <= 1e-9 * opt, "{r:?}");
        }
        assert!(report.ploc[0].exact);
    }

    #[test]
    fn single_vertex_host_is_degenerate() {
        let host = MeasuredGraph::counting(1, &[]).unwrap();
        let failure = run_pipeline(&host, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(failure.error, Error::Degenerate(_)));
        assert_eq!(failure.partial.host.vertices, 1);
        assert!(failure.partial.net.is_none());
    }
}
