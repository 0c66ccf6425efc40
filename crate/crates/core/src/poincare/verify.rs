use std::fmt;

use serde::Serialize;

use super::bounds::{bound_evaluate, BoundKind, BoundSpec};
use super::eigen::{optimal_constant_sigma2, DEFAULT_EIGEN_LIMIT};
use super::empirical::{empirical_constant, EmpiricalOptions, Family};
use super::PoincareInstance;
use crate::{par, Error, Result};

/// Relative slack allowed when comparing computed quantities.
const TOLERANCE: f64 = 1e-9;

/// Minimum of `τ ↦ Σ_B |u − τ|^σ ν` and the comparison of the mean with it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanMinimization {
    /// `Σ_B |u − u_R|^σ ν`.
    pub at_mean: f64,
    pub best_tau: f64,
    pub at_best: f64,
    /// `at_mean / (2^σ · at_best)`, 0 when both vanish.
    pub ratio: f64,
}

impl MeanMinimization {
    pub fn holds(&self) -> bool {
        self.ratio <= 1.0 + TOLERANCE
    }
}

/// Checks `Σ_B |u − u_R|^σ ν ≤ 2^σ min_τ Σ_B |u − τ|^σ ν`. The minimum of
/// the convex deviation is bracketed on a grid and refined by golden-section
/// search.
pub fn mean_minimization(inst: &PoincareInstance<'_>, u: &[f64]) -> Result<MeanMinimization> {
    let at_mean = inst.lhs(u)?;
    let ball = &u[..inst.ball_len()];
    let lo = ball.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ball.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g = |t: f64| inst.deviation(u, t).expect("length checked above");
    const GRID: usize = 64;
    let step = (hi - lo) / GRID as f64;
    let best_k = (0..=GRID).map(|k| (k, g(lo + step * k as f64))).min_by(|a, b| a.1.total_cmp(&b.1)).map_or(0, |p| p.0);
    let (mut a, mut b) = (lo + step * best_k.saturating_sub(1) as f64, lo + step * (best_k + 1).min(GRID) as f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2);
        }
    }
    let candidates = [(x1, g1), (x2, g2), (lo + step * best_k as f64, g(lo + step * best_k as f64))];
    let (best_tau, at_best) = candidates.into_iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
    let scale = 2f64.powf(inst.sigma());
    let ratio = if at_mean == 0.0 { 0.0 } else { at_mean / (scale * at_best) };
    Ok(MeanMinimization { at_mean, best_tau, at_best, ratio })
}

/// Source of test functions for a verification sweep.
#[derive(Clone, Debug)]
pub enum TestFunctions {
    Families(EmpiricalOptions),
    /// Functions on the whole graph, restricted to each window.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub tests: TestFunctions,
    /// Domains up to this size get the exact constant at σ = 2 and the
    /// extremal family; larger ones skip both.
    pub exact_limit: usize,
}

impl VerifyOptions {
    pub fn new(tests: TestFunctions) -> Self {
        VerifyOptions { tests, exact_limit: DEFAULT_EIGEN_LIMIT }
    }

    pub fn without_exact(mut self) -> Self {
        self.exact_limit = 0;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFlag {
    /// The window reaches a vertex cut short by the edge of the graph.
    Truncated,
    /// `R` is below the radius from which the bound is proved.
    OutOfRegime,
}

impl fmt::Display for ReportFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFlag::Truncated => "truncated",
            ReportFlag::OutOfRegime => "out-of-regime",
        })
    }
}

/// Tightness of one bound on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub kind: BoundKind,
    pub center: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub sigma: f64,
    pub lambda: f64,
    /// Best `LHS/RHS` over the test functions (0 if all are constant).
    pub empirical: f64,
    /// Exact constant, at σ = 2 on small enough domains.
    pub optimal: Option<f64>,
    pub bound: f64,
    pub ln_bound: f64,
    /// `empirical / bound`.
    pub ratio: f64,
    /// `optimal / bound`.
    pub optimal_ratio: Option<f64>,
    /// Mean-vs-best-constant ratio for the best test function.
    pub mean_ratio: f64,
    pub flags: Vec<ReportFlag>,
    /// Whether the bound is a proved statement about this instance.
    pub asserted: bool,
    pub violation: bool,
}

impl PoincareReport {
    pub fn flags_label(&self) -> String {
        self.flags.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
    }
}

fn ratio_to_bound(value: f64, ln_bound: f64) -> f64 {
    if value > 0.0 {
        (value.ln() - ln_bound).exp()
    } else {
        0.0
    }
}

fn sweep_salt(inst: &PoincareInstance<'_>) -> u64 {
    (inst.center() as u64) << 32 ^ inst.radius().to_bits() ^ inst.sigma().to_bits().rotate_left(17)
}

/// Checks one instance against a bound.
pub fn verify_instance(
    inst: &PoincareInstance<'_>,
    spec: &BoundSpec,
    options: &VerifyOptions,
) -> Result<PoincareReport> {
    let bound = bound_evaluate(spec, inst.radius(), inst.sigma())?;
    if (bound.lambda - inst.lambda()).abs() > 1e-12 * bound.lambda {
        return Err(Error::input(format!(
            "bound kind {} dilates by λ = {} but the instance uses λ = {}",
            spec.kind,
            bound.lambda,
            inst.lambda()
        )));
    }
    let (empirical, witness) = match &options.tests {
        TestFunctions::Families(opts) => {
            let mut opts = opts.salted(sweep_salt(inst));
            if inst.domain().len() > options.exact_limit {
                opts.families.retain(|&f| f != Family::Sigma2Extremal);
            }
            let e = empirical_constant(inst, &opts)?;
            (e.value, Some(e.witness))
        }
        TestFunctions::Explicit(functions) => {
            let mut best: (f64, Option<Vec<f64>>) = (0.0, None);
            for u in functions {
                let local = inst.restrict(u)?;
                if let Some(r) = inst.ratio(&local)? {
                    if best.1.is_none() || r > best.0 {
                        best = (r, Some(local));
                    }
                }
            }
            best
        }
    };
    let optimal = if inst.sigma() == 2.0 && inst.domain().len() <= options.exact_limit {
        Some(optimal_constant_sigma2(inst)?.value)
    } else {
        None
    };
    let mean_ratio = match &witness {
        Some(u) => mean_minimization(inst, u)?.ratio,
        None => 0.0,
    };

    let mut flags = Vec::new();
    if inst.truncated() {
        flags.push(ReportFlag::Truncated);
    }
    if !bound.in_regime {
        flags.push(ReportFlag::OutOfRegime);
    }
    let asserted = bound.in_regime && (spec.kind.holds_on_finite_graphs() || !inst.truncated());
    let ratio = ratio_to_bound(empirical, bound.ln_value);
    let optimal_ratio = optimal.map(|o| ratio_to_bound(o, bound.ln_value));
    let exceeds = |r: f64| r > 1.0 + TOLERANCE;
    let violation = (asserted && (exceeds(ratio) || optimal_ratio.is_some_and(exceeds)))
        || optimal.is_some_and(|o| empirical > o * (1.0 + TOLERANCE))
        || exceeds(mean_ratio);
    Ok(PoincareReport {
        kind: spec.kind,
        center: inst.center(),
        radius: inst.radius(),
        sigma: inst.sigma(),
        lambda: inst.lambda(),
        empirical,
        optimal,
        bound: bound.value,
        ln_bound: bound.ln_value,
        ratio,
        optimal_ratio,
        mean_ratio,
        flags,
        asserted,
        violation,
    })
}

/// Checks every instance against the bound, in parallel, and returns the
/// reports ordered by `(center, R, σ)`.
pub fn verify_bounds(
    instances: &[PoincareInstance<'_>],
    spec: &BoundSpec,
    options: &VerifyOptions,
) -> Result<Vec<PoincareReport>> {
    let mut reports = par::map_items(instances, |inst| verify_instance(inst, spec, options))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    reports
        .sort_by(|a, b| a.center.cmp(&b.center).then(a.radius.total_cmp(&b.radius)).then(a.sigma.total_cmp(&b.sigma)));
    Ok(reports)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    center: usize,
    #[serde(rename = "R")]
    radius: f64,
    sigma: f64,
    empirical: f64,
    optimal: Option<f64>,
    bound: f64,
    ratio: f64,
    flags: &'a str,
}

/// CSV with columns `center,R,sigma,empirical,optimal,bound,ratio,flags`.
pub fn reports_to_csv(reports: &[PoincareReport]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in reports {
        let flags = r.flags_label();
        writer.serialize(CsvRow {
            center: r.center,
            radius: r.radius,
            sigma: r.sigma,
            empirical: r.empirical,
            optimal: r.optimal,
            bound: r.bound,
            ratio: r.ratio,
            flags: &flags,
        })?;
    }
    if reports.is_empty() {
        writer.write_record(["center", "R", "sigma", "empirical", "optimal", "bound", "ratio", "flags"])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}
