use std::fs;

use poincarekit::covering::{deck_growth, universal_cover_ball, volume_comparison_check, VolumeComparison};
use poincarekit::discretize::{
    build_net, covering_multiplicity, qi_distortion_check, volume_transfer_check, CheckReport, CheckRow, PairSample,
    QiReport,
};
use poincarekit::groups::{
    cayley_ball, entropy_estimate, growth_series, hyperbolicity_delta, polynomial_degree_estimate, systole_estimate,
    DeltaEstimate, Element, EntropyEstimate, MeasureRule, QuadrupleSample,
};
use poincarekit::mmgraph::generators::random_connected_graph;
use poincarekit::mmgraph::integer_radii;
use poincarekit::pipeline::{run_pipeline, PipelineConfig, PipelineReport};
use poincarekit::poincare::{
    bound_evaluate, empirical_constant, optimal_constant_sigma2, reports_to_csv, verify_bounds, BoundKind, BoundParams,
    BoundSpec, BoundValue, EmpiricalOptions, Family, PoincareInstance, PoincareReport, TestFunctions, VerifyOptions,
};
use poincarekit::{GrowthMode, GrowthProfile, MeasuredGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::*;
use crate::output::{CliError, CliResult, Sink};

/// Far radius of profiles derived from a graph: past the diameter every
/// ball is the whole graph, so the last value holds out to here.
const SATURATION_RADIUS: f64 = 1e12;

/// Serializes rows with a header through the csv crate.
fn table<R: Serialize>(rows: impl IntoIterator<Item = R>) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(poincarekit::Error::from)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Write(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn finite_radius(r: f64) -> CliResult<f64> {
    if r.is_finite() && r >= 0.0 {
        Ok(r)
    } else {
        Err(CliError::Usage(format!("radius {r} is not a finite nonnegative number")))
    }
}

fn check_sigmas(sigmas: &[f64]) -> CliResult<()> {
    match sigmas.iter().find(|s| !(s.is_finite() && **s >= 1.0)) {
        Some(s) => Err(CliError::Usage(format!("sigma {s} must be a finite real ≥ 1"))),
        None => Ok(()),
    }
}

fn graph_of(space: Space, radius: usize, common: &CommonArgs) -> CliResult<MeasuredGraph> {
    match space {
        Space::Graph(g) => Ok(g),
        Space::Group(group) => Ok(cayley_ball(&group, radius, &MeasureRule::Counting, common.max_vertices)?.graph),
    }
}

#[derive(Serialize)]
struct BallVertex {
    vertex: usize,
    distance: usize,
    measure: f64,
    label: Option<String>,
}

#[derive(Serialize)]
struct BallBody {
    center: usize,
    #[serde(rename = "R")]
    radius: f64,
    vertex_count: usize,
    measure: f64,
    vertices: Vec<BallVertex>,
    edges: Vec<[usize; 2]>,
}

pub fn ball(args: &BallArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let radius = finite_radius(args.radius)?;
    let (graph, center) = match args.space.load(common)? {
        Space::Graph(g) => (g, args.center),
        group => (graph_of(group, radius as usize, common)?, 0),
    };
    let members = graph.ball(center, radius)?;
    let dist = graph.bfs_distances(center)?;
    let mut inside = vec![false; graph.vertex_count()];
    for &v in &members {
        inside[v] = true;
    }
    let vertices: Vec<BallVertex> = members
        .iter()
        .map(|&v| BallVertex {
            vertex: v,
            distance: dist[v],
            measure: graph.measure(v),
            label: graph.label(v).map(String::from),
        })
        .collect();
    let body = BallBody {
        center,
        radius,
        vertex_count: members.len(),
        measure: graph.measure_of(&members)?,
        vertices,
        edges: graph.edges().filter(|&(a, b)| inside[a] && inside[b]).map(|(a, b)| [a, b]).collect(),
    };
    sink.summary(format!(
        "ball at {center} of radius {radius}: {} vertices, measure {}",
        body.vertex_count, body.measure
    ));
    sink.emit("ball", &body, || table(&body.vertices).unwrap_or_default())
}

#[derive(Serialize)]
struct ProfileBody<'a> {
    source: &'a str,
    #[serde(flatten)]
    profile: &'a GrowthProfile,
}

fn profile_of(
    space: &SpaceArgs,
    rmax: usize,
    mode: GrowthMode,
    common: &CommonArgs,
) -> CliResult<(GrowthProfile, &'static str)> {
    match space.load(common)? {
        Space::Group(group) => Ok((growth_series(&group, rmax, common.max_vertices)?, "group")),
        Space::Graph(g) if mode == GrowthMode::DoublingRatio => {
            let radii: Vec<f64> = (1..=rmax.max(1)).map(|r| r as f64).collect();
            Ok((g.doubling_constant(&radii)?, "graph"))
        }
        Space::Graph(g) => Ok((g.growth_function(&integer_radii(rmax), mode)?, "graph")),
    }
}

pub fn growth(args: &GrowthArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let (profile, source) = profile_of(&args.space, args.rmax, args.mode.into(), common)?;
    if let Some((r, v)) = profile.iter().last() {
        sink.summary(format!("{source} growth up to R = {r}: {v}"));
    }
    sink.emit("growth", &ProfileBody { source, profile: &profile }, || profile.to_csv())
}

#[derive(Serialize)]
struct EntropyBody<'a> {
    source: &'a str,
    regressor: &'a str,
    estimate: EntropyEstimate,
    profile: GrowthProfile,
}

#[derive(Serialize)]
struct EntropyRow {
    regressor: &'static str,
    window_lo: f64,
    window_hi: f64,
    points: usize,
    slope: f64,
    intercept: f64,
    residual: f64,
}

pub fn entropy(args: &EntropyArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let (profile, source) = profile_of(&args.space, args.rmax, GrowthMode::Absolute, common)?;
    let window = match args.window.as_deref() {
        Some(&[lo, hi]) => (lo, hi),
        _ => ((args.rmax / 2).max(usize::from(args.polynomial)) as f64, args.rmax as f64),
    };
    let (estimate, regressor) = if args.polynomial {
        (polynomial_degree_estimate(&profile, window)?, "ln-radius")
    } else {
        (entropy_estimate(&profile, window)?, "radius")
    };
    sink.summary(format!("slope {} over [{}, {}] ({} points)", estimate.slope, window.0, window.1, estimate.points));
    let row = EntropyRow {
        regressor,
        window_lo: window.0,
        window_hi: window.1,
        points: estimate.points,
        slope: estimate.slope,
        intercept: estimate.intercept,
        residual: estimate.residual,
    };
    let body = EntropyBody { source, regressor, estimate, profile };
    sink.emit("entropy", &body, || table([row]).unwrap_or_default())
}

#[derive(Serialize)]
struct DeltaBody {
    vertices: usize,
    #[serde(flatten)]
    estimate: DeltaEstimate,
}

#[derive(Serialize)]
struct DeltaRow {
    vertices: usize,
    delta: f64,
    quadruples: u64,
    exact: bool,
}

pub fn delta(args: &DeltaArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let graph = graph_of(args.space.load(common)?, args.radius, common)?;
    let sample = match args.samples {
        Some(count) => QuadrupleSample::Random { count, seed: common.require_seed("for sampled quadruples")? },
        None => QuadrupleSample::All,
    };
    let estimate = hyperbolicity_delta(&graph, sample, common.max_quadruples)?;
    let body = DeltaBody { vertices: graph.vertex_count(), estimate };
    let e = &body.estimate;
    sink.summary(format!(
        "δ = {} over {} quadruples ({})",
        e.delta,
        e.quadruples,
        if e.exact { "exact" } else { "lower estimate" }
    ));
    let row = DeltaRow { vertices: body.vertices, delta: e.delta, quadruples: e.quadruples, exact: e.exact };
    sink.emit("delta", &body, || table([row]).unwrap_or_default())
}

#[derive(Serialize)]
struct SystoleRow {
    element: String,
    systole: usize,
}

pub fn systole(args: &SystoleArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let group = poincarekit::groups::GroupModel::from_spec(&args.group)?;
    let estimate = systole_estimate(&group, args.sample_radius, args.gamma_radius, common.max_vertices)?;
    sink.summary(format!(
        "systole {} over {} sampled points{}",
        estimate.global,
        estimate.pointwise.len(),
        if estimate.sample_limited { " (limited by the sample)" } else { "" }
    ));
    let rows =
        estimate.pointwise.iter().map(|(x, s): &(Element, usize)| SystoleRow { element: x.to_string(), systole: *s });
    let csv = table(rows)?;
    sink.emit("systole", &estimate, || csv)
}

#[derive(Serialize)]
struct NetBody {
    epsilon: f64,
    centers: usize,
    quotient_edges: usize,
    multiplicity: Vec<CheckRow>,
    quasi_isometry: QiReport,
    volume_transfer: CheckReport,
    violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    net: Option<serde_json::Value>,
}

pub fn net(args: &NetArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let host = args.graph.load(common)?;
    if let Some(l) = args.l.iter().find(|l| !(l.is_finite() && **l >= 1.0)) {
        return Err(CliError::Usage(format!("L = {l} must be a finite real ≥ 1")));
    }
    for &r in &args.radii {
        finite_radius(r)?;
    }
    let net = build_net(&host, args.epsilon)?;
    let eps = args.epsilon;
    let l_max = args.l.iter().copied().fold(1.0, f64::max);
    let r_max = args.radii.iter().copied().fold(0.0, f64::max);
    let reach = (3.0 * l_max * eps).max(6.0 * eps).max(2.0 * r_max) + 0.5;
    let f = host.saturated_growth(GrowthMode::VertexRatio, 0, reach)?;

    let mut multiplicity = Vec::new();
    for &l in &args.l {
        let row = covering_multiplicity(&net, l, &f)?.row(l, eps);
        sink.summary(format!("multiplicity L={l}: {} ≤ {}", row.lhs, row.rhs));
        multiplicity.push(row);
    }
    let pairs = match args.pairs {
        Some(count) => PairSample::Random { count, seed: common.require_seed("for sampled pairs")? },
        None => PairSample::All,
    };
    let qi = qi_distortion_check(&net, pairs, &f)?;
    sink.summary(format!(
        "quasi-isometry over {} pairs: worst ratios {} (lower), {} (upper)",
        qi.pairs, qi.lower.ratio, qi.upper.ratio
    ));
    let transfer = volume_transfer_check(&net, net.centers(), &args.radii, &f)?;
    for &r in &args.radii {
        let worst = transfer.rows.iter().filter(|row| row.radius == r).map(|row| row.ratio).fold(0.0, f64::max);
        sink.summary(format!("volume transfer R={r}: worst ratio {worst}"));
    }
    let violations = multiplicity.iter().filter(|r| r.is_violation()).count() + qi.violations + transfer.violations();
    let body = NetBody {
        epsilon: eps,
        centers: net.centers().len(),
        quotient_edges: net.quotient().edge_count(),
        multiplicity,
        quasi_isometry: qi,
        volume_transfer: transfer,
        violations,
        net: if args.with_net {
            Some(serde_json::from_str(&net.to_json()?).map_err(poincarekit::Error::from)?)
        } else {
            None
        },
    };
    sink.emit("net", &body, || {
        let rows = body
            .multiplicity
            .iter()
            .chain([&body.quasi_isometry.lower, &body.quasi_isometry.upper])
            .chain(&body.volume_transfer.rows)
            .cloned()
            .collect();
        CheckReport { rows }.to_csv()
    })?;
    if violations > 0 {
        return Err(CliError::Violations(violations));
    }
    Ok(())
}

#[derive(Serialize)]
struct CoverBody {
    base: usize,
    #[serde(rename = "R")]
    radius: usize,
    vertices: usize,
    ball_sizes: Vec<usize>,
    ball_measures: Vec<f64>,
    deck_growth: GrowthProfile,
    comparison: VolumeComparison,
}

#[derive(Serialize)]
struct CoverRow {
    #[serde(rename = "R")]
    radius: usize,
    ball_size: usize,
    ball_measure: f64,
    orbit: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
}

pub fn cover(args: &CoverArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let quotient = args.load(common)?;
    let cover = universal_cover_ball(&quotient, args.base, args.radius, common.max_vertices)?;
    let growth = deck_growth(&cover, args.radius)?;
    let centers: Vec<usize> = (0..quotient.vertex_count()).collect();
    let radii: Vec<usize> = (0..=args.radius).collect();
    let comparison = volume_comparison_check(&quotient, args.base, &centers, &radii, common.max_vertices)?;
    let mut rows = Vec::new();
    for r in 0..=args.radius {
        let worst = comparison
            .cells
            .iter()
            .filter(|c| c.radius == r)
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .expect("every radius has a cell");
        let row = CoverRow {
            radius: r,
            ball_size: cover.ball_size(r),
            ball_measure: cover.ball_measure(r),
            orbit: growth.eval(r as f64)?,
            lhs: worst.lhs,
            rhs: worst.rhs,
            ratio: worst.ratio,
        };
        sink.summary(format!("R={r}: {} vertices, orbit {}, comparison ratio {}", row.ball_size, row.orbit, row.ratio));
        rows.push(row);
    }
    let violations = comparison.violations;
    let body = CoverBody {
        base: args.base,
        radius: args.radius,
        vertices: cover.vertex_count(),
        ball_sizes: rows.iter().map(|r| r.ball_size).collect(),
        ball_measures: rows.iter().map(|r| r.ball_measure).collect(),
        deck_growth: growth,
        comparison,
    };
    let csv = table(&rows)?;
    sink.emit("cover", &body, || csv)?;
    if violations > 0 {
        return Err(CliError::Violations(violations));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantCell {
    center: usize,
    #[serde(rename = "R")]
    radius: f64,
    sigma: f64,
    lambda: f64,
    domain: usize,
    truncated: bool,
    optimal: Option<f64>,
    empirical: f64,
    family: Family,
    candidates: usize,
}

#[derive(Serialize)]
struct ConstantBody {
    cells: Vec<ConstantCell>,
    violations: usize,
}

fn empirical_options(tests: &FamilyArgs, common: &CommonArgs) -> CliResult<EmpiricalOptions> {
    if tests.trials == 0 || tests.families.is_empty() {
        return Err(CliError::Usage("need at least one test family and one trial".into()));
    }
    let seed = common.require_seed("for empirical constants")?;
    Ok(EmpiricalOptions::new(tests.families.clone(), tests.trials, seed).with_ascent(tests.ascent))
}

pub fn constant(args: &ConstantArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let graph = args.graph.load(common)?;
    check_sigmas(&args.sigma)?;
    let options = empirical_options(&args.tests, common)?;
    let mut cells = Vec::new();
    let mut violations = 0;
    for &sigma in &args.sigma {
        for &radius in &args.radius {
            let inst = PoincareInstance::new(&graph, args.center, finite_radius(radius)?, sigma, args.lambda)?;
            let optimal = if sigma == 2.0 { Some(optimal_constant_sigma2(&inst)?.value) } else { None };
            let empirical = empirical_constant(&inst, &options)?;
            // an empirical ratio above the supremum means a broken computation
            if optimal.is_some_and(|o| empirical.value > o * (1.0 + 1e-9) + 1e-12) {
                violations += 1;
            }
            let cell = ConstantCell {
                center: args.center,
                radius,
                sigma,
                lambda: args.lambda,
                domain: inst.domain().len(),
                truncated: inst.truncated(),
                optimal,
                empirical: empirical.value,
                family: empirical.family,
                candidates: empirical.candidates,
            };
            let exact = cell.optimal.map(|o| format!(", optimal {o}")).unwrap_or_default();
            sink.summary(format!("R={radius} σ={sigma}: empirical {} ({}){exact}", cell.empirical, cell.family));
            cells.push(cell);
        }
    }
    let body = ConstantBody { cells, violations };
    let csv = table(&body.cells)?;
    sink.emit("constant", &body, || csv)?;
    if violations > 0 {
        return Err(CliError::Violations(violations));
    }
    Ok(())
}

/// The bound from `--spec` (if any) with every flag given on the command
/// line taking precedence.
fn bound_spec(kind: Option<BoundKind>, flags: &BoundParamArgs) -> CliResult<BoundSpec> {
    let base = match &flags.spec {
        Some(path) => Some(BoundSpec::from_json(
            &fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?,
        )?),
        None => None,
    };
    let kind = kind
        .or(base.as_ref().map(|s| s.kind))
        .ok_or_else(|| CliError::Usage("give a bound kind or a --spec file".into()))?;
    let given = flags.params()?;
    let (mut params, allow) = match base {
        Some(s) => (s.params, s.allow_out_of_regime),
        None => (BoundParams::default(), false),
    };
    macro_rules! overlay {
        ($($field:ident),*) => { $(if given.$field.is_some() { params.$field = given.$field; })* };
    }
    overlay!(big_c, c, l, r0, f, v, f_gamma, doubling, h, delta, d, v0, nu_r);
    Ok(BoundSpec::new(kind, params).with_override(allow || flags.allow_out_of_regime))
}

#[derive(Serialize)]
struct BoundBody {
    values: Vec<BoundValue>,
}

#[derive(Serialize)]
struct BoundRow {
    #[serde(rename = "R")]
    radius: f64,
    sigma: f64,
    value: f64,
    ln_value: f64,
    lambda: f64,
    valid_from: f64,
    in_regime: bool,
}

pub fn bound(args: &BoundArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let _ = common;
    let spec = bound_spec(args.kind, &args.params)?;
    let mut values = Vec::new();
    for &r in &args.radius {
        let b = bound_evaluate(&spec, r, args.sigma)?;
        let regime = if b.in_regime { "in regime" } else { "informational" };
        sink.summary(format!("{} R={r} σ={}: {} (λ = {}, {regime})", spec.kind, args.sigma, b.value, b.lambda));
        values.push(b);
    }
    let rows = values.iter().map(|b| BoundRow {
        radius: b.radius,
        sigma: b.sigma,
        value: b.value,
        ln_value: b.ln_value,
        lambda: b.lambda,
        valid_from: b.valid_from,
        in_regime: b.in_regime,
    });
    let csv = table(rows)?;
    sink.emit("bound", &BoundBody { values }, || csv)
}

/// Fills the inputs that a graph determines and the user left out: `f`
/// (vertex-ratio, or absolute for the lower-measure kind) and `c = 1/min ν`.
fn complete_from_graph(spec: &BoundSpec, graph: &MeasuredGraph) -> CliResult<BoundSpec> {
    let mut spec = spec.clone();
    let slots = spec.kind.slots();
    if slots.contains(&"f") && spec.params.f.is_none() {
        let mode =
            if spec.kind == BoundKind::GraphLowerVertex { GrowthMode::Absolute } else { GrowthMode::VertexRatio };
        spec.params.f = Some(graph.saturated_growth(mode, 8, SATURATION_RADIUS)?);
    }
    if spec.kind == BoundKind::GraphLowerVertex && spec.params.c.is_none() {
        spec.params.c = Some(1.0 / graph.min_measure());
    }
    Ok(spec)
}

fn instances<'g>(
    graph: &'g MeasuredGraph,
    spec: &BoundSpec,
    centers: &[usize],
    radii: Option<&[f64]>,
    sigmas: &[f64],
) -> CliResult<Vec<PoincareInstance<'g>>> {
    let mut out = Vec::new();
    for &sigma in sigmas {
        let lambda = bound_evaluate(&spec.clone().with_override(true), 1.0, sigma)?.lambda;
        for &x in centers {
            let own: Vec<f64>;
            let rs = match radii {
                Some(rs) => rs,
                None => {
                    own = (1..=graph.eccentricity(x)?.max(1)).map(|r| r as f64).collect();
                    &own
                }
            };
            for &r in rs {
                out.push(PoincareInstance::new(graph, x, finite_radius(r)?, sigma, lambda)?);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct SuiteReport {
    graph: usize,
    #[serde(flatten)]
    report: PoincareReport,
}

#[derive(Serialize)]
struct SuiteRow {
    graph: usize,
    center: usize,
    #[serde(rename = "R")]
    radius: f64,
    sigma: f64,
    empirical: f64,
    optimal: Option<f64>,
    bound: f64,
    ratio: f64,
    flags: String,
}

#[derive(Serialize)]
struct VerifyBody {
    kind: BoundKind,
    graphs: usize,
    instances: usize,
    asserted: usize,
    violations: usize,
    max_asserted_ratio: f64,
    max_informational_ratio: f64,
    reports: Vec<SuiteReport>,
}

pub fn verify(args: &VerifyArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    check_sigmas(&args.sigma)?;
    let spec = bound_spec(args.kind, &args.params)?;
    let explicit = args.functions.as_deref().map(read_functions).transpose()?;
    let mut reports = Vec::new();
    let graphs = match args.suite {
        Some(Suite::Random) => {
            let seed = common.require_seed("for the random suite")?;
            if args.max_n < 2 || args.random_functions == 0 {
                return Err(CliError::Usage("the suite needs --max-n ≥ 2 and at least one random function".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..args.n {
                let n = rng.random_range(2..=args.max_n);
                let p = rng.random_range(0.0..3.0) / n as f64;
                let graph = random_connected_graph(&mut rng, n, p, (0.1, 10.0))?;
                let centers: Vec<usize> = match &args.centers {
                    Some(c) => c.iter().copied().filter(|&c| c < n).collect(),
                    None => (0..3).map(|_| rng.random_range(0..n)).collect(),
                };
                let functions =
                    (0..args.random_functions).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
                let local = complete_from_graph(&spec, &graph)?;
                let options =
                    VerifyOptions { tests: TestFunctions::Explicit(functions), exact_limit: args.exact_limit };
                let insts = instances(&graph, &local, &centers, args.radius.as_deref(), &args.sigma)?;
                let batch = verify_bounds(&insts, &local, &options)?;
                let worst = batch.iter().map(|r| r.ratio).fold(0.0, f64::max);
                let bad = batch.iter().filter(|r| r.violation).count();
                sink.summary(format!(
                    "graph {i}: n={n} diameter={} instances={} violations={bad} worst ratio {worst}",
                    graph.diameter(),
                    batch.len()
                ));
                reports.extend(batch.into_iter().map(|report| SuiteReport { graph: i, report }));
            }
            args.n
        }
        None => {
            let graph = args.graph.load(common)?;
            let spec = complete_from_graph(&spec, &graph)?;
            let tests = match explicit {
                Some(functions) => TestFunctions::Explicit(functions),
                None => TestFunctions::Families(empirical_options(&args.tests, common)?),
            };
            let options = VerifyOptions { tests, exact_limit: args.exact_limit };
            let centers: Vec<usize> = args.centers.clone().unwrap_or_else(|| (0..graph.vertex_count()).collect());
            let insts = instances(&graph, &spec, &centers, args.radius.as_deref(), &args.sigma)?;
            for report in verify_bounds(&insts, &spec, &options)? {
                let flags = report.flags_label();
                if report.violation {
                    sink.summary(format!(
                        "center {} R={} σ={}: empirical {} bound {} ratio {}{}{}",
                        report.center,
                        report.radius,
                        report.sigma,
                        report.empirical,
                        report.bound,
                        report.ratio,
                        if flags.is_empty() { "" } else { " " },
                        flags
                    ));
                }
                reports.push(SuiteReport { graph: 0, report });
            }
            1
        }
    };
    let asserted: Vec<&PoincareReport> = reports.iter().map(|r| &r.report).filter(|r| r.asserted).collect();
    let body = VerifyBody {
        kind: spec.kind,
        graphs,
        instances: reports.len(),
        asserted: asserted.len(),
        violations: reports.iter().filter(|r| r.report.violation).count(),
        max_asserted_ratio: asserted.iter().map(|r| r.ratio).fold(0.0, f64::max),
        max_informational_ratio: reports
            .iter()
            .filter(|r| !r.report.asserted)
            .map(|r| r.report.ratio)
            .fold(0.0, f64::max),
        reports,
    };
    sink.summary(format!(
        "{}: {} instances, {} asserted, {} violations, worst asserted ratio {}",
        body.kind, body.instances, body.asserted, body.violations, body.max_asserted_ratio
    ));
    let csv = if args.suite.is_some() {
        table(body.reports.iter().map(|s| SuiteRow {
            graph: s.graph,
            center: s.report.center,
            radius: s.report.radius,
            sigma: s.report.sigma,
            empirical: s.report.empirical,
            optimal: s.report.optimal,
            bound: s.report.bound,
            ratio: s.report.ratio,
            flags: s.report.flags_label(),
        }))?
    } else {
        let plain: Vec<PoincareReport> = body.reports.iter().map(|s| s.report.clone()).collect();
        reports_to_csv(&plain)?
    };
    sink.emit("verify", &body, || csv)?;
    if body.violations > 0 {
        return Err(CliError::Violations(body.violations));
    }
    Ok(())
}

fn pipeline_config(args: &PipelineArgs, common: &CommonArgs) -> CliResult<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => PipelineConfig { seed: common.require_seed("for the pipeline")?, ..PipelineConfig::default() },
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(s) = &args.sigma {
        config.sigmas = s.clone();
    }
    macro_rules! overlay {
        ($($field:ident),*) => { $(if let Some(v) = args.$field { config.$field = v; })* };
    }
    overlay!(r0, l, centers, functions, trials, exact_limit);
    if args.max_radius.is_some() {
        config.max_radius = args.max_radius;
    }
    Ok(config)
}

fn write_pipeline(sink: &Sink, report: &PipelineReport) -> CliResult<()> {
    let text = match sink.format() {
        Format::Json => serde_json::to_string_pretty(report).map_err(poincarekit::Error::from)? + "\n",
        Format::Csv => reports_to_csv(&report.reports)?,
    };
    sink.write_raw(&text)
}

pub fn pipeline(args: &PipelineArgs, common: &CommonArgs, sink: &Sink) -> CliResult<()> {
    let host = args.graph.load(common)?;
    let config = pipeline_config(args, common)?;
    let report = match run_pipeline(&host, &config) {
        Ok(report) => report,
        Err(failure) => {
            write_pipeline(sink, &failure.partial)?;
            return Err(failure.error.into());
        }
    };
    for p in &report.ploc {
        sink.summary(format!(
            "local constant σ={}: C = {} ({})",
            p.sigma,
            p.constant,
            if p.exact { "exact" } else { "empirical" }
        ));
    }
    for m in &report.main_constants {
        sink.summary(format!(
            "main σ={}: λ = {}, C0 = {}, valid from R ≥ {} ({})",
            m.sigma,
            m.lambda,
            m.c0,
            m.valid_from,
            if m.reachable { "reachable" } else { "not reachable on this graph" }
        ));
    }
    // worst ratio per (center, σ), in report order
    let mut worst: Vec<(usize, f64, usize, &PoincareReport)> = Vec::new();
    for r in &report.reports {
        match worst.iter_mut().find(|(c, s, _, _)| *c == r.center && *s == r.sigma) {
            Some(entry) => {
                entry.2 += 1;
                if r.ratio > entry.3.ratio {
                    entry.3 = r;
                }
            }
            None => worst.push((r.center, r.sigma, 1, r)),
        }
    }
    for (center, sigma, count, r) in worst {
        sink.summary(format!(
            "center {center} σ={sigma}: {count} radii, worst ratio {} at R={} {}",
            r.ratio,
            r.radius,
            r.flags_label()
        ));
    }
    let summary = report.summary.clone().unwrap_or_default();
    sink.summary(format!(
        "{} lemma checks, {} lemma violations, {} bound violations, max informational ratio {}",
        summary.lemma_checks, summary.lemma_violations, summary.bound_violations, summary.informational_max_ratio
    ));
    write_pipeline(sink, &report)?;
    let violations = summary.lemma_violations + summary.bound_violations;
    if violations > 0 {
        return Err(CliError::Violations(violations));
    }
    Ok(())
}
