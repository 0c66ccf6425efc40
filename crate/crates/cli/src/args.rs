use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poincarekit::covering::QuotientGraph;
use poincarekit::groups::{GroupModel, GroupSpec};
use poincarekit::mmgraph::generators::{
    complete_graph, cycle_graph, grid_graph, path_graph, random_connected_graph, star_graph,
};
use poincarekit::mmgraph::io::{read_graph_csv, read_graph_json};
use poincarekit::poincare::{BoundKind, BoundParams, Family};
use poincarekit::{GrowthMode, GrowthProfile, MeasuredGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::output::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "poincarekit", version, about = "Poincaré constants, growth, nets and covers on measured graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every randomized step. Required by randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "POINCAREKIT_THREADS", global = true)]
    pub threads: Option<usize>,
    /// Cap on enumerated vertices or group elements.
    #[arg(long, default_value_t = 1_000_000, global = true)]
    pub max_vertices: usize,
    /// Cap on four-point quadruples.
    #[arg(long, default_value_t = 10_000_000, global = true)]
    pub max_quadruples: u64,
}

impl CommonArgs {
    pub fn require_seed(&self, why: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage(format!("--seed is required {why}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[allow(clippy::large_enum_variant)]
#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed ball around a vertex, or a Cayley ball of a group.
    Ball(BallArgs),
    /// Growth profile of a graph or growth series of a group.
    Growth(GrowthArgs),
    /// Exponential (or polynomial) growth rate fitted over a window.
    Entropy(EntropyArgs),
    /// Gromov δ by the four-point condition.
    Delta(DeltaArgs),
    /// Pointwise systole of a group acting on its Cayley graph.
    Systole(SystoleArgs),
    /// ε-net of a host graph and the host/net comparison checks.
    Net(NetArgs),
    /// Universal-cover ball of a finite quotient and the volume comparison.
    Cover(CoverArgs),
    /// Optimal (σ = 2) and empirical Poincaré constants on balls.
    Constant(ConstantArgs),
    /// Evaluate an explicit bound formula.
    Bound(BoundArgs),
    /// Compare empirical constants against a bound.
    Verify(VerifyArgs),
    /// Host graph to net, local constant, main-bound constants and checks.
    Pipeline(PipelineArgs),
}

/// A built-in graph: `path:N`, `cycle:N`, `grid:WxH`, `complete:N`,
/// `star:N` or `random:N:P` (measures uniform in [0.1, 10]).
#[derive(Clone, Debug, PartialEq)]
pub enum GraphRecipe {
    Path(usize),
    Cycle(usize),
    Grid(usize, usize),
    Complete(usize),
    Star(usize),
    Random(usize, f64),
}

impl FromStr for GraphRecipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("graph recipe {s:?} is not kind:size"))?;
        let int = |t: &str| t.parse::<usize>().map_err(|_| format!("{t:?} is not a vertex count"));
        match kind {
            "path" => Ok(GraphRecipe::Path(int(rest)?)),
            "cycle" => Ok(GraphRecipe::Cycle(int(rest)?)),
            "complete" => Ok(GraphRecipe::Complete(int(rest)?)),
            "star" => Ok(GraphRecipe::Star(int(rest)?)),
            "grid" => {
                let (w, h) = rest.split_once('x').ok_or_else(|| format!("grid size {rest:?} is not WxH"))?;
                Ok(GraphRecipe::Grid(int(w)?, int(h)?))
            }
            "random" => {
                let (n, p) = rest.split_once(':').ok_or_else(|| format!("random graph {rest:?} is not N:P"))?;
                let p: f64 = p.parse().map_err(|_| format!("{p:?} is not a probability"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("edge probability {p} is outside [0, 1]"));
                }
                Ok(GraphRecipe::Random(int(n)?, p))
            }
            other => Err(format!("unknown graph kind {other:?}")),
        }
    }
}

impl GraphRecipe {
    fn vertex_count(&self) -> usize {
        match *self {
            GraphRecipe::Path(n) | GraphRecipe::Cycle(n) | GraphRecipe::Complete(n) | GraphRecipe::Random(n, _) => n,
            GraphRecipe::Grid(w, h) => w.saturating_mul(h),
            GraphRecipe::Star(k) => k.saturating_add(1),
        }
    }

    pub fn build(&self, common: &CommonArgs) -> CliResult<MeasuredGraph> {
        let n = self.vertex_count();
        if n == 0 {
            return Err(CliError::Usage("a generated graph needs at least one vertex".into()));
        }
        if n > common.max_vertices {
            return Err(
                poincarekit::Error::Budget { what: "generated graph", limit: common.max_vertices as u64 }.into()
            );
        }
        if matches!(self, GraphRecipe::Cycle(n) if *n < 3) {
            return Err(CliError::Usage("a cycle needs at least 3 vertices".into()));
        }
        Ok(match *self {
            GraphRecipe::Path(n) => path_graph(n),
            GraphRecipe::Cycle(n) => cycle_graph(n),
            GraphRecipe::Grid(w, h) => grid_graph(w, h),
            GraphRecipe::Complete(n) => complete_graph(n),
            GraphRecipe::Star(k) => star_graph(k),
            GraphRecipe::Random(n, p) => {
                let mut rng = ChaCha8Rng::seed_from_u64(common.require_seed("for random graphs")?);
                random_connected_graph(&mut rng, n, p, (0.1, 10.0))?
            }
        })
    }
}

/// Where a graph comes from: a file or a built-in recipe.
#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Graph file: a JSON document, or an edge list when the name ends in `.csv`.
    #[arg(long, conflicts_with = "generate")]
    pub graph: Option<PathBuf>,
    /// Measure CSV (`vertex,measure`) for a CSV edge list.
    #[arg(long, requires = "graph")]
    pub measure: Option<PathBuf>,
    /// Built-in graph: path:N, cycle:N, grid:WxH, complete:N, star:N, random:N:P.
    #[arg(long)]
    pub generate: Option<GraphRecipe>,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

impl GraphArgs {
    pub fn is_given(&self) -> bool {
        self.graph.is_some() || self.generate.is_some()
    }

    pub fn load(&self, common: &CommonArgs) -> CliResult<MeasuredGraph> {
        let graph = match (&self.graph, &self.generate) {
            (Some(path), _) if is_csv(path) => {
                let measure = self.measure.as_deref().map(open).transpose()?;
                read_graph_csv(open(path)?, measure)?
            }
            (Some(path), _) => read_graph_json(open(path)?)?,
            (None, Some(recipe)) => recipe.build(common)?,
            (None, None) => return Err(CliError::Usage("give a graph with --graph or --generate".into())),
        };
        if graph.vertex_count() > common.max_vertices {
            return Err(poincarekit::Error::Budget { what: "input graph", limit: common.max_vertices as u64 }.into());
        }
        Ok(graph)
    }
}

/// A graph or a group; commands that accept both take exactly one.
#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Group: free:N, free_abelian:N, trivial, or inline JSON.
    #[arg(long, conflicts_with_all = ["graph", "generate"])]
    pub group: Option<GroupSpec>,
}

pub enum Space {
    Graph(MeasuredGraph),
    Group(GroupModel),
}

impl SpaceArgs {
    pub fn load(&self, common: &CommonArgs) -> CliResult<Space> {
        match &self.group {
            Some(spec) => Ok(Space::Group(GroupModel::from_spec(spec)?)),
            None if self.graph.is_given() => Ok(Space::Graph(self.graph.load(common)?)),
            None => Err(CliError::Usage("give one of --graph, --generate or --group".into())),
        }
    }
}

#[derive(Args, Debug)]
pub struct BallArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Center vertex (graphs only; Cayley balls are centered at the identity).
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    /// Ball radius.
    #[arg(long = "R")]
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    VertexRatio,
    HalfBallRatio,
    Absolute,
    DoublingRatio,
}

impl From<ModeArg> for GrowthMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::VertexRatio => GrowthMode::VertexRatio,
            ModeArg::HalfBallRatio => GrowthMode::HalfBallRatio,
            ModeArg::Absolute => GrowthMode::Absolute,
            ModeArg::DoublingRatio => GrowthMode::DoublingRatio,
        }
    }
}

#[derive(Args, Debug)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Largest radius tabulated.
    #[arg(long)]
    pub rmax: usize,
    /// Profile mode for graphs (groups always give F(R) = |B(e,R)|).
    #[arg(long, value_enum, default_value_t = ModeArg::VertexRatio)]
    pub mode: ModeArg,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Largest radius tabulated.
    #[arg(long)]
    pub rmax: usize,
    /// Fit window `LO,HI`; defaults to the upper half of `0..=rmax`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub window: Option<Vec<f64>>,
    /// Fit `ln F` against `ln R` (apparent polynomial degree) instead of `R`.
    #[arg(long)]
    pub polynomial: bool,
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Radius of the Cayley ball when a group is given.
    #[arg(long = "R", default_value_t = 3)]
    pub radius: usize,
    /// Sample this many random quadruples instead of all of them.
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SystoleArgs {
    /// Group: free:N, z:N, trivial, or inline JSON.
    #[arg(long)]
    pub group: GroupSpec,
    /// Radius of the sampled points.
    #[arg(long, default_value_t = 2)]
    pub sample_radius: usize,
    /// Radius of the tried displacements (default `2·sample_radius + 1`).
    #[arg(long)]
    pub gamma_radius: Option<usize>,
}

#[derive(Args, Debug)]
pub struct NetArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Separation and covering radius of the net.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Dilations for the multiplicity check.
    #[arg(long = "L", value_delimiter = ',', default_values_t = [1.0])]
    pub l: Vec<f64>,
    /// Radii for the volume-transfer check.
    #[arg(long, value_delimiter = ',', default_values_t = (1..=10).map(f64::from).collect::<Vec<_>>())]
    pub radii: Vec<f64>,
    /// Sample this many random center pairs instead of all of them.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Also write the net itself (centers, quotient, assignment).
    #[arg(long)]
    pub with_net: bool,
}

/// A finite quotient: `figure-eight`, `theta`, or any built-in graph recipe.
#[derive(Clone, Debug, PartialEq)]
pub enum QuotientRecipe {
    FigureEight,
    Theta,
    Graph(GraphRecipe),
}

impl FromStr for QuotientRecipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "figure-eight" => Ok(QuotientRecipe::FigureEight),
            "theta" => Ok(QuotientRecipe::Theta),
            other => other.parse().map(QuotientRecipe::Graph),
        }
    }
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    /// Quotient graph JSON; loops and parallel edges are allowed.
    #[arg(long, conflicts_with = "generate")]
    pub quotient: Option<PathBuf>,
    /// Built-in quotient: figure-eight, theta, or a graph recipe.
    #[arg(long)]
    pub generate: Option<QuotientRecipe>,
    /// Base vertex in the quotient.
    #[arg(long, default_value_t = 0)]
    pub base: usize,
    /// Radius of the cover ball.
    #[arg(long = "R")]
    pub radius: usize,
}

impl CoverArgs {
    pub fn load(&self, common: &CommonArgs) -> CliResult<QuotientGraph> {
        match (&self.quotient, &self.generate) {
            (Some(path), _) => Ok(QuotientGraph::read_json(open(path)?)?),
            (None, Some(QuotientRecipe::FigureEight)) => Ok(QuotientGraph::new(vec![1.0], vec![(0, 0), (0, 0)])?),
            (None, Some(QuotientRecipe::Theta)) => {
                Ok(QuotientGraph::new(vec![1.0, 1.0], vec![(0, 1), (0, 1), (0, 1)])?)
            }
            (None, Some(QuotientRecipe::Graph(recipe))) => Ok(QuotientGraph::from_graph(&recipe.build(common)?)),
            (None, None) => Err(CliError::Usage("give a quotient with --quotient or --generate".into())),
        }
    }
}

#[derive(Args, Debug)]
pub struct ConstantArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Ball center.
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    /// Ball radii; one sweep cell per radius and σ.
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub radius: Vec<f64>,
    /// Exponents σ (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [2.0])]
    pub sigma: Vec<f64>,
    /// Dilation λ of the domain ball.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub tests: FamilyArgs,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Test-function families for empirical constants.
    #[arg(long, value_delimiter = ',', default_values_t = Family::ALL.to_vec())]
    pub families: Vec<Family>,
    /// Test functions per family.
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    /// Random-perturbation ascent steps from the best candidate.
    #[arg(long, default_value_t = 0)]
    pub ascent: usize,
}

/// Inputs of the bound formulas. Profiles are JSON (`{"radii", "values"}`)
/// or `radius,value` CSV files.
#[derive(Args, Debug, Clone, Default)]
pub struct BoundParamArgs {
    /// Bound specification JSON (`{"kind", "params", "override"}`).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Constant of the local inequality.
    #[arg(long = "C")]
    pub big_c: Option<f64>,
    /// Reciprocal lower bound on vertex or half-ball measure.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Dilation of the local inequality.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Scale from which the local inequality holds.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Growth profile file (json or csv `radius,value`).
    #[arg(long = "f")]
    pub f: Option<PathBuf>,
    /// Volume profile file.
    #[arg(long = "V")]
    pub v: Option<PathBuf>,
    /// Orbit growth profile file.
    #[arg(long = "F-gamma")]
    pub f_gamma: Option<PathBuf>,
    /// Doubling constant of the measure.
    #[arg(long)]
    pub doubling: Option<f64>,
    /// Entropy bound.
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Hyperbolicity constant δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Diameter bound of the quotient.
    #[arg(long = "D")]
    pub d: Option<f64>,
    /// Volume bound of the quotient.
    #[arg(long = "V0")]
    pub v0: Option<f64>,
    /// Measure bound ν(r) for balls of radius 10(1+δ).
    #[arg(long = "nur")]
    pub nu_r: Option<f64>,
    /// Evaluate below the valid radius; such values are informational.
    #[arg(long = "override")]
    pub allow_out_of_regime: bool,
}

pub fn read_profile(path: &Path) -> CliResult<GrowthProfile> {
    if is_csv(path) {
        Ok(GrowthProfile::from_csv(open(path)?, GrowthMode::Absolute)?)
    } else {
        serde_json::from_reader(open(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

impl BoundParamArgs {
    /// Parameters from the flags; a `--spec` file supplies the rest.
    pub fn params(&self) -> CliResult<BoundParams> {
        let profile = |p: &Option<PathBuf>| p.as_deref().map(read_profile).transpose();
        Ok(BoundParams {
            big_c: self.big_c,
            c: self.c,
            l: self.l,
            r0: self.r0,
            f: profile(&self.f)?,
            v: profile(&self.v)?,
            f_gamma: profile(&self.f_gamma)?,
            doubling: self.doubling,
            h: self.h,
            delta: self.delta,
            d: self.d,
            v0: self.v0,
            nu_r: self.nu_r,
        })
    }
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Bound formula: graph-strong, graph-lower-vertex, main, doubling, main2,
    /// cayley-hyperbolic, hyperbolic-space or covering.
    #[arg(long, required_unless_present = "spec")]
    pub kind: Option<BoundKind>,
    /// Radii (comma separated).
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub radius: Vec<f64>,
    /// Exponent σ.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[command(flatten)]
    pub params: BoundParamArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Random connected graphs with measures uniform in [0.1, 10].
    Random,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Bound formula: graph-strong, graph-lower-vertex, main, doubling, main2,
    /// cayley-hyperbolic, hyperbolic-space or covering.
    #[arg(long = "bound", required_unless_present = "spec")]
    pub kind: Option<BoundKind>,
    #[command(flatten)]
    pub params: BoundParamArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Run a generated suite instead of a single graph.
    #[arg(long, value_enum, conflicts_with_all = ["graph", "generate"])]
    pub suite: Option<Suite>,
    /// Number of graphs in the suite.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Largest graph in the suite.
    #[arg(long, default_value_t = 60)]
    pub max_n: usize,
    /// Centers (default: all vertices; three random ones per suite graph).
    #[arg(long, value_delimiter = ',')]
    pub centers: Option<Vec<usize>>,
    /// Radii (default: 1 up to the eccentricity of each center).
    #[arg(long = "R", value_delimiter = ',')]
    pub radius: Option<Vec<f64>>,
    /// Exponents σ (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    pub sigma: Vec<f64>,
    /// Explicit test functions: a JSON array of per-vertex value arrays.
    #[arg(long)]
    pub functions: Option<PathBuf>,
    /// Random functions per suite graph.
    #[arg(long, default_value_t = 10)]
    pub random_functions: usize,
    #[command(flatten)]
    pub tests: FamilyArgs,
    /// Largest domain that also gets the exact σ = 2 constant.
    #[arg(long, default_value_t = 3000)]
    pub exact_limit: usize,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Base configuration JSON; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exponents σ (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// Scale from which the local inequality is assumed.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Dilation of the local inequality.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Sampled centers.
    #[arg(long)]
    pub centers: Option<usize>,
    /// Random functions per center in the gradient-transfer check.
    #[arg(long)]
    pub functions: Option<usize>,
    /// Test functions per family for empirical constants.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest R for empirical constants (default: each center's eccentricity).
    #[arg(long)]
    pub max_radius: Option<usize>,
    /// Domains up to this size also get exact σ = 2 constants.
    #[arg(long)]
    pub exact_limit: Option<usize>,
}

pub fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_functions(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    read_config(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn flags_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn graph_recipes() {
        assert_eq!("grid:4x3".parse(), Ok(GraphRecipe::Grid(4, 3)));
        assert_eq!("random:20:0.1".parse(), Ok(GraphRecipe::Random(20, 0.1)));
        assert_eq!("figure-eight".parse(), Ok(QuotientRecipe::FigureEight));
        assert_eq!("cycle:5".parse(), Ok(QuotientRecipe::Graph(GraphRecipe::Cycle(5))));
        assert!("grid:4".parse::<GraphRecipe>().is_err());
        assert!("random:20:2".parse::<GraphRecipe>().is_err());
        assert!("torus:3".parse::<GraphRecipe>().is_err());
    }
}
