//! Argument parsing and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use curvtype_core::chain::{random_weights, validate_chain, WeightFamily};
use curvtype_core::curvature::{
    four_point_minimal_s, four_point_scan, midpoint_scan, ptolemy_scan, sturm_scan,
};
use curvtype_core::estimators::{
    banach_moduli_check, chain_search, enflo_search, markov_cotype_ratio, markov_ratio_power,
    markov_ratio_resolvent, rademacher_ratios, ChainSearch, EnfloMode, LpNorm, Modulus,
    DEFAULT_ENFLO_CAP,
};
use curvtype_core::metric::{
    cycle_graph, gaussian_cloud, graph_metric, lp_point_space, path_graph, product_space_capped,
    sphere_sample, star_graph, tripod, DEFAULT_PRODUCT_CAP,
};
use curvtype_core::report::{CheckReport, Witness};
use curvtype_core::{rng, FiniteMetricSpace, ReversibleChain};
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::config::{run_parallel, ConfigFile};
use crate::convert::to_csv;
use crate::json::{self, num};

/// Exit status for a completed run whose check failed.
pub const EXIT_FAILED: i32 = 1;
/// Exit status for bad arguments or unreadable input.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "curvtype", version)]
#[command(about = "Markov and Enflo type ratios, cotype ratios and curvature inequality checks on finite metric spaces")]
pub struct Cli {
    /// Output format; csv flattens reports into one row per check
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the output here instead of stdout
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for corpus runs (results do not depend on it)
    #[arg(long, global = true, env = "CURVTYPE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a finite metric space (sphere samples, Gaussian clouds, l^p point sets, graph metrics, l^2 products)
    #[command(subcommand)]
    Gen(Gen),
    /// Build or validate a stationary reversible Markov chain (pi_i a_ij = pi_j a_ji)
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Markov type 2 ratios: resolvent form, power form E(l)/(l E(1)), and a chain search
    #[command(subcommand)]
    Mtype(Mtype),
    /// Enflo type 2 ratio: diagonals over edges of a labeled hypercube {-1,1}^N
    Enflo(EnfloArgs),
    /// Markov cotype 2 ratio of vectors in l^p under a chain with uniform stationary distribution
    Cotype(CotypeArgs),
    /// Rademacher type/cotype ratios and 2-uniform smoothness/convexity of l^p norms
    #[command(subcommand)]
    Banach(Banach),
    /// Curvature inequalities: Sturm's barycenter inequality, four-point, Ptolemy, midpoint comparison
    #[command(subcommand)]
    Check(Check),
    /// Run the verification suites (energy doubling, Markov type bound, resolvent series, Enflo and Ptolemy bounds) over a seeded corpus
    Verify(VerifyArgs),
    /// Convert a JSON report to a flat CSV table
    Convert {
        /// Report written by any subcommand
        report: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum Gen {
    /// Uniform sample of the sphere S^2 of a given radius, geodesic distance
    Sphere {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Standard Gaussian points in R^dim, euclidean distance
    Gaussian {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Standard Gaussian points in R^dim with the l^p distance (p may be "inf")
    Lp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_p)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Star K_{1,3} with unit edges (center is point 0)
    Tripod,
    /// Star K_{1,leaves} with unit edges (center is point 0)
    Star {
        #[arg(long)]
        leaves: usize,
    },
    /// Path graph on n vertices with unit edges
    Path {
        #[arg(long)]
        n: usize,
    },
    /// Cycle graph on n vertices with unit edges
    Cycle {
        #[arg(long)]
        n: usize,
    },
    /// Shortest-path metric of a weighted graph file {"n": n, "edges": [[i, j, w], ...]}
    Graph { file: PathBuf },
    /// l^2 product of two spaces; point (a, b) has index a*|Y| + b
    Product {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PRODUCT_CAP)]
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Family {
    Dense,
    Sparse,
    Kernel,
}

impl From<Family> for WeightFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Dense => WeightFamily::Dense,
            Family::Sparse => WeightFamily::Sparse,
            Family::Kernel => WeightFamily::Kernel,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum ChainCmd {
    /// Chain of symmetric weights: pi_i = r_i / T, a_ij = w_ij / r_i
    FromWeights { weights: PathBuf },
    /// Chain of random symmetric weights on the points of a space
    Random {
        space: PathBuf,
        #[arg(long, value_enum, default_value_t = Family::Dense)]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check nonnegativity, row sums, sum pi = 1 and detailed balance
    Validate {
        chain: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum Mtype {
    /// Resolvent form (1-alpha) sum pi_i c_ij d_ij^2 / (alpha sum pi_i a_ij d_ij^2), C = (1-alpha)(I - alpha A)^-1
    Resolvent {
        space: PathBuf,
        chain: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Power form E(l) / (l E(1)) with E(l) = sum pi_i a^(l)_ij d_ij^2
    Power {
        space: PathBuf,
        chain: PathBuf,
        #[arg(long)]
        l: usize,
    },
    /// Local search over chains for max_{l <= L} E(l) / (l E(1)); a lower bound on M_2^2
    Search {
        space: PathBuf,
        #[arg(long = "L", default_value_t = 16)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Local,
}

#[derive(Args, Debug)]
pub struct EnfloArgs {
    space: PathBuf,
    /// Cube dimension N
    #[arg(long = "dim", short = 'N')]
    dim: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    /// Largest n^(2^N) allowed in exhaustive mode
    #[arg(long, default_value_t = DEFAULT_ENFLO_CAP)]
    cap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
}

#[derive(Args, Debug)]
pub struct CotypeArgs {
    /// {"vectors": [[..], ..]}
    vectors: PathBuf,
    chain: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_parser = parse_p, default_value = "2")]
    p: f64,
}

#[derive(Subcommand, Debug)]
pub enum Banach {
    /// Rademacher ratios 2^-N sum_eps |sum eps_i v_i|^2 / sum |v_i|^2 and its reciprocal
    Rademacher {
        vectors: PathBuf,
        #[arg(long, value_parser = parse_p, default_value = "2")]
        p: f64,
    },
    /// 2-uniform smoothness (--smooth S) or convexity (--convex C) of the l^p norm on one pair or on random pairs
    Moduli(ModuliArgs),
}

#[derive(Args, Debug)]
pub struct ModuliArgs {
    #[arg(long, value_parser = parse_p)]
    p: f64,
    /// Smoothness constant S, e.g. sqrt(p-1) for p >= 2
    #[arg(long, conflicts_with = "convex", required_unless_present = "convex")]
    smooth: Option<f64>,
    /// Convexity constant C, e.g. 1/sqrt(p-1) for 1 < p <= 2
    #[arg(long)]
    convex: Option<f64>,
    /// First vector, comma separated (with --w)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "w")]
    v: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "v")]
    w: Option<Vec<f64>>,
    /// Number of random Gaussian pairs when no pair is given
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum Check {
    /// Sturm's barycenter inequality sum a_i a_j (d(x_i,x_j)^2 - d(x_i,y)^2 - d(x_j,y)^2) <= 0 on random configurations
    Sturm {
        space: PathBuf,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Four-point inequality d(w,y)^2 + d(x,z)^2 <= S^2 (d(w,x)^2 + d(y,z)^2) + d(w,z)^2 + d(y,x)^2; without --s reports the minimal S
    Fourpoint {
        space: PathBuf,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Ptolemy inequality d(w,y) d(x,z) <= d(w,x) d(y,z) + d(w,z) d(y,x) on all quadruples
    Ptolemy {
        space: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Midpoint comparison inequalities (nonnegative curvature and CAT(0) forms) with constant S; needs a model
    Midpoint {
        space: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Corpus config (JSON); omitted fields take the defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the fully explicit default config and exit
    #[arg(long)]
    print_default_config: bool,
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p = match s {
        "inf" | "infinity" | "Infinity" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if p.is_nan() || p < 1.0 {
        return Err(format!("p = {s} must be at least 1"));
    }
    Ok(p)
}

/// What a command produced.
#[derive(Debug)]
pub struct Output {
    pub value: Value,
    /// Reports can be flattened to CSV; spaces and chains cannot.
    pub is_report: bool,
    pub failed: bool,
}

impl Output {
    fn data(value: Value) -> Self {
        Self { value, is_report: false, failed: false }
    }

    fn report(value: Value, failed: bool) -> Self {
        Self { value, is_report: true, failed }
    }

    fn check(r: &CheckReport) -> Self {
        Self::report(json::check_to_value(r), !r.passed)
    }
}

fn read(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    json::parse(&text, &path.display().to_string())
}

fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    json::space_from_value(&read(path)?, curvtype_core::metric::DEFAULT_TOL_REL)
        .with_context(|| format!("invalid space in {}", path.display()))
}

fn read_chain(path: &Path) -> Result<ReversibleChain> {
    json::chain_from_value(&read(path)?, curvtype_core::chain::CHAIN_TOL)
        .with_context(|| format!("invalid chain in {}", path.display()))
}

fn read_pair(space: &Path, chain: &Path) -> Result<(FiniteMetricSpace, ReversibleChain)> {
    let (s, c) = (read_space(space)?, read_chain(chain)?);
    if s.len() != c.len() {
        bail!("space has {} points but the chain has {} states", s.len(), c.len());
    }
    Ok((s, c))
}

fn space_out(space: FiniteMetricSpace) -> Output {
    Output::data(json::space_to_value(&space))
}

fn gaussian_coords(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::seeded(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

fn gen(cmd: Gen) -> Result<Output> {
    let space = match cmd {
        Gen::Sphere { n, seed, radius } => sphere_sample(n, seed, radius)?,
        Gen::Gaussian { n, dim, seed } => gaussian_cloud(n, dim, seed)?,
        Gen::Lp { n, dim, p, seed } => lp_point_space(gaussian_coords(n, dim, seed), p)?,
        Gen::Tripod => tripod(),
        Gen::Star { leaves } => star_graph(leaves)?,
        Gen::Path { n } => path_graph(n)?,
        Gen::Cycle { n } => cycle_graph(n)?,
        Gen::Graph { file } => {
            let v = read(&file)?;
            let n = json::as_usize(v.get("n").ok_or_else(|| anyhow!("graph needs \"n\""))?, "n")?;
            let edges = v
                .get("edges")
                .and_then(Value::as_array)
                .ok_or_else(|| anyhow!("graph needs an \"edges\" array"))?
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let what = format!("edges[{k}]");
                    match e.as_array().map(Vec::as_slice) {
                        Some([i, j, w]) => Ok((json::as_usize(i, &what)?, json::as_usize(j, &what)?, json::as_f64(w, &what)?)),
                        _ => bail!("{what}: expected [i, j, weight]"),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            graph_metric(n, &edges)?
        }
        Gen::Product { x, y, cap } => product_space_capped(&read_space(&x)?, &read_space(&y)?, cap)?,
    };
    Ok(space_out(space))
}

fn chain_cmd(cmd: ChainCmd) -> Result<Output> {
    match cmd {
        ChainCmd::FromWeights { weights } => {
            let w = json::weights_from_value(&read(&weights)?)?;
            Ok(Output::data(json::chain_to_value(&ReversibleChain::from_weights(&w)?)))
        }
        ChainCmd::Random { space, family, seed } => {
            let space = read_space(&space)?;
            let w = random_weights(&space, family.into(), seed);
            Ok(Output::data(json::chain_to_value(&ReversibleChain::from_weights(&w)?)))
        }
        ChainCmd::Validate { chain, tol } => {
            let v = read(&chain)?;
            let pi = json::as_vec(v.get("pi").ok_or_else(|| anyhow!("chain needs \"pi\""))?, "pi")?;
            let rows = json::as_rows(v.get("A").ok_or_else(|| anyhow!("chain needs \"A\""))?, "A")?;
            let n = rows.len();
            if n == 0 || rows.iter().any(|r| r.len() != n) {
                bail!("A must be a nonempty square matrix");
            }
            let a = curvtype_core::Matrix::from_fn(n, n, |i, j| rows[i][j]);
            Ok(Output::check(&validate_chain(&pi, &a, tol)))
        }
    }
}

fn mtype(cmd: Mtype) -> Result<Output> {
    let report = match cmd {
        Mtype::Resolvent { space, chain, alpha } => {
            let (s, c) = read_pair(&space, &chain)?;
            markov_ratio_resolvent(&s, &c, alpha)?
        }
        Mtype::Power { space, chain, l } => {
            let (s, c) = read_pair(&space, &chain)?;
            markov_ratio_power(&s, &c, l)?
        }
        Mtype::Search { space, horizon, seed, budget } => {
            let s = read_space(&space)?;
            chain_search(&s, ChainSearch { horizon, seed, budget })?.1
        }
    };
    Ok(Output::report(json::ratio_to_value(&report), false))
}

fn enflo(args: EnfloArgs) -> Result<Output> {
    let space = read_space(&args.space)?;
    let mode = match args.mode {
        Mode::Exhaustive => EnfloMode::Exhaustive { cap: args.cap },
        Mode::Local => EnfloMode::Local { seed: args.seed, budget: args.budget },
    };
    let (_, report) = enflo_search(&space, args.dim, mode)?;
    Ok(Output::report(json::ratio_to_value(&report), false))
}

fn cotype(args: CotypeArgs) -> Result<Output> {
    let vectors = json::vectors_from_value(&read(&args.vectors)?)?;
    let chain = read_chain(&args.chain)?;
    let report = markov_cotype_ratio(&vectors, LpNorm::new(args.p)?, &chain, args.alpha)?;
    Ok(Output::report(json::ratio_to_value(&report), false))
}

fn banach(cmd: Banach) -> Result<Output> {
    match cmd {
        Banach::Rademacher { vectors, p } => {
            let vectors = json::vectors_from_value(&read(&vectors)?)?;
            let (t, c) = rademacher_ratios(&vectors, LpNorm::new(p)?)?;
            Ok(Output::report(
                json!({"check": "rademacher", "p": num(p), "type_ratio": num(t), "cotype_ratio": num(c)}),
                false,
            ))
        }
        Banach::Moduli(a) => {
            let norm = LpNorm::new(a.p)?;
            let modulus = match (a.smooth, a.convex) {
                (Some(s), None) => Modulus::Smooth(s),
                (None, Some(c)) => Modulus::Convex(c),
                _ => bail!("give exactly one of --smooth and --convex"),
            };
            if let (Some(v), Some(w)) = (&a.v, &a.w) {
                return Ok(Output::check(&banach_moduli_check(v, w, norm, modulus, a.tol)?));
            }
            if a.pairs == 0 || a.dim == 0 {
                bail!("--pairs and --dim must be at least 1");
            }
            let mut rng = rng::seeded(a.seed);
            let mut worst: Option<(CheckReport, usize)> = None;
            let mut all_passed = true;
            for k in 0..a.pairs {
                let v: Vec<f64> = (0..a.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let w: Vec<f64> = (0..a.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let r = banach_moduli_check(&v, &w, norm, modulus, a.tol)?;
                all_passed &= r.passed;
                if worst.as_ref().is_none_or(|(b, _)| r.margin < b.margin) {
                    worst = Some((r, k));
                }
            }
            let (mut r, k) = worst.expect("at least one pair");
            r.passed = all_passed;
            let r = r
                .with_witness(Witness::Indices(vec![k]))
                .with_seed(a.seed)
                .with_trials(a.pairs)
                .with_detail(format!("worst of {} Gaussian pairs in dimension {}", a.pairs, a.dim));
            Ok(Output::check(&r))
        }
    }
}

fn check(cmd: Check) -> Result<Output> {
    match cmd {
        Check::Sturm { space, trials, seed, tol } => Ok(Output::check(&sturm_scan(&read_space(&space)?, trials, seed, tol)?)),
        Check::Fourpoint { space, s, tol } => {
            let space = read_space(&space)?;
            match s {
                Some(s) => Ok(Output::check(&four_point_scan(&space, s, tol))),
                None => {
                    let (s_min, q) = four_point_minimal_s(&space)?;
                    let r = CheckReport::new("four_point_minimal_s", q.margin, tol)
                        .with_value(s_min)
                        .with_witness(Witness::Indices(vec![q.w, q.x, q.y, q.z]));
                    Ok(Output::check(&r))
                }
            }
        }
        Check::Ptolemy { space, tol } => Ok(Output::check(&ptolemy_scan(&read_space(&space)?, tol))),
        Check::Midpoint { space, s, tol } => {
            let (a, c) = midpoint_scan(&read_space(&space)?, s, tol)?;
            let failed = !(a.passed && c.passed);
            Ok(Output::report(
                Value::Array(vec![json::check_to_value(&a), json::check_to_value(&c)]),
                failed,
            ))
        }
    }
}

fn verify(args: VerifyArgs, threads: Option<usize>) -> Result<Output> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            ConfigFile::from_json(&text)?
        }
        None => ConfigFile::default(),
    };
    let config = file.resolve()?;
    let explicit = ConfigFile::explicit(&config);
    if args.print_default_config {
        return Ok(Output::data(explicit.to_value()));
    }
    let report = run_parallel(&config, threads)?;
    Ok(Output::report(json::corpus_to_value(&report, explicit.to_value()), !report.passed))
}

/// Runs a parsed command and renders its output in the requested format.
pub fn run(cli: Cli) -> Result<(String, bool)> {
    let format = cli.format;
    let out = match cli.command {
        Command::Gen(g) => gen(g)?,
        Command::Chain(c) => chain_cmd(c)?,
        Command::Mtype(m) => mtype(m)?,
        Command::Enflo(e) => enflo(e)?,
        Command::Cotype(c) => cotype(c)?,
        Command::Banach(b) => banach(b)?,
        Command::Check(c) => check(c)?,
        Command::Verify(v) => verify(v, cli.threads)?,
        Command::Convert { report } => {
            return Ok((to_csv(&read(&report)?)?, false));
        }
    };
    let text = match format {
        Format::Json => json::to_string(&out.value),
        Format::Csv if out.is_report => to_csv(&out.value)?,
        Format::Csv => bail!("csv output is only available for reports; spaces and chains are JSON"),
    };
    Ok((text, out.failed))
}
