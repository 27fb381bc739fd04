//! Seeded corpora of spaces and chains, and the runner that replays every
//! selected suite on them.
//!
//! Expansion order is generators, then sizes, then seeds, as listed in the
//! config. Each case is independent, so callers may evaluate [`run_case`] in
//! any order (or in parallel) and hand the outcomes to [`assemble`] in
//! expansion order; the report does not depend on how cases were scheduled.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::{
    lemma_half, main_bound, remark, resolvent_power, resolvent_series, series_horizon,
    verify_enflo_bound, verify_ptolemy_implication, VerifyError, DEFAULT_TOL, NONNEG_BOUND,
};
use crate::chain::{energy_profile, random_weights, ReversibleChain, WeightFamily};
use crate::curvature::sturm_scan;
use crate::metric::{
    cycle_graph, gaussian_cloud, path_graph, product_space, sphere_sample, star_graph, tripod,
    FiniteMetricSpace,
};
use crate::report::CheckReport;
use crate::rng;

/// Stream ids for the seeded sub-generators of one case.
const CHAIN_STREAM: u64 = 1;
const SECOND_FACTOR_STREAM: u64 = 2;

/// A verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    /// Random Sturm scan of each space.
    Sturm,
    /// `E(2l) <= 2E(l)`.
    LemmaHalf,
    /// `E(l) <= (1+sqrt 2)^2 l E(1)`, or `l E(1)` on euclidean spaces.
    MainBound,
    /// The two-sided energy inequality over the alpha grid.
    Remark,
    /// Resolvent against its truncated series, and against the power form.
    ResolventSeries,
    /// Exhaustive Enflo ratio against `S^2 = 1` on euclidean spaces.
    EnfloBound,
    /// Ptolemy implies the four-point inequality with `S = sqrt 3`.
    PtolemyImplication,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Sturm,
        Suite::LemmaHalf,
        Suite::MainBound,
        Suite::Remark,
        Suite::ResolventSeries,
        Suite::EnfloBound,
        Suite::PtolemyImplication,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sturm => "sturm",
            Suite::LemmaHalf => "lemma_half",
            Suite::MainBound => "main_bound",
            Suite::Remark => "remark_inequality",
            Suite::ResolventSeries => "resolvent_series",
            Suite::EnfloBound => "enflo_bound",
            Suite::PtolemyImplication => "ptolemy_implication",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Whether the suite's claim holds for spaces of this provenance. Suites
    /// that only compare two computations of one quantity always apply.
    pub fn applies_to(self, provenance: Provenance) -> bool {
        match self {
            Suite::Sturm | Suite::LemmaHalf | Suite::MainBound | Suite::Remark => {
                provenance != Provenance::Unknown
            }
            Suite::EnfloBound => provenance == Provenance::Hilbert,
            Suite::ResolventSeries | Suite::PtolemyImplication => true,
        }
    }

    fn per_chain(self) -> bool {
        matches!(
            self,
            Suite::LemmaHalf | Suite::MainBound | Suite::Remark | Suite::ResolventSeries
        )
    }
}

/// What is known about the curvature of a generated space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Finite subset of a euclidean space (nonnegatively curved and CAT(0)).
    Hilbert,
    /// Finite subset of a nonnegatively curved space (spheres and their products).
    NonnegCurvature,
    /// No curvature hypothesis, e.g. graph metrics.
    Unknown,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Hilbert => "hilbert",
            Provenance::NonnegCurvature => "nonnegative-curvature",
            Provenance::Unknown => "unknown",
        }
    }
}

/// A family of spaces. Every generator is expanded once per seed.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// Uniform samples of the sphere of the given radius in `R^3`.
    Sphere { sizes: Vec<usize>, radius: f64 },
    /// Standard Gaussian clouds, one space per `(size, dim)`.
    Gaussian { sizes: Vec<usize>, dims: Vec<usize> },
    /// `l^2` products of two independent unit-sphere samples.
    SphereProduct { factors: Vec<(usize, usize)> },
    /// The star with three unit edges.
    Tripod,
    Star { leaves: usize },
    Cycle { n: usize },
    Path { n: usize },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Sphere { .. } => "sphere",
            Generator::Gaussian { .. } => "gaussian",
            Generator::SphereProduct { .. } => "sphere_product",
            Generator::Tripod => "tripod",
            Generator::Star { .. } => "star",
            Generator::Cycle { .. } => "cycle",
            Generator::Path { .. } => "path",
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            Generator::Gaussian { .. } => Provenance::Hilbert,
            Generator::Sphere { .. } | Generator::SphereProduct { .. } => Provenance::NonnegCurvature,
            _ => Provenance::Unknown,
        }
    }

    fn describe(&self) -> String {
        match self {
            Generator::Sphere { sizes, radius } => format!("sphere(n={sizes:?}, radius={radius})"),
            Generator::Gaussian { sizes, dims } => format!("gaussian(n={sizes:?}, dim={dims:?})"),
            Generator::SphereProduct { factors } => format!("sphere_product(factors={factors:?})"),
            Generator::Tripod => "tripod".to_string(),
            Generator::Star { leaves } => format!("star(leaves={leaves})"),
            Generator::Cycle { n } => format!("cycle(n={n})"),
            Generator::Path { n } => format!("path(n={n})"),
        }
    }

    /// `(case name, space)` for one seed, in a fixed order.
    fn spaces(&self, seed: u64) -> Result<Vec<(String, FiniteMetricSpace)>, VerifyError> {
        let mut out = Vec::new();
        match self {
            Generator::Sphere { sizes, radius } => {
                for &n in sizes {
                    out.push((format!("sphere n={n} seed={seed}"), sphere_sample(n, seed, *radius)?));
                }
            }
            Generator::Gaussian { sizes, dims } => {
                for &n in sizes {
                    for &dim in dims {
                        out.push((
                            format!("gaussian n={n} dim={dim} seed={seed}"),
                            gaussian_cloud(n, dim, seed)?,
                        ));
                    }
                }
            }
            Generator::SphereProduct { factors } => {
                let second = rng::seeded_stream(seed, SECOND_FACTOR_STREAM).next_u64();
                for &(a, b) in factors {
                    let x = sphere_sample(a, seed, 1.0)?;
                    let y = sphere_sample(b, second, 1.0)?;
                    out.push((format!("sphere_product {a}x{b} seed={seed}"), product_space(&x, &y)?));
                }
            }
            Generator::Tripod => out.push((format!("tripod seed={seed}"), tripod())),
            Generator::Star { leaves } => {
                out.push((format!("star leaves={leaves} seed={seed}"), star_graph(*leaves)?));
            }
            Generator::Cycle { n } => out.push((format!("cycle n={n} seed={seed}"), cycle_graph(*n)?)),
            Generator::Path { n } => out.push((format!("path n={n} seed={seed}"), path_graph(*n)?)),
        }
        Ok(out)
    }
}

/// Everything that determines a corpus run.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusConfig {
    pub suites: Vec<Suite>,
    pub generators: Vec<Generator>,
    pub seeds: Vec<u64>,
    /// Horizon `L` of the main bound.
    pub horizon: usize,
    /// Largest `l` in `E(2l) <= 2E(l)`.
    pub lemma_horizon: usize,
    /// Largest `l` of the two-sided energy inequality.
    pub remark_horizon: usize,
    pub alpha_grid: Vec<f64>,
    pub tol: f64,
    pub chains_per_space: usize,
    pub sturm_trials: usize,
    /// The Enflo suite labels the cube by the first `enflo_points` points.
    pub enflo_points: usize,
    pub enflo_dims: Vec<usize>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            generators: vec![
                Generator::Sphere {
                    sizes: vec![8, 15, 25],
                    radius: 1.0,
                },
                Generator::Gaussian {
                    sizes: vec![8, 15],
                    dims: vec![2, 5],
                },
                Generator::SphereProduct {
                    factors: vec![(4, 4), (3, 6)],
                },
                Generator::Tripod,
            ],
            seeds: (1..=5).collect(),
            horizon: 32,
            lemma_horizon: 16,
            remark_horizon: 8,
            alpha_grid: vec![0.1, 0.25, 0.5, 0.75, 0.9],
            tol: DEFAULT_TOL,
            chains_per_space: 3,
            sturm_trials: 200,
            enflo_points: 4,
            enflo_dims: vec![1, 2, 3],
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let fail = |msg: &str| Err(VerifyError::Config(msg.to_string()));
        if self.suites.is_empty() {
            return fail("suite list is empty");
        }
        if self.generators.is_empty() {
            return fail("generator list is empty");
        }
        if self.seeds.is_empty() {
            return fail("seed list is empty");
        }
        if self.horizon == 0 || self.lemma_horizon == 0 || self.remark_horizon == 0 {
            return fail("horizons must be at least 1");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return fail("tol must lie in (0, 1)");
        }
        if self.alpha_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return fail("every alpha must lie in (0, 1)");
        }
        if self.chains_per_space == 0 {
            return fail("chains_per_space must be at least 1");
        }
        if self.sturm_trials == 0 {
            return fail("sturm_trials must be at least 1");
        }
        if self.enflo_points < 2 {
            return fail("enflo_points must be at least 2");
        }
        if self.enflo_dims.iter().any(|&d| d == 0 || d > 20) {
            return fail("enflo dimensions must lie in 1..=20");
        }
        Ok(())
    }

    /// One-line description of the corpus for reports.
    pub fn descriptor(&self) -> String {
        let generators: Vec<String> = self.generators.iter().map(Generator::describe).collect();
        format!(
            "{}; seeds={:?}; chains_per_space={}; L={}",
            generators.join(", "),
            self.seeds,
            self.chains_per_space,
            self.horizon
        )
    }

    fn energy_horizon(&self) -> usize {
        self.horizon
            .max(2 * self.lemma_horizon)
            .max(2 * self.remark_horizon + 2)
    }
}

/// One space of the expanded corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusCase {
    pub name: String,
    pub seed: u64,
    pub provenance: Provenance,
    pub space: FiniteMetricSpace,
}

/// Expands generators, sizes and seeds into cases, in config order.
pub fn expand_corpus(config: &CorpusConfig) -> Result<Vec<CorpusCase>, VerifyError> {
    config.validate()?;
    let mut cases = Vec::new();
    for generator in &config.generators {
        for &seed in &config.seeds {
            for (name, space) in generator.spaces(seed)? {
                cases.push(CorpusCase {
                    name,
                    seed,
                    provenance: generator.provenance(),
                    space,
                });
            }
        }
    }
    Ok(cases)
}

/// The checks of one case in one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseResult {
    pub case: String,
    pub provenance: Provenance,
    /// False when the space is outside the suite's hypothesis; such cases
    /// are reported but do not affect the verdict.
    pub hypothesis_verified: bool,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

/// All suite results of one space, ordered as [`CorpusConfig::suites`].
#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub results: Vec<(Suite, Vec<CaseResult>)>,
}

/// The check with the smallest margin; it passes only if all checks pass.
fn worst_of(checks: Vec<CheckReport>) -> Option<CheckReport> {
    let all_passed = checks.iter().all(|c| c.passed);
    let mut worst = checks
        .into_iter()
        .reduce(|a, b| if b.margin < a.margin { b } else { a })?;
    worst.passed = all_passed;
    Some(worst)
}

/// Runs every selected suite on one space.
pub fn run_case(config: &CorpusConfig, case: &CorpusCase) -> Result<CaseOutcome, VerifyError> {
    let space = &case.space;
    let chains: Vec<(String, ReversibleChain)> = if config.suites.iter().any(|s| s.per_chain()) {
        let mut stream = rng::seeded_stream(case.seed, CHAIN_STREAM);
        let families = [WeightFamily::Dense, WeightFamily::Sparse, WeightFamily::Kernel];
        (0..config.chains_per_space)
            .map(|k| {
                let family = families[k % families.len()];
                let chain_seed = stream.next_u64();
                let w = random_weights(space, family, chain_seed);
                let label = format!("{} chain={k} ({family:?}, seed={chain_seed})", case.name);
                Ok((label, ReversibleChain::from_weights(&w)?))
            })
            .collect::<Result<_, VerifyError>>()?
    } else {
        Vec::new()
    };
    let mut profiles = Vec::with_capacity(chains.len());
    for (_, chain) in &chains {
        let p = energy_profile(space, chain, config.energy_horizon())?;
        if p.values()[0] <= 0.0 {
            return Err(VerifyError::DegenerateChain);
        }
        profiles.push(p);
    }

    let mut results = Vec::new();
    for &suite in &config.suites {
        let verified = suite.applies_to(case.provenance);
        let make = |case_name: String, checks: Vec<CheckReport>| {
            let passed = checks.iter().all(|c| c.passed);
            CaseResult {
                case: case_name,
                provenance: case.provenance,
                hypothesis_verified: verified,
                passed,
                checks,
            }
        };
        let mut rows = Vec::new();
        match suite {
            Suite::Sturm => {
                let seed = rng::seeded_stream(case.seed, CHAIN_STREAM + 2).next_u64();
                let report = sturm_scan(space, config.sturm_trials, seed, config.tol)?;
                rows.push(make(case.name.clone(), vec![report]));
            }
            Suite::LemmaHalf | Suite::MainBound | Suite::Remark | Suite::ResolventSeries => {
                for ((label, chain), p) in chains.iter().zip(&profiles) {
                    let checks = match suite {
                        Suite::LemmaHalf => {
                            worst_of(lemma_half(p, config.lemma_horizon, config.tol)).into_iter().collect()
                        }
                        Suite::MainBound => {
                            let bound = if case.provenance == Provenance::Hilbert {
                                1.0
                            } else {
                                NONNEG_BOUND
                            };
                            worst_of(main_bound(p, config.horizon, bound, config.tol))
                                .into_iter()
                                .collect()
                        }
                        Suite::Remark => config
                            .alpha_grid
                            .iter()
                            .filter_map(|&alpha| {
                                worst_of(remark(p, alpha, config.remark_horizon, config.tol)).map(|c| {
                                    c.with_detail("assumes nonnegative curvature, as for E(2l) <= 2E(l)")
                                })
                            })
                            .collect(),
                        _ => {
                            let mut checks = Vec::new();
                            for &alpha in &config.alpha_grid {
                                let horizon = series_horizon(alpha, config.tol)?;
                                let long = if horizon > p.len() {
                                    energy_profile(space, chain, horizon)?
                                } else {
                                    p.clone()
                                };
                                checks.push(resolvent_series(space, chain, &long, alpha, horizon, config.tol)?);
                                checks.push(resolvent_power(space, chain, &long, alpha, horizon, config.tol)?);
                            }
                            checks
                        }
                    };
                    rows.push(make(label.clone(), checks));
                }
            }
            Suite::EnfloBound => {
                let k = space.len().min(config.enflo_points);
                let head: Vec<usize> = (0..k).collect();
                let sub = space.subspace(&head)?;
                let mut checks = Vec::new();
                for &dim in &config.enflo_dims {
                    checks.push(verify_enflo_bound(&sub, 1.0, dim, config.tol)?);
                }
                rows.push(make(format!("{} points=0..{k}", case.name), checks));
            }
            Suite::PtolemyImplication => {
                let (implication, step) = verify_ptolemy_implication(space, config.tol);
                rows.push(make(case.name.clone(), vec![implication, step]));
            }
        }
        results.push((suite, rows));
    }
    Ok(CaseOutcome { results })
}

/// Aggregate result of one suite over a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub corpus: String,
    pub cases: Vec<CaseResult>,
    /// True iff every case inside the suite's hypothesis passed.
    pub passed: bool,
    /// Smallest margin over hypothesis-verified cases.
    pub worst_margin: Option<f64>,
    pub worst_case: Option<String>,
    /// Largest ratio over hypothesis-verified checks that carry one.
    pub worst_ratio: Option<f64>,
}

impl SuiteReport {
    pub fn from_cases(suite: impl Into<String>, corpus: impl Into<String>, cases: Vec<CaseResult>) -> Self {
        let mut worst_margin: Option<(f64, &str)> = None;
        let mut worst_ratio: Option<f64> = None;
        for case in cases.iter().filter(|c| c.hypothesis_verified) {
            for check in &case.checks {
                if worst_margin.is_none_or(|(m, _)| check.margin < m) {
                    worst_margin = Some((check.margin, &case.case));
                }
                if let Some(r) = check.ratio {
                    if worst_ratio.is_none_or(|w| r > w) {
                        worst_ratio = Some(r);
                    }
                }
            }
        }
        let passed = cases.iter().all(|c| c.passed || !c.hypothesis_verified);
        Self {
            suite: suite.into(),
            corpus: corpus.into(),
            passed,
            worst_margin: worst_margin.map(|(m, _)| m),
            worst_case: worst_margin.map(|(_, c)| c.to_string()),
            worst_ratio,
            cases,
        }
    }
}

/// Every suite of a corpus run.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusReport {
    pub corpus: String,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Collects per-case outcomes (given in expansion order) into suite reports.
pub fn assemble(config: &CorpusConfig, outcomes: Vec<CaseOutcome>) -> CorpusReport {
    let corpus = config.descriptor();
    let mut per_suite: Vec<Vec<CaseResult>> = vec![Vec::new(); config.suites.len()];
    for outcome in outcomes {
        for (slot, (_, rows)) in per_suite.iter_mut().zip(outcome.results) {
            slot.extend(rows);
        }
    }
    let suites: Vec<SuiteReport> = config
        .suites
        .iter()
        .zip(per_suite)
        .map(|(suite, cases)| SuiteReport::from_cases(suite.name(), corpus.clone(), cases))
        .collect();
    CorpusReport {
        passed: suites.iter().all(|s| s.passed),
        corpus,
        suites,
    }
}

/// Sequential corpus run.
pub fn run_corpus(config: &CorpusConfig) -> Result<CorpusReport, VerifyError> {
    let cases = expand_corpus(config)?;
    let outcomes = cases
        .iter()
        .map(|case| run_case(config, case))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(config, outcomes))
}
