//! Corpus configuration files and the parallel corpus runner.
//!
//! Every field is optional; missing fields take the built-in defaults, so `{}`
//! is the default corpus. Unknown fields are rejected.

use anyhow::{anyhow, Context, Result};
use curvtype_core::verify::{
    assemble, expand_corpus, run_case, CorpusConfig, CorpusReport, Generator, Suite,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Sphere {
        sizes: Vec<usize>,
        #[serde(default = "unit")]
        radius: f64,
    },
    Gaussian { sizes: Vec<usize>, dims: Vec<usize> },
    SphereProduct { factors: Vec<(usize, usize)> },
    Tripod,
    Star { leaves: usize },
    Cycle { n: usize },
    Path { n: usize },
}

fn unit() -> f64 {
    1.0
}

impl From<&Generator> for GeneratorSpec {
    fn from(g: &Generator) -> Self {
        match g.clone() {
            Generator::Sphere { sizes, radius } => Self::Sphere { sizes, radius },
            Generator::Gaussian { sizes, dims } => Self::Gaussian { sizes, dims },
            Generator::SphereProduct { factors } => Self::SphereProduct { factors },
            Generator::Tripod => Self::Tripod,
            Generator::Star { leaves } => Self::Star { leaves },
            Generator::Cycle { n } => Self::Cycle { n },
            Generator::Path { n } => Self::Path { n },
        }
    }
}

impl From<GeneratorSpec> for Generator {
    fn from(g: GeneratorSpec) -> Self {
        match g {
            GeneratorSpec::Sphere { sizes, radius } => Self::Sphere { sizes, radius },
            GeneratorSpec::Gaussian { sizes, dims } => Self::Gaussian { sizes, dims },
            GeneratorSpec::SphereProduct { factors } => Self::SphereProduct { factors },
            GeneratorSpec::Tripod => Self::Tripod,
            GeneratorSpec::Star { leaves } => Self::Star { leaves },
            GeneratorSpec::Cycle { n } => Self::Cycle { n },
            GeneratorSpec::Path { n } => Self::Path { n },
        }
    }
}

/// On-disk form of [`CorpusConfig`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(rename = "lemma_L", skip_serializing_if = "Option::is_none")]
    pub lemma_horizon: Option<usize>,
    #[serde(rename = "remark_L", skip_serializing_if = "Option::is_none")]
    pub remark_horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains_per_space: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sturm_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enflo_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enflo_dims: Option<Vec<usize>>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed corpus config")
    }

    pub fn resolve(self) -> Result<CorpusConfig> {
        let d = CorpusConfig::default();
        let suites = match self.suites {
            None => d.suites,
            Some(names) => names
                .iter()
                .map(|s| Suite::from_name(s).ok_or_else(|| anyhow!("unknown suite {s:?}")))
                .collect::<Result<_>>()?,
        };
        let config = CorpusConfig {
            suites,
            generators: self
                .generators
                .map_or(d.generators, |g| g.into_iter().map(Generator::from).collect()),
            seeds: self.seeds.unwrap_or(d.seeds),
            horizon: self.horizon.unwrap_or(d.horizon),
            lemma_horizon: self.lemma_horizon.unwrap_or(d.lemma_horizon),
            remark_horizon: self.remark_horizon.unwrap_or(d.remark_horizon),
            alpha_grid: self.alpha_grid.unwrap_or(d.alpha_grid),
            tol: self.tol.unwrap_or(d.tol),
            chains_per_space: self.chains_per_space.unwrap_or(d.chains_per_space),
            sturm_trials: self.sturm_trials.unwrap_or(d.sturm_trials),
            enflo_points: self.enflo_points.unwrap_or(d.enflo_points),
            enflo_dims: self.enflo_dims.unwrap_or(d.enflo_dims),
        };
        config.validate()?;
        Ok(config)
    }

    /// The fully explicit file for `config`.
    pub fn explicit(config: &CorpusConfig) -> Self {
        Self {
            suites: Some(config.suites.iter().map(|s| s.name().to_string()).collect()),
            generators: Some(config.generators.iter().map(GeneratorSpec::from).collect()),
            seeds: Some(config.seeds.clone()),
            horizon: Some(config.horizon),
            lemma_horizon: Some(config.lemma_horizon),
            remark_horizon: Some(config.remark_horizon),
            alpha_grid: Some(config.alpha_grid.clone()),
            tol: Some(config.tol),
            chains_per_space: Some(config.chains_per_space),
            sturm_trials: Some(config.sturm_trials),
            enflo_points: Some(config.enflo_points),
            enflo_dims: Some(config.enflo_dims.clone()),
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Runs the corpus on a pool of `threads` workers (`None`: one per core).
/// Outcomes are collected in expansion order, so the report does not depend
/// on the thread count.
pub fn run_parallel(config: &CorpusConfig, threads: Option<usize>) -> Result<CorpusReport> {
    let cases = expand_corpus(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .context("cannot start worker threads")?;
    let outcomes = pool.install(|| {
        cases
            .par_iter()
            .map(|case| run_case(config, case))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(assemble(config, outcomes))
}
