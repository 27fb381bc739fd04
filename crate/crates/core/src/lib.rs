//! Numerical laboratory for metric type theory on finite instances.
//!
//! The crate works with finite metric spaces and stationary reversible Markov
//! chains on them. It computes Markov type and Enflo type ratios, Rademacher
//! and Markov cotype ratios of vector configurations, and checks curvature
//! inequalities: Sturm's barycenter inequality, the midpoint comparison
//! inequalities, the four-point inequality and the Ptolemy inequality. The
//! [`verify`] module replays the known bounds for nonnegatively curved spaces
//! over seeded corpora.
//!
//! Every stochastic routine takes an explicit seed (see [`rng`]) and is
//! bit-reproducible. The crate is `no_std` and only needs `alloc`; file
//! formats and the command line live in the `curvtype` companion crate.

#![no_std]
#![deny(rust_2018_idioms)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod chain;
pub mod curvature;
pub mod estimators;
pub mod metric;
pub mod report;
pub mod rng;
pub mod verify;

/// Dense real matrix used for transition matrices, powers and resolvents.
pub type Matrix = nalgebra::DMatrix<f64>;

pub use chain::{ChainError, EnergyProfile, ReversibleChain, WeightFamily};
pub use curvature::{CurvatureError, QuadrupleWitness, WeightedConfiguration};
pub use estimators::{EstimateError, HypercubeLabeling, LpNorm};
pub use metric::{FiniteMetricSpace, GeometricModel, MetricError, ModelKind};
pub use report::{CheckReport, RatioReport, Witness};
pub use verify::{CorpusConfig, CorpusReport, SuiteReport, VerifyError};
