//! Type and cotype ratio computations.
//!
//! Each ratio is a lower bound for the square of the corresponding constant:
//! any `K` that works for the space must satisfy `K^2 >= ratio`. Searches
//! maximize these ratios, so their results are lower bounds as well and never
//! certify an upper bound.

use thiserror::Error;

use crate::chain::ChainError;
use crate::metric::MetricError;

mod banach;
mod enflo;
mod markov;

pub use banach::{banach_moduli_check, markov_cotype_ratio, rademacher_ratios, LpNorm, Modulus};
pub use enflo::{enflo_ratio, enflo_search, EnfloMode, HypercubeLabeling, DEFAULT_ENFLO_CAP};
pub use markov::{
    chain_search, markov_ratio_power, markov_ratio_resolvent, power_objective, ChainSearch,
    DEFAULT_HORIZON,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("chain has zero one-step energy: E(1) = 0")]
    DegenerateChain,
    #[error("every adjacent pair of the labeling maps to one point")]
    DegenerateLabeling,
    #[error("exhaustive search needs {needed} labelings, cap is {cap}")]
    CapExceeded { needed: f64, cap: f64 },
    #[error("all vectors are zero")]
    AllZeroVectors,
    #[error("{0} vectors given, at most 20 can be enumerated")]
    TooManyVectors(usize),
    #[error("exponent p = {0} must be at least 1")]
    InvalidP(f64),
    #[error("stationary distribution is not uniform at state {0}")]
    NonuniformPi(usize),
    #[error("the vectors give a zero denominator")]
    DegenerateVectors,
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("{vectors} vectors for a chain on {states} states")]
    SizeMismatch { vectors: usize, states: usize },
    #[error("labeling has {found} entries, dimension {dim} needs {expected}")]
    LabelingSize {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("hypercube dimension must be between 1 and 20")]
    InvalidDimension,
    #[error("invalid search parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
