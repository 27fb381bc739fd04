//! Report values shared by checks, estimators and suites.
//!
//! Margins are signed throughout: a check passes iff `margin >= -tolerance`.
//! Identity checks (two routes to the same number) report the negated
//! absolute discrepancy as their margin so the same rule applies.

use alloc::string::String;
use alloc::vec::Vec;

/// The configuration that attains a reported extremum.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Witness {
    #[default]
    None,
    /// Point or matrix indices, e.g. `(i, j)` or a quadruple `(w, x, y, z)`.
    Indices(Vec<usize>),
    /// Weighted points `x_i` with weights `a_i` and the base point `y`.
    Configuration {
        indices: Vec<usize>,
        weights: Vec<f64>,
        y: usize,
    },
    /// Hypercube labeling: `assign[mask]` is the point of the sign vector
    /// encoded by `mask` (bit `i` set means `eps_i = +1`).
    Labeling { dim: usize, assign: Vec<usize> },
    /// Symmetric weight matrix (row-major) and the step that attains the ratio.
    Chain {
        n: usize,
        weights: Vec<f64>,
        step: usize,
    },
    /// Step count `l` and optional `alpha`.
    Step { l: usize, alpha: Option<f64> },
}

/// Outcome of a single inequality or identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    pub margin: f64,
    pub tolerance: f64,
    /// Observed statistic, e.g. the maximal Sturm defect.
    pub value: Option<f64>,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    pub ratio: Option<f64>,
    pub step: Option<usize>,
    pub alpha: Option<f64>,
    pub witness: Witness,
    pub detail: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            passed: margin >= -tolerance,
            margin,
            tolerance,
            value: None,
            numerator: None,
            denominator: None,
            ratio: None,
            step: None,
            alpha: None,
            witness: Witness::None,
            detail: None,
            seed: None,
            trials: None,
        }
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn with_ratio(mut self, numerator: f64, denominator: f64) -> Self {
        self.numerator = Some(numerator);
        self.denominator = Some(denominator);
        self.ratio = Some(numerator / denominator);
        self
    }

    pub fn with_step(mut self, l: usize) -> Self {
        self.step = Some(l);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }
}

/// A lower bound `K^2 >= ratio` on some type or cotype constant.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub check: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub sqrt_ratio: f64,
    pub witness: Witness,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
}

impl RatioReport {
    /// Callers guarantee `denominator > 0`.
    pub fn new(check: impl Into<String>, numerator: f64, denominator: f64) -> Self {
        let ratio = numerator / denominator;
        Self {
            check: check.into(),
            numerator,
            denominator,
            ratio,
            sqrt_ratio: libm::sqrt(ratio),
            witness: Witness::None,
            seed: None,
            budget: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_search(mut self, seed: u64, budget: usize) -> Self {
        self.seed = Some(seed);
        self.budget = Some(budget);
        self
    }
}
