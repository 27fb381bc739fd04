//! Suites that replay the Markov type, Enflo type and Ptolemy bounds on
//! concrete spaces and chains.
//!
//! Each suite operation returns one [`CheckReport`] per tested instance (a
//! step `l`, a pair `(alpha, l)`, a cube dimension). Bounds use margins
//! relative to their natural scale, so a tolerance of `1e-9` means `1e-9`
//! relative; identities use absolute margins scaled by the squared diameter.
//! The corpus runner in [`corpus`] aggregates these per case.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::chain::{energy_profile, weighted_energy, ChainError, EnergyProfile, ReversibleChain};
use crate::curvature::{four_point_margin, ptolemy_margin, CurvatureError, QuadrupleWitness};
use crate::estimators::{enflo_search, EnfloMode, EstimateError, DEFAULT_ENFLO_CAP};
use crate::metric::{FiniteMetricSpace, MetricError};
use crate::report::{CheckReport, Witness};

mod corpus;

pub use corpus::{
    assemble, expand_corpus, run_case, run_corpus, CaseOutcome, CaseResult, CorpusCase,
    CorpusConfig, CorpusReport, Generator, Provenance, Suite, SuiteReport,
};

/// `(1 + sqrt 2)^2`, the squared Markov type constant for nonnegative curvature.
pub const NONNEG_BOUND: f64 = 3.0 + 2.0 * core::f64::consts::SQRT_2;

/// Default relative tolerance of every suite.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("chain has zero one-step energy: E(1) = 0")]
    DegenerateChain,
    #[error("alpha = {0} must lie strictly between 0 and 1")]
    InvalidAlpha(f64),
    #[error("horizon must be at least 1")]
    InvalidHorizon,
    #[error("series tail alpha^(L+1) = {tail:e} is not below the tolerance {tol:e}")]
    HorizonTooShort { tail: f64, tol: f64 },
    #[error("invalid corpus configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

fn profile(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    horizon: usize,
) -> Result<EnergyProfile, VerifyError> {
    if horizon == 0 {
        return Err(VerifyError::InvalidHorizon);
    }
    let p = energy_profile(space, chain, horizon)?;
    if p.values()[0] <= 0.0 {
        return Err(VerifyError::DegenerateChain);
    }
    Ok(p)
}

/// `x^k` through `libm`, so the value does not depend on whether `std` is linked.
fn powi(x: f64, k: usize) -> f64 {
    libm::pow(x, k as f64)
}

fn check_alpha(alpha: f64) -> Result<(), VerifyError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(VerifyError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// `E(2l) <= 2 E(l)` for `l = 1..=max_l`.
///
/// The margin is `(2E(l) - E(2l)) / max(2E(l), l E(1))`; the floor `l E(1)`
/// keeps chains with `E(l) ~ 0` (periodic chains) from demanding exact zeros.
pub fn verify_lemma_half(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    max_l: usize,
    tol: f64,
) -> Result<Vec<CheckReport>, VerifyError> {
    let p = profile(space, chain, 2 * max_l)?;
    Ok(lemma_half(&p, max_l, tol))
}

pub(crate) fn lemma_half(p: &EnergyProfile, max_l: usize, tol: f64) -> Vec<CheckReport> {
    let e = p.values();
    (1..=max_l)
        .map(|l| {
            let (el, e2l) = (e[l - 1], e[2 * l - 1]);
            let scale = (2.0 * el).max(l as f64 * e[0]);
            CheckReport::new("lemma_half", (2.0 * el - e2l) / scale, tol)
                .with_ratio(e2l, 2.0 * el)
                .with_step(l)
        })
        .collect()
}

/// `E(l) <= K^2 l E(1)` for `l = 1..=max_l` with margin `K^2 - E(l)/(l E(1))`.
/// `K^2` is [`NONNEG_BOUND`], or 1 for subsets of a Hilbert space.
pub fn verify_main_bound(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    max_l: usize,
    bound: f64,
    tol: f64,
) -> Result<Vec<CheckReport>, VerifyError> {
    let p = profile(space, chain, max_l)?;
    Ok(main_bound(&p, max_l, bound, tol))
}

pub(crate) fn main_bound(p: &EnergyProfile, max_l: usize, bound: f64, tol: f64) -> Vec<CheckReport> {
    let e = p.values();
    (1..=max_l)
        .map(|l| {
            let den = l as f64 * e[0];
            let ratio = e[l - 1] / den;
            CheckReport::new("main_bound", bound - ratio, tol)
                .with_ratio(e[l - 1], den)
                .with_value(bound)
                .with_step(l)
        })
        .collect()
}

/// The two-sided energy inequality
/// `a^2l E(2l) + 2 a^(2l+1) E(2l+1) + a^(2l+2) E(2l+2) <= 2(1+a) a^l (a^l E(l) + a^(l+1) E(l+1))`
/// for one `alpha` and `l = 1..=max_l`. Margins are relative to the larger side.
pub fn verify_remark_inequality(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    alpha: f64,
    max_l: usize,
    tol: f64,
) -> Result<Vec<CheckReport>, VerifyError> {
    check_alpha(alpha)?;
    let p = profile(space, chain, 2 * max_l + 2)?;
    Ok(remark(&p, alpha, max_l, tol))
}

pub(crate) fn remark(p: &EnergyProfile, alpha: f64, max_l: usize, tol: f64) -> Vec<CheckReport> {
    let e = |l: usize| p.values()[l - 1];
    (1..=max_l)
        .map(|l| {
            let a = |k: usize| powi(alpha, k);
            let lhs = a(2 * l) * e(2 * l) + 2.0 * a(2 * l + 1) * e(2 * l + 1) + a(2 * l + 2) * e(2 * l + 2);
            let rhs = 2.0 * (1.0 + alpha) * a(l) * (a(l) * e(l) + a(l + 1) * e(l + 1));
            let scale = lhs.max(rhs);
            let margin = if scale > 0.0 { (rhs - lhs) / scale } else { 0.0 };
            CheckReport::new("remark_inequality", margin, tol)
                .with_ratio(lhs, rhs)
                .with_step(l)
                .with_alpha(alpha)
        })
        .collect()
}

/// Smallest `L` with `alpha^(L+1) < tol`.
pub fn series_horizon(alpha: f64, tol: f64) -> Result<usize, VerifyError> {
    check_alpha(alpha)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(VerifyError::Config(format!("tolerance {tol} must lie in (0, 1)")));
    }
    let mut l = 1;
    while powi(alpha, l + 1) >= tol {
        l += 1;
    }
    Ok(l)
}

/// Compares `(1-a) sum pi_i c_ij d_ij^2` (resolvent by LU) with the truncated
/// series `(1-a)^2 sum_{l<=L} a^l E(l)` (repeated products). Passes iff the
/// difference is at most `alpha^(L+1) diam^2 + tol diam^2`. Requires
/// `alpha^(L+1) < tol`.
pub fn verify_resolvent_series(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    alpha: f64,
    horizon: usize,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    check_alpha(alpha)?;
    let tail = powi(alpha, horizon + 1);
    if tail >= tol {
        return Err(VerifyError::HorizonTooShort { tail, tol });
    }
    let p = energy_profile(space, chain, horizon)?;
    resolvent_series(space, chain, &p, alpha, horizon, tol)
}

fn resolvent_side(space: &FiniteMetricSpace, chain: &ReversibleChain, alpha: f64) -> Result<f64, VerifyError> {
    let c = chain.resolvent(alpha)?;
    Ok((1.0 - alpha) * weighted_energy(space, chain.pi(), &c))
}

pub(crate) fn resolvent_series(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    p: &EnergyProfile,
    alpha: f64,
    horizon: usize,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let lhs = resolvent_side(space, chain, alpha)?;
    let mut series = 0.0;
    let mut weight = 1.0;
    for &e in &p.values()[..horizon] {
        weight *= alpha;
        series += weight * e;
    }
    let rhs = (1.0 - alpha) * (1.0 - alpha) * series;
    let diam2 = space.diameter() * space.diameter();
    let bound = powi(alpha, horizon + 1) * diam2;
    let gap = (lhs - rhs).abs();
    Ok(CheckReport::new("resolvent_series", bound - gap, tol * diam2)
        .with_value(gap)
        .with_ratio(lhs, rhs)
        .with_step(horizon)
        .with_alpha(alpha))
}

/// Resolvent-form ratio against the largest power-form ratio up to `L` plus
/// the series tail `(1-a) a^L diam^2 / E(1)`. Margin relative to `max(1, ratio)`.
pub fn verify_resolvent_power(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    alpha: f64,
    horizon: usize,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    check_alpha(alpha)?;
    let p = profile(space, chain, horizon)?;
    resolvent_power(space, chain, &p, alpha, horizon, tol)
}

pub(crate) fn resolvent_power(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    p: &EnergyProfile,
    alpha: f64,
    horizon: usize,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let e = p.values();
    if e[0] <= 0.0 {
        return Err(VerifyError::DegenerateChain);
    }
    let resolvent_ratio = resolvent_side(space, chain, alpha)? / (alpha * e[0]);
    let (mut best, mut best_l) = (f64::NEG_INFINITY, 1);
    for (k, &el) in e[..horizon].iter().enumerate() {
        let r = el / ((k + 1) as f64 * e[0]);
        if r > best {
            best = r;
            best_l = k + 1;
        }
    }
    let diam2 = space.diameter() * space.diameter();
    let tail = (1.0 - alpha) * powi(alpha, horizon) * diam2 / e[0];
    Ok(
        CheckReport::new("resolvent_vs_power", (best + tail - resolvent_ratio) / resolvent_ratio.max(1.0), tol)
            .with_ratio(resolvent_ratio, best + tail)
            .with_value(best)
            .with_step(best_l)
            .with_alpha(alpha),
    )
}

/// Exhaustive Enflo ratio of `space` on `{-1,1}^dim` against `S^2`; the margin
/// is `1 - ratio / S^2`.
pub fn verify_enflo_bound(
    space: &FiniteMetricSpace,
    s: f64,
    dim: usize,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let (_, report) = enflo_search(space, dim, EnfloMode::Exhaustive { cap: DEFAULT_ENFLO_CAP })?;
    let bound = s * s;
    Ok(CheckReport::new("enflo_bound", 1.0 - report.ratio / bound, tol)
        .with_ratio(report.numerator, report.denominator)
        .with_value(bound)
        .with_step(dim)
        .with_witness(report.witness))
}

/// Over all ordered quadruples: whenever the Ptolemy margin is at least
/// `-tol diam^2`, the four-point margin with `S = sqrt 3` must be at least
/// `-2 tol diam^2`; and `(d(w,y) - d(x,z))^2 <= 2d(w,x)^2 + 2d(y,z)^2` always.
/// Returns the implication report and the triangle-step report.
pub fn verify_ptolemy_implication(
    space: &FiniteMetricSpace,
    tol: f64,
) -> (CheckReport, CheckReport) {
    let n = space.len();
    let diam2 = space.diameter() * space.diameter();
    let three = libm::sqrt(3.0);
    let mut implication = (f64::INFINITY, QuadrupleWitness::new(0, 0, 0, 0));
    let mut step = (f64::INFINITY, QuadrupleWitness::new(0, 0, 0, 0));
    let mut premises = 0usize;
    for w in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let q = QuadrupleWitness::new(w, x, y, z);
                    let gap = space.d(w, y) - space.d(x, z);
                    let tri = 2.0 * space.d2(w, x) + 2.0 * space.d2(y, z) - gap * gap;
                    if tri < step.0 {
                        step = (tri, q);
                    }
                    if ptolemy_margin(space, &q) >= -tol * diam2 {
                        premises += 1;
                        let m = four_point_margin(space, &q, three);
                        if m < implication.0 {
                            implication = (m, q);
                        }
                    }
                }
            }
        }
    }
    if premises == 0 {
        implication.0 = 0.0;
    }
    let quad = |q: QuadrupleWitness| Witness::Indices(alloc::vec![q.w, q.x, q.y, q.z]);
    let implication_report = CheckReport::new("ptolemy_implication", implication.0, 2.0 * tol * diam2)
        .with_value(implication.0)
        .with_witness(quad(implication.1))
        .with_detail(format!("{premises} of {} quadruples satisfy Ptolemy", n.pow(4)));
    let step_report = CheckReport::new("triangle_step", step.0, tol * diam2)
        .with_value(step.0)
        .with_witness(quad(step.1));
    (implication_report, step_report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{euclidean_space, tripod, validate_metric};
    use crate::Matrix;
    use alloc::vec;

    fn unit_pair() -> FiniteMetricSpace {
        validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], 1e-9).unwrap()
    }

    fn flip() -> ReversibleChain {
        ReversibleChain::from_weights(&Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn lemma_on_flip_chain() {
        let r = verify_lemma_half(&unit_pair(), &flip(), 4, DEFAULT_TOL).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|c| c.passed));
        assert_eq!(r[0].numerator, Some(0.0));
        assert_eq!(r[0].denominator, Some(2.0));
    }

    #[test]
    fn main_bound_on_flip_chain() {
        let r = verify_main_bound(&unit_pair(), &flip(), 3, NONNEG_BOUND, DEFAULT_TOL).unwrap();
        assert!((r[2].ratio.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.iter().all(|c| c.passed));
    }

    #[test]
    fn remark_on_flip_chain() {
        let r = verify_remark_inequality(&unit_pair(), &flip(), 0.5, 1, DEFAULT_TOL).unwrap();
        assert_eq!(r[0].numerator, Some(0.25));
        assert_eq!(r[0].denominator, Some(0.75));
        assert!(r[0].passed);
    }

    #[test]
    fn resolvent_series_on_flip_chain() {
        let r = verify_resolvent_series(&unit_pair(), &flip(), 0.5, 40, DEFAULT_TOL).unwrap();
        assert!(r.passed);
        assert!(r.value.unwrap() < 1e-10);
        assert!((r.numerator.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!(matches!(
            verify_resolvent_series(&unit_pair(), &flip(), 0.5, 4, DEFAULT_TOL),
            Err(VerifyError::HorizonTooShort { .. })
        ));
        let tiny = verify_resolvent_series(&unit_pair(), &flip(), 1e-8, 2, DEFAULT_TOL).unwrap();
        assert!(tiny.passed && tiny.numerator.unwrap() < 1e-7);
    }

    #[test]
    fn series_horizon_is_minimal() {
        let l = series_horizon(0.5, 1e-9).unwrap();
        assert!(0.5f64.powi(l as i32 + 1) < 1e-9);
        assert!(0.5f64.powi(l as i32) >= 1e-9);
        assert!(series_horizon(1.0, 1e-9).is_err());
    }

    #[test]
    fn resolvent_below_power() {
        let r = verify_resolvent_power(&unit_pair(), &flip(), 0.5, 40, DEFAULT_TOL).unwrap();
        assert!(r.passed);
        assert!((r.numerator.unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn enflo_bound_boundary() {
        let r = verify_enflo_bound(&unit_pair(), 1.0, 1, DEFAULT_TOL).unwrap();
        assert!(r.passed);
        assert_eq!(r.ratio, Some(1.0));
    }

    #[test]
    fn ptolemy_implication_examples() {
        let square = euclidean_space(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let (imp, step) = verify_ptolemy_implication(&square, DEFAULT_TOL);
        assert!(imp.passed && step.passed);
        let (imp, step) = verify_ptolemy_implication(&tripod(), DEFAULT_TOL);
        assert!(imp.passed && step.passed);
    }

    #[test]
    fn degenerate_chain_is_rejected() {
        let point = validate_metric(&[vec![0.0]], 1e-9).unwrap();
        let one = ReversibleChain::from_weights(&Matrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(
            verify_lemma_half(&point, &one, 2, DEFAULT_TOL),
            Err(VerifyError::DegenerateChain)
        );
    }
}
