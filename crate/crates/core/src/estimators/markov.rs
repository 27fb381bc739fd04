//! Markov type ratios in resolvent and power form, and a local search that
//! maximizes the power-form ratio over chains.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::EstimateError;
use crate::chain::{energy_profile, weighted_energy, ReversibleChain};
use crate::metric::FiniteMetricSpace;
use crate::report::{RatioReport, Witness};
use crate::{rng, Matrix};

/// Default horizon `L` of the power-form objective.
pub const DEFAULT_HORIZON: usize = 16;

/// Weights below this fraction of the largest weight are clamped up to it.
const WEIGHT_FLOOR: f64 = 1e-15;

/// Resolvent form: `(1 - alpha) sum pi_i c_ij d_ij^2` over `alpha sum pi_i a_ij d_ij^2`.
pub fn markov_ratio_resolvent(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    alpha: f64,
) -> Result<RatioReport, EstimateError> {
    let c = chain.resolvent(alpha)?;
    let profile = energy_profile(space, chain, 1)?;
    let one_step = profile.values()[0];
    if one_step <= 0.0 {
        return Err(EstimateError::DegenerateChain);
    }
    let numerator = (1.0 - alpha) * weighted_energy(space, chain.pi(), &c);
    let denominator = alpha * one_step;
    Ok(RatioReport::new("markov_resolvent", numerator, denominator)
        .with_witness(Witness::Step { l: 1, alpha: Some(alpha) }))
}

/// Power form: `E(l) / (l E(1))`.
pub fn markov_ratio_power(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    l: usize,
) -> Result<RatioReport, EstimateError> {
    let profile = energy_profile(space, chain, l)?;
    let one_step = profile.values()[0];
    if one_step <= 0.0 {
        return Err(EstimateError::DegenerateChain);
    }
    let numerator = profile.values()[l - 1];
    Ok(RatioReport::new("markov_power", numerator, l as f64 * one_step)
        .with_witness(Witness::Step { l, alpha: None }))
}

/// `max_{1 <= l <= horizon} E(l) / (l E(1))` and the first maximizing `l`.
pub fn power_objective(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    horizon: usize,
) -> Result<(f64, usize), EstimateError> {
    let profile = energy_profile(space, chain, horizon)?;
    let one_step = profile.values()[0];
    if one_step <= 0.0 {
        return Err(EstimateError::DegenerateChain);
    }
    let mut best = (f64::NEG_INFINITY, 1);
    for (k, &e) in profile.values().iter().enumerate() {
        let l = k + 1;
        let ratio = e / (l as f64 * one_step);
        if ratio > best.0 {
            best = (ratio, l);
        }
    }
    Ok(best)
}

/// Parameters of [`chain_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainSearch {
    pub horizon: usize,
    pub seed: u64,
    /// Number of proposals.
    pub budget: usize,
}

impl Default for ChainSearch {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            seed: 0,
            budget: 20_000,
        }
    }
}

struct WeightState {
    n: usize,
    /// Upper triangle `(i <= j)`, row-major.
    upper: Vec<f64>,
}

impl WeightState {
    fn random(n: usize, rng: &mut rng::SeededRng) -> Self {
        let upper = (0..n * (n + 1) / 2).map(|_| Exp1.sample(rng)).collect();
        Self { n, upper }
    }

    fn matrix(&self) -> Matrix {
        let mut w = Matrix::zeros(self.n, self.n);
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                w[(i, j)] = self.upper[k];
                w[(j, i)] = self.upper[k];
                k += 1;
            }
        }
        w
    }

    /// Rescales so the largest weight is 1 and clamps tiny weights, keeping
    /// every row positive. The chain only depends on weight ratios.
    fn normalize(&mut self) {
        let max = self.upper.iter().copied().fold(0.0, f64::max);
        for w in &mut self.upper {
            *w = (*w / max).max(WEIGHT_FLOOR);
        }
    }
}

/// Search score of a weight state and its objective value.
///
/// The `l = 1` ratio is identically 1, so the objective is flat wherever every
/// later ratio is below 1 and strict-improvement moves would stall there. The
/// search ranks states by the best ratio over `2 <= l <= horizon` instead; the
/// objective is `max(1, score)`, so it never decreases along accepted moves.
#[derive(Clone, Copy)]
struct Scored {
    score: f64,
    objective: (f64, usize),
}

fn evaluate(
    space: &FiniteMetricSpace,
    state: &WeightState,
    horizon: usize,
) -> Result<Scored, EstimateError> {
    let chain = ReversibleChain::from_weights(&state.matrix())?;
    let profile = energy_profile(space, &chain, horizon)?;
    let one_step = profile.values()[0];
    if one_step <= 0.0 {
        return Err(EstimateError::DegenerateChain);
    }
    let mut objective = (1.0, 1);
    let mut score = if horizon == 1 { 1.0 } else { f64::NEG_INFINITY };
    for (k, &e) in profile.values().iter().enumerate().skip(1) {
        let l = k + 1;
        let ratio = e / (l as f64 * one_step);
        if ratio > score {
            score = ratio;
        }
        if ratio > objective.0 {
            objective = (ratio, l);
        }
    }
    Ok(Scored { score, objective })
}

/// Multiplicative local search over symmetric positive weights maximizing
/// [`power_objective`]. Each proposal multiplies one weight (and its mirror)
/// by `exp(u)` with `u` uniform in `[-1, 1]` and is accepted on strict
/// improvement of the search score (see [`Scored`]); after `n^2` consecutive
/// rejections the search restarts from fresh `Exp(1)` weights, keeping the
/// best chain seen. Deterministic in the seed.
pub fn chain_search(
    space: &FiniteMetricSpace,
    params: ChainSearch,
) -> Result<(ReversibleChain, RatioReport), EstimateError> {
    let n = space.len();
    if n < 2 {
        return Err(EstimateError::InvalidParameter("chain search needs at least 2 points"));
    }
    if params.budget == 0 {
        return Err(EstimateError::InvalidParameter("budget must be at least 1"));
    }
    if params.horizon == 0 {
        return Err(EstimateError::InvalidParameter("horizon must be at least 1"));
    }
    if space.diameter() <= 0.0 {
        return Err(EstimateError::DegenerateChain);
    }
    let mut rng = rng::seeded(params.seed);
    let mut current = WeightState::random(n, &mut rng);
    current.normalize();
    let mut current_value = evaluate(space, &current, params.horizon)?;
    let mut best_upper = current.upper.clone();
    let mut best_value = current_value;
    let mut rejections = 0;
    let stagnation = n * n;

    for _ in 0..params.budget {
        let k = rng.random_range(0..current.upper.len());
        let u: f64 = rng.random_range(-1.0..=1.0);
        let old = current.upper[k];
        current.upper[k] = old * libm::exp(u);
        let candidate = evaluate(space, &current, params.horizon)?;
        if candidate.score > current_value.score {
            current_value = candidate;
            current.normalize();
            rejections = 0;
            if candidate.score > best_value.score {
                best_value = candidate;
                best_upper.clone_from(&current.upper);
            }
        } else {
            current.upper[k] = old;
            rejections += 1;
            if rejections >= stagnation {
                current = WeightState::random(n, &mut rng);
                current.normalize();
                current_value = evaluate(space, &current, params.horizon)?;
                rejections = 0;
                if current_value.score > best_value.score {
                    best_value = current_value;
                    best_upper.clone_from(&current.upper);
                }
            }
        }
    }

    let best = WeightState { n, upper: best_upper };
    let weights = best.matrix();
    let chain = ReversibleChain::from_weights(&weights)?;
    let (_, step) = best_value.objective;
    let mut report = markov_ratio_power(space, &chain, step)?;
    report.check = "chain_search".into();
    report.witness = Witness::Chain {
        n,
        weights: (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| weights[(i, j)])
            .collect(),
        step,
    };
    Ok((chain, report.with_search(params.seed, params.budget)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{euclidean_space, tripod, validate_metric};
    use alloc::vec;

    fn unit_pair() -> FiniteMetricSpace {
        validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], 1e-9).unwrap()
    }

    fn chain(w: [f64; 4]) -> ReversibleChain {
        ReversibleChain::from_weights(&Matrix::from_row_slice(2, 2, &w)).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14
    }

    #[test]
    fn resolvent_ratio_examples() {
        let flip = chain([0.0, 1.0, 1.0, 0.0]);
        let r = markov_ratio_resolvent(&unit_pair(), &flip, 0.5).unwrap();
        assert!(close(r.numerator, 1.0 / 6.0));
        assert!(close(r.denominator, 0.5));
        assert!(close(r.ratio, 1.0 / 3.0));
        assert!(close(r.sqrt_ratio, (1.0f64 / 3.0).sqrt()));

        let lazy = chain([1.0, 1.0, 1.0, 1.0]);
        let r = markov_ratio_resolvent(&unit_pair(), &lazy, 0.5).unwrap();
        assert!(close(r.numerator, 0.125));
        assert!(close(r.denominator, 0.25));
        assert!(close(r.ratio, 0.5));

        let point = validate_metric(&[vec![0.0]], 1e-9).unwrap();
        let one = ReversibleChain::from_weights(&Matrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(
            markov_ratio_resolvent(&point, &one, 0.5),
            Err(EstimateError::DegenerateChain)
        );
    }

    #[test]
    fn power_ratio_examples() {
        let flip = chain([0.0, 1.0, 1.0, 0.0]);
        let lazy = chain([1.0, 1.0, 1.0, 1.0]);
        assert!(close(markov_ratio_power(&unit_pair(), &flip, 3).unwrap().ratio, 1.0 / 3.0));
        assert_eq!(markov_ratio_power(&unit_pair(), &flip, 2).unwrap().ratio, 0.0);
        assert!(close(markov_ratio_power(&unit_pair(), &lazy, 4).unwrap().ratio, 0.25));
    }

    #[test]
    fn search_respects_hilbert_bound() {
        let space = euclidean_space(vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let params = ChainSearch {
            horizon: 8,
            seed: 3,
            budget: 500,
        };
        let (chain, report) = chain_search(&space, params).unwrap();
        assert!(report.ratio <= 1.0 + 1e-9);
        assert!(chain.validate(1e-12).passed);
        assert_eq!(report.seed, Some(3));
        let again = chain_search(&space, params).unwrap();
        assert_eq!(again.1, report);
    }

    #[test]
    fn search_preconditions() {
        let bad = ChainSearch {
            horizon: 8,
            seed: 0,
            budget: 0,
        };
        assert!(matches!(
            chain_search(&tripod(), bad),
            Err(EstimateError::InvalidParameter(_))
        ));
        let point = validate_metric(&[vec![0.0]], 1e-9).unwrap();
        assert!(chain_search(&point, ChainSearch::default()).is_err());
    }

    #[test]
    fn search_leaves_the_flat_region_on_the_tripod() {
        // Every l >= 2 ratio of a dense random chain is below 1, where the
        // objective is constant. Leaves with self-loop 1 and edge weight eps to
        // the center give (1 + 4(l - 1)/3) / l as eps -> 0, i.e. 31/24 at l = 8.
        let params = ChainSearch { horizon: 8, seed: 0, budget: 5_000 };
        let (chain, report) = chain_search(&tripod(), params).unwrap();
        assert!(report.ratio > 1.25, "{}", report.ratio);
        let (again, _) = power_objective(&tripod(), &chain, 8).unwrap();
        assert!((again - report.ratio).abs() <= 1e-12 * again);
    }
}
