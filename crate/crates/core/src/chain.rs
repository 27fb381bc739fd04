//! Stationary reversible Markov chains on finitely many states: validation,
//! matrix powers, resolvents and the displacement energy
//! `E(l) = sum_ij pi_i a^(l)_ij d_ij^2`.
//!
//! Chains are usually built from symmetric nonnegative weight matrices `W`
//! with `pi_i = sum_j w_ij / sum_kl w_kl` and `a_ij = w_ij / sum_j w_ij`.
//! Every reversible chain arises this way (take `w_ij = pi_i a_ij`), so
//! searching over chains reduces to searching over positive symmetric matrices.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::metric::FiniteMetricSpace;
use crate::report::{CheckReport, Witness};
use crate::{rng, Matrix};

/// Absolute tolerance for the chain constraints; entries live in `[0, 1]`.
pub const CHAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("pi has {pi} entries for {states} states")]
    PiLength { pi: usize, states: usize },
    #[error("a chain needs at least one state")]
    Empty,
    #[error("weight ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("weight ({i}, {j}) is negative")]
    NegativeWeight { i: usize, j: usize },
    #[error("weights are not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("row {0} of the weight matrix sums to zero")]
    ZeroRow(usize),
    #[error("chain constraint '{constraint}' violated by {violation:e} at {witness:?}")]
    InvalidChain {
        constraint: &'static str,
        witness: (usize, usize),
        violation: f64,
    },
    #[error("space has {space} points but chain has {chain} states")]
    SizeMismatch { space: usize, chain: usize },
    #[error("alpha = {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error("step count must be at least 1")]
    InvalidStep,
    #[error("I - alpha A is singular")]
    SingularSystem,
}

/// A stationary reversible chain: distribution `pi` and transition matrix `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversibleChain {
    pi: Vec<f64>,
    transition: Matrix,
}

impl ReversibleChain {
    /// Wraps `(pi, A)` after checking the five chain constraints at `tol_abs`.
    pub fn new(pi: Vec<f64>, transition: Matrix, tol_abs: f64) -> Result<Self, ChainError> {
        if !transition.is_square() {
            return Err(ChainError::NotSquare {
                rows: transition.nrows(),
                cols: transition.ncols(),
            });
        }
        if transition.nrows() == 0 {
            return Err(ChainError::Empty);
        }
        if pi.len() != transition.nrows() {
            return Err(ChainError::PiLength {
                pi: pi.len(),
                states: transition.nrows(),
            });
        }
        let (report, violation) = check_constraints(&pi, &transition, tol_abs);
        match violation {
            Some(v) if !report.passed => Err(ChainError::InvalidChain {
                constraint: v.constraint,
                witness: v.witness,
                violation: v.amount,
            }),
            _ => Ok(Self { pi, transition }),
        }
    }

    /// Chain of the symmetric nonnegative weight matrix `w`.
    pub fn from_weights(w: &Matrix) -> Result<Self, ChainError> {
        if !w.is_square() {
            return Err(ChainError::NotSquare {
                rows: w.nrows(),
                cols: w.ncols(),
            });
        }
        let n = w.nrows();
        if n == 0 {
            return Err(ChainError::Empty);
        }
        for i in 0..n {
            for j in 0..n {
                let v = w[(i, j)];
                if !v.is_finite() {
                    return Err(ChainError::NonFinite { i, j });
                }
                if v < 0.0 {
                    return Err(ChainError::NegativeWeight { i, j });
                }
                if v != w[(j, i)] {
                    return Err(ChainError::Asymmetric { i, j });
                }
            }
        }
        let row_sums: Vec<f64> = (0..n).map(|i| w.row(i).iter().sum()).collect();
        if let Some(i) = row_sums.iter().position(|&r| r <= 0.0) {
            return Err(ChainError::ZeroRow(i));
        }
        let total: f64 = row_sums.iter().sum();
        let pi = row_sums.iter().map(|r| r / total).collect();
        let transition = Matrix::from_fn(n, n, |i, j| w[(i, j)] / row_sums[i]);
        Ok(Self { pi, transition })
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    /// Weights `w_ij = pi_i a_ij` reproducing this chain.
    pub fn weights(&self) -> Matrix {
        let n = self.len();
        Matrix::from_fn(n, n, |i, j| self.pi[i] * self.transition[(i, j)])
    }

    pub fn validate(&self, tol_abs: f64) -> CheckReport {
        validate_chain(&self.pi, &self.transition, tol_abs)
    }

    /// Largest `|sum_i pi_i a_ij - pi_j|`.
    pub fn stationarity_defect(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mass: f64 = (0..n).map(|i| self.pi[i] * self.transition[(i, j)]).sum();
                (mass - self.pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Same chain with states relabeled: new state `k` is old state `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        Self {
            pi: perm.iter().map(|&i| self.pi[i]).collect(),
            transition: Matrix::from_fn(n, n, |a, b| self.transition[(perm[a], perm[b])]),
        }
    }

    pub fn power(&self, l: usize) -> Matrix {
        chain_power(self, l)
    }

    pub fn resolvent(&self, alpha: f64) -> Result<Matrix, ChainError> {
        resolvent(self, alpha)
    }
}

struct Violation {
    constraint: &'static str,
    witness: (usize, usize),
    amount: f64,
}

fn check_constraints(pi: &[f64], a: &Matrix, tol_abs: f64) -> (CheckReport, Option<Violation>) {
    let n = a.nrows();
    if pi.len() != n || !a.is_square() {
        let report = CheckReport::new("validate_chain", f64::NEG_INFINITY, tol_abs)
            .with_detail(format!(
                "shape: pi has {} entries, A is {}x{}",
                pi.len(),
                a.nrows(),
                a.ncols()
            ));
        return (report, None);
    }
    let mut worst: Option<Violation> = None;
    let mut note = |constraint: &'static str, witness: (usize, usize), amount: f64| {
        let amount = if amount.is_nan() { f64::INFINITY } else { amount };
        if amount > worst.as_ref().map_or(0.0, |w| w.amount) {
            worst = Some(Violation {
                constraint,
                witness,
                amount,
            });
        }
    };
    let outside_unit = |x: f64| (-x).max(x - 1.0).max(0.0);
    for (i, &p) in pi.iter().enumerate() {
        note("0 <= pi_i <= 1", (i, i), outside_unit(p));
    }
    for i in 0..n {
        for j in 0..n {
            note("0 <= a_ij <= 1", (i, j), outside_unit(a[(i, j)]));
        }
    }
    note("sum_i pi_i = 1", (0, 0), (pi.iter().sum::<f64>() - 1.0).abs());
    for i in 0..n {
        note("sum_j a_ij = 1", (i, i), (a.row(i).iter().sum::<f64>() - 1.0).abs());
    }
    for i in 0..n {
        for j in (i + 1)..n {
            note(
                "pi_i a_ij = pi_j a_ji",
                (i, j),
                (pi[i] * a[(i, j)] - pi[j] * a[(j, i)]).abs(),
            );
        }
    }
    let margin = -worst.as_ref().map_or(0.0, |w| w.amount);
    let mut report = CheckReport::new("validate_chain", margin, tol_abs);
    if let Some(w) = &worst {
        let (i, j) = w.witness;
        report = report
            .with_witness(Witness::Indices(alloc::vec![i, j]))
            .with_detail(w.constraint);
    }
    (report, worst)
}

/// Checks `0 <= pi_i <= 1`, `0 <= a_ij <= 1`, `sum pi = 1`, unit row sums and
/// detailed balance. The margin is minus the largest violation; the witness
/// and detail name where and which constraint it occurs (ties go to the
/// constraint listed first).
pub fn validate_chain(pi: &[f64], a: &Matrix, tol_abs: f64) -> CheckReport {
    check_constraints(pi, a, tol_abs).0
}

pub fn chain_from_weights(w: &Matrix) -> Result<ReversibleChain, ChainError> {
    ReversibleChain::from_weights(w)
}

/// `A^l` by repeated squaring; `A^0 = I`.
pub fn chain_power(chain: &ReversibleChain, l: usize) -> Matrix {
    let n = chain.len();
    let mut result = Matrix::identity(n, n);
    let mut base = chain.transition.clone();
    let mut e = l;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `C = (1 - alpha)(I - alpha A)^-1`, by LU solve against the identity.
pub fn resolvent(chain: &ReversibleChain, alpha: f64) -> Result<Matrix, ChainError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ChainError::InvalidAlpha(alpha));
    }
    let n = chain.len();
    let system = Matrix::identity(n, n) - chain.transition.scale(alpha);
    let inverse = system
        .lu()
        .solve(&Matrix::identity(n, n))
        .ok_or(ChainError::SingularSystem)?;
    Ok(inverse.scale(1.0 - alpha))
}

/// `sum_ij pi_i m_ij d_ij^2` for an arbitrary matrix `m` (a power, a resolvent).
pub fn weighted_energy(space: &FiniteMetricSpace, pi: &[f64], m: &Matrix) -> f64 {
    let n = pi.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * space.d2(i, j);
        }
        total += pi[i] * row;
    }
    total
}

fn check_sizes(space: &FiniteMetricSpace, chain: &ReversibleChain) -> Result<(), ChainError> {
    if space.len() != chain.len() {
        return Err(ChainError::SizeMismatch {
            space: space.len(),
            chain: chain.len(),
        });
    }
    Ok(())
}

/// `E(l)` through [`chain_power`].
pub fn energy(space: &FiniteMetricSpace, chain: &ReversibleChain, l: usize) -> Result<f64, ChainError> {
    check_sizes(space, chain)?;
    if l == 0 {
        return Err(ChainError::InvalidStep);
    }
    Ok(weighted_energy(space, &chain.pi, &chain_power(chain, l)))
}

/// Energies `E(1), ..., E(L)` of one space/chain pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyProfile {
    values: Vec<f64>,
}

impl EnergyProfile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `E(l)` for `1 <= l <= len()`.
    pub fn get(&self, l: usize) -> Option<f64> {
        l.checked_sub(1).and_then(|k| self.values.get(k).copied())
    }

    /// Number of steps `L` covered.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `E(1..=max_step)` with one matrix product per step.
pub fn energy_profile(
    space: &FiniteMetricSpace,
    chain: &ReversibleChain,
    max_step: usize,
) -> Result<EnergyProfile, ChainError> {
    check_sizes(space, chain)?;
    if max_step == 0 {
        return Err(ChainError::InvalidStep);
    }
    let mut values = Vec::with_capacity(max_step);
    let mut power = chain.transition.clone();
    for l in 1..=max_step {
        values.push(weighted_energy(space, &chain.pi, &power));
        if l < max_step {
            power = &power * &chain.transition;
        }
    }
    Ok(EnergyProfile { values })
}

/// Families of random symmetric weight matrices used by corpora and searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightFamily {
    /// Every entry (diagonal included) is an independent `Exp(1)` draw.
    Dense,
    /// Each off-diagonal pair is kept with probability 0.3, plus the path
    /// `0 - 1 - ... - n-1` and a positive diagonal so no row vanishes.
    Sparse,
    /// Gaussian kernel `exp(-d_ij^2 / h^2)` with a random bandwidth `h`
    /// between 0.25 and 1 times the diameter, jittered by `Exp(1)` factors.
    Kernel,
}

/// Random symmetric weights on the points of `space`.
pub fn random_weights(space: &FiniteMetricSpace, family: WeightFamily, seed: u64) -> Matrix {
    let n = space.len();
    let mut rng = rng::seeded(seed);
    let mut w = Matrix::zeros(n, n);
    let bandwidth = {
        let factor: f64 = rng.random_range(0.25..1.0);
        let diam = space.diameter();
        if diam > 0.0 {
            factor * diam
        } else {
            1.0
        }
    };
    for i in 0..n {
        for j in i..n {
            let draw: f64 = Exp1.sample(&mut rng);
            let value = match family {
                WeightFamily::Dense => draw,
                WeightFamily::Sparse => {
                    let keep = rng.random_bool(0.3) || j == i + 1 || i == j;
                    if keep {
                        draw
                    } else {
                        0.0
                    }
                }
                WeightFamily::Kernel => {
                    let r = space.d(i, j) / bandwidth;
                    libm::exp(-r * r) * draw
                }
            };
            w[(i, j)] = value;
            w[(j, i)] = value;
        }
    }
    for i in 0..n {
        if w.row(i).iter().all(|&x| x == 0.0) {
            w[(i, i)] = 1.0;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gaussian_cloud, tripod, validate_metric};
    use alloc::vec;

    fn flip() -> ReversibleChain {
        ReversibleChain::from_weights(&Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    fn lazy() -> ReversibleChain {
        ReversibleChain::from_weights(&Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap()
    }

    fn unit_pair() -> FiniteMetricSpace {
        validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], 1e-9).unwrap()
    }

    fn assert_matrix_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= tol, "{a} vs {b}");
        }
    }

    #[test]
    fn weights_to_chain() {
        let f = flip();
        assert_eq!(f.pi(), &[0.5, 0.5]);
        assert_eq!(f.transition(), &Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let l = lazy();
        assert_eq!(l.pi(), &[0.5, 0.5]);
        assert_eq!(l.transition(), &Matrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]));

        let star = Matrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 1.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0,
            ],
        );
        let walk = ReversibleChain::from_weights(&star).unwrap();
        assert!((walk.pi()[0] - 0.5).abs() < 1e-15);
        for leaf in 1..4 {
            assert!((walk.pi()[leaf] - 1.0 / 6.0).abs() < 1e-15);
            assert_eq!(walk.transition()[(leaf, 0)], 1.0);
            assert!((walk.transition()[(0, leaf)] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weight_errors() {
        let zero_row = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(ReversibleChain::from_weights(&zero_row), Err(ChainError::ZeroRow(0)));
        let asym = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert_eq!(
            ReversibleChain::from_weights(&asym),
            Err(ChainError::Asymmetric { i: 0, j: 1 })
        );
        let neg = Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(matches!(
            ReversibleChain::from_weights(&neg),
            Err(ChainError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn validation_examples() {
        let r = flip().validate(CHAIN_TOL);
        assert!(r.passed);
        assert_eq!(r.margin, 0.0);

        let a = Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.5, 0.5]);
        let r = validate_chain(&[0.5, 0.5], &a, CHAIN_TOL);
        assert!(!r.passed);
        assert_eq!(r.detail.as_deref(), Some("pi_i a_ij = pi_j a_ji"));
        assert_eq!(r.witness, Witness::Indices(vec![0, 1]));
        assert!((r.margin + 0.2).abs() < 1e-15);

        let f = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = validate_chain(&[0.6, 0.5], &f, CHAIN_TOL);
        assert!(!r.passed);
        assert_eq!(r.detail.as_deref(), Some("sum_i pi_i = 1"));

        let r = validate_chain(&[1.0], &f, CHAIN_TOL);
        assert!(!r.passed);
        assert!(ReversibleChain::new(vec![0.5, 0.5], a, CHAIN_TOL).is_err());
    }

    #[test]
    fn powers() {
        let f = flip();
        assert_eq!(chain_power(&f, 2), Matrix::identity(2, 2));
        assert_eq!(chain_power(&f, 0), Matrix::identity(2, 2));
        assert_eq!(chain_power(&f, 3), f.transition().clone());
        let l = lazy();
        assert_eq!(l.transition() * l.transition(), l.transition().clone());
        for k in 1..6 {
            assert_eq!(chain_power(&l, k), l.transition().clone());
        }
    }

    #[test]
    fn resolvent_examples() {
        let c = resolvent(&flip(), 0.5).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_matrix_close(&c, &expected, 1e-15);

        let c = resolvent(&lazy(), 0.5).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]);
        assert_matrix_close(&c, &expected, 1e-15);

        let c = resolvent(&flip(), 1e-8).unwrap();
        assert_matrix_close(&c, &Matrix::identity(2, 2), 1e-7);

        assert_eq!(resolvent(&flip(), 1.0), Err(ChainError::InvalidAlpha(1.0)));
        assert_eq!(resolvent(&flip(), 0.0), Err(ChainError::InvalidAlpha(0.0)));
    }

    #[test]
    fn energies() {
        let space = unit_pair();
        assert_eq!(energy(&space, &flip(), 1).unwrap(), 1.0);
        assert_eq!(energy(&space, &flip(), 2).unwrap(), 0.0);
        for l in 1..5 {
            assert_eq!(energy(&space, &lazy(), l).unwrap(), 0.5);
        }
        let point = validate_metric(&[vec![0.0]], 1e-9).unwrap();
        let one = ReversibleChain::from_weights(&Matrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(energy(&point, &one, 3).unwrap(), 0.0);
        assert_eq!(energy_profile(&point, &one, 4).unwrap().values(), &[0.0; 4]);

        assert_eq!(energy_profile(&space, &flip(), 4).unwrap().values(), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(energy_profile(&space, &lazy(), 3).unwrap().values(), &[0.5, 0.5, 0.5]);
        assert_eq!(
            energy(&tripod(), &flip(), 1),
            Err(ChainError::SizeMismatch { space: 4, chain: 2 })
        );
        assert_eq!(energy(&space, &flip(), 0), Err(ChainError::InvalidStep));
    }

    #[test]
    fn random_families_are_valid_chains() {
        let space = gaussian_cloud(9, 3, 4).unwrap();
        for family in [WeightFamily::Dense, WeightFamily::Sparse, WeightFamily::Kernel] {
            let w = random_weights(&space, family, 11);
            assert_eq!(w, random_weights(&space, family, 11));
            let chain = ReversibleChain::from_weights(&w).unwrap();
            assert!(chain.validate(CHAIN_TOL).passed, "{family:?}");
            assert!(chain.stationarity_defect() <= CHAIN_TOL);
        }
    }
}
