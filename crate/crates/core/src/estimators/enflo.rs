//! Enflo type ratios of hypercube labelings.
//!
//! Sign vectors `eps in {-1, 1}^N` are encoded as bitmasks: bit `i` set means
//! `eps_i = +1`. Then `-eps` is the complement mask and adjacent sign vectors
//! differ in exactly one bit.
//!
//! Both sums are taken over ordered objects: the diagonal sum runs over all
//! `2^N` sign vectors (each antipodal pair counted twice) and the edge sum over
//! ordered adjacent pairs (each edge counted twice). With this normalization
//! the square labeled by its own corners has ratio exactly 1.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::EstimateError;
use crate::metric::FiniteMetricSpace;
use crate::report::{RatioReport, Witness};
use crate::rng;

/// Default cap on `n^(2^N)` for exhaustive search.
pub const DEFAULT_ENFLO_CAP: f64 = 1e7;

const MAX_DIM: usize = 20;

/// Assignment of a point index to every vertex of `{-1, 1}^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercubeLabeling {
    dim: usize,
    assign: Vec<usize>,
}

impl HypercubeLabeling {
    /// `assign[mask]` is the point labeling the sign vector `mask`.
    pub fn new(dim: usize, assign: Vec<usize>, points: usize) -> Result<Self, EstimateError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(EstimateError::InvalidDimension);
        }
        let expected = 1usize << dim;
        if assign.len() != expected {
            return Err(EstimateError::LabelingSize {
                dim,
                expected,
                found: assign.len(),
            });
        }
        if let Some(&index) = assign.iter().find(|&&p| p >= points) {
            return Err(crate::metric::MetricError::IndexOutOfRange { index, n: points }.into());
        }
        Ok(Self { dim, assign })
    }

    /// Labeling given by a function of the sign vector.
    pub fn from_signs(
        dim: usize,
        points: usize,
        mut f: impl FnMut(&[i8]) -> usize,
    ) -> Result<Self, EstimateError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(EstimateError::InvalidDimension);
        }
        let assign = (0..1usize << dim)
            .map(|mask| f(&signs_of(mask, dim)))
            .collect();
        Self::new(dim, assign, points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn point(&self, mask: usize) -> usize {
        self.assign[mask]
    }
}

/// Sign vector of `mask`.
pub fn signs_of(mask: usize, dim: usize) -> Vec<i8> {
    (0..dim)
        .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// `(diagonal sum, ordered edge sum)`.
fn sums(d2: &[f64], n: usize, dim: usize, assign: &[usize]) -> (f64, f64) {
    let full = (1usize << dim) - 1;
    let mut diag = 0.0;
    let mut edges = 0.0;
    for (mask, &p) in assign.iter().enumerate() {
        diag += d2[p * n + assign[full ^ mask]];
        for bit in 0..dim {
            edges += d2[p * n + assign[mask ^ (1 << bit)]];
        }
    }
    (diag, edges)
}

fn squared_distances(space: &FiniteMetricSpace) -> Vec<f64> {
    space.as_flat().iter().map(|d| d * d).collect()
}

/// `sum_eps d(x_eps, x_-eps)^2` over `sum_{eps ~ eps'} d(x_eps, x_eps')^2`.
pub fn enflo_ratio(
    space: &FiniteMetricSpace,
    labeling: &HypercubeLabeling,
) -> Result<RatioReport, EstimateError> {
    if let Some(&index) = labeling.assign.iter().find(|&&p| p >= space.len()) {
        return Err(crate::metric::MetricError::IndexOutOfRange {
            index,
            n: space.len(),
        }
        .into());
    }
    let (diag, edges) = sums(
        &squared_distances(space),
        space.len(),
        labeling.dim,
        &labeling.assign,
    );
    if edges <= 0.0 {
        return Err(EstimateError::DegenerateLabeling);
    }
    Ok(RatioReport::new("enflo", diag, edges).with_witness(Witness::Labeling {
        dim: labeling.dim,
        assign: labeling.assign.clone(),
    }))
}

/// How [`enflo_search`] explores labelings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnfloMode {
    /// Every labeling, provided `n^(2^N) <= cap`. Returns the true maximum;
    /// ties go to the first labeling in odometer order.
    Exhaustive { cap: f64 },
    /// Relabel one random vertex per proposal, accept strict improvements,
    /// restart after `n 2^N` consecutive rejections.
    Local { seed: u64, budget: usize },
}

/// Maximizes [`enflo_ratio`] over labelings of `{-1, 1}^dim` by points of `space`.
pub fn enflo_search(
    space: &FiniteMetricSpace,
    dim: usize,
    mode: EnfloMode,
) -> Result<(HypercubeLabeling, RatioReport), EstimateError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(EstimateError::InvalidDimension);
    }
    let n = space.len();
    let vertices = 1usize << dim;
    let d2 = squared_distances(space);
    let best = match mode {
        EnfloMode::Exhaustive { cap } => {
            let needed = libm::pow(n as f64, vertices as f64);
            if needed > cap {
                return Err(EstimateError::CapExceeded { needed, cap });
            }
            exhaustive(&d2, n, dim)
        }
        EnfloMode::Local { seed, budget } => {
            if budget == 0 {
                return Err(EstimateError::InvalidParameter("budget must be at least 1"));
            }
            local(&d2, n, dim, seed, budget)
        }
    };
    let (assign, _) = best.ok_or(EstimateError::DegenerateLabeling)?;
    let labeling = HypercubeLabeling { dim, assign };
    let mut report = enflo_ratio(space, &labeling)?;
    report.check = "enflo_search".into();
    if let EnfloMode::Local { seed, budget } = mode {
        report = report.with_search(seed, budget);
    }
    Ok((labeling, report))
}

fn ratio_of(d2: &[f64], n: usize, dim: usize, assign: &[usize]) -> Option<f64> {
    let (diag, edges) = sums(d2, n, dim, assign);
    (edges > 0.0).then(|| diag / edges)
}

fn exhaustive(d2: &[f64], n: usize, dim: usize) -> Option<(Vec<usize>, f64)> {
    let vertices = 1usize << dim;
    let mut assign = vec![0usize; vertices];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        if let Some(r) = ratio_of(d2, n, dim, &assign) {
            if best.as_ref().is_none_or(|b| r > b.1) {
                best = Some((assign.clone(), r));
            }
        }
        // Odometer increment, least significant vertex last.
        let mut k = vertices;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            assign[k] += 1;
            if assign[k] < n {
                break;
            }
            assign[k] = 0;
        }
    }
}

fn local(d2: &[f64], n: usize, dim: usize, seed: u64, budget: usize) -> Option<(Vec<usize>, f64)> {
    if n < 2 {
        return None;
    }
    let vertices = 1usize << dim;
    let mut rng = rng::seeded(seed);
    let fresh = |rng: &mut rng::SeededRng| -> (Vec<usize>, Option<f64>) {
        let assign: Vec<usize> = (0..vertices).map(|_| rng.random_range(0..n)).collect();
        let r = ratio_of(d2, n, dim, &assign);
        (assign, r)
    };
    let (mut current, mut value) = fresh(&mut rng);
    let mut best: Option<(Vec<usize>, f64)> = value.map(|r| (current.clone(), r));
    let stagnation = n * vertices;
    let mut rejections = 0;
    for _ in 0..budget {
        let v = rng.random_range(0..vertices);
        let old = current[v];
        let shift = rng.random_range(1..n);
        current[v] = (old + shift) % n;
        let candidate = ratio_of(d2, n, dim, &current);
        let improves = match (candidate, value) {
            (Some(c), Some(cur)) => c > cur,
            (Some(_), None) => true,
            _ => false,
        };
        if improves {
            value = candidate;
            rejections = 0;
            let c = candidate.unwrap_or(f64::NEG_INFINITY);
            if best.as_ref().is_none_or(|b| c > b.1) {
                best = Some((current.clone(), c));
            }
        } else {
            current[v] = old;
            rejections += 1;
            if rejections >= stagnation {
                let (assign, r) = fresh(&mut rng);
                current = assign;
                value = r;
                rejections = 0;
                if let Some(c) = r {
                    if best.as_ref().is_none_or(|b| c > b.1) {
                        best = Some((current.clone(), c));
                    }
                }
            }
        }
    }
    best
}
