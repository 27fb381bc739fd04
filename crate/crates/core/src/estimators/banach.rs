//! Linear-space quantities: Rademacher type/cotype ratios, the 2-uniform
//! smoothness and convexity inequalities, and the Markov cotype ratio, all for
//! finite-dimensional `l^p` norms.

use alloc::vec::Vec;

use super::EstimateError;
use crate::chain::ReversibleChain;
use crate::metric::lp_norm;
use crate::report::{CheckReport, RatioReport};

/// The `l^p` norm on `R^m`; `p = f64::INFINITY` is the max norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpNorm(f64);

impl LpNorm {
    pub fn new(p: f64) -> Result<Self, EstimateError> {
        if p.is_nan() || p < 1.0 {
            return Err(EstimateError::InvalidP(p));
        }
        Ok(Self(p))
    }

    pub fn p(&self) -> f64 {
        self.0
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        lp_norm(v, self.0)
    }

    pub fn norm2(&self, v: &[f64]) -> f64 {
        let x = self.norm(v);
        x * x
    }
}

fn common_dim(vectors: &[Vec<f64>]) -> Result<usize, EstimateError> {
    let dim = vectors.first().map_or(0, Vec::len);
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(EstimateError::DimensionMismatch {
                index,
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(dim)
}

/// `(type_ratio, cotype_ratio)` where `type_ratio` is
/// `2^-N sum_eps |sum eps_i v_i|^2 / sum |v_i|^2` and `cotype_ratio` its
/// reciprocal. Enumerates all `2^N` sign patterns, so `N <= 20`.
pub fn rademacher_ratios(vectors: &[Vec<f64>], norm: LpNorm) -> Result<(f64, f64), EstimateError> {
    let count = vectors.len();
    if count > 20 {
        return Err(EstimateError::TooManyVectors(count));
    }
    let dim = common_dim(vectors)?;
    let sum_sq: f64 = vectors.iter().map(|v| norm.norm2(v)).sum();
    if sum_sq <= 0.0 {
        return Err(EstimateError::AllZeroVectors);
    }
    let mut total = 0.0;
    let mut combo = alloc::vec![0.0; dim];
    for mask in 0..1usize << count {
        combo.iter_mut().for_each(|c| *c = 0.0);
        for (i, v) in vectors.iter().enumerate() {
            let sign = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            for (c, x) in combo.iter_mut().zip(v) {
                *c += sign * x;
            }
        }
        total += norm.norm2(&combo);
    }
    let average = total / (1u64 << count) as f64;
    Ok((average / sum_sq, sum_sq / average))
}

/// Which modulus inequality [`banach_moduli_check`] tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Modulus {
    /// `|(v+w)/2|^2 >= |v|^2/2 + |w|^2/2 - (S^2/4)|v-w|^2`.
    Smooth(f64),
    /// `|(v+w)/2|^2 <= |v|^2/2 + |w|^2/2 - (1/(4 C^2))|v-w|^2`.
    Convex(f64),
}

/// Margin of the 2-uniform smoothness or convexity inequality for one pair;
/// the inequality holds iff the margin is nonnegative.
pub fn banach_moduli_check(
    v: &[f64],
    w: &[f64],
    norm: LpNorm,
    modulus: Modulus,
    tol: f64,
) -> Result<CheckReport, EstimateError> {
    if v.len() != w.len() {
        return Err(EstimateError::DimensionMismatch {
            index: 1,
            expected: v.len(),
            found: w.len(),
        });
    }
    let mid: Vec<f64> = v.iter().zip(w).map(|(a, b)| 0.5 * (a + b)).collect();
    let diff: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
    let (mid2, v2, w2, diff2) = (norm.norm2(&mid), norm.norm2(v), norm.norm2(w), norm.norm2(&diff));
    let (check, margin) = match modulus {
        Modulus::Smooth(s) => ("uniform_smoothness", mid2 - 0.5 * v2 - 0.5 * w2 + 0.25 * s * s * diff2),
        Modulus::Convex(c) => ("uniform_convexity", 0.5 * v2 + 0.5 * w2 - diff2 / (4.0 * c * c) - mid2),
    };
    Ok(CheckReport::new(check, margin, tol))
}

/// Markov cotype ratio for vectors `v_1..v_N` and a chain with uniform `pi`:
/// `alpha sum_ij a_ij |sum_k (c_ik - c_jk) v_k|^2` over
/// `(1 - alpha) sum_ij c_ij |v_i - v_j|^2`.
pub fn markov_cotype_ratio(
    vectors: &[Vec<f64>],
    norm: LpNorm,
    chain: &ReversibleChain,
    alpha: f64,
) -> Result<RatioReport, EstimateError> {
    let n = vectors.len();
    if n != chain.len() {
        return Err(EstimateError::SizeMismatch {
            vectors: n,
            states: chain.len(),
        });
    }
    let dim = common_dim(vectors)?;
    let uniform = 1.0 / n as f64;
    if let Some(i) = chain.pi().iter().position(|p| (p - uniform).abs() > 1e-12) {
        return Err(EstimateError::NonuniformPi(i));
    }
    let c = chain.resolvent(alpha)?;
    let a = chain.transition();

    // Resolvent images u_i = sum_k c_ik v_k.
    let images: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..dim)
                .map(|t| (0..n).map(|k| c[(i, k)] * vectors[k][t]).sum())
                .collect()
        })
        .collect();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut scratch = alloc::vec![0.0; dim];
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] != 0.0 {
                for (s, (x, y)) in scratch.iter_mut().zip(images[i].iter().zip(&images[j])) {
                    *s = x - y;
                }
                numerator += a[(i, j)] * norm.norm2(&scratch);
            }
            for (s, (x, y)) in scratch.iter_mut().zip(vectors[i].iter().zip(&vectors[j])) {
                *s = x - y;
            }
            denominator += c[(i, j)] * norm.norm2(&scratch);
        }
    }
    numerator *= alpha;
    denominator *= 1.0 - alpha;
    if denominator <= 0.0 {
        return Err(EstimateError::DegenerateVectors);
    }
    Ok(RatioReport::new("markov_cotype", numerator, denominator))
}
