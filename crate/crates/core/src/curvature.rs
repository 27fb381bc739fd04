//! Finite tests of curvature inequalities.
//!
//! Sturm's barycenter inequality characterizes nonnegative curvature for
//! geodesic spaces, but a finite scan can only look at sample points: a
//! positive defect certifies an obstruction, while a clean scan only means no
//! obstruction was found. The midpoint inequalities need a geometric model
//! because `gamma(1/2)` is not determined by a distance matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use thiserror::Error;

use crate::metric::{FiniteMetricSpace, MetricError};
use crate::report::{CheckReport, Witness};
use crate::rng;

/// Largest subset drawn by [`sturm_scan`].
pub const MAX_SUBSET: usize = 6;

/// Default tolerance, relative to the squared diameter.
pub const DEFAULT_TOL_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),
    #[error("all points coincide")]
    DegenerateSpace,
    #[error("trial count must be at least 1")]
    InvalidTrials,
    #[error("coordinates have mismatched dimensions")]
    DimensionMismatch,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Points `x_i` with probability weights `a_i`, and a base point `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedConfiguration {
    indices: Vec<usize>,
    weights: Vec<f64>,
    y: usize,
}

impl WeightedConfiguration {
    pub fn new(indices: Vec<usize>, weights: Vec<f64>, y: usize) -> Result<Self, CurvatureError> {
        check_weights(&weights)?;
        if indices.len() != weights.len() {
            return Err(CurvatureError::InvalidWeights("one weight per point is required"));
        }
        Ok(Self { indices, weights, y })
    }

    /// Equal weights on `indices`.
    pub fn uniform(indices: Vec<usize>, y: usize) -> Result<Self, CurvatureError> {
        let k = indices.len();
        Self::new(indices, vec![1.0 / k as f64; k], y)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn y(&self) -> usize {
        self.y
    }

    fn witness(&self) -> Witness {
        Witness::Configuration {
            indices: self.indices.clone(),
            weights: self.weights.clone(),
            y: self.y,
        }
    }
}

fn check_weights(weights: &[f64]) -> Result<(), CurvatureError> {
    if weights.is_empty() {
        return Err(CurvatureError::InvalidWeights("at least one point is required"));
    }
    if weights.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(CurvatureError::InvalidWeights("weights must be finite and nonnegative"));
    }
    if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(CurvatureError::InvalidWeights("weights must sum to 1"));
    }
    Ok(())
}

/// `sum_ij a_i a_j (d(x_i,x_j)^2 - d(x_i,y)^2 - d(x_j,y)^2)`.
///
/// Nonpositive on every configuration of a nonnegatively curved space; a
/// positive value is an obstruction.
pub fn sturm_defect(
    space: &FiniteMetricSpace,
    config: &WeightedConfiguration,
) -> Result<f64, CurvatureError> {
    for &i in config.indices.iter().chain(core::iter::once(&config.y)) {
        space.check_index(i)?;
    }
    Ok(defect(space, &config.indices, &config.weights, config.y))
}

fn defect(space: &FiniteMetricSpace, indices: &[usize], weights: &[f64], y: usize) -> f64 {
    let mut total = 0.0;
    for (&i, &ai) in indices.iter().zip(weights) {
        for (&j, &aj) in indices.iter().zip(weights) {
            total += ai * aj * (space.d2(i, j) - space.d2(i, y) - space.d2(j, y));
        }
    }
    total
}

/// Random search for violations of Sturm's inequality.
///
/// Each trial draws a subset of at most [`MAX_SUBSET`] distinct points and
/// evaluates two weight vectors on it, the uniform one and a Dirichlet(1,...,1)
/// draw (normalized exponentials), against every base point of the space. The
/// report carries the largest defect and its configuration; it passes iff that
/// defect is at most `tol_rel` times the squared diameter.
pub fn sturm_scan(
    space: &FiniteMetricSpace,
    trials: usize,
    seed: u64,
    tol_rel: f64,
) -> Result<CheckReport, CurvatureError> {
    if trials == 0 {
        return Err(CurvatureError::InvalidTrials);
    }
    let n = space.len();
    let mut rng = rng::seeded(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, WeightedConfiguration)> = None;
    for _ in 0..trials {
        let k = rng.random_range(1..=n.min(MAX_SUBSET));
        for slot in 0..k {
            let pick = rng.random_range(slot..n);
            pool.swap(slot, pick);
        }
        let indices = pool[..k].to_vec();
        let uniform = vec![1.0 / k as f64; k];
        let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        let dirichlet: Vec<f64> = draws.iter().map(|e| e / total).collect();
        for weights in [uniform, dirichlet] {
            for y in 0..n {
                let value = defect(space, &indices, &weights, y);
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((
                        value,
                        WeightedConfiguration {
                            indices: indices.clone(),
                            weights: weights.clone(),
                            y,
                        },
                    ));
                }
            }
        }
    }
    let (value, config) = best.expect("at least one trial ran");
    let diam = space.diameter();
    let report = CheckReport::new("sturm_scan", 0.0 - value, tol_rel * diam * diam)
        .with_value(value)
        .with_witness(config.witness())
        .with_seed(seed)
        .with_trials(trials);
    let detail = if report.passed {
        "no obstruction found"
    } else {
        "obstruction to nonnegative curvature"
    };
    Ok(report.with_detail(detail))
}

/// Compares the barycenter double sum in euclidean coordinates with
/// `-2 |sum a_i v_i - w|^2`. The margin is minus the absolute discrepancy and
/// the tolerance is `tol_rel` times the largest squared distance involved.
pub fn hilbert_identity_check(
    coords: &[Vec<f64>],
    weights: &[f64],
    w: &[f64],
    tol_rel: f64,
) -> Result<CheckReport, CurvatureError> {
    check_weights(weights)?;
    if coords.len() != weights.len() {
        return Err(CurvatureError::InvalidWeights("one weight per point is required"));
    }
    let dim = w.len();
    if coords.iter().any(|c| c.len() != dim) {
        return Err(CurvatureError::DimensionMismatch);
    }
    let sq = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum() };
    let mut lhs = 0.0;
    let mut scale: f64 = 0.0;
    for (vi, &ai) in coords.iter().zip(weights) {
        let to_w_i = sq(vi, w);
        scale = scale.max(to_w_i);
        for (vj, &aj) in coords.iter().zip(weights) {
            let dij = sq(vi, vj);
            scale = scale.max(dij);
            lhs += ai * aj * (dij - to_w_i - sq(vj, w));
        }
    }
    let barycenter: Vec<f64> = (0..dim)
        .map(|t| coords.iter().zip(weights).map(|(v, a)| a * v[t]).sum())
        .collect();
    let rhs = -2.0 * sq(&barycenter, w);
    let discrepancy = (lhs - rhs).abs();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(CheckReport::new("hilbert_identity", -discrepancy, tol_rel * scale)
        .with_value(discrepancy)
        .with_detail(format!("double sum {lhs:e}, -2|b - w|^2 {rhs:e}")))
}

/// Margins of the two midpoint comparison inequalities for `x` and the
/// midpoint `m` of `y` and `z`:
///
/// * `usA = d(x,m)^2 - d(x,y)^2/2 - d(x,z)^2/2 + (S^2/4) d(y,z)^2`
/// * `usC = (S^2/2) d(x,y)^2 + d(x,z)^2/2 - d(y,z)^2/4 - d(x,m)^2`
///
/// With `S = 1`, `usA >= 0` on all triples is nonnegative curvature and
/// `usC >= 0` is the CAT(0) inequality.
pub fn midpoint_defects(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    z: usize,
    s: f64,
) -> Result<(f64, f64), CurvatureError> {
    for i in [x, y, z] {
        space.check_index(i)?;
    }
    let model = space.model().ok_or(MetricError::MissingModel)?;
    let m = model.midpoint(y, z)?;
    let xm = model.distance(model.point(x), &m);
    let xm2 = xm * xm;
    let s2 = s * s;
    let usa = xm2 - 0.5 * space.d2(x, y) - 0.5 * space.d2(x, z) + 0.25 * s2 * space.d2(y, z);
    let usc = 0.5 * s2 * space.d2(x, y) + 0.5 * space.d2(x, z) - 0.25 * space.d2(y, z) - xm2;
    Ok((usa, usc))
}

/// Minimum `usA` and `usC` margins over all triples `(x, y, z)` with `y < z`.
/// Antipodal pairs have no unique midpoint and are skipped (the count is
/// recorded in the detail).
pub fn midpoint_scan(
    space: &FiniteMetricSpace,
    s: f64,
    tol_rel: f64,
) -> Result<(CheckReport, CheckReport), CurvatureError> {
    let n = space.len();
    let mut worst_a = (f64::INFINITY, [0usize; 3]);
    let mut worst_c = (f64::INFINITY, [0usize; 3]);
    let mut skipped = 0usize;
    for y in 0..n {
        for z in (y + 1)..n {
            for x in 0..n {
                match midpoint_defects(space, x, y, z, s) {
                    Ok((a, c)) => {
                        if a < worst_a.0 {
                            worst_a = (a, [x, y, z]);
                        }
                        if c < worst_c.0 {
                            worst_c = (c, [x, y, z]);
                        }
                    }
                    Err(CurvatureError::Metric(MetricError::AntipodalPoints { .. })) => {
                        skipped += 1;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    if worst_a.0.is_infinite() {
        worst_a.0 = 0.0;
        worst_c.0 = 0.0;
    }
    let diam = space.diameter();
    let tol = tol_rel * diam * diam;
    let report = |name: &str, (margin, idx): (f64, [usize; 3])| {
        CheckReport::new(name, margin, tol)
            .with_value(margin)
            .with_witness(Witness::Indices(idx.to_vec()))
            .with_detail(format!("S = {s}, antipodal pairs skipped: {skipped}"))
    };
    Ok((report("midpoint_usA", worst_a), report("midpoint_usC", worst_c)))
}

/// Four points `(w, x, y, z)` and the margin observed on them. Repeats allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadrupleWitness {
    pub w: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub margin: f64,
}

impl QuadrupleWitness {
    pub fn new(w: usize, x: usize, y: usize, z: usize) -> Self {
        Self {
            w,
            x,
            y,
            z,
            margin: 0.0,
        }
    }

    fn indices(&self) -> Vec<usize> {
        vec![self.w, self.x, self.y, self.z]
    }
}

/// `S^2 (d(w,x)^2 + d(y,z)^2) + d(w,z)^2 + d(y,x)^2 - d(w,y)^2 - d(x,z)^2`;
/// the four-point inequality holds on the quadruple iff this is nonnegative.
pub fn four_point_margin(space: &FiniteMetricSpace, q: &QuadrupleWitness, s: f64) -> f64 {
    let QuadrupleWitness { w, x, y, z, .. } = *q;
    s * s * (space.d2(w, x) + space.d2(y, z)) + space.d2(w, z) + space.d2(y, x)
        - space.d2(w, y)
        - space.d2(x, z)
}

/// Smallest `S` for which the four-point inequality holds on every ordered
/// quadruple, with the quadruple attaining it (first in lexicographic order).
pub fn four_point_minimal_s(
    space: &FiniteMetricSpace,
) -> Result<(f64, QuadrupleWitness), CurvatureError> {
    let n = space.len();
    if space.diameter() <= 0.0 {
        return Err(CurvatureError::DegenerateSpace);
    }
    let mut best: Option<(f64, QuadrupleWitness)> = None;
    for w in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let sides = space.d2(w, x) + space.d2(y, z);
                    if sides <= 0.0 {
                        continue;
                    }
                    let excess = space.d2(w, y) + space.d2(x, z) - space.d2(w, z) - space.d2(y, x);
                    let r = excess / sides;
                    if best.as_ref().is_none_or(|(b, _)| r > *b) {
                        best = Some((r, QuadrupleWitness::new(w, x, y, z)));
                    }
                }
            }
        }
    }
    let (ratio, mut witness) = best.ok_or(CurvatureError::DegenerateSpace)?;
    let s_min = libm::sqrt(ratio.max(0.0));
    witness.margin = four_point_margin(space, &witness, s_min);
    Ok((s_min, witness))
}

/// Minimum four-point margin at constant `S` over all ordered quadruples.
pub fn four_point_scan(space: &FiniteMetricSpace, s: f64, tol_rel: f64) -> CheckReport {
    let worst = scan_quadruples(space, |q| four_point_margin(space, q, s));
    let diam = space.diameter();
    CheckReport::new("four_point", worst.margin, tol_rel * diam * diam)
        .with_value(worst.margin)
        .with_witness(Witness::Indices(worst.indices()))
        .with_detail(format!("S = {s}"))
}

/// `d(w,x) d(y,z) + d(w,z) d(y,x) - d(w,y) d(x,z)`; Ptolemy's inequality holds
/// on the quadruple iff this is nonnegative.
pub fn ptolemy_margin(space: &FiniteMetricSpace, q: &QuadrupleWitness) -> f64 {
    let QuadrupleWitness { w, x, y, z, .. } = *q;
    space.d(w, x) * space.d(y, z) + space.d(w, z) * space.d(y, x) - space.d(w, y) * space.d(x, z)
}

/// Minimum Ptolemy margin over all ordered quadruples.
pub fn ptolemy_scan(space: &FiniteMetricSpace, tol_rel: f64) -> CheckReport {
    let worst = scan_quadruples(space, |q| ptolemy_margin(space, q));
    let diam = space.diameter();
    CheckReport::new("ptolemy", worst.margin, tol_rel * diam * diam)
        .with_value(worst.margin)
        .with_witness(Witness::Indices(worst.indices()))
}

/// Quadruple with the smallest margin, first in lexicographic order on ties.
fn scan_quadruples(
    space: &FiniteMetricSpace,
    margin: impl Fn(&QuadrupleWitness) -> f64,
) -> QuadrupleWitness {
    let n = space.len();
    let mut worst = QuadrupleWitness {
        margin: f64::INFINITY,
        ..QuadrupleWitness::new(0, 0, 0, 0)
    };
    for w in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let mut q = QuadrupleWitness::new(w, x, y, z);
                    q.margin = margin(&q);
                    if q.margin < worst.margin {
                        worst = q;
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{euclidean_space, gaussian_cloud, sphere_points, sphere_sample, tripod};
    use core::f64::consts::FRAC_PI_2;

    fn unit_square() -> FiniteMetricSpace {
        // Cyclic order 0-1-2-3.
        euclidean_space(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn tripod_defect() {
        let config = WeightedConfiguration::uniform(vec![1, 2, 3], 0).unwrap();
        let d = sturm_defect(&tripod(), &config).unwrap();
        assert!((d - 2.0 / 3.0).abs() <= 1e-12);
    }

    #[test]
    fn single_point_defect_is_zero() {
        let space = gaussian_cloud(4, 2, 1).unwrap();
        let config = WeightedConfiguration::new(vec![2], vec![1.0], 2).unwrap();
        assert_eq!(sturm_defect(&space, &config).unwrap(), 0.0);
    }

    #[test]
    fn weights_are_validated() {
        assert!(WeightedConfiguration::new(vec![0, 1], vec![0.5, 0.6], 0).is_err());
        assert!(WeightedConfiguration::new(vec![0, 1], vec![1.5, -0.5], 0).is_err());
        assert!(WeightedConfiguration::new(vec![0], vec![0.5, 0.5], 0).is_err());
        let bad_index = WeightedConfiguration::uniform(vec![9], 0).unwrap();
        assert!(sturm_defect(&tripod(), &bad_index).is_err());
    }

    #[test]
    fn tripod_scan_finds_obstruction() {
        let r = sturm_scan(&tripod(), 500, 1, DEFAULT_TOL_REL).unwrap();
        assert!(!r.passed);
        assert!(r.value.unwrap() >= 2.0 / 3.0 - 1e-12);
        assert_eq!(
            r.witness,
            Witness::Configuration {
                indices: match &r.witness {
                    Witness::Configuration { indices, .. } => indices.clone(),
                    _ => unreachable!(),
                },
                weights: vec![1.0 / 3.0; 3],
                y: 0,
            }
        );
    }

    #[test]
    fn sphere_scan_is_clean() {
        let space = sphere_sample(20, 8, 1.0).unwrap();
        let r = sturm_scan(&space, 300, 2, DEFAULT_TOL_REL).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.detail.as_deref(), Some("no obstruction found"));
    }

    #[test]
    fn scan_is_reproducible() {
        let space = sphere_sample(7, 1, 1.0).unwrap();
        assert_eq!(
            sturm_scan(&space, 1, 5, DEFAULT_TOL_REL).unwrap(),
            sturm_scan(&space, 1, 5, DEFAULT_TOL_REL).unwrap()
        );
        assert_eq!(sturm_scan(&space, 0, 5, 1e-9), Err(CurvatureError::InvalidTrials));
    }

    #[test]
    fn hilbert_identity_examples() {
        let r = hilbert_identity_check(&[vec![0.0], vec![2.0]], &[0.5, 0.5], &[0.0], 1e-9).unwrap();
        assert!(r.passed);
        assert_eq!(r.value, Some(0.0));

        let coords = vec![vec![0.0, 1.0], vec![3.0, -1.0], vec![2.0, 2.0]];
        let weights = [0.2, 0.3, 0.5];
        let bary = [1.9, 0.9];
        let r = hilbert_identity_check(&coords, &weights, &bary, 1e-9).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn sphere_midpoint_example() {
        let space = sphere_points(
            vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            1.0,
        )
        .unwrap();
        let (usa, _) = midpoint_defects(&space, 0, 1, 2, 1.0).unwrap();
        assert!((usa - 0.25 * FRAC_PI_2 * FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn euclidean_midpoint_margins() {
        let line = euclidean_space(vec![vec![0.0], vec![0.0], vec![4.0]]).unwrap();
        let (usa, _) = midpoint_defects(&line, 0, 1, 2, 1.0).unwrap();
        assert!(usa.abs() < 1e-12);
        let cloud = gaussian_cloud(8, 3, 2).unwrap();
        let (a, c) = midpoint_scan(&cloud, 1.0, 1e-9).unwrap();
        assert!(a.passed && c.passed);
        assert!(midpoint_defects(&tripod(), 0, 1, 2, 1.0).is_err());
    }

    #[test]
    fn four_point_examples() {
        let sq = unit_square();
        let q = QuadrupleWitness::new(0, 1, 2, 3);
        assert!(four_point_margin(&sq, &q, 1.0).abs() < 1e-12);
        let same = QuadrupleWitness::new(2, 2, 2, 2);
        assert_eq!(four_point_margin(&sq, &same, 5.0), 0.0);
        let t = tripod();
        // (w, x, y, z) = (a, o, b, o)
        let q = QuadrupleWitness::new(1, 0, 2, 0);
        assert_eq!(four_point_margin(&t, &q, 1.0), 0.0);
    }

    #[test]
    fn minimal_s_examples() {
        let (s, w) = four_point_minimal_s(&unit_square()).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "{s} at {w:?}");
        let pair = euclidean_space(vec![vec![0.0], vec![1.0]]).unwrap();
        let (s, _) = four_point_minimal_s(&pair).unwrap();
        assert!(s <= 1.0);
        let blob = euclidean_space(vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(four_point_minimal_s(&blob), Err(CurvatureError::DegenerateSpace));
    }

    #[test]
    fn ptolemy_examples() {
        let sq = unit_square();
        assert!(ptolemy_margin(&sq, &QuadrupleWitness::new(0, 1, 2, 3)).abs() < 1e-12);
        assert_eq!(ptolemy_margin(&sq, &QuadrupleWitness::new(1, 1, 1, 1)), 0.0);
        let r = ptolemy_scan(&gaussian_cloud(7, 3, 9).unwrap(), 1e-9);
        assert!(r.passed);
    }
}
