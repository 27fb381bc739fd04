//! Finite metric spaces, their geometric models, and the generators used by
//! the checks and corpora.
//!
//! A [`FiniteMetricSpace`] is a validated symmetric distance matrix. Spaces
//! built from coordinates also carry a [`GeometricModel`], which is what makes
//! exact geodesic midpoints available (a bare distance matrix does not
//! determine them).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::rng;

/// Default triangle-inequality slack, relative to the largest distance.
pub const DEFAULT_TOL_REL: f64 = 1e-9;

/// Default cap on the number of points of a product space.
pub const DEFAULT_PRODUCT_CAP: usize = 4096;

/// Below this value of `1 + <y, z> / r^2` two sphere points count as antipodal.
const ANTIPODAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("a metric space needs at least one point")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("d({i}, {j}) = {value} is negative")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("d({i}, {i}) = {value} is not zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("d({i}, {j}) differs from d({j}, {i})")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality fails: d({i}, {j}) > d({i}, {via}) + d({via}, {j})")]
    TriangleViolation { i: usize, j: usize, via: usize },
    #[error("graph is disconnected: no path from {from} to {to}")]
    DisconnectedGraph { from: usize, to: usize },
    #[error("edge ({i}, {j}) is invalid: {reason}")]
    InvalidEdge {
        i: usize,
        j: usize,
        reason: &'static str,
    },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("exponent p = {0} must be at least 1")]
    InvalidP(f64),
    #[error("radius {0} must be positive and finite")]
    InvalidRadius(f64),
    #[error("scale factor {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("point {0} does not lie on the sphere")]
    NotOnSphere(usize),
    #[error("model distance disagrees with the matrix at ({i}, {j})")]
    ModelMismatch { i: usize, j: usize },
    #[error("{count} labels given for {n} points")]
    LabelCount { count: usize, n: usize },
    #[error("product would have {size} points, cap is {cap}")]
    SizeOverflow { size: usize, cap: usize },
    #[error("points {y} and {z} are antipodal; the midpoint is not unique")]
    AntipodalPoints { y: usize, z: usize },
    #[error("midpoints are only available for euclidean and sphere models")]
    UnsupportedModel,
    #[error("the space has no geometric model")]
    MissingModel,
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Which metric the coordinates of a [`GeometricModel`] carry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    Euclidean,
    /// `l^p` norm of coordinate differences; `p = f64::INFINITY` is the max norm.
    Lp(f64),
    /// Great-circle distance on the sphere of the given radius.
    Sphere { radius: f64 },
}

impl ModelKind {
    /// True when the metric is the euclidean one (including `Lp(2)`).
    pub fn is_euclidean(&self) -> bool {
        match *self {
            ModelKind::Euclidean => true,
            ModelKind::Lp(p) => p == 2.0,
            ModelKind::Sphere { .. } => false,
        }
    }
}

/// Coordinates of the points of a space together with the metric they induce.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricModel {
    kind: ModelKind,
    coords: Vec<Vec<f64>>,
}

impl GeometricModel {
    pub fn new(kind: ModelKind, coords: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        if coords.is_empty() {
            return Err(MetricError::Empty);
        }
        let dim = coords[0].len();
        for (index, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(MetricError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: c.len(),
                });
            }
            if let Some(j) = c.iter().position(|x| !x.is_finite()) {
                return Err(MetricError::NonFinite { i: index, j });
            }
        }
        match kind {
            ModelKind::Euclidean => {}
            ModelKind::Lp(p) => {
                if p.is_nan() || p < 1.0 {
                    return Err(MetricError::InvalidP(p));
                }
            }
            ModelKind::Sphere { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(MetricError::InvalidRadius(radius));
                }
                for (index, c) in coords.iter().enumerate() {
                    if (euclidean_norm(c) - radius).abs() > 1e-9 * radius {
                        return Err(MetricError::NotOnSphere(index));
                    }
                }
            }
        }
        Ok(Self { kind, coords })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    /// Model distance between two coordinate vectors.
    pub fn distance(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Euclidean => lp_distance(u, v, 2.0),
            ModelKind::Lp(p) => lp_distance(u, v, p),
            ModelKind::Sphere { radius } => sphere_distance(u, v, radius),
        }
    }

    /// Distance matrix (row-major) reproduced from the coordinates. Only the
    /// upper triangle is computed, so the result is exactly symmetric.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.distance(&self.coords[i], &self.coords[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        dist
    }

    /// Midpoint of the minimal geodesic between points `y` and `z`.
    pub fn midpoint(&self, y: usize, z: usize) -> Result<Vec<f64>, MetricError> {
        let n = self.len();
        for index in [y, z] {
            if index >= n {
                return Err(MetricError::IndexOutOfRange { index, n });
            }
        }
        self.midpoint_of(&self.coords[y], &self.coords[z])
            .map_err(|e| match e {
                MetricError::AntipodalPoints { .. } => MetricError::AntipodalPoints { y, z },
                other => other,
            })
    }

    /// Midpoint of two coordinate vectors. For spheres this is the normalized
    /// chord sum scaled back to the radius.
    pub fn midpoint_of(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>, MetricError> {
        match self.kind {
            k if k.is_euclidean() => Ok(u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect()),
            ModelKind::Sphere { radius } => {
                let cos = dot(u, v) / (radius * radius);
                if cos + 1.0 <= ANTIPODAL_TOL {
                    return Err(MetricError::AntipodalPoints { y: 0, z: 0 });
                }
                let sum: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
                let scale = radius / euclidean_norm(&sum);
                Ok(sum.into_iter().map(|x| x * scale).collect())
            }
            _ => Err(MetricError::UnsupportedModel),
        }
    }
}

/// A finite metric space with a validated distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    labels: Option<Vec<String>>,
    model: Option<GeometricModel>,
}

impl FiniteMetricSpace {
    /// Validates a row-major `n x n` matrix. Checks run entry by entry in row
    /// order (finite, nonnegative, zero diagonal, symmetric) and then the
    /// triangle inequality over `(i, j, via)` in lexicographic order; the first
    /// violation found is returned.
    pub fn from_flat(n: usize, dist: Vec<f64>, tol_rel: f64) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if dist.len() != n * n {
            return Err(MetricError::NotSquare {
                row: dist.len() / n,
                len: dist.len() % n,
                n,
            });
        }
        let at = |i: usize, j: usize| dist[i * n + j];
        for i in 0..n {
            for j in 0..n {
                let v = at(i, j);
                if !v.is_finite() {
                    return Err(MetricError::NonFinite { i, j });
                }
                if v < 0.0 {
                    return Err(MetricError::NegativeEntry { i, j, value: v });
                }
                if i == j && v != 0.0 {
                    return Err(MetricError::NonzeroDiagonal { i, value: v });
                }
                if v != at(j, i) {
                    return Err(MetricError::Asymmetric { i, j });
                }
            }
        }
        let max = dist.iter().copied().fold(0.0, f64::max);
        let slack = tol_rel * max;
        for i in 0..n {
            for j in 0..n {
                for via in 0..n {
                    if at(i, j) > at(i, via) + at(via, j) + slack {
                        return Err(MetricError::TriangleViolation { i, j, via });
                    }
                }
            }
        }
        Ok(Self {
            n,
            dist,
            labels: None,
            model: None,
        })
    }

    /// Builds the space induced by a model; the matrix is validated at
    /// [`DEFAULT_TOL_REL`].
    pub fn from_model(model: GeometricModel) -> Result<Self, MetricError> {
        let dist = model.distance_matrix();
        let mut space = Self::from_flat(model.len(), dist, DEFAULT_TOL_REL)?;
        space.model = Some(model);
        Ok(space)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.n {
            return Err(MetricError::LabelCount {
                count: labels.len(),
                n: self.n,
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches a model after checking that it reproduces every distance
    /// within `tol_rel` times the diameter.
    pub fn with_model(mut self, model: GeometricModel, tol_rel: f64) -> Result<Self, MetricError> {
        if model.len() != self.n {
            return Err(MetricError::DimensionMismatch {
                index: 0,
                expected: self.n,
                found: model.len(),
            });
        }
        let slack = tol_rel * self.diameter();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = model.distance(model.point(i), model.point(j));
                if (d - self.d(i, j)).abs() > slack {
                    return Err(MetricError::ModelMismatch { i, j });
                }
            }
        }
        self.model = Some(model);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        let d = self.d(i, j);
        d * d
    }

    /// Row-major distance matrix.
    pub fn as_flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn model(&self) -> Option<&GeometricModel> {
        self.model.as_ref()
    }

    pub fn check_index(&self, index: usize) -> Result<(), MetricError> {
        if index < self.n {
            Ok(())
        } else {
            Err(MetricError::IndexOutOfRange { index, n: self.n })
        }
    }

    /// The subspace on `indices`, in that order (repeats allowed). Used for
    /// subsets as well as relabelings.
    pub fn subspace(&self, indices: &[usize]) -> Result<Self, MetricError> {
        if indices.is_empty() {
            return Err(MetricError::Empty);
        }
        for &index in indices {
            self.check_index(index)?;
        }
        let m = indices.len();
        let mut dist = vec![0.0; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                dist[a * m + b] = self.d(i, j);
            }
        }
        Ok(Self {
            n: m,
            dist,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
            model: self.model.as_ref().map(|model| GeometricModel {
                kind: model.kind,
                coords: indices.iter().map(|&i| model.coords[i].clone()).collect(),
            }),
        })
    }

    /// The space with every distance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, MetricError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(MetricError::InvalidScale(factor));
        }
        let model = self.model.as_ref().map(|model| GeometricModel {
            kind: match model.kind {
                ModelKind::Sphere { radius } => ModelKind::Sphere {
                    radius: radius * factor,
                },
                k => k,
            },
            coords: model
                .coords
                .iter()
                .map(|c| c.iter().map(|x| x * factor).collect())
                .collect(),
        });
        Ok(Self {
            n: self.n,
            dist: self.dist.iter().map(|d| d * factor).collect(),
            labels: self.labels.clone(),
            model,
        })
    }
}

/// Validates a square matrix given as rows.
pub fn validate_metric(rows: &[Vec<f64>], tol_rel: f64) -> Result<FiniteMetricSpace, MetricError> {
    let n = rows.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    let mut flat = Vec::with_capacity(n * n);
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
        flat.extend_from_slice(r);
    }
    FiniteMetricSpace::from_flat(n, flat, tol_rel)
}

/// Shortest-path metric of a weighted undirected graph (Floyd-Warshall).
/// Parallel edges keep the lighter weight.
pub fn graph_metric(n: usize, edges: &[(usize, usize, f64)]) -> Result<FiniteMetricSpace, MetricError> {
    if n == 0 {
        return Err(MetricError::Empty);
    }
    let mut dist = vec![f64::INFINITY; n * n];
    for i in 0..n {
        dist[i * n + i] = 0.0;
    }
    for &(i, j, w) in edges {
        if i >= n || j >= n {
            return Err(MetricError::InvalidEdge {
                i,
                j,
                reason: "endpoint out of range",
            });
        }
        if i == j {
            return Err(MetricError::InvalidEdge {
                i,
                j,
                reason: "self loop",
            });
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(MetricError::InvalidEdge {
                i,
                j,
                reason: "weight must be positive and finite",
            });
        }
        let cur = dist[i * n + j];
        if w < cur {
            dist[i * n + j] = w;
            dist[j * n + i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[i * n + j].min(dist[j * n + i]);
            if d.is_infinite() {
                return Err(MetricError::DisconnectedGraph { from: i, to: j });
            }
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    FiniteMetricSpace::from_flat(n, dist, DEFAULT_TOL_REL)
}

/// Star graph with unit legs; the center is point 0 and the leaves are `1..=leaves`.
pub fn star_graph(leaves: usize) -> Result<FiniteMetricSpace, MetricError> {
    let edges: Vec<_> = (1..=leaves).map(|leaf| (0, leaf, 1.0)).collect();
    graph_metric(leaves + 1, &edges)
}

/// The tripod `K_{1,3}`: center 0, leaves 1, 2, 3.
pub fn tripod() -> FiniteMetricSpace {
    star_graph(3).expect("the tripod is connected")
}

pub fn path_graph(n: usize) -> Result<FiniteMetricSpace, MetricError> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    graph_metric(n, &edges)
}

pub fn cycle_graph(n: usize) -> Result<FiniteMetricSpace, MetricError> {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    if n > 2 {
        edges.push((n - 1, 0, 1.0));
    }
    graph_metric(n, &edges)
}

/// `n` points uniform on the 2-sphere of the given radius, drawn as
/// normalized standard Gaussian triples from the seeded generator.
pub fn sphere_sample(n: usize, seed: u64, radius: f64) -> Result<FiniteMetricSpace, MetricError> {
    if n == 0 {
        return Err(MetricError::Empty);
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(MetricError::InvalidRadius(radius));
    }
    let mut rng = rng::seeded(seed);
    let mut coords = Vec::with_capacity(n);
    while coords.len() < n {
        let g: [f64; 3] = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        let norm = euclidean_norm(&g);
        if norm < 1e-150 {
            continue;
        }
        coords.push(g.iter().map(|x| x * radius / norm).collect());
    }
    sphere_points(coords, radius)
}

/// Space on explicitly given sphere points (they must lie on the sphere).
pub fn sphere_points(coords: Vec<Vec<f64>>, radius: f64) -> Result<FiniteMetricSpace, MetricError> {
    FiniteMetricSpace::from_model(GeometricModel::new(ModelKind::Sphere { radius }, coords)?)
}

pub fn euclidean_space(coords: Vec<Vec<f64>>) -> Result<FiniteMetricSpace, MetricError> {
    FiniteMetricSpace::from_model(GeometricModel::new(ModelKind::Euclidean, coords)?)
}

/// `n` standard Gaussian points in `dim` dimensions, euclidean metric.
pub fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> Result<FiniteMetricSpace, MetricError> {
    if n == 0 {
        return Err(MetricError::Empty);
    }
    let mut rng = rng::seeded(seed);
    let coords = (0..n)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    euclidean_space(coords)
}

/// Points with the `l^p` distance of their coordinates; `p = f64::INFINITY`
/// selects the max norm.
pub fn lp_point_space(coords: Vec<Vec<f64>>, p: f64) -> Result<FiniteMetricSpace, MetricError> {
    if p.is_nan() || p < 1.0 {
        return Err(MetricError::InvalidP(p));
    }
    FiniteMetricSpace::from_model(GeometricModel::new(ModelKind::Lp(p), coords)?)
}

/// `l^2` product of two spaces with the default size cap.
pub fn product_space(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Result<FiniteMetricSpace, MetricError> {
    product_space_capped(x, y, DEFAULT_PRODUCT_CAP)
}

/// `l^2` product `X x Y`. Point `(a, b)` has index `a * |Y| + b`. A euclidean
/// model (concatenated coordinates) is attached when both factors are euclidean.
pub fn product_space_capped(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    cap: usize,
) -> Result<FiniteMetricSpace, MetricError> {
    let (nx, ny) = (x.len(), y.len());
    let size = nx
        .checked_mul(ny)
        .ok_or(MetricError::SizeOverflow { size: usize::MAX, cap })?;
    if size > cap {
        return Err(MetricError::SizeOverflow { size, cap });
    }
    let mut dist = vec![0.0; size * size];
    for a1 in 0..nx {
        for b1 in 0..ny {
            let p = a1 * ny + b1;
            for a2 in 0..nx {
                for b2 in 0..ny {
                    let q = a2 * ny + b2;
                    if q > p {
                        let d = libm::sqrt(x.d2(a1, a2) + y.d2(b1, b2));
                        dist[p * size + q] = d;
                        dist[q * size + p] = d;
                    }
                }
            }
        }
    }
    let mut space = FiniteMetricSpace::from_flat(size, dist, DEFAULT_TOL_REL)?;
    if let (Some(lx), Some(ly)) = (x.labels(), y.labels()) {
        let labels = lx
            .iter()
            .flat_map(|a| ly.iter().map(move |b| format!("({a},{b})")))
            .collect();
        space = space.with_labels(labels)?;
    }
    if let (Some(mx), Some(my)) = (x.model(), y.model()) {
        if mx.kind().is_euclidean() && my.kind().is_euclidean() {
            let coords = mx
                .coords()
                .iter()
                .flat_map(|u| {
                    my.coords()
                        .iter()
                        .map(move |v| u.iter().chain(v.iter()).copied().collect())
                })
                .collect();
            space.model = Some(GeometricModel::new(ModelKind::Euclidean, coords)?);
        }
    }
    Ok(space)
}

/// Midpoint `gamma(1/2)` of the minimal geodesic from `y` to `z` in the model.
pub fn midpoint(model: &GeometricModel, y: usize, z: usize) -> Result<Vec<f64>, MetricError> {
    model.midpoint(y, z)
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn euclidean_norm(u: &[f64]) -> f64 {
    libm::sqrt(dot(u, u))
}

/// `l^p` norm; `p = f64::INFINITY` is the max norm.
pub(crate) fn lp_norm(u: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        u.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else if p == 1.0 {
        u.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        euclidean_norm(u)
    } else {
        libm::pow(u.iter().map(|x| libm::pow(x.abs(), p)).sum::<f64>(), p.recip())
    }
}

fn lp_distance(u: &[f64], v: &[f64], p: f64) -> f64 {
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    lp_norm(&diff, p)
}

/// `radius * angle(u, v)`, with the angle taken as `2 atan2(|u - v|, |u + v|)`:
/// equal to `arccos(<u, v> / r^2)` on the sphere but accurate for nearby points.
fn sphere_distance(u: &[f64], v: &[f64], radius: f64) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * radius * libm::atan2(libm::sqrt(diff), libm::sqrt(sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn two_point_space_is_valid() {
        let s = validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], DEFAULT_TOL_REL).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.d(0, 1), 1.0);
    }

    #[test]
    fn triangle_violation_names_witness() {
        let rows = [
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        assert_eq!(
            validate_metric(&rows, DEFAULT_TOL_REL),
            Err(MetricError::TriangleViolation { i: 0, j: 2, via: 1 })
        );
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            validate_metric(&[vec![0.0, -1.0], vec![-1.0, 0.0]], 1e-9),
            Err(MetricError::NegativeEntry { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            validate_metric(&[vec![0.5, 1.0], vec![1.0, 0.0]], 1e-9),
            Err(MetricError::NonzeroDiagonal { i: 0, .. })
        ));
        assert_eq!(
            validate_metric(&[vec![0.0, 1.0], vec![1.5, 0.0]], 1e-9),
            Err(MetricError::Asymmetric { i: 0, j: 1 })
        );
        assert!(matches!(
            validate_metric(&[vec![0.0, 1.0], vec![1.0]], 1e-9),
            Err(MetricError::NotSquare { row: 1, .. })
        ));
        assert!(matches!(
            validate_metric(&[vec![0.0, f64::NAN], vec![f64::NAN, 0.0]], 1e-9),
            Err(MetricError::NonFinite { .. })
        ));
        assert_eq!(validate_metric(&[], 1e-9), Err(MetricError::Empty));
    }

    #[test]
    fn triangle_slack_is_relative() {
        let rows = [
            vec![0.0, 1e6, 2e6 + 1e-4],
            vec![1e6, 0.0, 1e6],
            vec![2e6 + 1e-4, 1e6, 0.0],
        ];
        assert!(validate_metric(&rows, 1e-9).is_ok());
        assert!(validate_metric(&rows, 1e-12).is_err());
    }

    #[test]
    fn graph_distances() {
        let path = path_graph(3).unwrap();
        assert_eq!(path.d(0, 2), 2.0);
        let star = tripod();
        assert_eq!(star.d(0, 1), 1.0);
        assert_eq!(star.d(1, 2), 2.0);
        assert_eq!(star.d(2, 3), 2.0);
        let c4 = cycle_graph(4).unwrap();
        assert_eq!(c4.d(0, 2), 2.0);
        assert_eq!(c4.d(1, 3), 2.0);
        assert_eq!(c4.d(0, 3), 1.0);
    }

    #[test]
    fn graph_errors() {
        assert_eq!(
            graph_metric(3, &[(0, 1, 1.0)]),
            Err(MetricError::DisconnectedGraph { from: 0, to: 2 })
        );
        assert!(matches!(
            graph_metric(2, &[(0, 1, 0.0)]),
            Err(MetricError::InvalidEdge { .. })
        ));
        assert!(matches!(
            graph_metric(2, &[(0, 2, 1.0)]),
            Err(MetricError::InvalidEdge { .. })
        ));
    }

    #[test]
    fn parallel_edges_keep_lighter() {
        let s = graph_metric(2, &[(0, 1, 3.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(s.d(0, 1), 2.0);
    }

    #[test]
    fn sphere_basics() {
        let one = sphere_sample(1, 3, 1.0).unwrap();
        assert_eq!(one.rows(), vec![vec![0.0]]);
        let s = sphere_points(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 1.0).unwrap();
        assert_close(s.d(0, 1), PI / 2.0, 1e-15);
        let a = sphere_sample(12, 99, 2.0).unwrap();
        let b = sphere_sample(12, 99, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(a.diameter() <= 2.0 * PI);
        assert!(sphere_sample(0, 1, 1.0).is_err());
        assert!(sphere_sample(3, 1, -1.0).is_err());
    }

    #[test]
    fn sphere_points_must_be_on_sphere() {
        assert_eq!(
            sphere_points(vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]], 1.0),
            Err(MetricError::NotOnSphere(1))
        );
    }

    #[test]
    fn lp_distances() {
        let pts = || vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert_close(lp_point_space(pts(), 2.0).unwrap().d(0, 1), SQRT_2, 1e-15);
        assert_eq!(lp_point_space(pts(), 1.0).unwrap().d(0, 1), 2.0);
        assert_eq!(lp_point_space(pts(), f64::INFINITY).unwrap().d(0, 1), 1.0);
        assert_eq!(lp_point_space(pts(), 0.5), Err(MetricError::InvalidP(0.5)));
        assert!(matches!(
            lp_point_space(vec![vec![0.0], vec![1.0, 1.0]], 2.0),
            Err(MetricError::DimensionMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn product_examples() {
        let x = validate_metric(&[vec![0.0, 3.0], vec![3.0, 0.0]], 1e-9).unwrap();
        let y = validate_metric(&[vec![0.0, 4.0], vec![4.0, 0.0]], 1e-9).unwrap();
        let p = product_space(&x, &y).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.d(0, 3), 5.0);

        let single = validate_metric(&[vec![0.0]], 1e-9).unwrap();
        let q = product_space(&x, &single).unwrap();
        assert_eq!(q.as_flat(), x.as_flat());

        let seg = euclidean_space(vec![vec![0.0], vec![1.0]]).unwrap();
        let sq = product_space(&seg, &seg).unwrap();
        assert_close(sq.d(0, 3), SQRT_2, 1e-15);
        let model = sq.model().unwrap();
        assert_eq!(model.kind(), ModelKind::Euclidean);
        assert_eq!(model.point(3), &[1.0, 1.0]);

        assert!(matches!(
            product_space_capped(&sq, &sq, 10),
            Err(MetricError::SizeOverflow { size: 16, cap: 10 })
        ));
    }

    #[test]
    fn midpoints() {
        let e = GeometricModel::new(ModelKind::Euclidean, vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(midpoint(&e, 0, 1).unwrap(), vec![1.0, 0.0]);

        let s = GeometricModel::new(
            ModelKind::Sphere { radius: 1.0 },
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![-1.0, 0.0, 0.0],
            ],
        )
        .unwrap();
        let m = midpoint(&s, 0, 1).unwrap();
        assert_close(m[0], FRAC_1_SQRT_2, 1e-15);
        assert_close(m[1], FRAC_1_SQRT_2, 1e-15);
        assert_close(m[2], 0.0, 1e-15);
        assert_eq!(
            midpoint(&s, 0, 2),
            Err(MetricError::AntipodalPoints { y: 0, z: 2 })
        );

        let l3 = GeometricModel::new(ModelKind::Lp(3.0), vec![vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(midpoint(&l3, 0, 1), Err(MetricError::UnsupportedModel));
        let l2 = GeometricModel::new(ModelKind::Lp(2.0), vec![vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(midpoint(&l2, 0, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn sphere_midpoint_is_equidistant() {
        let space = sphere_sample(10, 5, 3.0).unwrap();
        let model = space.model().unwrap();
        for y in 0..10 {
            for z in 0..10 {
                let m = model.midpoint(y, z).unwrap();
                let half = 0.5 * space.d(y, z);
                let tol = 1e-9 * space.diameter();
                assert_close(model.distance(model.point(y), &m), half, tol);
                assert_close(model.distance(model.point(z), &m), half, tol);
            }
        }
    }

    #[test]
    fn subspace_and_scaling() {
        let s = gaussian_cloud(5, 3, 1).unwrap();
        let sub = s.subspace(&[4, 0, 2]).unwrap();
        assert_eq!(sub.d(0, 1), s.d(4, 0));
        assert_eq!(sub.model().unwrap().point(0), s.model().unwrap().point(4));
        let big = s.scaled(2.0).unwrap();
        assert_eq!(big.d(1, 3), 2.0 * s.d(1, 3));
        assert!(s.subspace(&[7]).is_err());
        assert!(s.scaled(0.0).is_err());
    }

    #[test]
    fn model_must_match_matrix() {
        let s = validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]], 1e-9).unwrap();
        let good = GeometricModel::new(ModelKind::Euclidean, vec![vec![0.0], vec![1.0]]).unwrap();
        let bad = GeometricModel::new(ModelKind::Euclidean, vec![vec![0.0], vec![2.0]]).unwrap();
        assert!(s.clone().with_model(good, 1e-9).is_ok());
        assert_eq!(
            s.with_model(bad, 1e-9),
            Err(MetricError::ModelMismatch { i: 0, j: 1 })
        );
    }
}
