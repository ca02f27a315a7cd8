//! Poincaré-ball geometry (curvature -1): distance and its gradient,
//! Riemannian gradient conversion, retractions and the ball projection.
//!
//! Vectors are plain `f64` slices so the trainer can work on rows of an
//! [`EmbeddingStore`] without copying.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, Purpose};

pub const DEFAULT_EPS: f64 = 1e-5;
pub const DEFAULT_INIT_RADIUS: f64 = 1e-3;

/// Lower bound for `1 - |x|^2` and for `gamma^2 - 1`.
const GUARD: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point with norm {norm} lies outside the open unit ball")]
    OutsideBall { norm: f64 },
    #[error("distance gradient is undefined for coincident points")]
    Coincident,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
fn diff_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_pair(u: &[f64], v: &[f64]) -> Result<(), GeometryError> {
    if u.len() != v.len() {
        return Err(GeometryError::DimensionMismatch { left: u.len(), right: v.len() });
    }
    for p in [u, v] {
        let n = norm_sq(p);
        if n.is_nan() || n >= 1.0 {
            return Err(GeometryError::OutsideBall { norm: n.sqrt() });
        }
    }
    Ok(())
}

/// `arcosh(1 + x)` without the cancellation of the naive form for small `x`.
#[inline]
fn acosh1p(x: f64) -> f64 {
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

/// Distance without domain checks; `1 - |x|^2` is clamped at the guard.
#[inline]
pub(crate) fn distance_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let a = (1.0 - norm_sq(u)).max(GUARD);
    let b = (1.0 - norm_sq(v)).max(GUARD);
    let x = 2.0 * diff_sq(u, v) / (a * b);
    acosh1p(x.max(0.0))
}

/// Poincaré distance `arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2)))`.
pub fn distance(u: &[f64], v: &[f64]) -> Result<f64, GeometryError> {
    check_pair(u, v)?;
    Ok(distance_unchecked(u, v))
}

/// Adds `weight * d/dtheta d(theta, other)` into `out`.
///
/// With `a = 1 - |theta|^2`, `b = 1 - |other|^2`:
/// `d/dtheta = 4 / (b sqrt(g^2 - 1)) * ((|other|^2 - 2<theta,other> + 1) / a^2 * theta - other / a)`.
#[inline]
pub(crate) fn add_partial(theta: &[f64], other: &[f64], weight: f64, out: &mut [f64]) -> Result<(), GeometryError> {
    let dsq = diff_sq(theta, other);
    if dsq == 0.0 {
        return Err(GeometryError::Coincident);
    }
    let theta_sq = norm_sq(theta);
    let other_sq = norm_sq(other);
    let a = (1.0 - theta_sq).max(GUARD);
    let b = (1.0 - other_sq).max(GUARD);
    // gamma - 1 and gamma + 1 kept apart to avoid cancellation.
    let gm1 = 2.0 * dsq / (a * b);
    let g2m1 = (gm1 * (gm1 + 2.0)).max(GUARD);
    let lead = weight * 4.0 / (b * g2m1.sqrt());
    let c_theta = lead * (other_sq - 2.0 * dot(theta, other) + 1.0) / (a * a);
    let c_other = lead / a;
    for ((o, t), x) in out.iter_mut().zip(theta).zip(other) {
        *o += c_theta * t - c_other * x;
    }
    Ok(())
}

/// Euclidean gradient of [`distance`] with respect to `u` and to `v`.
pub fn distance_grad(u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>), GeometryError> {
    check_pair(u, v)?;
    let mut gu = vec![0.0; u.len()];
    let mut gv = vec![0.0; v.len()];
    add_partial(u, v, 1.0, &mut gu)?;
    add_partial(v, u, 1.0, &mut gv)?;
    Ok((gu, gv))
}

/// `(1 - |theta|^2)^2 / 4`, the inverse metric scaling at `theta`.
#[inline]
pub fn riemannian_factor(theta: &[f64]) -> f64 {
    let a = 1.0 - norm_sq(theta);
    a * a / 4.0
}

/// Converts a Euclidean gradient at `theta` into the Riemannian gradient.
pub fn to_riemannian(theta: &[f64], euclid_grad: &[f64]) -> Vec<f64> {
    let f = riemannian_factor(theta);
    euclid_grad.iter().map(|g| f * g).collect()
}

/// Pulls `theta` back to norm `1 - eps` along its ray when it has left the
/// closed ball of that radius. Points inside are untouched.
pub fn project_in_place(theta: &mut [f64], eps: f64) {
    let max_norm = 1.0 - eps;
    let n = norm(theta);
    if n <= max_norm {
        return;
    }
    let mut scale = max_norm / n;
    for x in theta.iter_mut() {
        *x *= scale;
    }
    // Rounding can leave the result one ulp outside.
    while norm(theta) > max_norm {
        scale = 1.0 - f64::EPSILON;
        for x in theta.iter_mut() {
            *x *= scale;
        }
    }
}

pub fn project(theta: &[f64], eps: f64) -> Vec<f64> {
    let mut out = theta.to_vec();
    project_in_place(&mut out, eps);
    out
}

/// First-order retraction `theta + step`, followed by projection.
pub fn retract_simple(theta: &[f64], step: &[f64], eps: f64) -> Vec<f64> {
    let mut out = theta.to_vec();
    retract_simple_in_place(&mut out, step, eps);
    out
}

pub(crate) fn retract_simple_in_place(theta: &mut [f64], step: &[f64], eps: f64) {
    for (t, s) in theta.iter_mut().zip(step) {
        *t += s;
    }
    project_in_place(theta, eps);
}

/// Möbius addition `x ⊕ y`.
pub fn mobius_add(x: &[f64], y: &[f64]) -> Vec<f64> {
    let xy = dot(x, y);
    let xx = norm_sq(x);
    let yy = norm_sq(y);
    let denom = 1.0 + 2.0 * xy + xx * yy;
    let cx = (1.0 + 2.0 * xy + yy) / denom;
    let cy = (1.0 - xx) / denom;
    x.iter().zip(y).map(|(a, b)| cx * a + cy * b).collect()
}

/// Exponential-map retraction `theta ⊕ tanh(lambda |s| / 2) s / |s|` with
/// `lambda = 2 / (1 - |theta|^2)`, followed by projection.
pub fn retract_exp(theta: &[f64], step: &[f64], eps: f64) -> Vec<f64> {
    let s_norm = norm(step);
    if s_norm == 0.0 {
        return project(theta, eps);
    }
    let lambda = 2.0 / (1.0 - norm_sq(theta)).max(GUARD);
    let t = (lambda * s_norm / 2.0).tanh() / s_norm;
    let direction: Vec<f64> = step.iter().map(|s| t * s).collect();
    let mut out = mobius_add(theta, &direction);
    project_in_place(&mut out, eps);
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retraction {
    #[default]
    Simple,
    Exp,
}

impl Retraction {
    pub(crate) fn apply_in_place(self, theta: &mut [f64], step: &[f64], eps: f64) {
        match self {
            Retraction::Simple => retract_simple_in_place(theta, step, eps),
            Retraction::Exp => {
                let next = retract_exp(theta, step, eps);
                theta.copy_from_slice(&next);
            }
        }
    }
}

impl FromStr for Retraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(Retraction::Simple),
            "exp" => Ok(Retraction::Exp),
            other => Err(format!("unknown retraction `{other}` (expected simple or exp)")),
        }
    }
}

impl fmt::Display for Retraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Retraction::Simple => "simple",
            Retraction::Exp => "exp",
        })
    }
}

/// A validated point of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincarePoint(Vec<f64>);

impl PoincarePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        let n = norm(&coords);
        if n.is_nan() || n >= 1.0 {
            return Err(GeometryError::OutsideBall { norm: n });
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &PoincarePoint) -> Result<f64, GeometryError> {
        distance(&self.0, &other.0)
    }
}

/// Row-major matrix of ball points. The trailing `virtual_rows` rows belong to
/// synthetic nodes and are excluded from evaluation and analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    eps: f64,
    virtual_rows: usize,
    data: Vec<f64>,
}

impl EmbeddingStore {
    pub fn from_rows(rows: &[Vec<f64>], dim: usize, eps: f64) -> Result<Self, GeometryError> {
        check_eps(eps)?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(GeometryError::DimensionMismatch { left: row.len(), right: dim });
            }
            let n = norm(row);
            if n.is_nan() || n >= 1.0 {
                return Err(GeometryError::OutsideBall { norm: n });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, eps, virtual_rows: 0, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Total rows including virtual ones.
    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    /// Rows that belong to real graph nodes.
    pub fn node_rows(&self) -> usize {
        self.rows() - self.virtual_rows
    }

    pub fn virtual_rows(&self) -> usize {
        self.virtual_rows
    }

    pub(crate) fn set_virtual_rows(&mut self, count: usize) {
        assert!(count <= self.rows());
        self.virtual_rows = count;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Overwrites row `i`, projecting it into the guarded ball.
    pub fn set_row(&mut self, i: usize, coords: &[f64]) {
        let eps = self.eps;
        let row = self.row_mut(i);
        row.copy_from_slice(coords);
        project_in_place(row, eps);
    }

    pub fn norms(&self) -> Vec<f64> {
        self.data.chunks_exact(self.dim).map(norm).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    /// Store holding only the real-node rows.
    pub fn without_virtual(&self) -> EmbeddingStore {
        EmbeddingStore {
            dim: self.dim,
            eps: self.eps,
            virtual_rows: 0,
            data: self.data[..self.node_rows() * self.dim].to_vec(),
        }
    }

    /// Applies the linear map `m` (row-major `dim x dim`) to every row.
    pub fn transform(&self, m: &[f64]) -> EmbeddingStore {
        assert_eq!(m.len(), self.dim * self.dim);
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.dim) {
            for r in m.chunks_exact(self.dim) {
                data.push(dot(r, row));
            }
        }
        EmbeddingStore { data, ..self.clone() }
    }
}

fn check_eps(eps: f64) -> Result<(), GeometryError> {
    if eps > 0.0 && eps < 0.1 {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!("eps must lie in (0, 0.1), got {eps}")))
    }
}

/// Uniform initialization in the box `[-r/sqrt(K), r/sqrt(K)]^K`, which keeps
/// every row within norm `r`.
pub fn init_embeddings(
    row_count: usize,
    dim: usize,
    init_radius: f64,
    eps: f64,
    seed: u64,
) -> Result<EmbeddingStore, GeometryError> {
    if dim == 0 {
        return Err(GeometryError::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(init_radius > 0.0 && init_radius < 1.0) {
        return Err(GeometryError::InvalidParameter(format!("init radius must lie in (0, 1), got {init_radius}")));
    }
    check_eps(eps)?;
    let half_width = init_radius / (dim as f64).sqrt();
    let mut rng = stream(seed, Purpose::Init, 0);
    let data = (0..row_count * dim).map(|_| rng.random_range(-half_width..=half_width)).collect();
    Ok(EmbeddingStore { dim, eps, virtual_rows: 0, data })
}
