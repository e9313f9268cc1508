//! Small dense linear algebra, orthonormal frames and finite differences.
//!
//! Everything here works on short vectors (dimension at most ~16) expressed
//! in a fixed chart or frame. Dense `nalgebra` storage is used throughout.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Pivot norms below this are treated as linear dependence.
pub const PIVOT_TOL: f64 = 1e-10;

/// Default step for first derivatives.
pub const FIRST_STEP: f64 = 1e-4;
/// Default step for second derivatives.
pub const SECOND_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("input vector {index} is dependent on its predecessors (pivot norm {norm:e})")]
    DependentInput { index: usize, norm: f64 },
    #[error("dimension {0} is too small (need at least 2)")]
    BadDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("field evaluation failed: {0}")]
    EvaluationFailure(String),
}

/// Symmetric positive-definite matrix used as an inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix(Matrix);

impl MetricMatrix {
    pub fn new(entries: Matrix) -> Result<Self, GeomError> {
        if entries.nrows() != entries.ncols() {
            return Err(GeomError::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let asym = (&entries - entries.transpose()).amax();
        if asym > 1e-12 * entries.amax().max(1.0) {
            return Err(GeomError::NotSymmetric(asym));
        }
        if entries.iter().any(|v| !v.is_finite()) || entries.clone().cholesky().is_none() {
            return Err(GeomError::NotPositiveDefinite);
        }
        Ok(Self(entries))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn inverse(&self) -> Matrix {
        // Positive definiteness was checked at construction.
        self.0
            .clone()
            .cholesky()
            .expect("metric is positive definite")
            .inverse()
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.0 * y)[(0, 0)]
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.inner(x, x).sqrt()
    }
}

/// An orthonormal pair spanning a tangent 2-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoFrame {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TwoFrame {
    pub fn new(x: Vector, y: Vector) -> Self {
        Self {
            x: x.as_slice().to_vec(),
            y: y.as_slice().to_vec(),
        }
    }

    pub fn x(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }

    pub fn y(&self) -> Vector {
        Vector::from_column_slice(&self.y)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Largest deviation from orthonormality under the Euclidean product.
    pub fn orthonormality_defect(&self) -> f64 {
        let x = self.x();
        let y = self.y();
        let dx = (x.dot(&x) - 1.0).abs();
        let dy = (y.dot(&y) - 1.0).abs();
        dx.max(dy).max(x.dot(&y).abs())
    }
}

/// Classical Gram–Schmidt with one reorthogonalization pass.
///
/// The first output is parallel to the first input and the outputs span the
/// same subspace as the inputs.
pub fn gram_schmidt(vectors: &[Vector], metric: &MetricMatrix) -> Result<Vec<Vector>, GeomError> {
    let n = metric.dim();
    let mut basis: Vec<Vector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            let gw = metric.matrix() * &w;
            let coeffs: Vec<f64> = basis.iter().map(|q| q.dot(&gw)).collect();
            for (q, c) in basis.iter().zip(coeffs) {
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = metric.norm(&w);
        if !(norm >= PIVOT_TOL) {
            return Err(GeomError::DependentInput { index, norm });
        }
        basis.push(w / norm);
    }
    Ok(basis)
}

/// Deterministic generator for `(seed, stream)`; distinct streams are independent.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)))
}

/// Orthonormalize an arbitrary pair under the Euclidean product.
pub fn orthonormal_pair(x: &Vector, y: &Vector) -> Result<TwoFrame, GeomError> {
    let (u, v) = orthonormalize_pair(x, y)?;
    Ok(TwoFrame::new(u, v))
}

/// Euclidean Gram–Schmidt of a pair, with one reorthogonalization pass.
pub fn orthonormalize_pair(x: &Vector, y: &Vector) -> Result<(Vector, Vector), GeomError> {
    if x.len() != y.len() {
        return Err(GeomError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let nx = x.norm();
    if !(nx >= PIVOT_TOL) {
        return Err(GeomError::DependentInput { index: 0, norm: nx });
    }
    let u = x / nx;
    let mut w = y.clone();
    for _pass in 0..2 {
        let c = u.dot(&w);
        w.axpy(-c, &u, 1.0);
    }
    let nw = w.norm();
    if !(nw >= PIVOT_TOL) {
        return Err(GeomError::DependentInput { index: 1, norm: nw });
    }
    Ok((u, w / nw))
}

pub fn sample_two_frame(rng: &mut ChaCha8Rng, dim: usize) -> Result<TwoFrame, GeomError> {
    if dim < 2 {
        return Err(GeomError::BadDimension(dim));
    }
    loop {
        let x = gaussian_vector(rng, dim);
        let y = gaussian_vector(rng, dim);
        match orthonormal_pair(&x, &y) {
            Ok(frame) => return Ok(frame),
            Err(GeomError::DependentInput { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Uniformly distributed random 2-plane in `R^dim`, deterministic in `seed`.
pub fn random_two_frame(dim: usize, seed: u64) -> Result<TwoFrame, GeomError> {
    sample_two_frame(&mut rng_for(seed, 0), dim)
}

fn shifted(point: &[f64], index: usize, delta: f64) -> Vec<f64> {
    let mut p = point.to_vec();
    p[index] += delta;
    p
}

fn check_index(point: &[f64], index: usize) -> Result<(), GeomError> {
    if index >= point.len() {
        return Err(GeomError::DimensionMismatch {
            expected: point.len(),
            found: index + 1,
        });
    }
    Ok(())
}

/// Second-order central difference `(f(x+he) - f(x-he)) / 2h`.
pub fn fd_derivative<F>(field: F, point: &[f64], index: usize, step: f64) -> Result<f64, GeomError>
where
    F: Fn(&[f64]) -> Result<f64, GeomError>,
{
    check_index(point, index)?;
    let fp = field(&shifted(point, index, step))?;
    let fm = field(&shifted(point, index, -step))?;
    Ok((fp - fm) / (2.0 * step))
}

/// Fourth-order central difference for vector-valued maps.
pub fn fd_derivative4_vec<F>(map: F, point: &[f64], index: usize, step: f64) -> Result<Vec<f64>, GeomError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, GeomError>,
{
    check_index(point, index)?;
    let p2 = map(&shifted(point, index, 2.0 * step))?;
    let p1 = map(&shifted(point, index, step))?;
    let m1 = map(&shifted(point, index, -step))?;
    let m2 = map(&shifted(point, index, -2.0 * step))?;
    Ok((0..p1.len())
        .map(|k| (-p2[k] + 8.0 * p1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * step))
        .collect())
}

/// Fourth-order central difference for scalar fields.
pub fn fd_derivative4<F>(field: F, point: &[f64], index: usize, step: f64) -> Result<f64, GeomError>
where
    F: Fn(&[f64]) -> Result<f64, GeomError>,
{
    let d = fd_derivative4_vec(|p| field(p).map(|v| vec![v]), point, index, step)?;
    Ok(d[0])
}

/// Fourth-order second partial derivative `∂_i ∂_j` of a vector-valued map.
///
/// Diagonal entries use the five-point stencil, mixed entries nest the
/// first-derivative stencil.
pub fn fd_second4_vec<F>(map: F, point: &[f64], i: usize, j: usize, step: f64) -> Result<Vec<f64>, GeomError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, GeomError>,
{
    check_index(point, i)?;
    check_index(point, j)?;
    if i == j {
        let f0 = map(point)?;
        let p2 = map(&shifted(point, i, 2.0 * step))?;
        let p1 = map(&shifted(point, i, step))?;
        let m1 = map(&shifted(point, i, -step))?;
        let m2 = map(&shifted(point, i, -2.0 * step))?;
        let h2 = step * step;
        return Ok((0..f0.len())
            .map(|k| (-p2[k] + 16.0 * p1[k] - 30.0 * f0[k] + 16.0 * m1[k] - m2[k]) / (12.0 * h2))
            .collect());
    }
    fd_derivative4_vec(|p| fd_derivative4_vec(&map, p, j, step), point, i, step)
}
