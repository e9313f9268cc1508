//! Chart-based extrinsic geometry of immersed warped products `B ×_f F`
//! in real space forms.
//!
//! Everything is computed from coordinate charts with fourth-order central
//! differences: tangent frames and the induced metric from the map, ambient
//! Christoffel symbols from the ambient metric, and the second fundamental
//! form as the normal part of the ambient covariant derivative.
//!
//! The Laplacian uses the geometers' sign, `Δf = −div grad f`, so on an
//! interval with metric `dt²` it is `−f″`. It acts on the base `B` only.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{chen_bounds, ChenInterval, SectionalRange};
use crate::expr::{Expr, ExprError};
use crate::geomcore::{
    fd_derivative4, fd_derivative4_vec, fd_second4_vec, gram_schmidt, rng_for, GeomError, Matrix, MetricMatrix,
    Vector, FIRST_STEP, SECOND_STEP,
};
use crate::spaces::{AmbientModel, ModelKind, SpaceError};

/// Default tolerance of the Δf/f containment test.
pub const INEQUALITY_TOL: f64 = 1e-3;
/// Maximum entrywise deviation from `g_B ⊕ f²g_F` accepted as a warped product.
pub const WARPED_TOL: f64 = 1e-6;
/// Relative singular-value floor of the differential.
pub const RANK_TOL: f64 = 1e-8;

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImmersionError {
    #[error("differential has rank below {expected} (relative singular value {ratio:e})")]
    RankDeficient { expected: usize, ratio: f64 },
    #[error("{0} metric is singular or not positive definite")]
    SingularMetric(&'static str),
    #[error("point {index}: induced metric deviates from g_B + f^2 g_F by {deviation:e}")]
    NotAWarpedProductMetric { index: usize, deviation: f64 },
    #[error("warping function is not positive ({value}) at {point:?}")]
    NonPositiveWarping { value: f64, point: Vec<f64> },
    #[error("chart immersions are only supported into real space forms, got {0}")]
    UnsupportedAmbient(ModelKind),
    #[error("expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid expression in {field}: {source}")]
    InvalidExpression { field: String, source: ExprError },
    #[error("invalid immersion spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Box in a chart, one closed interval per coordinate.
pub type Domain = Vec<(f64, f64)>;

/// `(B ×_f F, g_B + f² g_F)` described through charts of `B` and `F`.
#[derive(Clone)]
pub struct WarpedProductSpec {
    pub m1: usize,
    pub m2: usize,
    pub base_chart_metric: MatrixField,
    pub fiber_chart_metric: MatrixField,
    pub warping: ScalarField,
    pub base_domain: Domain,
    pub fiber_domain: Domain,
}

impl fmt::Debug for WarpedProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpedProductSpec")
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("base_domain", &self.base_domain)
            .field("fiber_domain", &self.fiber_domain)
            .finish_non_exhaustive()
    }
}

impl WarpedProductSpec {
    pub fn dim(&self) -> usize {
        self.m1 + self.m2
    }
}

/// Chart map `ψ : B × F → M̄` into a real space form chart.
#[derive(Clone)]
pub struct ChartImmersion {
    pub map: VectorField,
    pub ambient_metric: MatrixField,
    pub ambient_kind: AmbientModel,
}

impl fmt::Debug for ChartImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartImmersion")
            .field("ambient_kind", &self.ambient_kind)
            .finish_non_exhaustive()
    }
}

impl ChartImmersion {
    pub fn new(map: VectorField, ambient_metric: MatrixField, ambient_kind: AmbientModel) -> Result<Self, ImmersionError> {
        if ambient_kind.kind != ModelKind::RealSpaceForm {
            return Err(ImmersionError::UnsupportedAmbient(ambient_kind.kind));
        }
        Ok(Self {
            map,
            ambient_metric,
            ambient_kind,
        })
    }

    /// Immersion into the space form of curvature `c` and dimension `n`,
    /// using [`space_form_chart`].
    pub fn into_space_form(map: VectorField, c: f64, n: usize) -> Result<Self, ImmersionError> {
        Self::new(map, space_form_chart(c), AmbientModel::real(c, n)?)
    }

    fn eval(&self, q: &[f64]) -> Result<Vec<f64>, GeomError> {
        let v = (self.map)(q);
        if v.len() != self.ambient_kind.n {
            return Err(GeomError::DimensionMismatch {
                expected: self.ambient_kind.n,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::EvaluationFailure(format!("map is not finite at {q:?}")));
        }
        Ok(v)
    }
}

/// Conformally flat chart of the space form of curvature `c`:
/// `4δ/(1 + c|x|²)²` for `c ≠ 0` and the Euclidean metric for `c = 0`.
pub fn space_form_chart(c: f64) -> MatrixField {
    if c == 0.0 {
        return Arc::new(|x: &[f64]| Matrix::identity(x.len(), x.len()));
    }
    Arc::new(move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let lambda = 4.0 / (1.0 + c * r2).powi(2);
        Matrix::identity(x.len(), x.len()) * lambda
    })
}

fn flat_metric() -> MatrixField {
    Arc::new(|x: &[f64]| Matrix::identity(x.len(), x.len()))
}

fn eval_metric(field: &MatrixField, x: &[f64], what: &'static str) -> Result<MetricMatrix, ImmersionError> {
    let g = field(x);
    if g.nrows() != x.len() || g.ncols() != x.len() {
        return Err(ImmersionError::DimensionMismatch {
            expected: x.len(),
            found: g.nrows(),
        });
    }
    MetricMatrix::new(g).map_err(|_| ImmersionError::SingularMetric(what))
}

fn flat(m: &Matrix) -> Vec<f64> {
    m.as_slice().to_vec()
}

/// Christoffel symbols `Γ^k_{ab}` of a chart metric; entry `k` is the matrix `(a, b)`.
pub fn christoffel(metric: &MatrixField, x: &[f64]) -> Result<Vec<Matrix>, ImmersionError> {
    let n = x.len();
    let g = eval_metric(metric, x, "ambient")?;
    let ginv = g.inverse();
    let field = |q: &[f64]| Ok(flat(&metric(q)));
    let dg: Vec<Matrix> = (0..n)
        .map(|c| fd_derivative4_vec(field, x, c, FIRST_STEP).map(|d| Matrix::from_vec(n, n, d)))
        .collect::<Result<_, _>>()?;
    // first kind: Γ_{l,ab} = ½(∂_a g_lb + ∂_b g_la − ∂_l g_ab)
    let mut out = vec![Matrix::zeros(n, n); n];
    for a in 0..n {
        for b in 0..n {
            let lowered: Vec<f64> = (0..n)
                .map(|l| 0.5 * (dg[a][(l, b)] + dg[b][(l, a)] - dg[l][(a, b)]))
                .collect();
            for (k, gamma) in out.iter_mut().enumerate() {
                gamma[(a, b)] = (0..n).map(|l| ginv[(k, l)] * lowered[l]).sum();
            }
        }
    }
    Ok(out)
}

fn contract(gamma: &[Matrix], u: &Vector, v: &Vector) -> Vector {
    Vector::from_iterator(gamma.len(), gamma.iter().map(|g| (u.transpose() * g * v)[(0, 0)]))
}

/// Sectional curvature of a chart metric at `x` on the plane spanned by `u, v`.
pub fn chart_sectional(metric: &MatrixField, x: &[f64], u: &Vector, v: &Vector) -> Result<f64, ImmersionError> {
    let n = x.len();
    let g = eval_metric(metric, x, "ambient")?;
    let gamma = christoffel(metric, x)?;
    let field = |q: &[f64]| {
        christoffel(metric, q)
            .map(|gs| gs.iter().flat_map(|m| m.as_slice().to_vec()).collect::<Vec<f64>>())
            .map_err(|e| GeomError::EvaluationFailure(e.to_string()))
    };
    // dgamma[i][l] = ∂_i Γ^l
    let dgamma: Vec<Vec<Matrix>> = (0..n)
        .map(|i| {
            fd_derivative4_vec(field, x, i, SECOND_STEP)
                .map(|d| d.chunks(n * n).map(|c| Matrix::from_column_slice(n, n, c)).collect())
        })
        .collect::<Result<_, _>>()?;
    // R(u,v)v = ∇_u∇_v v − ∇_v∇_u v in components:
    // R^l_{ijk} = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}
    let mut ruvv = Vector::zeros(n);
    for l in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let w = u[i] * v[j] * v[k];
                    if w == 0.0 {
                        continue;
                    }
                    let mut r = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                    for p in 0..n {
                        r += gamma[l][(i, p)] * gamma[p][(j, k)] - gamma[l][(j, p)] * gamma[p][(i, k)];
                    }
                    acc += r * w;
                }
            }
        }
        ruvv[l] = acc;
    }
    let denom = g.inner(u, u) * g.inner(v, v) - g.inner(u, v).powi(2);
    if !(denom > 1e-14) {
        return Err(GeomError::DependentInput { index: 1, norm: denom }.into());
    }
    Ok(g.inner(&ruvv, u) / denom)
}

/// Local extrinsic data of a chart immersion at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedGeometry {
    pub image: Vec<f64>,
    /// Coordinate tangents `∂_iψ`.
    pub tangents: Vec<Vector>,
    /// Induced metric `g_ij = ḡ(∂_iψ, ∂_jψ)`.
    pub metric: Matrix,
    /// `h(∂_i, ∂_j)` stored row-major at `i·m + j`.
    pub second_fundamental: Vec<Vector>,
    pub ambient_metric: Matrix,
}

impl InducedGeometry {
    pub fn dim(&self) -> usize {
        self.tangents.len()
    }

    pub fn h(&self, i: usize, j: usize) -> &Vector {
        &self.second_fundamental[i * self.dim() + j]
    }

    /// Normal part of an ambient vector.
    pub fn normal_part(&self, w: &Vector) -> Result<Vector, ImmersionError> {
        let g = MetricMatrix::new(self.metric.clone()).map_err(|_| ImmersionError::SingularMetric("induced"))?;
        Ok(w - self.tangential_coords(&g.inverse(), w).1)
    }

    fn tangential_coords(&self, ginv: &Matrix, w: &Vector) -> (Vector, Vector) {
        let m = self.dim();
        let pairing = Vector::from_iterator(m, self.tangents.iter().map(|e| (e.transpose() * &self.ambient_metric * w)[(0, 0)]));
        let coeffs = ginv * pairing;
        let mut t = Vector::zeros(w.len());
        for (e, c) in self.tangents.iter().zip(coeffs.iter()) {
            t.axpy(*c, e, 1.0);
        }
        (coeffs, t)
    }
}

fn tangent_frame(imm: &ChartImmersion, point: &[f64]) -> Result<(Vec<f64>, Vec<Vector>, Matrix, MetricMatrix), ImmersionError> {
    let image = imm.eval(point)?;
    let m = point.len();
    let tangents: Vec<Vector> = (0..m)
        .map(|i| fd_derivative4_vec(|q| imm.eval(q), point, i, FIRST_STEP).map(Vector::from_vec))
        .collect::<Result<_, _>>()?;
    let jac = Matrix::from_columns(&tangents);
    let sv = jac.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), if sv.len() < m { 0.0 } else { sv.min() });
    if !(smin > RANK_TOL * smax) {
        return Err(ImmersionError::RankDeficient {
            expected: m,
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let gbar = eval_metric(&imm.ambient_metric, &image, "ambient")?;
    let g = jac.transpose() * gbar.matrix() * &jac;
    let g = MetricMatrix::new(0.5 * (&g + g.transpose())).map_err(|_| ImmersionError::SingularMetric("induced"))?;
    Ok((image, tangents, gbar.matrix().clone(), g))
}

/// Induced metric and second fundamental form at a chart point.
pub fn induced_geometry(imm: &ChartImmersion, point: &[f64]) -> Result<InducedGeometry, ImmersionError> {
    let m = point.len();
    let (image, tangents, gbar, g) = tangent_frame(imm, point)?;
    let gamma = christoffel(&imm.ambient_metric, &image)?;
    let ginv = g.inverse();
    let mut geo = InducedGeometry {
        image,
        tangents,
        metric: g.matrix().clone(),
        second_fundamental: Vec::with_capacity(m * m),
        ambient_metric: gbar,
    };
    for i in 0..m {
        for j in 0..m {
            let d2 = Vector::from_vec(fd_second4_vec(|q| imm.eval(q), point, i, j, SECOND_STEP)?);
            let cov = d2 + contract(&gamma, &geo.tangents[i], &geo.tangents[j]);
            let (_, tan) = geo.tangential_coords(&ginv, &cov);
            geo.second_fundamental.push(cov - tan);
        }
    }
    Ok(geo)
}

/// `(H², ‖h‖²)` from the trace and norm of `h` in an orthonormal frame.
pub fn mean_and_norms(metric: &Matrix, h: &[Vector], ambient_metric: &Matrix) -> Result<(f64, f64), ImmersionError> {
    let m = metric.nrows();
    if h.len() != m * m {
        return Err(ImmersionError::DimensionMismatch {
            expected: m * m,
            found: h.len(),
        });
    }
    let g = MetricMatrix::new(metric.clone()).map_err(|_| ImmersionError::SingularMetric("induced"))?;
    let gbar = MetricMatrix::new(ambient_metric.clone()).map_err(|_| ImmersionError::SingularMetric("ambient"))?;
    let coords: Vec<Vector> = (0..m).map(|i| Vector::from_fn(m, |k, _| f64::from(u8::from(k == i)))).collect();
    let frame = gram_schmidt(&coords, &g)?;
    let n = ambient_metric.nrows();
    let h_frame = |a: &Vector, b: &Vector| {
        let mut out = Vector::zeros(n);
        for i in 0..m {
            for j in 0..m {
                out.axpy(a[i] * b[j], &h[i * m + j], 1.0);
            }
        }
        out
    };
    let mut trace = Vector::zeros(n);
    let mut norm2 = 0.0;
    for a in &frame {
        trace += h_frame(a, a);
        for b in &frame {
            let hab = h_frame(a, b);
            norm2 += gbar.inner(&hab, &hab);
        }
    }
    let mean = trace / m as f64;
    Ok((gbar.inner(&mean, &mean), norm2))
}

/// `Δf = −(1/√det g) ∂_i(√det g g^{ij} ∂_j f)` on the base chart.
pub fn laplacian_base(spec: &WarpedProductSpec, base_point: &[f64]) -> Result<f64, ImmersionError> {
    if base_point.len() != spec.m1 {
        return Err(ImmersionError::DimensionMismatch {
            expected: spec.m1,
            found: base_point.len(),
        });
    }
    let f = |q: &[f64]| {
        let v = (spec.warping)(q);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeomError::EvaluationFailure(format!("warping is not finite at {q:?}")))
        }
    };
    let flux = |q: &[f64]| -> Result<Vec<f64>, GeomError> {
        let g = eval_metric(&spec.base_chart_metric, q, "base")
            .map_err(|e| GeomError::EvaluationFailure(e.to_string()))?;
        let grad = Vector::from_iterator(spec.m1, (0..spec.m1).map(|j| fd_derivative4(f, q, j, FIRST_STEP)).collect::<Result<Vec<_>, _>>()?);
        let vol = g.matrix().determinant().sqrt();
        Ok((g.inverse() * grad * vol).as_slice().to_vec())
    };
    let g0 = eval_metric(&spec.base_chart_metric, base_point, "base")?;
    let mut div = 0.0;
    for i in 0..spec.m1 {
        div += fd_derivative4_vec(flux, base_point, i, SECOND_STEP)?[i];
    }
    Ok(-div / g0.matrix().determinant().sqrt())
}

/// Shape operator `A_N ∂_j = −(∇̄_{∂_j} N)ᵀ` for the normal field obtained by
/// projecting the constant ambient vector `w` onto the normal bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    /// `N` at the base point.
    pub normal: Vector,
    /// `A_N ∂_j` as ambient vectors.
    pub images: Vec<Vector>,
}

fn normal_field(imm: &ChartImmersion, q: &[f64], w: &Vector) -> Result<Vector, ImmersionError> {
    let (image, tangents, gbar, g) = tangent_frame(imm, q)?;
    let geo = InducedGeometry {
        image,
        tangents,
        metric: g.matrix().clone(),
        second_fundamental: Vec::new(),
        ambient_metric: gbar,
    };
    Ok(w - geo.tangential_coords(&g.inverse(), w).1)
}

pub fn shape_operator(imm: &ChartImmersion, point: &[f64], w: &Vector) -> Result<ShapeOperator, ImmersionError> {
    let m = point.len();
    let (image, tangents, gbar, g) = tangent_frame(imm, point)?;
    let gamma = christoffel(&imm.ambient_metric, &image)?;
    let normal = normal_field(imm, point, w)?;
    let geo = InducedGeometry {
        image,
        tangents,
        metric: g.matrix().clone(),
        second_fundamental: Vec::new(),
        ambient_metric: gbar,
    };
    let ginv = g.inverse();
    let field = |q: &[f64]| {
        normal_field(imm, q, w)
            .map(|v| v.as_slice().to_vec())
            .map_err(|e| GeomError::EvaluationFailure(e.to_string()))
    };
    let images = (0..m)
        .map(|j| {
            let dn = Vector::from_vec(fd_derivative4_vec(field, point, j, SECOND_STEP)?);
            let cov = dn + contract(&gamma, &geo.tangents[j], &normal);
            Ok(-geo.tangential_coords(&ginv, &cov).1)
        })
        .collect::<Result<Vec<_>, ImmersionError>>()?;
    Ok(ShapeOperator { normal, images })
}

/// Result of the Δf/f containment test at one chart point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicReport {
    pub point: Vec<f64>,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub h_norm2: f64,
    pub f: f64,
    pub laplacian_f: f64,
    pub delta_f_over_f: f64,
    pub chen: ChenInterval,
    pub pass: bool,
}

fn warped_deviation(spec: &WarpedProductSpec, point: &[f64], metric: &Matrix) -> Result<f64, ImmersionError> {
    let (base, fiber) = point.split_at(spec.m1);
    let gb = eval_metric(&spec.base_chart_metric, base, "base")?;
    let gf = eval_metric(&spec.fiber_chart_metric, fiber, "fiber")?;
    let f = (spec.warping)(base);
    let mut expected = Matrix::zeros(spec.dim(), spec.dim());
    expected.view_mut((0, 0), (spec.m1, spec.m1)).copy_from(gb.matrix());
    expected
        .view_mut((spec.m1, spec.m1), (spec.m2, spec.m2))
        .copy_from(&(gf.matrix() * (f * f)));
    Ok((metric - expected).amax())
}

fn report_at(
    spec: &WarpedProductSpec,
    imm: &ChartImmersion,
    index: usize,
    point: &[f64],
    range: &SectionalRange,
    tol: f64,
) -> Result<ExtrinsicReport, ImmersionError> {
    if point.len() != spec.dim() {
        return Err(ImmersionError::DimensionMismatch {
            expected: spec.dim(),
            found: point.len(),
        });
    }
    let base = &point[..spec.m1];
    let f = (spec.warping)(base);
    if !(f > 0.0) {
        return Err(ImmersionError::NonPositiveWarping {
            value: f,
            point: point.to_vec(),
        });
    }
    let geo = induced_geometry(imm, point)?;
    let deviation = warped_deviation(spec, point, &geo.metric)?;
    if !(deviation <= WARPED_TOL) {
        return Err(ImmersionError::NotAWarpedProductMetric { index, deviation });
    }
    let (h2, h_norm2) = mean_and_norms(&geo.metric, &geo.second_fundamental, &geo.ambient_metric)?;
    let laplacian_f = laplacian_base(spec, base)?;
    let ratio = laplacian_f / f;
    let chen = chen_bounds(spec.m1, spec.m2, h2, h_norm2, range.theorem_lo, range.theorem_hi);
    let pass = chen.contains(ratio, tol);
    Ok(ExtrinsicReport {
        point: point.to_vec(),
        h2,
        h_norm2,
        f,
        laplacian_f,
        delta_f_over_f: ratio,
        chen,
        pass,
    })
}

/// Δf/f against the Chen interval at every point, using the proven sectional
/// constants `range.theorem_lo/hi` of the ambient space.
///
/// Points are evaluated in parallel; the output follows input order.
pub fn check_inequality(
    spec: &WarpedProductSpec,
    imm: &ChartImmersion,
    points: &[Vec<f64>],
    range: &SectionalRange,
    tol: f64,
) -> Result<Vec<ExtrinsicReport>, ImmersionError> {
    if imm.ambient_kind.kind != ModelKind::RealSpaceForm {
        return Err(ImmersionError::UnsupportedAmbient(imm.ambient_kind.kind));
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| report_at(spec, imm, i, p, range, tol))
        .collect()
}

/// `count` points drawn uniformly from `base_domain × fiber_domain`; point `i`
/// depends only on `(seed, i)`.
pub fn sample_points(spec: &WarpedProductSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            spec.base_domain
                .iter()
                .chain(&spec.fiber_domain)
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
                .collect()
        })
        .collect()
}

/// Named fixture families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Plane,
    Cylinder,
    SphereInSphere,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 3] = [FixtureKind::Plane, FixtureKind::Cylinder, FixtureKind::SphereInSphere];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Plane => "plane",
            FixtureKind::Cylinder => "cylinder",
            FixtureKind::SphereInSphere => "sphere-in-sphere",
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = ImmersionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ImmersionError::InvalidSpec(format!("unknown fixture {s:?}")))
    }
}

/// A warped product, its immersion and the sectional range of the ambient.
#[derive(Debug, Clone)]
pub struct ImmersionCase {
    pub name: String,
    pub spec: WarpedProductSpec,
    pub immersion: ChartImmersion,
    pub range: SectionalRange,
}

impl ImmersionCase {
    pub fn check(&self, points: &[Vec<f64>], tol: f64) -> Result<Vec<ExtrinsicReport>, ImmersionError> {
        check_inequality(&self.spec, &self.immersion, points, &self.range, tol)
    }

    pub fn check_sampled(&self, count: usize, seed: u64, tol: f64) -> Result<Vec<ExtrinsicReport>, ImmersionError> {
        self.check(&sample_points(&self.spec, count, seed), tol)
    }
}

fn line_spec(warping: ScalarField, base: (f64, f64), fiber: (f64, f64)) -> WarpedProductSpec {
    WarpedProductSpec {
        m1: 1,
        m2: 1,
        base_chart_metric: flat_metric(),
        fiber_chart_metric: flat_metric(),
        warping,
        base_domain: vec![base],
        fiber_domain: vec![fiber],
    }
}

fn check_positive(what: &str, v: f64) -> Result<(), ImmersionError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(ImmersionError::InvalidSpec(format!("{what} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// `R ×₁ R` as the plane `(u, v) ↦ (u, v, 0)` in E³.
pub fn plane() -> ImmersionCase {
    let map: VectorField = Arc::new(|p: &[f64]| vec![p[0], p[1], 0.0]);
    ImmersionCase {
        name: "plane".into(),
        spec: line_spec(Arc::new(|_: &[f64]| 1.0), (-1.0, 1.0), (-1.0, 1.0)),
        immersion: ChartImmersion::into_space_form(map, 0.0, 3).expect("valid flat ambient"),
        range: SectionalRange::constant(0.0),
    }
}

/// `R ×₁ S¹(r)` as `(u, v) ↦ (r cos(v/r), r sin(v/r), u)` in E³, `v` arc length.
pub fn cylinder(radius: f64) -> Result<ImmersionCase, ImmersionError> {
    check_positive("radius", radius)?;
    let map: VectorField = Arc::new(move |p: &[f64]| {
        let a = p[1] / radius;
        vec![radius * a.cos(), radius * a.sin(), p[0]]
    });
    Ok(ImmersionCase {
        name: "cylinder".into(),
        spec: line_spec(Arc::new(|_: &[f64]| 1.0), (-1.0, 1.0), (0.0, TAU * radius)),
        immersion: ChartImmersion::into_space_form(map, 0.0, 3)?,
        range: SectionalRange::constant(0.0),
    })
}

/// Totally geodesic `S²(c) ⊂ S³(c)` as `(0, π/√c) ×_f S¹` with
/// `f(t) = sin(√c t)/√c`, in the conformal ball chart.
pub fn sphere_in_sphere(c: f64) -> Result<ImmersionCase, ImmersionError> {
    check_positive("c", c)?;
    let k = c.sqrt();
    let map: VectorField = Arc::new(move |p: &[f64]| {
        let r = (0.5 * k * p[0]).tan() / k;
        vec![r * p[1].cos(), r * p[1].sin(), 0.0]
    });
    Ok(ImmersionCase {
        name: "sphere-in-sphere".into(),
        spec: line_spec(
            Arc::new(move |b: &[f64]| (k * b[0]).sin() / k),
            (0.1 * PI / k, 0.85 * PI / k),
            (0.0, TAU),
        ),
        immersion: ChartImmersion::into_space_form(map, c, 3)?,
        range: SectionalRange::constant(c),
    })
}

/// Round sphere of radius `r` in E³ as `(0, πr) ×_f S¹`, `f(t) = r sin(t/r)`.
/// Both sides of the Chen interval collapse to `1/r²` here.
pub fn round_sphere(radius: f64) -> Result<ImmersionCase, ImmersionError> {
    check_positive("radius", radius)?;
    let map: VectorField = Arc::new(move |p: &[f64]| {
        let a = p[0] / radius;
        vec![radius * a.sin() * p[1].cos(), radius * a.sin() * p[1].sin(), radius * a.cos()]
    });
    Ok(ImmersionCase {
        name: "round-sphere".into(),
        spec: line_spec(
            Arc::new(move |b: &[f64]| radius * (b[0] / radius).sin()),
            (0.1 * PI * radius, 0.9 * PI * radius),
            (0.0, TAU),
        ),
        immersion: ChartImmersion::into_space_form(map, 0.0, 3)?,
        range: SectionalRange::constant(0.0),
    })
}

/// Build a named fixture; `radius` applies to the cylinder, `c` to
/// `sphere-in-sphere`, and both default to 1.
pub fn fixture(kind: FixtureKind, radius: Option<f64>, c: Option<f64>) -> Result<ImmersionCase, ImmersionError> {
    let unused = |what: &str| ImmersionError::InvalidSpec(format!("fixture {kind} takes no {what} parameter"));
    match kind {
        FixtureKind::Plane => {
            if radius.is_some() {
                return Err(unused("radius"));
            }
            if c.is_some_and(|c| c != 0.0) {
                return Err(ImmersionError::InvalidSpec("the plane fixture is flat (c = 0)".into()));
            }
            Ok(plane())
        }
        FixtureKind::Cylinder => {
            if c.is_some_and(|c| c != 0.0) {
                return Err(ImmersionError::InvalidSpec("the cylinder fixture is flat (c = 0)".into()));
            }
            cylinder(radius.unwrap_or(1.0))
        }
        FixtureKind::SphereInSphere => {
            if radius.is_some() {
                return Err(unused("radius"));
            }
            sphere_in_sphere(c.unwrap_or(1.0))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    fixture: Option<FixtureKind>,
    radius: Option<f64>,
    c: Option<f64>,
    chart: Option<InlineChart>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineChart {
    base: Vec<String>,
    fiber: Vec<String>,
    map: Vec<String>,
    warping: String,
    #[serde(default)]
    c: f64,
    base_metric: Option<Vec<Vec<String>>>,
    fiber_metric: Option<Vec<Vec<String>>>,
    base_domain: Vec<[f64; 2]>,
    fiber_domain: Vec<[f64; 2]>,
}

fn compile(field: &str, src: &str, vars: &[&str]) -> Result<Expr, ImmersionError> {
    Expr::parse(src, vars).map_err(|source| ImmersionError::InvalidExpression {
        field: field.to_string(),
        source,
    })
}

fn compile_metric(field: &str, rows: Option<&Vec<Vec<String>>>, vars: &[&str]) -> Result<MatrixField, ImmersionError> {
    let Some(rows) = rows else {
        return Ok(flat_metric());
    };
    let n = vars.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ImmersionError::InvalidSpec(format!("{field} must be a {n}x{n} matrix")));
    }
    let entries: Vec<Expr> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, s)| (i, j, s)))
        .map(|(i, j, s)| compile(&format!("{field}[{i}][{j}]"), s, vars))
        .collect::<Result<_, _>>()?;
    Ok(Arc::new(move |q: &[f64]| Matrix::from_fn(n, n, |i, j| entries[i * n + j].eval(q))))
}

fn check_domain(field: &str, d: &[[f64; 2]], expected: usize) -> Result<Domain, ImmersionError> {
    if d.len() != expected {
        return Err(ImmersionError::InvalidSpec(format!("{field} needs {expected} intervals, found {}", d.len())));
    }
    d.iter()
        .map(|&[lo, hi]| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok((lo, hi))
            } else {
                Err(ImmersionError::InvalidSpec(format!("{field} interval [{lo}, {hi}] is invalid")))
            }
        })
        .collect()
}

fn inline_case(chart: InlineChart) -> Result<ImmersionCase, ImmersionError> {
    let (m1, m2) = (chart.base.len(), chart.fiber.len());
    if m1 == 0 || m2 == 0 {
        return Err(ImmersionError::InvalidSpec("base and fiber need at least one coordinate each".into()));
    }
    let base: Vec<&str> = chart.base.iter().map(String::as_str).collect();
    let fiber: Vec<&str> = chart.fiber.iter().map(String::as_str).collect();
    let all: Vec<&str> = base.iter().chain(&fiber).copied().collect();
    for (i, v) in all.iter().enumerate() {
        if all[..i].contains(v) {
            return Err(ImmersionError::InvalidSpec(format!("coordinate {v:?} declared twice")));
        }
    }
    let n = chart.map.len();
    if n <= m1 + m2 {
        return Err(ImmersionError::InvalidSpec(format!(
            "map needs more than {} components for a proper immersion, found {n}",
            m1 + m2
        )));
    }
    let components: Vec<Expr> = chart
        .map
        .iter()
        .enumerate()
        .map(|(i, s)| compile(&format!("map[{i}]"), s, &all))
        .collect::<Result<_, _>>()?;
    let warping = compile("warping", &chart.warping, &base)?;
    let spec = WarpedProductSpec {
        m1,
        m2,
        base_chart_metric: compile_metric("base_metric", chart.base_metric.as_ref(), &base)?,
        fiber_chart_metric: compile_metric("fiber_metric", chart.fiber_metric.as_ref(), &fiber)?,
        warping: Arc::new(move |q: &[f64]| warping.eval(q)),
        base_domain: check_domain("base_domain", &chart.base_domain, m1)?,
        fiber_domain: check_domain("fiber_domain", &chart.fiber_domain, m2)?,
    };
    let map: VectorField = Arc::new(move |q: &[f64]| components.iter().map(|e| e.eval(q)).collect());
    Ok(ImmersionCase {
        name: "inline".into(),
        spec,
        immersion: ChartImmersion::into_space_form(map, chart.c, n)?,
        range: SectionalRange::constant(chart.c),
    })
}

/// Parse a TOML immersion spec: either a named fixture with parameters or
/// an inline `[chart]` table.
pub fn parse_spec(text: &str) -> Result<ImmersionCase, ImmersionError> {
    let file: SpecFile = toml::from_str(text).map_err(|e| ImmersionError::InvalidSpec(e.message().to_string()))?;
    match (file.fixture, file.chart) {
        (Some(kind), None) => fixture(kind, file.radius, file.c),
        (None, Some(chart)) => {
            if file.radius.is_some() || file.c.is_some() {
                return Err(ImmersionError::InvalidSpec(
                    "top-level radius/c apply to fixtures; put c inside [chart]".into(),
                ));
            }
            inline_case(chart)
        }
        (Some(_), Some(_)) => Err(ImmersionError::InvalidSpec("give either fixture or [chart], not both".into())),
        (None, None) => Err(ImmersionError::InvalidSpec("missing fixture or [chart]".into())),
    }
}
