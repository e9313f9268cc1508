//! Point models of the eight ambient geometries.
//!
//! Each model lives on `R^n` with the Euclidean inner product as ḡ, so the
//! standard basis is orthonormal. The structure operators are fixed canonical
//! matrices satisfying the algebraic identities of each geometry, and the
//! curvature tensor is evaluated directly from its closed expression in ḡ and
//! those operators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geomcore::{Matrix, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("{kind} does not support real dimension {n}: {reason}")]
    UnsupportedDimension { kind: ModelKind, n: usize, reason: &'static str },
    #[error("{0} requires a curvature parameter c")]
    MissingCurvature(ModelKind),
    #[error("{0} has a fixed normalization and takes no curvature parameter")]
    UnexpectedCurvature(ModelKind),
    #[error("curvature parameter must be finite, got {0}")]
    NonFiniteCurvature(f64),
    #[error("dimension mismatch: model has n = {expected}, vector has {found} entries")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("structure operators do not belong to {0}")]
    MissingStructure(ModelKind),
    #[error("unknown model name {0:?}")]
    UnknownModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[serde(rename = "real")]
    RealSpaceForm,
    #[serde(rename = "complex")]
    ComplexSpaceForm,
    #[serde(rename = "quaternionic")]
    QuaternionicSpaceForm,
    #[serde(rename = "sasakian")]
    SasakianSpaceForm,
    #[serde(rename = "kenmotsu")]
    KenmotsuSpaceForm,
    #[serde(rename = "grassmannian")]
    ComplexGrassmannian,
    #[serde(rename = "hyperbolic-grassmannian")]
    HyperbolicGrassmannian,
    #[serde(rename = "quadric")]
    ComplexQuadric,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::RealSpaceForm,
        ModelKind::ComplexSpaceForm,
        ModelKind::QuaternionicSpaceForm,
        ModelKind::SasakianSpaceForm,
        ModelKind::KenmotsuSpaceForm,
        ModelKind::ComplexGrassmannian,
        ModelKind::HyperbolicGrassmannian,
        ModelKind::ComplexQuadric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RealSpaceForm => "real",
            ModelKind::ComplexSpaceForm => "complex",
            ModelKind::QuaternionicSpaceForm => "quaternionic",
            ModelKind::SasakianSpaceForm => "sasakian",
            ModelKind::KenmotsuSpaceForm => "kenmotsu",
            ModelKind::ComplexGrassmannian => "grassmannian",
            ModelKind::HyperbolicGrassmannian => "hyperbolic-grassmannian",
            ModelKind::ComplexQuadric => "quadric",
        }
    }

    /// Whether the geometry carries a free curvature parameter `c`.
    pub fn has_curvature_parameter(self) -> bool {
        !self.is_hermitian_symmetric()
    }

    pub fn is_hermitian_symmetric(self) -> bool {
        matches!(
            self,
            ModelKind::ComplexGrassmannian | ModelKind::HyperbolicGrassmannian | ModelKind::ComplexQuadric
        )
    }

    fn check_dimension(self, n: usize) -> Result<(), SpaceError> {
        let fail = |reason| Err(SpaceError::UnsupportedDimension { kind: self, n, reason });
        if n < 2 {
            return fail("need n >= 2");
        }
        match self {
            ModelKind::RealSpaceForm => Ok(()),
            ModelKind::ComplexSpaceForm | ModelKind::ComplexQuadric if !n.is_multiple_of(2) => fail("need even n"),
            ModelKind::QuaternionicSpaceForm
            | ModelKind::ComplexGrassmannian
            | ModelKind::HyperbolicGrassmannian
                if !n.is_multiple_of(4) =>
            {
                fail("need n divisible by 4")
            }
            ModelKind::SasakianSpaceForm | ModelKind::KenmotsuSpaceForm if n.is_multiple_of(2) => fail("need odd n"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SpaceError::UnknownModel(s.to_string()))
    }
}

/// One ambient geometry: its kind, curvature parameter and real dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientModel {
    pub kind: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<f64>,
    pub n: usize,
}

impl AmbientModel {
    pub fn new(kind: ModelKind, c: Option<f64>, n: usize) -> Result<Self, SpaceError> {
        match (kind.has_curvature_parameter(), c) {
            (true, None) => return Err(SpaceError::MissingCurvature(kind)),
            (false, Some(_)) => return Err(SpaceError::UnexpectedCurvature(kind)),
            (_, Some(c)) if !c.is_finite() => return Err(SpaceError::NonFiniteCurvature(c)),
            _ => {}
        }
        kind.check_dimension(n)?;
        Ok(Self { kind, c, n })
    }

    pub fn real(c: f64, n: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::RealSpaceForm, Some(c), n)
    }

    pub fn complex(c: f64, n: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::ComplexSpaceForm, Some(c), n)
    }

    pub fn quaternionic(c: f64, n: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::QuaternionicSpaceForm, Some(c), n)
    }

    pub fn sasakian(c: f64, n: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::SasakianSpaceForm, Some(c), n)
    }

    pub fn kenmotsu(c: f64, n: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::KenmotsuSpaceForm, Some(c), n)
    }

    /// G₂(C^{m+2}) at real dimension 4m.
    pub fn grassmannian(m: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::ComplexGrassmannian, None, 4 * m)
    }

    /// SU(2,m)/S(U₂U_m) at real dimension 4m.
    pub fn hyperbolic_grassmannian(m: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::HyperbolicGrassmannian, None, 4 * m)
    }

    /// Qᵐ at real dimension 2m.
    pub fn quadric(m: usize) -> Result<Self, SpaceError> {
        Self::new(ModelKind::ComplexQuadric, None, 2 * m)
    }

    /// Curvature parameter; zero for the Hermitian symmetric spaces.
    pub fn curvature_parameter(&self) -> f64 {
        self.c.unwrap_or(0.0)
    }
}

/// Almost-contact structure (φ, ξ, η) on an odd-dimensional model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactStructure {
    pub phi: Matrix,
    pub xi: Vector,
    /// Covector η, stored by its components so that `η(X) = eta · X`.
    pub eta: Vector,
}

/// Concrete structure operators of one model tangent space.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureOperators {
    pub j: Option<Matrix>,
    pub j_triple: Option<[Matrix; 3]>,
    pub contact: Option<ContactStructure>,
    pub a: Option<Matrix>,
    // J_α J, symmetric for the Grassmannians.
    j_alpha_j: Option<[Matrix; 3]>,
    // J A for the quadric.
    ja: Option<Matrix>,
}

type Quaternion = [f64; 4];

fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

const QI: Quaternion = [0.0, 1.0, 0.0, 0.0];
const QJ: Quaternion = [0.0, 0.0, 1.0, 0.0];
const QK: Quaternion = [0.0, 0.0, 0.0, 1.0];

/// Matrix of `v ↦ u·v` (left) or `v ↦ v·u` (right) on `H^{n/4}`, one
/// quaternion per consecutive block of four coordinates.
fn quaternion_multiplication(n: usize, unit: Quaternion, left: bool) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for block in 0..n / 4 {
        for col in 0..4 {
            let mut basis = [0.0; 4];
            basis[col] = 1.0;
            let image = if left { qmul(unit, basis) } else { qmul(basis, unit) };
            for (row, v) in image.into_iter().enumerate() {
                m[(4 * block + row, 4 * block + col)] = v;
            }
        }
    }
    m
}

/// `J e_{2i} = e_{2i+1}`, `J e_{2i+1} = -e_{2i}` on the first `2k` coordinates.
fn block_rotation(n: usize, k: usize) -> Matrix {
    let mut j = Matrix::zeros(n, n);
    for i in 0..k {
        j[(2 * i + 1, 2 * i)] = 1.0;
        j[(2 * i, 2 * i + 1)] = -1.0;
    }
    j
}

pub fn build_structure(model: &AmbientModel) -> Result<StructureOperators, SpaceError> {
    model.kind.check_dimension(model.n)?;
    let n = model.n;
    let mut ops = StructureOperators {
        j: None,
        j_triple: None,
        contact: None,
        a: None,
        j_alpha_j: None,
        ja: None,
    };
    let left_triple = || {
        [
            quaternion_multiplication(n, QI, true),
            quaternion_multiplication(n, QJ, true),
            quaternion_multiplication(n, QK, true),
        ]
    };
    match model.kind {
        ModelKind::RealSpaceForm => {}
        ModelKind::ComplexSpaceForm => ops.j = Some(block_rotation(n, n / 2)),
        ModelKind::QuaternionicSpaceForm => ops.j_triple = Some(left_triple()),
        ModelKind::SasakianSpaceForm | ModelKind::KenmotsuSpaceForm => {
            let mut xi = Vector::zeros(n);
            xi[n - 1] = 1.0;
            ops.contact = Some(ContactStructure {
                phi: block_rotation(n, n / 2),
                eta: xi.clone(),
                xi,
            });
        }
        ModelKind::ComplexGrassmannian | ModelKind::HyperbolicGrassmannian => {
            let triple = left_triple();
            let j = quaternion_multiplication(n, QI, false);
            ops.j_alpha_j = Some([&triple[0] * &j, &triple[1] * &j, &triple[2] * &j]);
            ops.j = Some(j);
            ops.j_triple = Some(triple);
        }
        ModelKind::ComplexQuadric => {
            // z_k = x_k + i y_k with coordinates (x_1..x_m, y_1..y_m)
            let m = n / 2;
            let mut j = Matrix::zeros(n, n);
            let mut a = Matrix::zeros(n, n);
            for k in 0..m {
                j[(m + k, k)] = 1.0;
                j[(k, m + k)] = -1.0;
                a[(k, k)] = 1.0;
                a[(m + k, m + k)] = -1.0;
            }
            ops.ja = Some(&j * &a);
            ops.j = Some(j);
            ops.a = Some(a);
        }
    }
    Ok(ops)
}

impl StructureOperators {
    /// Replace the quaternionic triple by `J'_α = Σ_β r_{αβ} J_β` for a
    /// rotation `r`. Any such triple spans the same quaternionic structure.
    pub fn with_rotated_triple(&self, rotation: &nalgebra::Matrix3<f64>) -> Self {
        let mut out = self.clone();
        if let Some(triple) = &self.j_triple {
            let rotate = |ms: &[Matrix; 3]| -> [Matrix; 3] {
                std::array::from_fn(|a| {
                    (0..3).fold(Matrix::zeros(ms[0].nrows(), ms[0].ncols()), |acc, b| {
                        acc + &ms[b] * rotation[(a, b)]
                    })
                })
            };
            out.j_triple = Some(rotate(triple));
            out.j_alpha_j = self.j_alpha_j.as_ref().map(rotate);
        }
        out
    }

    pub fn j_alpha_j(&self) -> Option<&[Matrix; 3]> {
        self.j_alpha_j.as_ref()
    }

    pub fn ja(&self) -> Option<&Matrix> {
        self.ja.as_ref()
    }
}

/// The four vectors `X, Y, Z, W` of a curvature evaluation.
struct Quad<'a> {
    x: &'a Vector,
    y: &'a Vector,
    z: &'a Vector,
    w: &'a Vector,
}

impl Quad<'_> {
    /// ḡ(Y,Z)ḡ(X,W) − ḡ(X,Z)ḡ(Y,W), the constant-curvature part.
    fn base(&self) -> f64 {
        self.y.dot(self.z) * self.x.dot(self.w) - self.x.dot(self.z) * self.y.dot(self.w)
    }

    /// ḡ of `g(TY,Z)TX − g(TX,Z)TY − 2g(TX,Y)TZ` against W, for skew T.
    fn skew_term(&self, t: &Matrix) -> f64 {
        let tx = t * self.x;
        let ty = t * self.y;
        // sectional evaluations pass Z = Y
        let tz_w = if std::ptr::eq(self.z, self.y) {
            ty.dot(self.w)
        } else {
            (t * self.z).dot(self.w)
        };
        ty.dot(self.z) * tx.dot(self.w) - tx.dot(self.z) * ty.dot(self.w) - 2.0 * tx.dot(self.y) * tz_w
    }

    /// ḡ of `g(SY,Z)SX − g(SX,Z)SY` against W, for symmetric S.
    fn symmetric_term(&self, s: &Matrix) -> f64 {
        let sx = s * self.x;
        let sy = s * self.y;
        sy.dot(self.z) * sx.dot(self.w) - sx.dot(self.z) * sy.dot(self.w)
    }

    /// ḡ of the contact bracket of the Sasakian/Kenmotsu tensors against W.
    fn contact_term(&self, cs: &ContactStructure) -> f64 {
        let eta = |v: &Vector| cs.eta.dot(v);
        let (ex, ey, ez) = (eta(self.x), eta(self.y), eta(self.z));
        let xi_w = cs.xi.dot(self.w);
        ex * ez * self.y.dot(self.w) - ey * ez * self.x.dot(self.w) + ey * self.x.dot(self.z) * xi_w
            - ex * self.y.dot(self.z) * xi_w
            + self.skew_term(&cs.phi)
    }
}

fn require<T>(op: Option<&T>, kind: ModelKind) -> Result<&T, SpaceError> {
    op.ok_or(SpaceError::MissingStructure(kind))
}

pub(crate) fn check_vector(model: &AmbientModel, v: &Vector) -> Result<(), SpaceError> {
    if v.len() != model.n {
        return Err(SpaceError::DimensionMismatch {
            expected: model.n,
            found: v.len(),
        });
    }
    Ok(())
}

/// Unscaled Grassmannian tensor shared by G₂(C^{m+2}) and its dual.
fn grassmannian_tensor(q: &Quad<'_>, ops: &StructureOperators, kind: ModelKind) -> Result<f64, SpaceError> {
    let j = require(ops.j.as_ref(), kind)?;
    let triple = require(ops.j_triple.as_ref(), kind)?;
    let jaj = require(ops.j_alpha_j.as_ref(), kind)?;
    let mut r = q.base() + q.skew_term(j);
    for (ja, jaj) in triple.iter().zip(jaj) {
        r += q.skew_term(ja) + q.symmetric_term(jaj);
    }
    Ok(r)
}

/// `R̄(X,Y,Z,W) = ḡ(R̄(X,Y)Z, W)` for the model's curvature tensor.
pub fn curvature(
    model: &AmbientModel,
    ops: &StructureOperators,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    w: &Vector,
) -> Result<f64, SpaceError> {
    for v in [x, y, z, w] {
        check_vector(model, v)?;
    }
    let q = Quad { x, y, z, w };
    let kind = model.kind;
    let c = model.curvature_parameter();
    let value = match kind {
        ModelKind::RealSpaceForm => c * q.base(),
        ModelKind::ComplexSpaceForm => {
            let j = require(ops.j.as_ref(), kind)?;
            c / 4.0 * (q.base() + q.skew_term(j))
        }
        ModelKind::QuaternionicSpaceForm => {
            let triple = require(ops.j_triple.as_ref(), kind)?;
            c / 4.0 * (q.base() + triple.iter().map(|ja| q.skew_term(ja)).sum::<f64>())
        }
        ModelKind::SasakianSpaceForm => {
            let cs = require(ops.contact.as_ref(), kind)?;
            (c + 3.0) / 4.0 * q.base() + (c - 1.0) / 4.0 * q.contact_term(cs)
        }
        ModelKind::KenmotsuSpaceForm => {
            let cs = require(ops.contact.as_ref(), kind)?;
            (c - 3.0) / 4.0 * q.base() + (c + 1.0) / 4.0 * q.contact_term(cs)
        }
        ModelKind::ComplexGrassmannian => grassmannian_tensor(&q, ops, kind)?,
        ModelKind::HyperbolicGrassmannian => -0.5 * grassmannian_tensor(&q, ops, kind)?,
        ModelKind::ComplexQuadric => {
            let j = require(ops.j.as_ref(), kind)?;
            let a = require(ops.a.as_ref(), kind)?;
            let ja = require(ops.ja.as_ref(), kind)?;
            q.base() + q.skew_term(j) + q.symmetric_term(a) + q.symmetric_term(ja)
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::{gaussian_vector, rng_for};

    fn e(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn all_models() -> Vec<AmbientModel> {
        vec![
            AmbientModel::real(1.3, 5).unwrap(),
            AmbientModel::complex(-2.0, 6).unwrap(),
            AmbientModel::quaternionic(4.0, 8).unwrap(),
            AmbientModel::sasakian(5.0, 7).unwrap(),
            AmbientModel::kenmotsu(-3.5, 5).unwrap(),
            AmbientModel::grassmannian(2).unwrap(),
            AmbientModel::hyperbolic_grassmannian(2).unwrap(),
            AmbientModel::quadric(3).unwrap(),
        ]
    }

    fn skew(m: &Matrix) -> bool {
        (m + m.transpose()).amax() < 1e-12
    }

    fn close(a: &Matrix, b: &Matrix) -> bool {
        (a - b).amax() < 1e-12
    }

    #[test]
    fn dimension_constraints() {
        assert!(AmbientModel::complex(1.0, 5).is_err());
        assert!(AmbientModel::quaternionic(1.0, 6).is_err());
        assert!(AmbientModel::sasakian(1.0, 4).is_err());
        assert!(AmbientModel::kenmotsu(1.0, 1).is_err());
        assert!(AmbientModel::new(ModelKind::ComplexGrassmannian, None, 6).is_err());
        assert!(AmbientModel::new(ModelKind::ComplexQuadric, None, 3).is_err());
        assert!(AmbientModel::real(1.0, 1).is_err());
        assert_eq!(
            AmbientModel::new(ModelKind::RealSpaceForm, None, 3),
            Err(SpaceError::MissingCurvature(ModelKind::RealSpaceForm))
        );
        assert_eq!(
            AmbientModel::new(ModelKind::ComplexQuadric, Some(1.0), 4),
            Err(SpaceError::UnexpectedCurvature(ModelKind::ComplexQuadric))
        );
    }

    #[test]
    fn model_names_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("hyperbolic".parse::<ModelKind>().is_err());
    }

    #[test]
    fn real_space_form_has_no_operators() {
        let ops = build_structure(&AmbientModel::real(1.0, 3).unwrap()).unwrap();
        assert!(ops.j.is_none() && ops.j_triple.is_none() && ops.contact.is_none() && ops.a.is_none());
    }

    #[test]
    fn structure_invariants_hold_for_every_model() {
        for model in all_models() {
            let n = model.n;
            let id = Matrix::identity(n, n);
            let ops = build_structure(&model).unwrap();
            if let Some(j) = &ops.j {
                assert!(close(&(j * j), &(-&id)), "{}", model.kind);
                assert!(skew(j));
            }
            if let Some([j1, j2, j3]) = &ops.j_triple {
                for ja in [j1, j2, j3] {
                    assert!(close(&(ja * ja), &(-&id)));
                    assert!(skew(ja));
                }
                assert!(close(&(j1 * j2), j3));
                assert!(close(&(j2 * j3), j1));
                assert!(close(&(j3 * j1), j2));
                if model.kind != ModelKind::QuaternionicSpaceForm {
                    let j = ops.j.as_ref().unwrap();
                    for ja in [j1, j2, j3] {
                        assert!(close(&(j * ja), &(ja * j)));
                    }
                }
            }
            if let Some(cs) = &ops.contact {
                let phi2 = &cs.phi * &cs.phi;
                let expected = -&id + &cs.xi * cs.eta.transpose();
                assert!(close(&phi2, &expected));
                assert!((&cs.phi * &cs.xi).amax() < 1e-12);
                assert!((cs.eta.dot(&cs.xi) - 1.0).abs() < 1e-12);
                assert!(skew(&cs.phi));
            }
            if let Some(a) = &ops.a {
                let j = ops.j.as_ref().unwrap();
                assert!(close(&(a * a), &id));
                assert!(close(a, &a.transpose()));
                assert!(close(&(a * j), &(-(j * a))));
            }
        }
    }

    #[test]
    fn quadric_real_structure_fixes_first_half() {
        let ops = build_structure(&AmbientModel::quadric(3).unwrap()).unwrap();
        let a = ops.a.unwrap();
        for i in 0..3 {
            assert_eq!(&a * e(6, i), e(6, i));
            assert_eq!(&a * e(6, 3 + i), -e(6, 3 + i));
        }
    }

    #[test]
    fn real_space_form_unit_curvature() {
        let m = AmbientModel::real(1.0, 3).unwrap();
        let ops = build_structure(&m).unwrap();
        let r = curvature(&m, &ops, &e(3, 0), &e(3, 1), &e(3, 1), &e(3, 0)).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_holomorphic_plane() {
        let m = AmbientModel::complex(4.0, 4).unwrap();
        let ops = build_structure(&m).unwrap();
        let x = e(4, 0);
        let jx = ops.j.as_ref().unwrap() * &x;
        let r = curvature(&m, &ops, &x, &jx, &jx, &x).unwrap();
        assert!((r - 4.0).abs() < 1e-14);
    }

    #[test]
    fn repeated_slot_vanishes() {
        let mut rng = rng_for(3, 0);
        for model in all_models() {
            let ops = build_structure(&model).unwrap();
            let x = gaussian_vector(&mut rng, model.n);
            let z = gaussian_vector(&mut rng, model.n);
            let w = gaussian_vector(&mut rng, model.n);
            assert!(curvature(&model, &ops, &x, &x, &z, &w).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = AmbientModel::real(1.0, 3).unwrap();
        let ops = build_structure(&m).unwrap();
        let err = curvature(&m, &ops, &e(4, 0), &e(3, 1), &e(3, 1), &e(3, 0)).unwrap_err();
        assert_eq!(err, SpaceError::DimensionMismatch { expected: 3, found: 4 });
    }

    #[test]
    fn missing_structure_is_reported() {
        let m = AmbientModel::complex(1.0, 4).unwrap();
        let ops = build_structure(&AmbientModel::real(1.0, 4).unwrap()).unwrap();
        let err = curvature(&m, &ops, &e(4, 0), &e(4, 1), &e(4, 1), &e(4, 0)).unwrap_err();
        assert_eq!(err, SpaceError::MissingStructure(ModelKind::ComplexSpaceForm));
    }
}
