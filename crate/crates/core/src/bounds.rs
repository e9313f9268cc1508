//! Sectional curvature, inf/sup estimation over 2-planes, the Δf/f interval
//! for warped products, and the quadric plane decomposition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geomcore::{orthonormalize_pair, rng_for, sample_two_frame, GeomError, TwoFrame, Vector};
use crate::spaces::{check_vector, curvature, AmbientModel, ModelKind, SpaceError, StructureOperators};

/// Plane denominators below this are rejected.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Default outward tolerance when testing containment of estimates.
pub const CONTAINMENT_TOL: f64 = 1e-6;
/// Default tolerance for closed-form and decomposition cross-checks.
pub const EQUALITY_TOL: f64 = 1e-10;

/// Default number of random frames in [`estimate_range`].
pub const DEFAULT_BUDGET: usize = 5000;
/// Default pattern-search sweeps per frame and direction.
pub const DEFAULT_REFINE_STEPS: usize = 20;

/// Lower sectional constant used for the quadric.
pub const QUADRIC_LOWER: f64 = -2.3;
/// Upper sectional constant used for the quadric.
pub const QUADRIC_UPPER: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("vectors span a degenerate plane (denominator {0:e})")]
    DegeneratePlane(f64),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("sample budget must be at least 1")]
    EmptyBudget,
    #[error("plane decomposition needs the quadric model, got {0}")]
    NotAQuadric(ModelKind),
}

/// `K̄(X∧Y) = R̄(X,Y,Y,X) / (ḡ(X,X)ḡ(Y,Y) − ḡ(X,Y)²)` from the full tensor.
pub fn sectional(model: &AmbientModel, ops: &StructureOperators, x: &Vector, y: &Vector) -> Result<f64, BoundsError> {
    check_vector(model, x)?;
    check_vector(model, y)?;
    let denom = x.dot(x) * y.dot(y) - x.dot(y).powi(2);
    if !(denom > DEGENERATE_TOL) {
        return Err(BoundsError::DegeneratePlane(denom));
    }
    Ok(curvature(model, ops, x, y, y, x)? / denom)
}

/// Per-kind closed expression of the sectional curvature of an orthonormal pair.
pub fn sectional_closed_form(
    model: &AmbientModel,
    ops: &StructureOperators,
    frame: &TwoFrame,
) -> Result<f64, BoundsError> {
    let x = frame.x();
    let y = frame.y();
    check_vector(model, &x)?;
    check_vector(model, &y)?;
    let kind = model.kind;
    let missing = || BoundsError::Space(SpaceError::MissingStructure(kind));
    let c = model.curvature_parameter();
    let g = |u: &Vector, v: &Vector| u.dot(v);
    let contact_bracket = || -> Result<f64, BoundsError> {
        let cs = ops.contact.as_ref().ok_or_else(missing)?;
        let (ex, ey) = (cs.eta.dot(&x), cs.eta.dot(&y));
        Ok(-ey * ey - ex * ex + 3.0 * g(&(&cs.phi * &x), &y).powi(2))
    };
    let grassmannian = || -> Result<f64, BoundsError> {
        let j = ops.j.as_ref().ok_or_else(missing)?;
        let triple = ops.j_triple.as_ref().ok_or_else(missing)?;
        let jaj = ops.j_alpha_j().ok_or_else(missing)?;
        let mut k = 1.0 + 3.0 * g(&(j * &x), &y).powi(2);
        for (ja, s) in triple.iter().zip(jaj) {
            let sx = s * &x;
            k += 3.0 * g(&(ja * &x), &y).powi(2) + g(&(s * &y), &y) * g(&sx, &x) - g(&sx, &y).powi(2);
        }
        Ok(k)
    };
    let value = match kind {
        ModelKind::RealSpaceForm => c,
        ModelKind::ComplexSpaceForm => {
            let j = ops.j.as_ref().ok_or_else(missing)?;
            c / 4.0 * (1.0 + 3.0 * g(&(j * &x), &y).powi(2))
        }
        ModelKind::QuaternionicSpaceForm => {
            let triple = ops.j_triple.as_ref().ok_or_else(missing)?;
            let s: f64 = triple.iter().map(|ja| g(&(ja * &x), &y).powi(2)).sum();
            c / 4.0 * (1.0 + 3.0 * s)
        }
        ModelKind::SasakianSpaceForm => (c + 3.0) / 4.0 + (c - 1.0) / 4.0 * contact_bracket()?,
        ModelKind::KenmotsuSpaceForm => (c - 3.0) / 4.0 + (c + 1.0) / 4.0 * contact_bracket()?,
        ModelKind::ComplexGrassmannian => grassmannian()?,
        ModelKind::HyperbolicGrassmannian => -0.5 * grassmannian()?,
        ModelKind::ComplexQuadric => {
            let j = ops.j.as_ref().ok_or_else(missing)?;
            let a = ops.a.as_ref().ok_or_else(missing)?;
            let ja = ops.ja().ok_or_else(missing)?;
            let (ax, jax) = (a * &x, ja * &x);
            1.0 + 3.0 * g(&(j * &x), &y).powi(2) + g(&(a * &y), &y) * g(&ax, &x) - g(&ax, &y).powi(2)
                + g(&(ja * &y), &y) * g(&jax, &x)
                - g(&jax, &y).powi(2)
        }
    };
    Ok(value)
}

/// Bounds on K̄ implied by each geometry's sectional formula.
pub fn theorem_range(model: &AmbientModel) -> (f64, f64) {
    let c = model.curvature_parameter();
    let ordered = |a: f64, b: f64| (a.min(b), a.max(b));
    match model.kind {
        ModelKind::RealSpaceForm => (c, c),
        ModelKind::ComplexSpaceForm | ModelKind::QuaternionicSpaceForm => ordered(c / 4.0, c),
        ModelKind::SasakianSpaceForm => ordered(1.0, c),
        ModelKind::KenmotsuSpaceForm => ordered(-1.0, c),
        ModelKind::ComplexGrassmannian => (-1.0, 8.0),
        ModelKind::HyperbolicGrassmannian => (-4.0, 0.5),
        ModelKind::ComplexQuadric => (QUADRIC_LOWER, QUADRIC_UPPER),
    }
}

/// Predicted versus sampled extremes of K̄ over 2-planes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionalRange {
    pub theorem_lo: f64,
    pub theorem_hi: f64,
    pub est_lo: f64,
    pub est_hi: f64,
    pub samples: usize,
    pub refine_steps: usize,
    pub seed: u64,
}

impl SectionalRange {
    /// Whether the estimates lie inside the predicted range widened by `tol`.
    pub fn contained(&self, tol: f64) -> bool {
        self.est_lo >= self.theorem_lo - tol && self.est_hi <= self.theorem_hi + tol
    }

    /// Exact range for a real space form of curvature `c`.
    pub fn constant(c: f64) -> Self {
        Self {
            theorem_lo: c,
            theorem_hi: c,
            est_lo: c,
            est_hi: c,
            samples: 0,
            refine_steps: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn better(self, candidate: f64, current: f64) -> bool {
        match self {
            Sense::Minimize => candidate < current,
            Sense::Maximize => candidate > current,
        }
    }
}

const INITIAL_STEP: f64 = 0.25;
const FINAL_STEP: f64 = 1e-7;

/// Coordinate pattern search over the entries of X and Y, re-orthonormalizing
/// after every trial move. The step halves after a sweep without improvement.
fn refine(
    model: &AmbientModel,
    ops: &StructureOperators,
    frame: TwoFrame,
    sweeps: usize,
    sense: Sense,
) -> Result<f64, BoundsError> {
    let mut x = frame.x();
    let mut y = frame.y();
    let mut best = sectional(model, ops, &x, &y)?;
    let mut step = INITIAL_STEP;
    let n = model.n;
    for _ in 0..sweeps {
        if step < FINAL_STEP {
            break;
        }
        let mut improved = false;
        for coord in 0..2 * n {
            for delta in [step, -step] {
                let (mut cx, mut cy) = (x.clone(), y.clone());
                if coord < n {
                    cx[coord] += delta;
                } else {
                    cy[coord - n] += delta;
                }
                let Ok((tx, ty)) = orthonormalize_pair(&cx, &cy) else { continue };
                let k = sectional(model, ops, &tx, &ty)?;
                if sense.better(k, best) {
                    best = k;
                    x = tx;
                    y = ty;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Multistart estimate of inf/sup K̄ over 2-planes of the model tangent space.
///
/// Sample `i` draws its frame from stream `i` of the seeded generator and is
/// refined toward both extremes, so the result does not depend on the number
/// of worker threads.
pub fn estimate_range(
    model: &AmbientModel,
    ops: &StructureOperators,
    budget: usize,
    refine_steps: usize,
    seed: u64,
) -> Result<SectionalRange, BoundsError> {
    if budget == 0 {
        return Err(BoundsError::EmptyBudget);
    }
    let extremes: Vec<(f64, f64)> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let frame = sample_two_frame(&mut rng, model.n)?;
            let lo = refine(model, ops, frame.clone(), refine_steps, Sense::Minimize)?;
            let hi = refine(model, ops, frame, refine_steps, Sense::Maximize)?;
            Ok((lo, hi))
        })
        .collect::<Result<_, BoundsError>>()?;
    let est_lo = extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let est_hi = extremes.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let (theorem_lo, theorem_hi) = theorem_range(model);
    Ok(SectionalRange {
        theorem_lo,
        theorem_hi,
        est_lo,
        est_hi,
        samples: budget,
        refine_steps,
        seed,
    })
}

/// Lower and upper bounds on Δf/f for an immersed warped product `B ×_f F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChenInterval {
    pub m1: usize,
    pub m2: usize,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub h_norm2: f64,
    #[serde(rename = "infK")]
    pub inf_k: f64,
    #[serde(rename = "supK")]
    pub sup_k: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ChenInterval {
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        self.lower - tol <= value && value <= self.upper + tol
    }
}

/// `m₁m²/(2(m−1))·H² − (m₁/2)‖h‖² + m₁ inf K̄ ≤ Δf/f ≤ m²/(4m₂)·H² + m₁ sup K̄`.
///
/// # Panics
/// If `m1` or `m2` is zero.
pub fn chen_bounds(m1: usize, m2: usize, h2: f64, h_norm2: f64, inf_k: f64, sup_k: f64) -> ChenInterval {
    assert!(m1 >= 1 && m2 >= 1, "factor dimensions must be positive");
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    let m = m1f + m2f;
    let lower = m1f * m * m / (2.0 * (m - 1.0)) * h2 - m1f / 2.0 * h_norm2 + m1f * inf_k;
    let upper = m * m / (4.0 * m2f) * h2 + m1f * sup_k;
    ChenInterval {
        m1,
        m2,
        h2,
        h_norm2,
        inf_k,
        sup_k,
        lower,
        upper,
    }
}

/// Angles and inner products describing a quadric 2-plane relative to the
/// splitting `V(A) ⊕ JV(A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadricPlaneDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub abar: f64,
    pub bbar: f64,
    pub cbar: f64,
    pub dbar: f64,
    pub ebar: f64,
}

/// Components shorter than this are treated as absent.
const COMPONENT_TOL: f64 = 1e-14;

/// Split `v = p + q` with `p ∈ V(A)`, `q ∈ JV(A)` and return unit directions
/// with their lengths. An absent component takes the fallback direction.
fn split(a: &nalgebra::DMatrix<f64>, v: &Vector, fallback_v: &Vector, fallback_jv: &Vector) -> (f64, Vector, f64, Vector) {
    let av = a * v;
    let p = (v + &av) * 0.5;
    let q = (v - &av) * 0.5;
    let (lp, lq) = (p.norm(), q.norm());
    let up = if lp > COMPONENT_TOL { p / lp } else { fallback_v.clone() };
    let uq = if lq > COMPONENT_TOL { q / lq } else { fallback_jv.clone() };
    (lp, up, lq, uq)
}

/// Decompose an orthonormal quadric pair into `(α, β; ā, b̄, c̄, d̄, ē)`.
///
/// `X = cos α X̄₁ + sin α X̄₂` and `Y = cos β Ȳ₁ + sin β Ȳ₂` with unit
/// `X̄₁, Ȳ₁ ∈ V(A)` and `X̄₂, Ȳ₂ ∈ JV(A)`. Taking each unit vector along its
/// component makes both cosines and sines nonnegative, so the angles land in
/// `[0, π/2]`.
pub fn quadric_decompose(
    model: &AmbientModel,
    ops: &StructureOperators,
    frame: &TwoFrame,
) -> Result<QuadricPlaneDecomposition, BoundsError> {
    if model.kind != ModelKind::ComplexQuadric {
        return Err(BoundsError::NotAQuadric(model.kind));
    }
    let missing = || BoundsError::Space(SpaceError::MissingStructure(model.kind));
    let a = ops.a.as_ref().ok_or_else(missing)?;
    let j = ops.j.as_ref().ok_or_else(missing)?;
    let (x, y) = (frame.x(), frame.y());
    check_vector(model, &x)?;
    check_vector(model, &y)?;
    let m = model.n / 2;
    let mut first_v = Vector::zeros(model.n);
    first_v[0] = 1.0;
    let mut first_jv = Vector::zeros(model.n);
    first_jv[m] = 1.0;

    let (ca, x1, sa, x2) = split(a, &x, &first_v, &first_jv);
    let (cb, y1, sb, y2) = split(a, &y, &first_v, &first_jv);
    Ok(QuadricPlaneDecomposition {
        alpha: sa.atan2(ca),
        beta: sb.atan2(cb),
        abar: x1.dot(&(j * &y2)),
        bbar: x2.dot(&(j * &y1)),
        cbar: (j * &y1).dot(&y2),
        dbar: (j * &x1).dot(&x2),
        ebar: x1.dot(&y1),
    })
}

impl QuadricPlaneDecomposition {
    /// `K̄(X∧Y) − 1` rebuilt from the decomposition.
    pub fn s_value(&self) -> f64 {
        quadric_s(self, self.alpha, self.beta)
    }
}

fn quadric_s_with(d: &QuadricPlaneDecomposition, x: f64, y: f64, ebar_weight: f64) -> f64 {
    let (cx, sx) = (x.cos(), x.sin());
    let (cy, sy) = (y.cos(), y.sin());
    let mixed = (2.0 * x).sin() * (2.0 * y).sin();
    2.0 * d.abar * d.abar * cx * cx * sy * sy + 2.0 * d.bbar * d.bbar * sx * sx * cy * cy
        + (2.0 * x).cos() * (2.0 * y).cos()
        + 2.0 * d.abar * d.bbar * mixed
        + d.cbar * d.dbar * mixed
        - ebar_weight * d.ebar * d.ebar * cx * cx * cy * cy
}

/// `S(x, y)` with the decomposition's coefficients; `1 + S(α, β) = K̄(X∧Y)`.
///
/// The `ē²cos²x cos²y` term carries weight 4: orthogonality of X and Y gives
/// `ḡ(AX, Y) = 2 cos α cos β ē`.
pub fn quadric_s(d: &QuadricPlaneDecomposition, x: f64, y: f64) -> f64 {
    quadric_s_with(d, x, y, 4.0)
}

/// Variant with unit weight on the `ē²` term. It does not reproduce K̄ when
/// `ē cos α cos β ≠ 0` and is kept for comparison only.
pub fn quadric_s_unit_ebar(d: &QuadricPlaneDecomposition, x: f64, y: f64) -> f64 {
    quadric_s_with(d, x, y, 1.0)
}

/// `h(x, y) = cos(2x+2y) − 2 sin 2x sin 2y − cos²x cos²y`.
pub fn quadric_h(x: f64, y: f64) -> f64 {
    let (cx, cy) = (x.cos(), y.cos());
    (2.0 * x + 2.0 * y).cos() - 2.0 * (2.0 * x).sin() * (2.0 * y).sin() - cx * cx * cy * cy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::{orthonormal_pair, random_two_frame, Matrix};
    use crate::spaces::build_structure;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn e(n: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn setup(model: AmbientModel) -> (AmbientModel, StructureOperators) {
        let ops = build_structure(&model).unwrap();
        (model, ops)
    }

    #[test]
    fn real_space_form_is_constant() {
        let (m, ops) = setup(AmbientModel::real(-1.0, 4).unwrap());
        for seed in 0..20 {
            let f = random_two_frame(4, seed).unwrap();
            let k = sectional(&m, &ops, &(f.x() * 3.0), &(f.x() + f.y() * 0.2)).unwrap();
            assert!((k + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sectional_depends_only_on_plane() {
        let (m, ops) = setup(AmbientModel::quadric(3).unwrap());
        let f = random_two_frame(6, 5).unwrap();
        let (x, y) = (f.x(), f.y());
        let k1 = sectional(&m, &ops, &x, &y).unwrap();
        let k2 = sectional(&m, &ops, &x, &(&x * 2.0 + &y)).unwrap();
        assert!((k1 - k2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_plane_rejected() {
        let (m, ops) = setup(AmbientModel::real(1.0, 3).unwrap());
        let x = e(3, 0);
        assert!(matches!(sectional(&m, &ops, &x, &(&x * 2.0)), Err(BoundsError::DegeneratePlane(_))));
    }

    #[test]
    fn quadric_holomorphic_plane_through_real_vector() {
        let (m, ops) = setup(AmbientModel::quadric(2).unwrap());
        let x = e(4, 0);
        let y = ops.j.as_ref().unwrap() * &x;
        assert!((sectional(&m, &ops, &x, &y).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sasakian_plane_containing_xi() {
        let (m, ops) = setup(AmbientModel::sasakian(7.0, 5).unwrap());
        let f = TwoFrame::new(e(5, 4), e(5, 1));
        assert!((sectional_closed_form(&m, &ops, &f).unwrap() - 1.0).abs() < 1e-14);
        assert!((sectional(&m, &ops, &f.x(), &f.y()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kenmotsu_phi_plane() {
        let (m, ops) = setup(AmbientModel::kenmotsu(7.0, 5).unwrap());
        let x = e(5, 0);
        let y = &ops.contact.as_ref().unwrap().phi * &x;
        let f = TwoFrame::new(x, y);
        assert!((sectional_closed_form(&m, &ops, &f).unwrap() - 7.0).abs() < 1e-14);
        assert!((sectional(&m, &ops, &f.x(), &f.y()).unwrap() - 7.0).abs() < 1e-14);
    }

    #[test]
    fn grassmannian_singular_holomorphic_plane_reaches_eight() {
        let (m, ops) = setup(AmbientModel::grassmannian(2).unwrap());
        // the real quaternion 1 satisfies X·i = i·X, i.e. JX = J₁X
        let x = e(8, 0);
        let jx = ops.j.as_ref().unwrap() * &x;
        let j1x = &ops.j_triple.as_ref().unwrap()[0] * &x;
        assert!((&jx - &j1x).amax() < 1e-15);
        let f = TwoFrame::new(x, jx);
        assert!((sectional_closed_form(&m, &ops, &f).unwrap() - 8.0).abs() < 1e-14);
        assert!((sectional(&m, &ops, &f.x(), &f.y()).unwrap() - 8.0).abs() < 1e-14);
        let (h, hops) = setup(AmbientModel::hyperbolic_grassmannian(2).unwrap());
        assert!((sectional(&h, &hops, &f.x(), &f.y()).unwrap() + 4.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_tensor_on_random_frames() {
        let models = [
            AmbientModel::real(2.5, 4).unwrap(),
            AmbientModel::complex(-3.0, 6).unwrap(),
            AmbientModel::quaternionic(2.0, 8).unwrap(),
            AmbientModel::sasakian(-2.0, 7).unwrap(),
            AmbientModel::kenmotsu(3.0, 5).unwrap(),
            AmbientModel::grassmannian(3).unwrap(),
            AmbientModel::hyperbolic_grassmannian(2).unwrap(),
            AmbientModel::quadric(4).unwrap(),
        ];
        for model in models {
            let (m, ops) = setup(model);
            for seed in 0..200 {
                let f = random_two_frame(m.n, seed).unwrap();
                let a = sectional(&m, &ops, &f.x(), &f.y()).unwrap();
                let b = sectional_closed_form(&m, &ops, &f).unwrap();
                assert!((a - b).abs() < EQUALITY_TOL, "{} seed {seed}: {a} vs {b}", m.kind);
            }
        }
    }

    #[test]
    fn theorem_ranges() {
        assert_eq!(theorem_range(&AmbientModel::real(3.0, 3).unwrap()), (3.0, 3.0));
        assert_eq!(theorem_range(&AmbientModel::complex(4.0, 4).unwrap()), (1.0, 4.0));
        assert_eq!(theorem_range(&AmbientModel::complex(-4.0, 6).unwrap()), (-4.0, -1.0));
        assert_eq!(theorem_range(&AmbientModel::quaternionic(-8.0, 4).unwrap()), (-8.0, -2.0));
        assert_eq!(theorem_range(&AmbientModel::sasakian(0.5, 3).unwrap()), (0.5, 1.0));
        assert_eq!(theorem_range(&AmbientModel::kenmotsu(5.0, 3).unwrap()), (-1.0, 5.0));
        assert_eq!(theorem_range(&AmbientModel::kenmotsu(-3.0, 3).unwrap()), (-3.0, -1.0));
        assert_eq!(theorem_range(&AmbientModel::grassmannian(1).unwrap()), (-1.0, 8.0));
        assert_eq!(theorem_range(&AmbientModel::hyperbolic_grassmannian(1).unwrap()), (-4.0, 0.5));
        assert_eq!(theorem_range(&AmbientModel::quadric(2).unwrap()), (-2.3, 5.0));
    }

    #[test]
    fn estimate_real_space_form_is_exact() {
        let (m, ops) = setup(AmbientModel::real(3.0, 3).unwrap());
        let r = estimate_range(&m, &ops, 50, 5, 1).unwrap();
        assert!((r.est_lo - 3.0).abs() < 1e-12 && (r.est_hi - 3.0).abs() < 1e-12);
        assert!(r.contained(CONTAINMENT_TOL));
    }

    #[test]
    fn estimate_complex_reaches_both_extremes() {
        let (m, ops) = setup(AmbientModel::complex(4.0, 4).unwrap());
        let r = estimate_range(&m, &ops, 2000, 30, 0).unwrap();
        assert!(r.est_hi >= 4.0 - 1e-6, "{r:?}");
        assert!(r.est_lo <= 1.0 + 1e-6, "{r:?}");
        assert!(r.contained(CONTAINMENT_TOL));
    }

    #[test]
    fn estimate_negative_c_flips_range() {
        let (m, ops) = setup(AmbientModel::quaternionic(-4.0, 8).unwrap());
        let r = estimate_range(&m, &ops, 200, 30, 2).unwrap();
        assert_eq!((r.theorem_lo, r.theorem_hi), (-4.0, -1.0));
        assert!(r.contained(CONTAINMENT_TOL), "{r:?}");
    }

    #[test]
    fn estimate_is_deterministic_and_rejects_empty_budget() {
        let (m, ops) = setup(AmbientModel::kenmotsu(2.0, 5).unwrap());
        let a = estimate_range(&m, &ops, 30, 10, 9).unwrap();
        let b = estimate_range(&m, &ops, 30, 10, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(estimate_range(&m, &ops, 0, 10, 9), Err(BoundsError::EmptyBudget));
    }

    #[test]
    fn chen_examples() {
        let i = chen_bounds(1, 1, 0.0, 0.0, 1.0, 1.0);
        assert_eq!((i.lower, i.upper), (1.0, 1.0));
        let z = chen_bounds(1, 1, 0.0, 0.0, 0.0, 0.0);
        assert_eq!((z.lower, z.upper), (0.0, 0.0));
        let cyl = chen_bounds(1, 1, 0.25, 1.0, 0.0, 0.0);
        assert!((cyl.lower - 0.0).abs() < 1e-15 && (cyl.upper - 0.25).abs() < 1e-15);
        assert!(cyl.contains(0.0, 0.0));
        // m1 = 2, m2 = 3: m = 5
        let g = chen_bounds(2, 3, 1.0, 2.0, -1.0, 8.0);
        assert!((g.lower - (2.0 * 25.0 / 8.0 - 2.0 - 2.0)).abs() < 1e-14);
        assert!((g.upper - (25.0 / 12.0 + 16.0)).abs() < 1e-14);
    }

    #[test]
    fn quadric_decomposition_special_planes() {
        let (m, ops) = setup(AmbientModel::quadric(3).unwrap());
        let d = quadric_decompose(&m, &ops, &TwoFrame::new(e(6, 0), e(6, 1))).unwrap();
        assert_eq!((d.alpha, d.beta), (0.0, 0.0));
        let d = quadric_decompose(&m, &ops, &TwoFrame::new(e(6, 0), e(6, 4))).unwrap();
        assert_eq!(d.alpha, 0.0);
        assert!((d.beta - FRAC_PI_2).abs() < 1e-15);
        let wrong = AmbientModel::real(1.0, 6).unwrap();
        assert!(matches!(
            quadric_decompose(&wrong, &ops, &TwoFrame::new(e(6, 0), e(6, 1))),
            Err(BoundsError::NotAQuadric(_))
        ));
    }

    #[test]
    fn quadric_decomposition_reproduces_sectional() {
        let (m, ops) = setup(AmbientModel::quadric(3).unwrap());
        for seed in 0..300 {
            let f = random_two_frame(6, seed).unwrap();
            let d = quadric_decompose(&m, &ops, &f).unwrap();
            assert!((0.0..=FRAC_PI_2).contains(&d.alpha) && (0.0..=FRAC_PI_2).contains(&d.beta));
            for v in [d.abar, d.bbar, d.cbar, d.dbar, d.ebar] {
                assert!(v.abs() <= 1.0 + 1e-12);
            }
            let k = sectional(&m, &ops, &f.x(), &f.y()).unwrap();
            assert!((1.0 + d.s_value() - k).abs() < EQUALITY_TOL, "seed {seed}");
        }
    }

    #[test]
    fn unit_ebar_weight_disagrees_with_tensor() {
        let (m, ops) = setup(AmbientModel::quadric(3).unwrap());
        let worst = (0..100)
            .map(|seed| {
                let f = random_two_frame(6, seed).unwrap();
                let d = quadric_decompose(&m, &ops, &f).unwrap();
                let k = sectional(&m, &ops, &f.x(), &f.y()).unwrap();
                (1.0 + quadric_s_unit_ebar(&d, d.alpha, d.beta) - k).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-2);
    }

    #[test]
    fn quadric_s_trivial_point() {
        let d = QuadricPlaneDecomposition {
            alpha: 0.0,
            beta: 0.0,
            abar: 0.0,
            bbar: 0.0,
            cbar: 0.0,
            dbar: 0.0,
            ebar: 0.0,
        };
        assert_eq!(quadric_s(&d, 0.0, 0.0), 1.0);
    }

    #[test]
    fn quadric_s_upper_bound_on_grid() {
        let mut rng = crate::geomcore::rng_for(17, 0);
        for _ in 0..20 {
            let c = crate::geomcore::gaussian_vector(&mut rng, 5).map(|v| v.tanh());
            let d = QuadricPlaneDecomposition {
                alpha: 0.0,
                beta: 0.0,
                abar: c[0],
                bbar: c[1],
                cbar: c[2],
                dbar: c[3],
                ebar: c[4],
            };
            for i in 0..=100 {
                for j in 0..=100 {
                    let (x, y) = (i as f64 * FRAC_PI_2 / 100.0, j as f64 * FRAC_PI_2 / 100.0);
                    assert!(quadric_s(&d, x, y) <= 4.0 + 1e-12);
                    assert!(quadric_s(&d, x, y) >= quadric_h(x, y) - 3.0 * x.cos().powi(2) * y.cos().powi(2) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn quadric_h_values() {
        assert!((quadric_h(FRAC_PI_4, FRAC_PI_4) + 3.25).abs() < 1e-12);
        assert!(quadric_h(0.0, 0.0).abs() < 1e-15);
        assert!((quadric_h(FRAC_PI_2, FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((quadric_h(0.0, FRAC_PI_2) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadric_h_gradient_at_quarter_point() {
        let step = 1e-5;
        let gx = (quadric_h(FRAC_PI_4 + step, FRAC_PI_4) - quadric_h(FRAC_PI_4 - step, FRAC_PI_4)) / (2.0 * step);
        let gy = (quadric_h(FRAC_PI_4, FRAC_PI_4 + step) - quadric_h(FRAC_PI_4, FRAC_PI_4 - step)) / (2.0 * step);
        assert!((gx - 0.5).abs() < 1e-6 && (gy - 0.5).abs() < 1e-6, "{gx} {gy}");
    }

    #[test]
    fn plane_basis_change_is_invisible() {
        let (m, ops) = setup(AmbientModel::grassmannian(2).unwrap());
        let mut rng = crate::geomcore::rng_for(4, 0);
        for seed in 0..50 {
            let f = random_two_frame(8, seed).unwrap();
            let mix = Matrix::from_iterator(2, 2, crate::geomcore::gaussian_vector(&mut rng, 4).iter().copied());
            if mix.determinant().abs() < 0.1 {
                continue;
            }
            let u = f.x() * mix[(0, 0)] + f.y() * mix[(1, 0)];
            let v = f.x() * mix[(0, 1)] + f.y() * mix[(1, 1)];
            let g = orthonormal_pair(&u, &v).unwrap();
            let k1 = sectional_closed_form(&m, &ops, &f).unwrap();
            let k2 = sectional_closed_form(&m, &ops, &g).unwrap();
            assert!((k1 - k2).abs() < 1e-9);
        }
    }
}
