//! Interval arithmetic and a best-first branch-and-bound minimizer for
//! functions of two variables.
//!
//! Rounding is handled by widening every elementary result outward by
//! [`INFLATE_ULPS`] units in the last place instead of switching the FPU
//! rounding mode. This is slightly conservative and needs no platform support.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::quadric_h;

pub const INFLATE_ULPS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("invalid interval [{0}, {1}]")]
    BadInterval(f64, f64),
}

fn down(mut v: f64, ulps: usize) -> f64 {
    for _ in 0..ulps {
        v = v.next_down();
    }
    v
}

fn up(mut v: f64, ulps: usize) -> f64 {
    for _ in 0..ulps {
        v = v.next_up();
    }
    v
}

/// Closed interval `[lo, hi]` of reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, CertifyError> {
        if !(lo <= hi) {
            return Err(CertifyError::BadInterval(lo, hi));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn outward(lo: f64, hi: f64) -> Self {
        Self {
            lo: down(lo, INFLATE_ULPS),
            hi: up(hi, INFLATE_ULPS),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn split(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }

    pub fn scale(self, k: f64) -> Interval {
        let (a, b) = (self.lo * k, self.hi * k);
        Interval::outward(a.min(b), a.max(b))
    }

    pub fn sqr(self) -> Interval {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.lo <= 0.0 && self.hi >= 0.0 {
            Interval {
                lo: 0.0,
                hi: up(a.max(b), INFLATE_ULPS),
            }
        } else {
            Interval::outward(a.min(b), a.max(b))
        }
    }

    /// Enclosure of `cos` over the interval.
    pub fn cos(self) -> Interval {
        periodic_enclosure(self, f64::cos, 0.0)
    }

    /// Enclosure of `sin` over the interval; `sin x = cos(x − π/2)`.
    pub fn sin(self) -> Interval {
        periodic_enclosure(self, f64::sin, FRAC_PI_2)
    }
}

/// Whether some `t ≡ target (mod 2π)` lies in `[lo, hi]`, answered
/// conservatively: near-misses within a few ulps of the period grid count.
fn hits(lo: f64, hi: f64, target: f64) -> bool {
    let k = ((lo - target) / TAU).ceil();
    let slack = 1e-15 * (1.0 + lo.abs().max(hi.abs()));
    [k - 1.0, k].iter().any(|&k| {
        let t = target + k * TAU;
        t >= lo - slack && t <= hi + slack
    })
}

/// Enclosure of a shifted cosine `f(x) = cos(x − shift)` by locating its
/// extrema: maxima at `shift + 2kπ`, minima at `shift + π + 2kπ`.
fn periodic_enclosure(x: Interval, f: fn(f64) -> f64, shift: f64) -> Interval {
    if !(x.width() < TAU) {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    let (fa, fb) = (f(x.lo), f(x.hi));
    let mut lo = fa.min(fb);
    let mut hi = fa.max(fb);
    if hits(x.lo, x.hi, shift) {
        hi = 1.0;
    }
    if hits(x.lo, x.hi, shift + PI) {
        lo = -1.0;
    }
    let out = Interval::outward(lo, hi);
    Interval {
        lo: out.lo.max(-1.0),
        hi: out.hi.min(1.0),
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::outward(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::outward(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let p = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::outward(lo, hi)
    }
}

impl Mul<Interval> for f64 {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        rhs.scale(self)
    }
}

/// Axis-aligned box in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x: Interval,
    pub y: Interval,
}

impl Box2 {
    pub fn new(x: Interval, y: Interval) -> Self {
        Self { x, y }
    }

    /// `[0, π/2]²`, the parameter square of the quadric bound.
    pub fn quarter_square() -> Self {
        let side = Interval { lo: 0.0, hi: FRAC_PI_2 };
        Self { x: side, y: side }
    }

    fn bisect(&self) -> (Box2, Box2) {
        if self.x.width() >= self.y.width() {
            let (a, b) = self.x.split();
            (Box2 { x: a, ..*self }, Box2 { x: b, ..*self })
        } else {
            let (a, b) = self.y.split();
            (Box2 { y: a, ..*self }, Box2 { y: b, ..*self })
        }
    }
}

/// A bivariate function with a rigorous interval extension.
pub trait IntervalObjective: Sync {
    fn enclose(&self, x: Interval, y: Interval) -> Interval;

    /// Optional enclosure of the gradient over a box, enabling the
    /// mean-value form `f(c) + ∇f(B)·(B − c)`.
    fn enclose_gradient(&self, _x: Interval, _y: Interval) -> Option<[Interval; 2]> {
        None
    }
}

impl<F> IntervalObjective for F
where
    F: Fn(Interval, Interval) -> Interval + Sync,
{
    fn enclose(&self, x: Interval, y: Interval) -> Interval {
        self(x, y)
    }
}

/// Tightest available enclosure of `f` over a box.
fn box_enclosure<F: IntervalObjective + ?Sized>(f: &F, b: &Box2) -> Interval {
    let natural = f.enclose(b.x, b.y);
    let Some([gx, gy]) = f.enclose_gradient(b.x, b.y) else {
        return natural;
    };
    let (cx, cy) = (b.x.mid(), b.y.mid());
    let centre = f.enclose(Interval::point(cx), Interval::point(cy));
    let dx = b.x - Interval::point(cx);
    let dy = b.y - Interval::point(cy);
    let mean_value = centre + gx * dx + gy * dy;
    natural.intersect(&mean_value).unwrap_or(natural)
}

/// `h(x, y) = cos(2x+2y) − 2 sin 2x sin 2y − cos²x cos²y` with gradient.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadricH;

impl IntervalObjective for QuadricH {
    fn enclose(&self, x: Interval, y: Interval) -> Interval {
        interval_h(x, y)
    }

    fn enclose_gradient(&self, x: Interval, y: Interval) -> Option<[Interval; 2]> {
        let (x2, y2) = (x.scale(2.0), y.scale(2.0));
        let s_sum = (x2 + y2).sin();
        let (sx2, cx2) = (x2.sin(), x2.cos());
        let (sy2, cy2) = (y2.sin(), y2.cos());
        // ∂h/∂x = −2 sin(2x+2y) − 4 cos 2x sin 2y + sin 2x cos²y
        let gx = (-2.0) * s_sum - 4.0 * (cx2 * sy2) + sx2 * y.cos().sqr();
        let gy = (-2.0) * s_sum - 4.0 * (sx2 * cy2) + x.cos().sqr() * sy2;
        Some([gx, gy])
    }
}

/// Natural interval extension of the quadric lower-bound function `h`.
pub fn interval_h(x: Interval, y: Interval) -> Interval {
    let (x2, y2) = (x.scale(2.0), y.scale(2.0));
    (x2 + y2).cos() - 2.0 * (x2.sin() * y2.sin()) - x.cos().sqr() * y.cos().sqr()
}

/// Rigorous enclosure of a global minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub enclosure_lo: f64,
    pub enclosure_hi: f64,
    /// Box whose midpoint supplied `enclosure_hi`.
    pub argmin_box: Box2,
    pub boxes_processed: usize,
    pub tolerance: f64,
    /// False when the box budget ran out before the width reached `tolerance`.
    pub converged: bool,
}

impl CertifiedBound {
    pub fn width(&self) -> f64 {
        self.enclosure_hi - self.enclosure_lo
    }
}

struct Candidate {
    lower: f64,
    seq: usize,
    region: Box2,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // BinaryHeap is a max-heap: smallest lower bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .total_cmp(&self.lower)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first interval branch and bound.
///
/// The incumbent is the smallest rigorous upper bound of `f` at a processed
/// box midpoint; the global lower bound is the smallest box lower bound still
/// queued. Boxes whose lower bound exceeds the incumbent are discarded, the
/// others are bisected along their wider side.
pub fn bb_minimize<F: IntervalObjective + ?Sized>(
    f: &F,
    region: Box2,
    tol: f64,
    max_boxes: usize,
) -> Result<CertifiedBound, CertifyError> {
    if !(tol > 0.0) {
        return Err(CertifyError::BadTolerance(tol));
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let root = box_enclosure(f, &region);
    heap.push(Candidate {
        lower: root.lo,
        seq,
        region,
    });
    let mut incumbent = f64::INFINITY;
    let mut argmin = region;
    let mut processed = 0usize;

    while let Some(cand) = heap.pop() {
        processed += 1;
        let (cx, cy) = (cand.region.x.mid(), cand.region.y.mid());
        let at_mid = f.enclose(Interval::point(cx), Interval::point(cy)).hi;
        if at_mid < incumbent {
            incumbent = at_mid;
            argmin = cand.region;
        }
        if incumbent - cand.lower <= tol {
            return Ok(CertifiedBound {
                enclosure_lo: cand.lower,
                enclosure_hi: incumbent,
                argmin_box: argmin,
                boxes_processed: processed,
                tolerance: tol,
                converged: true,
            });
        }
        if processed >= max_boxes {
            heap.push(cand);
            break;
        }
        let (a, b) = cand.region.bisect();
        for child in [a, b] {
            let enc = box_enclosure(f, &child);
            if enc.lo <= incumbent {
                seq += 1;
                heap.push(Candidate {
                    lower: enc.lo,
                    seq,
                    region: child,
                });
            }
        }
    }
    let lower = heap.peek().map_or(incumbent, |c| c.lower.min(incumbent));
    Ok(CertifiedBound {
        enclosure_lo: lower,
        enclosure_hi: incumbent,
        argmin_box: argmin,
        boxes_processed: processed,
        tolerance: tol,
        converged: false,
    })
}

/// Certified minimum of the quadric function `h` over `[0, π/2]²`.
pub fn certify_quadric_h(tol: f64, max_boxes: usize) -> Result<CertifiedBound, CertifyError> {
    bb_minimize(&QuadricH, Box2::quarter_square(), tol, max_boxes)
}

/// One sample of a surface grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// `resolution × resolution` samples of `f` on a box, row-major with the
/// x index outermost. The last row and column sit exactly on the box edge.
///
/// # Panics
/// If `resolution < 2`.
pub fn surface_grid<F: Fn(f64, f64) -> f64>(f: F, region: &Box2, resolution: usize) -> Vec<GridPoint> {
    assert!(resolution >= 2, "surface grid needs at least 2 samples per side");
    let coord = |iv: &Interval, i: usize| {
        if i == resolution - 1 {
            iv.hi
        } else {
            iv.lo + (iv.hi - iv.lo) * (i as f64 / (resolution - 1) as f64)
        }
    };
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let x = coord(&region.x, i);
        for j in 0..resolution {
            let y = coord(&region.y, j);
            out.push(GridPoint { x, y, value: f(x, y) });
        }
    }
    out
}

/// Surface of `h` on `[0, π/2]²`.
pub fn quadric_h_surface(resolution: usize) -> Vec<GridPoint> {
    surface_grid(quadric_h, &Box2::quarter_square(), resolution)
}

/// CSV with header `x,y,h` and 17 significant digits per value.
pub fn grid_to_csv(grid: &[GridPoint]) -> String {
    let mut s = String::from("x,y,h\n");
    for p in grid {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.x, p.y, p.value));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcore::rng_for;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_4;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn rejects_inverted_interval() {
        assert_eq!(Interval::new(1.0, 0.0), Err(CertifyError::BadInterval(1.0, 0.0)));
        assert!(Interval::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn elementary_enclosures() {
        let a = iv(-1.0, 2.0);
        let b = iv(3.0, 4.0);
        assert!((a * b).is_subset_of(&iv(-4.0 - 1e-14, 8.0 + 1e-14)));
        assert!((a * b).contains(-4.0) && (a * b).contains(8.0));
        assert_eq!(a.sqr().lo, 0.0);
        assert!(a.sqr().contains(4.0));
        let c = iv(0.0, PI).cos();
        assert!(c.contains(-1.0) && c.contains(1.0));
        let s = iv(0.1, 3.0).sin();
        assert!(s.contains(1.0) && s.lo <= 3.0f64.sin() && s.lo > 0.0);
        assert_eq!(iv(-10.0, 10.0).sin(), iv(-1.0, 1.0));
        let narrow = iv(0.2, 0.3).cos();
        assert!(narrow.contains(0.3f64.cos()) && narrow.contains(0.2f64.cos()) && narrow.hi < 1.0);
    }

    #[test]
    fn h_point_enclosure() {
        let p = Interval::point(FRAC_PI_4);
        let e = interval_h(p, p);
        assert!(e.contains(-3.25));
        assert!(e.width() <= 1e-12);
    }

    #[test]
    fn h_full_square_enclosure() {
        let e = interval_h(Box2::quarter_square().x, Box2::quarter_square().y);
        for v in [0.0, 1.0, -1.0, -3.25] {
            assert!(e.contains(v), "{e:?} misses {v}");
        }
    }

    #[test]
    fn gradient_enclosure_at_quarter_point() {
        let p = Interval::point(FRAC_PI_4);
        let [gx, gy] = QuadricH.enclose_gradient(p, p).unwrap();
        assert!(gx.contains(0.5) && gy.contains(0.5));
        assert!(gx.width() < 1e-12);
    }

    #[test]
    fn paraboloid_minimum() {
        let f = |x: Interval, y: Interval| x.sqr() + y.sqr();
        let r = bb_minimize(&f, Box2::new(iv(-1.0, 1.0), iv(-1.0, 1.0)), 1e-6, 1_000_000).unwrap();
        assert!(r.converged);
        assert!(r.enclosure_lo <= 0.0 && 0.0 <= r.enclosure_hi);
        assert!(r.width() <= 1e-6);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let f = |x: Interval, _y: Interval| x;
        assert_eq!(
            bb_minimize(&f, Box2::quarter_square(), 0.0, 10),
            Err(CertifyError::BadTolerance(0.0))
        );
    }

    #[test]
    fn budget_exhaustion_keeps_valid_enclosure() {
        let r = certify_quadric_h(1e-9, 20).unwrap();
        assert!(!r.converged);
        assert_eq!(r.boxes_processed, 20);
        // exact minimum on the diagonal: 1 − 64/15
        assert!(r.enclosure_lo <= -49.0 / 15.0 && -49.0 / 15.0 <= r.enclosure_hi);
    }

    #[test]
    fn quadric_h_certified_minimum() {
        // On x = y, h = 1 − 16u + 15u² with u = cos²x, minimized at u = 8/15.
        let exact = -49.0 / 15.0;
        let r = certify_quadric_h(1e-6, 10_000_000).unwrap();
        assert!(r.converged);
        assert!(r.width() <= 1e-6);
        assert!(r.enclosure_lo <= exact && exact <= r.enclosure_hi, "{r:?}");
        assert!(r.enclosure_lo >= -3.3);
        let xstar = (8.0f64 / 15.0).sqrt().acos();
        assert!((r.argmin_box.x.mid() - xstar).abs() < 1e-2);
        assert!((r.argmin_box.y.mid() - xstar).abs() < 1e-2);
    }

    #[test]
    fn certification_is_deterministic() {
        assert_eq!(certify_quadric_h(1e-4, 1_000_000), certify_quadric_h(1e-4, 1_000_000));
    }

    #[test]
    fn soundness_against_random_points() {
        let r = certify_quadric_h(1e-3, 1_000_000).unwrap();
        let mut rng = rng_for(5, 0);
        for _ in 0..10_000 {
            let (x, y) = (rng.random_range(0.0..=FRAC_PI_2), rng.random_range(0.0..=FRAC_PI_2));
            assert!(quadric_h(x, y) >= r.enclosure_lo - 1e-12);
        }
    }

    #[test]
    fn corner_grid() {
        let g = quadric_h_surface(2);
        let values: Vec<f64> = g.iter().map(|p| p.value).collect();
        assert_eq!(g.len(), 4);
        assert!(values[0].abs() < 1e-15);
        assert!((values[1] + 1.0).abs() < 1e-15);
        assert!((values[2] + 1.0).abs() < 1e-15);
        assert!((values[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_grid_contains_quarter_point_and_respects_bound() {
        let g = quadric_h_surface(129);
        let centre = g[64 * 129 + 64];
        assert_eq!((centre.x, centre.y), (FRAC_PI_4, FRAC_PI_4));
        assert!((centre.value + 3.25).abs() < 1e-12);
        let r = certify_quadric_h(1e-3, 1_000_000).unwrap();
        let min = g.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        assert!(min >= r.enclosure_lo - 1e-12);
    }

    #[test]
    fn csv_round_trips() {
        let g = quadric_h_surface(3);
        let csv = grid_to_csv(&g);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,h"));
        for (line, p) in lines.zip(&g) {
            let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
            assert_eq!(v, vec![p.x, p.y, p.value]);
        }
    }

    fn nested() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        (-4.0f64..4.0, 0.0f64..3.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(lo, w, a, b)| {
            let hi = lo + w;
            let (s, t) = (lo + w * a.min(b), lo + w * a.max(b));
            (lo, hi, s, t)
        })
    }

    proptest! {
        #[test]
        fn inclusion_isotonic((xl, xh, xs, xt) in nested(), (yl, yh, ys, yt) in nested()) {
            let outer = interval_h(iv(xl, xh), iv(yl, yh));
            let inner = interval_h(iv(xs, xt), iv(ys, yt));
            prop_assert!(outer.lo <= inner.lo.next_up() && inner.hi.next_down() <= outer.hi);
        }

        #[test]
        fn enclosure_contains_samples((xl, xh, _a, _b) in nested(), (yl, yh, _c, _d) in nested(), u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let e = interval_h(iv(xl, xh), iv(yl, yh));
            let (x, y) = (xl + u * (xh - xl), yl + v * (yh - yl));
            prop_assert!(e.contains(quadric_h(x, y)));
            let prod = iv(xl, xh) * iv(yl, yh);
            prop_assert!(prod.contains(x * y));
            let s = iv(xl, xh).sin();
            prop_assert!(s.contains(x.sin()));
            let c = iv(xl, xh).cos();
            prop_assert!(c.contains(x.cos()));
        }
    }
}
