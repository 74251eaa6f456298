//! Planar primitives: vectors, rotations, 2×2 blocks, signed angles and
//! similarity transforms.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::math;

/// Distance below which two points are treated as coincident (meters).
pub const EPS_DEGENERATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// `det([self, other])`, positive when `other` lies counterclockwise of
    /// `self` within half a turn.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counterclockwise quarter turn, `R(π/2) v`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

/// Map an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut r = theta % TAU;
    if r < 0.0 {
        r += TAU;
    }
    // -tiny + 2π can round up to exactly 2π
    if r >= TAU {
        r -= TAU;
    }
    r
}

/// Map an angle difference into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = normalize_angle(theta);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 {
            m: [[a, b], [c, d]],
        }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn matmul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Deviation from the scaled-rotation form `[a, -b; b, a]`.
    pub fn scaled_rotation_defect(&self) -> f64 {
        (self.m[0][0] - self.m[1][1])
            .abs()
            .max((self.m[0][1] + self.m[1][0]).abs())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + rhs.m[0][0],
            self.m[0][1] + rhs.m[0][1],
            self.m[1][0] + rhs.m[1][0],
            self.m[1][1] + rhs.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-1.0)
    }
}

/// Planar rotation `R(θ) = [cos θ, -sin θ; sin θ, cos θ]` with θ kept in
/// `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot2 {
    theta: f64,
    cos: f64,
    sin: f64,
}

impl Rot2 {
    pub const IDENTITY: Rot2 = Rot2 {
        theta: 0.0,
        cos: 1.0,
        sin: 0.0,
    };

    pub fn new(theta: f64) -> Self {
        let theta = normalize_angle(theta);
        Rot2 {
            theta,
            cos: math::cos(theta),
            sin: math::sin(theta),
        }
    }

    pub fn angle(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.cos, -self.sin, self.sin, self.cos)
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.cos * v.x - self.sin * v.y,
            self.sin * v.x + self.cos * v.y,
        )
    }

    /// `Rᵀ v`, the inverse rotation.
    pub fn apply_transpose(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.cos * v.x + self.sin * v.y,
            -self.sin * v.x + self.cos * v.y,
        )
    }

    pub fn inverse(&self) -> Rot2 {
        Rot2::new(-self.theta)
    }

    pub fn compose(&self, other: &Rot2) -> Rot2 {
        Rot2::new(self.theta + other.theta)
    }
}

pub fn rotation_matrix(theta: f64) -> Rot2 {
    Rot2::new(theta)
}

/// Unit vector from `from` toward `to`.
pub fn bearing(from: Vec2, to: Vec2) -> Result<Vec2> {
    let d = to - from;
    let len = d.norm();
    if !(len > EPS_DEGENERATE) {
        return Err(Error::CoincidentPoints {
            threshold: EPS_DEGENERATE,
        });
    }
    Ok(d * (1.0 / len))
}

/// Signed angle `α_ijk` at vertex `p_j`, from the bearing toward `p_i` to the
/// bearing toward `p_k`, valued in `[0, 2π)`:
/// `arccos(b_jiᵀ b_jk)` when `det([b_ji, b_jk]) ≤ 0`, otherwise
/// `2π − arccos(b_jiᵀ b_jk)`. This is the clockwise sweep from `b_ji` to
/// `b_jk`.
pub fn signed_angle(p_i: Vec2, p_j: Vec2, p_k: Vec2) -> Result<f64> {
    let b_ji = bearing(p_j, p_i)?;
    let b_jk = bearing(p_j, p_k)?;
    let cos = b_ji.dot(b_jk).clamp(-1.0, 1.0);
    let a = math::acos(cos);
    if b_ji.cross(b_jk) <= 0.0 {
        Ok(a)
    } else {
        Ok(normalize_angle(TAU - a))
    }
}

/// `q = c R(θ) p + ξ` applied pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    c: f64,
    rot: Rot2,
    xi: Vec2,
}

impl SimilarityTransform {
    pub fn new(c: f64, theta: f64, xi: Vec2) -> Result<Self> {
        if c == 0.0 {
            return Err(Error::ZeroScale);
        }
        if !c.is_finite() || !theta.is_finite() || !xi.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(SimilarityTransform {
            c,
            rot: Rot2::new(theta),
            xi,
        })
    }

    pub fn identity() -> Self {
        SimilarityTransform {
            c: 1.0,
            rot: Rot2::IDENTITY,
            xi: Vec2::ZERO,
        }
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn theta(&self) -> f64 {
        self.rot.angle()
    }

    pub fn rotation(&self) -> Rot2 {
        self.rot
    }

    pub fn translation(&self) -> Vec2 {
        self.xi
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.rot.apply(p) * self.c + self.xi
    }
}

/// Ordered agent positions in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    positions: Vec<Vec2>,
}

impl Configuration {
    pub fn new(positions: Vec<Vec2>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::TooFewAgents {
                min: 2,
                got: positions.len(),
            });
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Configuration { positions })
    }

    pub(crate) fn from_vec_unchecked(positions: Vec<Vec2>) -> Self {
        Configuration { positions }
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        Configuration::new(xy.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<Vec2> {
        self.positions
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Vec2> {
        self.positions.iter()
    }

    pub fn centroid(&self) -> Vec2 {
        let sum = self.positions.iter().fold(Vec2::ZERO, |acc, &p| acc + p);
        sum * (1.0 / self.positions.len() as f64)
    }

    /// `‖p − 1⊗centroid(p)‖`.
    pub fn spread(&self) -> f64 {
        let c = self.centroid();
        math::sqrt(self.positions.iter().map(|&p| (p - c).norm_sq()).sum())
    }

    /// Stacked Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Configuration) -> Result<f64> {
        check_lengths(self, other)?;
        Ok(math::sqrt(
            self.positions
                .iter()
                .zip(&other.positions)
                .map(|(a, b)| (*a - *b).norm_sq())
                .sum(),
        ))
    }

    /// Largest per-agent displacement between two configurations.
    pub fn max_deviation(&self, other: &Configuration) -> Result<f64> {
        check_lengths(self, other)?;
        Ok(self
            .positions
            .iter()
            .zip(&other.positions)
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max))
    }
}

impl Index<usize> for Configuration {
    type Output = Vec2;
    fn index(&self, i: usize) -> &Vec2 {
        &self.positions[i]
    }
}

fn check_lengths(a: &Configuration, b: &Configuration) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

pub fn apply_similarity(config: &Configuration, t: &SimilarityTransform) -> Configuration {
    Configuration {
        positions: config.positions.iter().map(|&p| t.apply(p)).collect(),
    }
}

// Least-squares c·R(θ) = z / ‖p̃‖² in complex form, plus the centroids.
struct Fit {
    c: f64,
    theta: f64,
    q_mean: Vec2,
    p_mean: Vec2,
}

fn least_squares_fit(q: &Configuration, p: &Configuration) -> Result<Fit> {
    check_lengths(q, p)?;
    let p_mean = p.centroid();
    let q_mean = q.centroid();
    let mut re = 0.0;
    let mut im = 0.0;
    let mut ss = 0.0;
    for (&qi, &pi) in q.positions.iter().zip(&p.positions) {
        let a = pi - p_mean;
        let b = qi - q_mean;
        re += a.dot(b);
        im += a.cross(b);
        ss += a.norm_sq();
    }
    let spread = math::sqrt(ss);
    if !(spread > EPS_DEGENERATE) {
        return Err(Error::DegenerateReference);
    }
    Ok(Fit {
        c: math::hypot(re, im) / ss,
        theta: math::atan2(im, re),
        q_mean,
        p_mean,
    })
}

/// Best similarity (rotation only, no reflection) carrying `p` onto `q` in
/// the least-squares sense. The scale is reported positive; the negative
/// branch of `c` is the same map with θ shifted by π.
pub fn fit_similarity(q: &Configuration, p: &Configuration) -> Result<SimilarityTransform> {
    let fit = least_squares_fit(q, p)?;
    let rot = Rot2::new(fit.theta);
    let xi = fit.q_mean - rot.apply(fit.p_mean) * fit.c;
    SimilarityTransform::new(fit.c, fit.theta, xi)
}

/// `min_T ‖q − T(p)‖ / ‖p − centroid(p)‖` over similarities of `p`.
///
/// Zero exactly when `q` lies in the similarity class of `p`. The residual
/// is evaluated explicitly after the fit rather than through the
/// `‖q̃‖² − |z|²/‖p̃‖²` identity, which loses half the digits near zero.
pub fn shape_distance(q: &Configuration, p: &Configuration) -> Result<f64> {
    let fit = least_squares_fit(q, p)?;
    let rot = Rot2::new(fit.theta);
    let mut res = 0.0;
    for (&qi, &pi) in q.positions.iter().zip(&p.positions) {
        let fitted = rot.apply(pi - fit.p_mean) * fit.c;
        res += ((qi - fit.q_mean) - fitted).norm_sq();
    }
    Ok(math::sqrt(res) / p.spread())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    // Independent oracle: clockwise sweep from b_ji to b_jk via atan2.
    fn signed_angle_oracle(p_i: Vec2, p_j: Vec2, p_k: Vec2) -> f64 {
        let a = p_i - p_j;
        let b = p_k - p_j;
        let from = a.y.atan2(a.x);
        let to = b.y.atan2(b.x);
        let mut d = (from - to) % TAU;
        if d < 0.0 {
            d += TAU;
        }
        if d >= TAU - 1e-15 {
            d = 0.0;
        }
        d
    }

    #[test]
    fn rotation_examples() {
        let r = rotation_matrix(0.0).matrix();
        assert_eq!(r, Mat2::IDENTITY);
        let r = rotation_matrix(FRAC_PI_2).matrix();
        assert_abs_diff_eq!(r.m[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.m[0][1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.m[1][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.m[1][1], 0.0, epsilon = 1e-15);
        let v = rotation_matrix(FRAC_PI_2).apply(Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(v.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.y, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_normalizes_angle() {
        assert_abs_diff_eq!(
            Rot2::new(-FRAC_PI_2).angle(),
            3.0 * FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(Rot2::new(5.0 * PI).angle(), PI, epsilon = 1e-12);
        assert!(Rot2::new(-1e-18).angle() < TAU);
    }

    #[test]
    fn bearing_examples() {
        let b = bearing(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)).unwrap();
        assert_eq!(b, Vec2::new(1.0, 0.0));
        let b = bearing(Vec2::new(1.0, 1.0), Vec2::new(1.0, 3.0)).unwrap();
        assert_eq!(b, Vec2::new(0.0, 1.0));
        assert!(matches!(
            bearing(Vec2::ZERO, Vec2::ZERO),
            Err(Error::CoincidentPoints { .. })
        ));
    }

    #[test]
    fn signed_angle_examples() {
        let o = Vec2::ZERO;
        let e1 = Vec2::new(1.0, 0.0);
        assert_eq!(signed_angle(e1, o, e1).unwrap(), 0.0);
        assert_abs_diff_eq!(
            signed_angle(e1, o, Vec2::new(-1.0, 0.0)).unwrap(),
            PI,
            epsilon = 1e-15
        );
        let a = signed_angle(e1, o, Vec2::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(a, 3.0 * FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            a,
            signed_angle_oracle(e1, o, Vec2::new(0.0, 1.0)),
            epsilon = 1e-12
        );
        assert!(signed_angle(e1, e1, o).is_err());
    }

    #[test]
    fn apply_similarity_examples() {
        let p = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(apply_similarity(&p, &SimilarityTransform::identity()), p);
        let t = SimilarityTransform::new(2.0, 0.0, Vec2::ZERO).unwrap();
        assert_eq!(
            apply_similarity(&p, &t),
            Configuration::from_xy(&[(0.0, 0.0), (2.0, 0.0)]).unwrap()
        );
        let t = SimilarityTransform::new(1.0, PI, Vec2::new(1.0, 1.0)).unwrap();
        let q = t.apply(Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-15);
        assert_eq!(
            SimilarityTransform::new(0.0, 0.0, Vec2::ZERO),
            Err(Error::ZeroScale)
        );
    }

    fn kite() -> Configuration {
        Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.2), (0.3, 1.1), (1.4, 1.6)]).unwrap()
    }

    #[test]
    fn shape_distance_zero_on_own_class() {
        let p = kite();
        assert_eq!(shape_distance(&p, &p).unwrap(), 0.0);
        for &(c, th) in &[(2.5, 0.7), (0.3, 4.0), (-1.7, 1.1)] {
            let t = SimilarityTransform::new(c, th, Vec2::new(-3.0, 2.0)).unwrap();
            let q = apply_similarity(&p, &t);
            assert!(shape_distance(&q, &p).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn shape_distance_positive_on_mirror_and_matches_grid_search() {
        let p = kite();
        let q = Configuration::new(p.iter().map(|v| Vec2::new(-v.x, v.y)).collect()).unwrap();
        let closed = shape_distance(&q, &p).unwrap();
        assert!(closed > 1e-3, "mirror image must not be similar: {closed}");

        // Brute force over (c, θ); ξ has a closed form for each fixed pair.
        let (qm, pm) = (q.centroid(), p.centroid());
        let mut best = f64::INFINITY;
        for ci in 0..=400 {
            let c = -2.0 + 4.0 * ci as f64 / 400.0;
            for ti in 0..720 {
                let rot = Rot2::new(TAU * ti as f64 / 720.0);
                let xi = qm - rot.apply(pm) * c;
                let r: f64 = p
                    .iter()
                    .zip(q.iter())
                    .map(|(&pi, &qi)| (qi - (rot.apply(pi) * c + xi)).norm_sq())
                    .sum();
                best = best.min(r.sqrt() / p.spread());
            }
        }
        assert!(
            best >= closed - 1e-12,
            "grid beat closed form: {best} < {closed}"
        );
        assert!(
            best - closed < 5e-3,
            "grid {best} far from closed form {closed}"
        );
    }

    #[test]
    fn shape_distance_rejects_degenerate_reference() {
        let p = Configuration::from_xy(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(
            shape_distance(&kite_prefix3(), &p),
            Err(Error::DegenerateReference)
        );
    }

    fn kite_prefix3() -> Configuration {
        Configuration::new(kite().positions()[..3].to_vec()).unwrap()
    }

    #[test]
    fn fit_similarity_recovers_transform() {
        let p = kite();
        let t = SimilarityTransform::new(1.8, 2.2, Vec2::new(0.4, -1.0)).unwrap();
        let fit = fit_similarity(&apply_similarity(&p, &t), &p).unwrap();
        assert_abs_diff_eq!(fit.scale(), 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.theta(), 2.2, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.translation().x, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.translation().y, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn wrap_rule() {
        assert_abs_diff_eq!(wrap_angle(0.1 - (TAU - 0.1)), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
    }

    fn pt() -> impl Strategy<Value = Vec2> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    fn separated(a: Vec2, b: Vec2, c: Vec2) -> bool {
        a.distance(b) > 1e-3 && b.distance(c) > 1e-3 && a.distance(c) > 1e-3
    }

    proptest! {
        #[test]
        fn rotation_group_law(a in -20.0..20.0f64, b in -20.0..20.0f64) {
            let lhs = Rot2::new(a).matrix().matmul(&Rot2::new(b).matrix());
            let rhs = Rot2::new(a + b).matrix();
            prop_assert!((lhs - rhs).max_abs() <= 1e-12);
            prop_assert!((Rot2::new(a).matrix().det() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn signed_angle_matches_oracle(pi in pt(), pj in pt(), pk in pt()) {
            prop_assume!(separated(pi, pj, pk));
            let a = signed_angle(pi, pj, pk).unwrap();
            let o = signed_angle_oracle(pi, pj, pk);
            prop_assert!((0.0..TAU).contains(&a));
            prop_assert!(wrap_angle(a - o).abs() <= 1e-9, "{} vs {}", a, o);
        }

        #[test]
        fn signed_angle_similarity_invariant(
            pi in pt(), pj in pt(), pk in pt(),
            c in 0.05..20.0f64, th in 0.0..TAU, tx in -5.0..5.0f64, ty in -5.0..5.0f64,
        ) {
            prop_assume!(separated(pi, pj, pk));
            let t = SimilarityTransform::new(c, th, Vec2::new(tx, ty)).unwrap();
            let a = signed_angle(pi, pj, pk).unwrap();
            let b = signed_angle(t.apply(pi), t.apply(pj), t.apply(pk)).unwrap();
            prop_assert!(wrap_angle(a - b).abs() <= 1e-9);
        }

        #[test]
        fn shape_distance_zero_set_symmetric(
            pts in proptest::collection::vec(pt(), 3..7),
            c in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], th in 0.0..TAU,
        ) {
            let p = Configuration::new(pts).unwrap();
            prop_assume!(p.spread() > 1e-2);
            let t = SimilarityTransform::new(c, th, Vec2::new(1.0, -2.0)).unwrap();
            let q = apply_similarity(&p, &t);
            prop_assert!(shape_distance(&q, &p).unwrap() <= 1e-9);
            prop_assert!(shape_distance(&p, &q).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn configuration_requires_two_agents() {
        assert!(Configuration::new(vec![Vec2::ZERO]).is_err());
        assert!(Configuration::new(vec![Vec2::ZERO, Vec2::new(f64::NAN, 0.0)]).is_err());
    }
}
