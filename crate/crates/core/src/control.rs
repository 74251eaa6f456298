//! Distributed control laws.
//!
//! Every law reads only the agent's own out-neighbors. Agent indices are
//! 0-based: `0` is the leader, `1` the first follower.

use alloc::vec::Vec;

use crate::constraints::AngleConstraintSet;
use crate::error::{Error, Result};
use crate::geometry::{bearing, Configuration, Rot2, Vec2, EPS_DEGENERATE};

/// Law used by the first follower in maneuver mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FollowerLaw {
    /// Track the full relative position `δ*₁₂`.
    #[default]
    RelativePosition,
    /// Track only `‖δ*₁₂‖` (formation scale).
    DistanceOnly,
    /// Track only the direction of `δ*₁₂` (formation orientation).
    BearingOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    Shape,
    Maneuver(FollowerLaw),
}

/// Reference velocity and leader-to-first-follower offset for one schedule
/// segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverReference {
    v_r: Vec2,
    delta_12: Vec2,
}

impl ManeuverReference {
    pub fn new(v_r: Vec2, delta_12: Vec2) -> Result<Self> {
        if !v_r.is_finite() || !delta_12.is_finite() {
            return Err(Error::NonFinite);
        }
        if delta_12.norm() <= EPS_DEGENERATE {
            return Err(Error::ZeroLeaderOffset);
        }
        Ok(ManeuverReference { v_r, delta_12 })
    }

    pub fn velocity(&self) -> Vec2 {
        self.v_r
    }

    /// Target of `p₂ − p₁`.
    pub fn delta_12(&self) -> Vec2 {
        self.delta_12
    }
}

/// Per-agent rotation `Q_g^k` from the global frame into agent `k`'s frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOffsets(pub Vec<Rot2>);

impl FrameOffsets {
    pub fn from_angles(angles: &[f64]) -> Self {
        FrameOffsets(angles.iter().map(|&a| Rot2::new(a)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> Rot2 {
        self.0[k]
    }
}

/// Positive multipliers on each law. All analysis assumes 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub angle: f64,
    pub first_follower: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            angle: 1.0,
            first_follower: 1.0,
        }
    }
}

/// `u_k = −A_kᵀ (A_i e_ki + A_j e_kj)` with `e_kh = p_h − p_k`; zero for the
/// leader and first follower.
pub fn shape_control(k: usize, config: &Configuration, acs: &AngleConstraintSet) -> Vec2 {
    match acs.for_follower(k) {
        None => Vec2::ZERO,
        Some(tc) => {
            let t = tc.triangle;
            let e_ki = config[t.i] - config[t.k];
            let e_kj = config[t.j] - config[t.k];
            angle_law(k, e_ki, e_kj, acs)
        }
    }
}

fn angle_law(k: usize, e_ki: Vec2, e_kj: Vec2, acs: &AngleConstraintSet) -> Vec2 {
    let Some(tc) = acs.for_follower(k) else {
        return Vec2::ZERO;
    };
    let inner = tc.a_first.mul_vec(e_ki) + tc.a_second.mul_vec(e_kj);
    -tc.a_follower.transpose().mul_vec(inner)
}

/// The angle law evaluated on relative positions expressed in agent `k`'s
/// own frame; the result is in that frame too. `local` holds `p_i − p_k` and
/// `p_j − p_k` for the triangle's neighbors `i < j`.
pub fn local_frame_control(k: usize, local: [Vec2; 2], acs: &AngleConstraintSet) -> Vec2 {
    angle_law(k, local[0], local[1], acs)
}

/// Agent `k`'s angle law computed the way agent `k` would: measure neighbors
/// in its frame, apply the law, rotate the command back to the global frame.
pub fn shape_control_in_frame(
    k: usize,
    config: &Configuration,
    acs: &AngleConstraintSet,
    frame: Rot2,
) -> Vec2 {
    let Some(tc) = acs.for_follower(k) else {
        return Vec2::ZERO;
    };
    let t = tc.triangle;
    let local = [
        frame.apply(config[t.i] - config[t.k]),
        frame.apply(config[t.j] - config[t.k]),
    ];
    frame.apply_transpose(local_frame_control(k, local, acs))
}

/// Maneuver law: the leader moves at `v*_r`, the first follower tracks
/// `δ*₁₂` on top of `v*_r`, followers add `v*_r` to the angle law.
pub fn maneuver_control(
    k: usize,
    config: &Configuration,
    reference: &ManeuverReference,
    acs: &AngleConstraintSet,
    law: FollowerLaw,
) -> Result<Vec2> {
    let v = reference.velocity();
    Ok(match k {
        0 => v,
        1 => v + first_follower_term(config[0], config[1], reference.delta_12(), law)?,
        _ => v + shape_control(k, config, acs),
    })
}

/// Correction applied by the first follower on top of `v*_r`.
pub fn first_follower_term(p1: Vec2, p2: Vec2, delta_star: Vec2, law: FollowerLaw) -> Result<Vec2> {
    Ok(match law {
        FollowerLaw::RelativePosition => -((p2 - p1) - delta_star),
        FollowerLaw::DistanceOnly => distance_follower_control(p1, p2, delta_star),
        FollowerLaw::BearingOnly => bearing_follower_control(p1, p2, delta_star)?,
    })
}

/// `u₂ = −(‖e₁₂‖² − ‖δ*‖²) e₁₂` with `e₁₂ = p₂ − p₁`.
pub fn distance_follower_control(p1: Vec2, p2: Vec2, delta_star: Vec2) -> Vec2 {
    let e = p2 - p1;
    -(e.norm_sq() - delta_star.norm_sq()) * e
}

/// `u₂ = (I − b₁₂ b₁₂ᵀ) b*₁₂`. Zero when `b₁₂ = ±b*₁₂`; the antipodal zero is
/// a saddle.
pub fn bearing_follower_control(p1: Vec2, p2: Vec2, delta_star: Vec2) -> Result<Vec2> {
    let b = bearing(p1, p2)?;
    let b_star = bearing(Vec2::ZERO, delta_star)?;
    Ok(b_star - b * b.dot(b_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::TargetFormation;
    use crate::geometry::{apply_similarity, SimilarityTransform};
    use crate::graph::SensingGraph;
    use crate::math;
    use core::f64::consts::TAU;
    use proptest::prelude::*;

    fn three() -> TargetFormation {
        let p = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.3, 0.9)]).unwrap();
        TargetFormation::new(p, SensingGraph::chain(3)).unwrap()
    }

    #[test]
    fn leader_and_first_follower_are_uncontrolled() {
        let tf = three();
        let p = Configuration::from_xy(&[(5.0, 1.0), (-2.0, 3.0), (0.0, 0.0)]).unwrap();
        assert_eq!(shape_control(0, &p, tf.constraints()), Vec2::ZERO);
        assert_eq!(shape_control(1, &p, tf.constraints()), Vec2::ZERO);
    }

    #[test]
    fn equilibrium_on_target() {
        let tf = three();
        let t = SimilarityTransform::new(1.7, 0.4, Vec2::new(2.0, -1.0)).unwrap();
        let q = apply_similarity(tf.p_star(), &t);
        assert!(shape_control(2, &q, tf.constraints()).norm() < 1e-15);
    }

    #[test]
    fn single_agent_perturbation_decays_at_follower_rate() {
        let tf = three();
        let pl = tf
            .predicted_limit(Vec2::new(0.5, 0.5), Vec2::new(1.0, 2.0))
            .unwrap();
        let mut q = pl.p_dagger.clone().into_positions();
        let d = Vec2::new(0.6, -0.8);
        q[2] += d;
        let q = Configuration::new(q).unwrap();
        let u = shape_control(2, &q, tf.constraints());
        let s2 = math::sin(tf.constraints().angles()[0].follower_angle()).powi(2);
        assert!((u - d * (-s2)).norm() < 1e-12);
    }

    #[test]
    fn maneuver_examples() {
        let tf = three();
        let acs = tf.constraints();
        let p = tf.p_star().clone();
        let delta = p[1] - p[0];
        let v = Vec2::new(0.3, -0.1);
        let r = ManeuverReference::new(v, delta).unwrap();
        for k in 0..3 {
            let u = maneuver_control(k, &p, &r, acs, FollowerLaw::RelativePosition).unwrap();
            assert!((u - v).norm() < 1e-15);
        }
        let r = ManeuverReference::new(v, delta - Vec2::new(0.5, 0.0)).unwrap();
        let u = maneuver_control(1, &p, &r, acs, FollowerLaw::RelativePosition).unwrap();
        assert!((u - (v - Vec2::new(0.5, 0.0))).norm() < 1e-15);

        // zero velocity: the plain shape law for followers
        let q = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 2.0)]).unwrap();
        let r0 = ManeuverReference::new(Vec2::ZERO, delta).unwrap();
        let u = maneuver_control(2, &q, &r0, acs, FollowerLaw::RelativePosition).unwrap();
        assert_eq!(u, shape_control(2, &q, acs));
        assert!(ManeuverReference::new(v, Vec2::ZERO).is_err());
    }

    #[test]
    fn distance_law_examples() {
        let d = Vec2::new(0.6, 0.8);
        assert_eq!(
            distance_follower_control(Vec2::ZERO, Vec2::new(1.0, 0.0), d),
            Vec2::ZERO
        );
        let u = distance_follower_control(Vec2::ZERO, Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0));
        assert_eq!(u, Vec2::new(-6.0, 0.0));
    }

    #[test]
    fn distance_law_converges_monotonically() {
        // 1-D reduction r' = −(r² − 1) r, integrated with small Euler steps
        // (independent of the simulator's RK4)
        let mut p2 = Vec2::new(2.0, 0.0);
        let mut prev = 2.0;
        let dt = 1e-4;
        for _ in 0..200_000 {
            p2 += distance_follower_control(Vec2::ZERO, p2, Vec2::new(0.0, 1.0)) * dt;
            let r = p2.norm();
            assert!(r <= prev + 1e-15);
            prev = r;
        }
        assert!((prev - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bearing_law_examples() {
        let d = Vec2::new(0.0, 2.0);
        let u = bearing_follower_control(Vec2::ZERO, Vec2::new(0.0, 5.0), d).unwrap();
        assert_eq!(u, Vec2::ZERO);
        let u = bearing_follower_control(Vec2::ZERO, Vec2::new(3.0, 0.0), d).unwrap();
        assert!((u - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        let u = bearing_follower_control(Vec2::ZERO, Vec2::new(0.0, -1.0), d).unwrap();
        assert!(u.norm() < 1e-15);
        assert!(bearing_follower_control(Vec2::ZERO, Vec2::ZERO, d).is_err());
    }

    fn pt() -> impl Strategy<Value = Vec2> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn bearing_law_orthogonal(a in pt(), b in pt(), d in pt()) {
            prop_assume!(a.distance(b) > 1e-3 && d.norm() > 1e-3);
            let u = bearing_follower_control(a, b, d).unwrap();
            let b12 = bearing(a, b).unwrap();
            prop_assert!(b12.dot(u).abs() <= 1e-12);
        }

        #[test]
        fn frame_invariance(seed in any::<u64>(), n in 3usize..8, theta in 0.0..TAU,
                            pts in proptest::collection::vec(pt(), 8)) {
            let tf = crate::fixtures::random_target(n, seed);
            let q = Configuration::new(pts[..n].to_vec()).unwrap();
            for k in 0..n {
                let global = shape_control(k, &q, tf.constraints());
                let local = shape_control_in_frame(k, &q, tf.constraints(), Rot2::new(theta));
                prop_assert!((global - local).norm() <= 1e-12 * (1.0 + global.norm()));
                let t = tf.triangles().for_follower(k);
                if let Some(t) = t {
                    let r = Rot2::new(theta);
                    let lf = local_frame_control(k, [r.apply(q[t.i] - q[t.k]), r.apply(q[t.j] - q[t.k])], tf.constraints());
                    prop_assert!((r.apply(global) - lf).norm() <= 1e-12 * (1.0 + global.norm()));
                }
            }
        }

        #[test]
        fn exact_linearity(seed in any::<u64>(), a in proptest::collection::vec(pt(), 6),
                           b in proptest::collection::vec(pt(), 6), s in -3.0..3.0f64) {
            let tf = crate::fixtures::random_target(6, seed);
            let acs = tf.constraints();
            let x = Configuration::new(a.clone()).unwrap();
            let y = Configuration::new(b.clone()).unwrap();
            let sum = Configuration::new(a.iter().zip(&b).map(|(p, q)| *p + *q * s).collect()).unwrap();
            for k in 2..6 {
                let lhs = shape_control(k, &sum, acs);
                let rhs = shape_control(k, &x, acs) + shape_control(k, &y, acs) * s;
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }
        }

        #[test]
        fn equilibria_coincide(seed in any::<u64>(), c in 0.2..3.0f64, th in 0.0..TAU) {
            let tf = crate::fixtures::random_target(6, seed);
            let t = SimilarityTransform::new(c, th, Vec2::new(0.3, 0.1)).unwrap();
            let q = apply_similarity(tf.p_star(), &t);
            let r = ManeuverReference::new(Vec2::ZERO, q[1] - q[0]).unwrap();
            for k in 0..6 {
                prop_assert!(shape_control(k, &q, tf.constraints()).norm() <= 1e-12);
                let u = maneuver_control(k, &q, &r, tf.constraints(), FollowerLaw::RelativePosition).unwrap();
                prop_assert!(u.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn nonzero_off_target() {
        let tf = three();
        let q = Configuration::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.9, -0.2)]).unwrap();
        assert!(shape_control(2, &q, tf.constraints()).norm() > 1e-3);
    }
}
