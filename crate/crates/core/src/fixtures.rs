//! Reference formations and scenarios, plus a seeded random target
//! generator used by tests and the acceptance checks.
//!
//! Agent numbers in the angle table are 1-based to match how the angles are
//! usually written; everything else is 0-based.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::TargetFormation;
use crate::control::{FollowerLaw, ManeuverReference};
use crate::error::Result;
use crate::geometry::{signed_angle, Configuration, Rot2, Vec2};
use crate::graph::SensingGraph;
use crate::sim::{Scenario, ScheduleSegment};

/// Six-agent target positions (meters).
pub const SIX_AGENT_P_STAR: [(f64, f64); 6] = [
    (-1.0, 0.8),
    (-1.0, 0.1),
    (-0.3, 0.8),
    (-0.3, 0.1),
    (-1.35, -0.25),
    (0.05, 1.15),
];

/// Out-neighbors, 1-based.
pub const SIX_AGENT_NEIGHBORS: [&[usize]; 6] = [&[], &[1], &[1, 2], &[2, 3], &[1, 4], &[1, 4]];

/// Published angle list as `(vertex, a, b, degrees)`, 1-based: the angle at
/// `vertex` swept counterclockwise from the ray towards `a` to the ray
/// towards `b`.
pub const SIX_AGENT_ANGLES_DEG: [(usize, usize, usize, f64); 8] = [
    (1, 2, 3, 90.0),
    (2, 1, 3, 315.0),
    (3, 2, 4, 45.0),
    (4, 2, 3, 270.0),
    (4, 1, 5, 63.43),
    (5, 1, 4, 306.87),
    (4, 1, 6, 296.57),
    (6, 1, 4, 53.13),
];

pub const SIX_AGENT_SHAPE_P0: [(f64, f64); 6] = [
    (0.0, 0.5),
    (-0.5, 0.0),
    (0.0, 0.025),
    (0.25, 0.4),
    (0.5, -0.35),
    (0.6, 0.2),
];

pub const SIX_AGENT_MANEUVER_P0: [(f64, f64); 6] = [
    (-0.4, -0.35),
    (-1.1, -0.4),
    (0.0, 0.025),
    (0.25, 0.4),
    (0.5, -0.35),
    (0.6, 0.2),
];

/// Duration used for the six-agent shape run.
pub const SIX_AGENT_SHAPE_DURATION: f64 = 60.0;

/// One entry of the angle table evaluated on `config`, radians.
pub fn table_angle(config: &Configuration, vertex: usize, a: usize, b: usize) -> Result<f64> {
    signed_angle(config[b - 1], config[vertex - 1], config[a - 1])
}

pub fn six_agent_graph() -> SensingGraph {
    let lists: Vec<Vec<usize>> = SIX_AGENT_NEIGHBORS.iter().map(|r| r.to_vec()).collect();
    SensingGraph::from_one_based(&lists).expect("fixture graph is well formed")
}

pub fn six_agent_target() -> TargetFormation {
    let p = Configuration::from_xy(&SIX_AGENT_P_STAR).expect("fixture is finite");
    TargetFormation::new(p, six_agent_graph()).expect("fixture target is valid")
}

pub fn six_agent_shape_scenario() -> Scenario {
    let p0 = Configuration::from_xy(&SIX_AGENT_SHAPE_P0).expect("fixture is finite");
    Scenario::shape(p0, six_agent_target(), SIX_AGENT_SHAPE_DURATION)
}

/// The three-segment maneuver: drift up, turn the formation a quarter turn
/// clockwise while moving right, then shrink it to 70%.
pub fn six_agent_maneuver_schedule() -> Vec<ScheduleSegment> {
    // R(−π/2)(0.4, 0.4) and 0.7 times that, written out exactly
    let d1 = Vec2::new(0.4, 0.4);
    let d2 = Vec2::new(0.4, -0.4);
    let d3 = Vec2::new(0.28, -0.28);
    let seg = |t_start, t_end, v: Vec2, d| ScheduleSegment {
        t_start,
        t_end,
        reference: ManeuverReference::new(v, d).expect("fixture reference is valid"),
    };
    vec![
        seg(0.0, 50.0, Vec2::new(0.0, 0.02), d1),
        seg(50.0, 90.0, Vec2::new(0.05, 0.0), d2),
        seg(90.0, 120.0, Vec2::new(0.04, 0.0), d3),
    ]
}

pub fn six_agent_maneuver_scenario() -> Scenario {
    let p0 = Configuration::from_xy(&SIX_AGENT_MANEUVER_P0).expect("fixture is finite");
    Scenario::maneuver(
        p0,
        six_agent_target(),
        FollowerLaw::RelativePosition,
        six_agent_maneuver_schedule(),
    )
}

/// Three agents with the given follower angle (radians) at agent 3:
/// `p*₃ = 0`, `p*₁ = (1, 0)`, `p*₂ = 1.3·R(−α)(1, 0)`.
pub fn three_agent_target(follower_angle: f64) -> TargetFormation {
    let p2 = Rot2::new(-follower_angle).apply(Vec2::new(1.3, 0.0));
    let p = Configuration::new(vec![Vec2::new(1.0, 0.0), p2, Vec2::ZERO]).expect("finite");
    TargetFormation::new(p, SensingGraph::chain(3)).expect("follower angle is not a multiple of π")
}

/// Smallest `|sin|` of any follower angle accepted by [`random_target`].
pub const RANDOM_TARGET_MIN_SIN: f64 = 0.2;
/// Smallest neighbor distance accepted by [`random_target`].
pub const RANDOM_TARGET_MIN_EDGE: f64 = 0.1;

/// Random LFF graph with a random well-conditioned target in `[-1, 1]²`.
///
/// Each follower picks two distinct earlier agents; its position is redrawn
/// until both edges are at least [`RANDOM_TARGET_MIN_EDGE`] long and the
/// follower angle has `|sin| ≥` [`RANDOM_TARGET_MIN_SIN`].
pub fn random_target(n: usize, seed: u64) -> TargetFormation {
    assert!(n >= 3, "random targets need at least three agents");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(), vec![0]];
    let mut p: Vec<Vec2> = Vec::with_capacity(n);
    p.push(random_point(&mut rng));
    loop {
        let q = random_point(&mut rng);
        if q.distance(p[0]) >= 2.0 * RANDOM_TARGET_MIN_EDGE {
            p.push(q);
            break;
        }
    }
    for k in 2..n {
        let a = rng.gen_range(0..k);
        let mut b = rng.gen_range(0..k - 1);
        if b >= a {
            b += 1;
        }
        let (i, j) = (a.min(b), a.max(b));
        rows.push(vec![i, j]);
        loop {
            let q = random_point(&mut rng);
            let (ei, ej) = (p[i] - q, p[j] - q);
            if ei.norm() < RANDOM_TARGET_MIN_EDGE || ej.norm() < RANDOM_TARGET_MIN_EDGE {
                continue;
            }
            if (ei.cross(ej) / (ei.norm() * ej.norm())).abs() >= RANDOM_TARGET_MIN_SIN {
                p.push(q);
                break;
            }
        }
    }
    let p = Configuration::new(p).expect("finite");
    TargetFormation::new(p, SensingGraph::new(rows)).expect("sampled target is valid")
}

/// Uniform point in `[-1, 1]²`.
pub fn random_point<R: Rng>(rng: &mut R) -> Vec2 {
    Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_agent_angles_match_table() {
        let tf = six_agent_target();
        for &(v, a, b, deg) in &SIX_AGENT_ANGLES_DEG {
            let got = table_angle(tf.p_star(), v, a, b).unwrap().to_degrees();
            assert!((got - deg).abs() < 0.01, "α{v}{a}{b}: {got} vs {deg}");
        }
    }

    #[test]
    fn six_agent_triangles() {
        let tf = six_agent_target();
        let tris: Vec<(usize, usize, usize)> = tf
            .triangles()
            .iter()
            .map(|t| (t.i + 1, t.j + 1, t.k + 1))
            .collect();
        assert_eq!(tris, vec![(1, 2, 3), (2, 3, 4), (1, 4, 5), (1, 4, 6)]);
        let rates: Vec<f64> = tf
            .constraints()
            .constraints()
            .iter()
            .map(|c| c.follower_rate())
            .collect();
        for (r, want) in rates.iter().zip([0.5, 1.0, 0.64, 0.64]) {
            assert!((r - want).abs() < 1e-9, "{r} vs {want}");
        }
    }

    #[test]
    fn three_agent_follower_angle() {
        for deg in [30.0f64, 60.0, 90.0, 120.0, 315.0] {
            let tf = three_agent_target(deg.to_radians());
            let a = tf.constraints().angles()[0].follower_angle().to_degrees();
            assert!((a - deg).abs() < 1e-9, "{a} vs {deg}");
        }
    }

    #[test]
    fn maneuver_schedule_offsets() {
        let s = six_agent_maneuver_schedule();
        let d: Vec<Vec2> = s.iter().map(|g| g.reference.delta_12()).collect();
        let quarter = Rot2::new(-core::f64::consts::FRAC_PI_2);
        assert!((d[1] - quarter.apply(d[0])).norm() < 1e-15);
        assert!((d[2] - d[1] * 0.7).norm() < 1e-15);
    }

    #[test]
    fn random_targets_are_reproducible() {
        for n in 3..9 {
            let a = random_target(n, 42);
            assert_eq!(a, random_target(n, 42));
            assert_eq!(a.n(), n);
        }
        assert_ne!(random_target(6, 1), random_target(6, 2));
    }
}
