//! Angle-induced linear constraints.
//!
//! For a triangle `(i, j, k)` with follower `k`, three signed angles of the
//! target fix 2×2 blocks with
//! `A_i p_i + A_j p_j + A_k p_k = 0` exactly on the similarity class of the
//! target triangle:
//!
//! ```text
//! A_i = sin(a_k) I − sin(a_j) Rᵀ(a_i)
//! A_j = sin(a_j) Rᵀ(a_i)
//! A_k = −sin(a_k) I
//! ```
//!
//! where `a_k`, `a_j`, `a_i` are the angles at `k`, `j`, `i`. Every block is a
//! scaled rotation, so it commutes with any rotation of the plane.
//!
//! The angles are taken in a consistent cyclic sense so the blocks vanish on
//! the target: `a_k` sweeps from the bearing toward `i` to the bearing toward
//! `j` in the [`signed_angle`] convention (and cyclically for `a_j`, `a_i`).
//! Taking the opposite sweep mirrors the rotation in `A_j` and the constraint
//! no longer holds on the target.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geometry::{
    apply_similarity, bearing, normalize_angle, signed_angle, Configuration, Mat2, Rot2,
    SimilarityTransform, Vec2, EPS_DEGENERATE,
};
use crate::graph::{
    build_formation_graph, first_degenerate_agent, triangle_set, validate_lff, FormationGraph,
    SensingGraph, Triangle, TriangleSet, EPS_COLLINEAR,
};
use crate::math;

/// The three signed angles of triangle `[k]` as the constraint blocks consume
/// them (radians, `[0, 2π)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleAngles {
    pub triangle: Triangle,
    /// Angle at the follower `k`; its sine fixes `A_k` and the decay rate of
    /// agent `k`.
    pub at_follower: f64,
    /// Angle at the middle-index neighbor `j`.
    pub at_second: f64,
    /// Angle at the lowest-index neighbor `i`; the rotation in `A_j`.
    pub at_first: f64,
}

impl TriangleAngles {
    pub fn new(triangle: Triangle, at_follower: f64, at_second: f64, at_first: f64) -> Self {
        TriangleAngles {
            triangle,
            at_follower: normalize_angle(at_follower),
            at_second: normalize_angle(at_second),
            at_first: normalize_angle(at_first),
        }
    }

    /// Measure the angles of `triangle` in `config`.
    pub fn measure(config: &Configuration, triangle: Triangle) -> Result<Self> {
        let Triangle { i, j, k } = triangle;
        let (pi, pj, pk) = (config[i], config[j], config[k]);
        Ok(TriangleAngles {
            triangle,
            at_follower: signed_angle(pi, pk, pj)?,
            at_second: signed_angle(pk, pj, pi)?,
            at_first: signed_angle(pj, pi, pk)?,
        })
    }

    pub fn follower_angle(&self) -> f64 {
        self.at_follower
    }

    /// `[at_follower, at_second, at_first]`.
    pub fn as_array(&self) -> [f64; 3] {
        [self.at_follower, self.at_second, self.at_first]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleConstraint {
    pub triangle: Triangle,
    pub a_first: Mat2,
    pub a_second: Mat2,
    pub a_follower: Mat2,
}

impl TriangleConstraint {
    /// `A_i p_i + A_j p_j + A_k p_k`.
    pub fn residual(&self, p_i: Vec2, p_j: Vec2, p_k: Vec2) -> Vec2 {
        self.a_first.mul_vec(p_i) + self.a_second.mul_vec(p_j) + self.a_follower.mul_vec(p_k)
    }

    pub fn residual_in(&self, config: &Configuration) -> Vec2 {
        let Triangle { i, j, k } = self.triangle;
        self.residual(config[i], config[j], config[k])
    }

    /// The follower position that zeroes the residual:
    /// `−A_k⁻¹ (A_i p_i + A_j p_j)`.
    pub fn solve_follower(&self, p_i: Vec2, p_j: Vec2) -> Vec2 {
        let rhs = self.a_first.mul_vec(p_i) + self.a_second.mul_vec(p_j);
        -scaled_rotation_inverse(&self.a_follower).mul_vec(rhs)
    }

    /// `sin²` of the follower angle, i.e. `det(A_k)`.
    pub fn follower_rate(&self) -> f64 {
        self.a_follower.det()
    }
}

/// Inverse of `[a, −b; b, a]` as `[a, b; −b, a] / (a² + b²)`.
pub(crate) fn scaled_rotation_inverse(m: &Mat2) -> Mat2 {
    let a = m.m[0][0];
    let b = m.m[1][0];
    m.transpose().scale(1.0 / (a * a + b * b))
}

pub fn constraint_matrices(a: &TriangleAngles) -> TriangleConstraint {
    let s_k = math::sin(a.at_follower);
    let s_j = math::sin(a.at_second);
    let a_second = Rot2::new(a.at_first).matrix().transpose().scale(s_j);
    let a_follower = Mat2::scaled_identity(-s_k);
    let a_first = Mat2::scaled_identity(s_k) - a_second;
    TriangleConstraint {
        triangle: a.triangle,
        a_first,
        a_second,
        a_follower,
    }
}

pub fn residual(tc: &TriangleConstraint, p_i: Vec2, p_j: Vec2, p_k: Vec2) -> Vec2 {
    tc.residual(p_i, p_j, p_k)
}

/// Angles and blocks of every triangle, ordered by follower index.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleConstraintSet {
    n: usize,
    angles: Vec<TriangleAngles>,
    blocks: Vec<TriangleConstraint>,
}

impl AngleConstraintSet {
    /// Assemble from per-triangle angles (followers `2..n` in order).
    pub fn from_angles(n: usize, angles: Vec<TriangleAngles>) -> Result<Self> {
        if n < 3 || angles.len() != n - 2 {
            return Err(Error::InvalidScenario(alloc::format!(
                "expected {} triangles for {} agents, got {}",
                n.saturating_sub(2),
                n,
                angles.len()
            )));
        }
        for (idx, a) in angles.iter().enumerate() {
            let t = a.triangle;
            if t.k != idx + 2 || !(t.i < t.j && t.j < t.k) {
                return Err(Error::InvalidScenario(alloc::format!(
                    "triangle {} must be (i<j<k) with follower {}",
                    idx + 1,
                    idx + 3
                )));
            }
            if math::sin(a.at_follower).abs() <= EPS_COLLINEAR {
                return Err(Error::DegenerateTarget { agent: t.k + 1 });
            }
        }
        let blocks = angles.iter().map(constraint_matrices).collect();
        Ok(AngleConstraintSet { n, angles, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn angles(&self) -> &[TriangleAngles] {
        &self.angles
    }

    pub fn constraints(&self) -> &[TriangleConstraint] {
        &self.blocks
    }

    /// Blocks for follower `k` (0-based, `k ≥ 2`).
    pub fn for_follower(&self, k: usize) -> Option<&TriangleConstraint> {
        k.checked_sub(2).and_then(|idx| self.blocks.get(idx))
    }

    pub fn angles_for(&self, k: usize) -> Option<&TriangleAngles> {
        k.checked_sub(2).and_then(|idx| self.angles.get(idx))
    }

    /// Largest residual norm over all triangles.
    pub fn max_residual(&self, config: &Configuration) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.residual_in(config).norm())
            .fold(0.0, f64::max)
    }
}

pub fn extract_angles(p_star: &Configuration, ts: &TriangleSet) -> Result<AngleConstraintSet> {
    if p_star.len() != ts.n() {
        return Err(Error::LengthMismatch {
            left: p_star.len(),
            right: ts.n(),
        });
    }
    let mut angles = Vec::with_capacity(ts.len());
    for &t in ts.iter() {
        let pk = p_star[t.k];
        let ok = match (bearing(pk, p_star[t.i]), bearing(pk, p_star[t.j])) {
            (Ok(a), Ok(b)) => a.cross(b).abs() > EPS_COLLINEAR,
            _ => false,
        };
        if !ok {
            return Err(Error::DegenerateTarget { agent: t.k + 1 });
        }
        angles.push(TriangleAngles::measure(p_star, t)?);
    }
    let acs = AngleConstraintSet::from_angles(ts.n(), angles)?;
    debug_assert!(acs.max_residual(p_star) <= 1e-9 * (1.0 + p_star.spread()));
    Ok(acs)
}

/// Place agents `3..n` from the leader and first-follower positions by
/// solving each triangle's constraint in follower order.
pub fn reconstruct(q1: Vec2, q2: Vec2, acs: &AngleConstraintSet) -> Result<Configuration> {
    if q1.distance(q2) <= EPS_DEGENERATE {
        return Err(Error::CoincidentLeaders);
    }
    let mut q = Vec::with_capacity(acs.n());
    q.push(q1);
    q.push(q2);
    for tc in acs.constraints() {
        let t = tc.triangle;
        debug_assert_eq!(t.k, q.len());
        let pk = tc.solve_follower(q[t.i], q[t.j]);
        q.push(pk);
    }
    Configuration::new(q)
}

/// Closed-form limit of the shape-stabilization dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedLimit {
    pub c_dagger: f64,
    pub theta_dagger: f64,
    pub xi_dagger: Vec2,
    pub p_dagger: Configuration,
}

impl PredictedLimit {
    pub fn transform(&self) -> SimilarityTransform {
        SimilarityTransform::new(self.c_dagger, self.theta_dagger, self.xi_dagger)
            .expect("c† is positive")
    }
}

/// The leader and first follower never move, so the limit is the similarity
/// image of `p*` pinning agents 1 and 2 at their initial positions.
pub fn predicted_limit(p_star: &Configuration, p1_0: Vec2, p2_0: Vec2) -> Result<PredictedLimit> {
    let d0 = p1_0 - p2_0;
    let d_star = p_star[0] - p_star[1];
    if d0.norm() <= EPS_DEGENERATE || d_star.norm() <= EPS_DEGENERATE {
        return Err(Error::CoincidentLeaders);
    }
    let c = d0.norm() / d_star.norm();
    let b21 = d0 * (1.0 / d0.norm());
    let b21_star = d_star * (1.0 / d_star.norm());
    let a = math::acos(b21.dot(b21_star).clamp(-1.0, 1.0));
    let theta = if b21.dot(Rot2::new(FRAC_PI_2).apply(b21_star)) >= 0.0 {
        a
    } else {
        normalize_angle(core::f64::consts::TAU - a)
    };
    let rot = Rot2::new(theta);
    let xi = p1_0 - rot.apply(p_star[0]) * c;
    let t = SimilarityTransform::new(c, theta, xi)?;
    Ok(PredictedLimit {
        c_dagger: c,
        theta_dagger: rot.angle(),
        xi_dagger: xi,
        p_dagger: apply_similarity(p_star, &t),
    })
}

/// A validated target: `p*`, its LFF sensing graph and everything derived
/// from them.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFormation {
    p_star: Configuration,
    graph: SensingGraph,
    formation_graph: FormationGraph,
    triangles: TriangleSet,
    constraints: AngleConstraintSet,
}

impl TargetFormation {
    pub fn new(p_star: Configuration, graph: SensingGraph) -> Result<Self> {
        validate_lff(&graph).map_err(Error::InvalidSensingGraph)?;
        if p_star.len() != graph.n() {
            return Err(Error::LengthMismatch {
                left: p_star.len(),
                right: graph.n(),
            });
        }
        if p_star[0].distance(p_star[1]) <= EPS_DEGENERATE {
            return Err(Error::CoincidentLeaders);
        }
        if let Some(agent) = first_degenerate_agent(&p_star, &graph) {
            return Err(Error::DegenerateTarget { agent: agent + 1 });
        }
        let formation_graph = build_formation_graph(&graph)?;
        let triangles = triangle_set(&graph)?;
        let constraints = extract_angles(&p_star, &triangles)?;
        Ok(TargetFormation {
            p_star,
            graph,
            formation_graph,
            triangles,
            constraints,
        })
    }

    pub fn n(&self) -> usize {
        self.p_star.len()
    }

    pub fn p_star(&self) -> &Configuration {
        &self.p_star
    }

    pub fn graph(&self) -> &SensingGraph {
        &self.graph
    }

    pub fn formation_graph(&self) -> &FormationGraph {
        &self.formation_graph
    }

    pub fn triangles(&self) -> &TriangleSet {
        &self.triangles
    }

    pub fn constraints(&self) -> &AngleConstraintSet {
        &self.constraints
    }

    pub fn predicted_limit(&self, p1_0: Vec2, p2_0: Vec2) -> Result<PredictedLimit> {
        predicted_limit(&self.p_star, p1_0, p2_0)
    }
}
