//! Angle-constrained formation shape stabilization and maneuver control for
//! single-integrator agents sensing each other over a directed
//! leader-first-follower (LFF) graph.
//!
//! The crate is `no_std` and needs only `alloc`. Everything here is pure
//! numerics: planar geometry, LFF graph validation, angle-induced linear
//! constraints, the distributed control laws, a fixed-step RK4 closed-loop
//! simulator and the monitors used to check convergence rates, the limit
//! configuration and collision bounds.
//!
//! Agent indices are 0-based throughout the Rust API. File formats and
//! reports use 1-based indices (agent 1 is the leader, agent 2 the first
//! follower).
#![no_std]
// `!(x > 0.0)` and friends are used so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod checks;
pub mod constraints;
pub mod control;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod graph;
pub mod sim;

pub use constraints::{
    constraint_matrices, extract_angles, predicted_limit, reconstruct, residual,
    AngleConstraintSet, PredictedLimit, TargetFormation, TriangleAngles, TriangleConstraint,
};
pub use control::{
    bearing_follower_control, distance_follower_control, local_frame_control, maneuver_control,
    shape_control, ControlMode, FollowerLaw, FrameOffsets, Gains, ManeuverReference,
};
pub use error::{Error, Result};
pub use geometry::{
    apply_similarity, bearing, fit_similarity, rotation_matrix, shape_distance, signed_angle,
    Configuration, Mat2, Rot2, SimilarityTransform, Vec2,
};
pub use graph::{
    build_formation_graph, check_strong_nondegeneracy, triangle_set, validate_lff, FormationGraph,
    LffRule, LffViolation, SensingGraph, Triangle, TriangleSet,
};
pub use sim::{
    angle_error, check_collision_bound, collision_report, estimate_rate, integrate,
    maneuver_segments, run_maneuver, Activation, CollisionReport, FitWindow, ManeuverRun,
    RateEstimate, Scenario, ScheduleSegment, SegmentSummary, TrajectoryRecord,
};
