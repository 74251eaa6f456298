//! trajectory.csv and metrics.json.

use std::io::Write;

use angleform_core::sim::{FitWindow, SegmentSummary};
use angleform_core::{
    collision_report, estimate_rate, fit_similarity, maneuver_segments, Activation, ControlMode,
    FollowerLaw, RateEstimate, Scenario, TrajectoryRecord,
};
use serde::Serialize;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 6] = ["t", "agent", "x", "y", "ux", "uy"];

/// Fixed-point decimal with nine significant digits.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade, e.g. 9.999999999 → 10.0000000
    let mut decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let digits = s
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count();
    if digits > 9 && decimals > 0 {
        decimals -= 1;
        return format!("{x:.decimals$}");
    }
    s
}

pub fn write_trajectory_csv<W: Write>(out: W, rec: &TrajectoryRecord) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for ((t, x), u) in rec.times.iter().zip(&rec.states).zip(&rec.inputs) {
        for (k, (p, v)) in x.iter().zip(u).enumerate() {
            w.write_record([
                fmt_sig9(*t),
                (k + 1).to_string(),
                fmt_sig9(p.x),
                fmt_sig9(p.y),
                fmt_sig9(v.x),
                fmt_sig9(v.y),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricsReport {
    pub scenario: ScenarioSummary,
    pub terminal: TerminalMetrics,
    pub limit: Option<LimitComparison>,
    pub followers: Vec<FollowerMetrics>,
    pub collision: Option<Vec<CollisionMetrics>>,
    pub segments: Vec<SegmentMetrics>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ScenarioSummary {
    pub agents: usize,
    pub mode: &'static str,
    pub follower_law: Option<&'static str>,
    pub activation: &'static str,
    pub epsilon: Option<f64>,
    pub frame_offsets: bool,
    pub dt: f64,
    pub duration: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TerminalMetrics {
    pub time: f64,
    pub angle_error_rad: Option<f64>,
    pub shape_distance: Option<f64>,
    pub min_neighbor_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimilarityMetrics {
    pub c: f64,
    pub theta_deg: f64,
    pub xi: [f64; 2],
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LimitComparison {
    pub predicted: SimilarityMetrics,
    pub realized: SimilarityMetrics,
    pub rel_error_c: Option<f64>,
    pub rel_error_theta: Option<f64>,
    pub rel_error_xi: Option<f64>,
    pub max_distance_to_limit: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateMetrics {
    pub rate: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub r_squared: Option<f64>,
    pub samples: usize,
}

impl From<&RateEstimate> for RateMetrics {
    fn from(e: &RateEstimate) -> Self {
        RateMetrics {
            rate: finite(e.rate),
            t_start: finite(e.t_start),
            t_end: finite(e.t_end),
            r_squared: finite(e.r_squared),
            samples: e.samples,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FollowerMetrics {
    /// 1-based.
    pub agent: usize,
    pub neighbors: [usize; 2],
    pub follower_angle_deg: f64,
    /// `sin²` of the follower angle.
    pub predicted_rate: f64,
    /// `min(predicted_rate, fitted rates of both neighbors)`.
    pub cascade_bound: Option<f64>,
    pub fitted: Option<RateMetrics>,
    pub activation_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CollisionMetrics {
    pub agent: usize,
    pub neighbors: [usize; 2],
    pub bound: f64,
    pub initial_offset: f64,
    pub precondition_holds: bool,
    pub min_distance: [f64; 2],
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SegmentMetrics {
    pub segment: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub velocity: [f64; 2],
    pub delta_12: [f64; 2],
    pub terminal_offset_error: f64,
    pub terminal_limit_distance: f64,
    pub terminal_shape_distance: f64,
    pub terminal_velocity_error: f64,
    pub terminal_leader_distance: f64,
    pub offset_rate: Option<RateMetrics>,
    pub limit_rate: Option<RateMetrics>,
    pub velocity_rate: Option<RateMetrics>,
}

impl From<&SegmentSummary> for SegmentMetrics {
    fn from(s: &SegmentSummary) -> Self {
        let v = s.reference.velocity();
        let d = s.reference.delta_12();
        SegmentMetrics {
            segment: s.index + 1,
            t_start: s.t_start,
            t_end: s.t_end,
            velocity: [v.x, v.y],
            delta_12: [d.x, d.y],
            terminal_offset_error: s.terminal_offset_error,
            terminal_limit_distance: s.terminal_limit_distance,
            terminal_shape_distance: s.terminal_shape_distance,
            terminal_velocity_error: s.terminal_velocity_error,
            terminal_leader_distance: s.terminal_leader_distance,
            offset_rate: s.offset_rate.as_ref().map(RateMetrics::from),
            limit_rate: s.limit_rate.as_ref().map(RateMetrics::from),
            velocity_rate: s.velocity_rate.as_ref().map(RateMetrics::from),
        }
    }
}

/// `|a − b| / max(|b|, 1)`: relative for references of unit size or more,
/// absolute below, so a zero reference (θ† = 0, ξ† = 0) stays defined.
fn rel(diff: f64, reference: f64) -> Option<f64> {
    finite(diff.abs() / reference.abs().max(1.0))
}

/// Per-follower fits of `‖p_k − p†_k‖` (shape mode only).
pub fn follower_fits(s: &Scenario, rec: &TrajectoryRecord) -> Vec<Option<RateEstimate>> {
    let mut out = vec![None; s.n()];
    if rec.limit.is_none() {
        return out;
    }
    for (k, slot) in out.iter_mut().enumerate().skip(2) {
        let series = rec.agent_limit_distance(k);
        *slot = estimate_rate(&rec.times, &series, FitWindow::Auto).ok();
    }
    out
}

pub fn build_metrics(s: &Scenario, rec: &TrajectoryRecord) -> Result<MetricsReport, CliError> {
    let last = rec.last_state();
    let scenario = ScenarioSummary {
        agents: s.n(),
        mode: match s.mode {
            ControlMode::Shape => "shape",
            ControlMode::Maneuver(_) => "maneuver",
        },
        follower_law: match s.mode {
            ControlMode::Shape => None,
            ControlMode::Maneuver(FollowerLaw::RelativePosition) => Some("relative"),
            ControlMode::Maneuver(FollowerLaw::DistanceOnly) => Some("distance"),
            ControlMode::Maneuver(FollowerLaw::BearingOnly) => Some("bearing"),
        },
        activation: match s.activation {
            Activation::Simultaneous => "simultaneous",
            Activation::Sequential { .. } => "sequential",
        },
        epsilon: match s.activation {
            Activation::Simultaneous => None,
            Activation::Sequential { epsilon } => Some(epsilon),
        },
        frame_offsets: s.frame_offsets.is_some(),
        dt: s.dt,
        duration: s.duration,
        samples: rec.len(),
    };
    let terminal = TerminalMetrics {
        time: *rec.times.last().expect("non-empty"),
        angle_error_rad: rec.angle_error.last().copied().and_then(finite),
        shape_distance: rec.shape_distance.last().copied().and_then(finite),
        min_neighbor_distance: rec.min_neighbor_distance.last().copied().and_then(finite),
    };
    let limit = match &rec.limit {
        None => None,
        Some(l) => {
            let fit = fit_similarity(last, s.target.p_star())?;
            let dxi = (fit.translation() - l.xi_dagger).norm();
            let dth = angleform_core::geometry::wrap_angle(fit.theta() - l.theta_dagger);
            Some(LimitComparison {
                predicted: SimilarityMetrics {
                    c: l.c_dagger,
                    theta_deg: l.theta_dagger.to_degrees(),
                    xi: [l.xi_dagger.x, l.xi_dagger.y],
                },
                realized: SimilarityMetrics {
                    c: fit.scale(),
                    theta_deg: fit.theta().to_degrees(),
                    xi: [fit.translation().x, fit.translation().y],
                },
                rel_error_c: rel(fit.scale() - l.c_dagger, l.c_dagger),
                rel_error_theta: rel(dth, l.theta_dagger),
                rel_error_xi: rel(dxi, l.xi_dagger.norm()),
                max_distance_to_limit: finite(last.max_deviation(&l.p_dagger)?),
            })
        }
    };
    let fits = follower_fits(s, rec);
    let fitted_rate = |k: usize| fits[k].as_ref().map(|e| e.rate);
    let followers = s
        .target
        .triangles()
        .iter()
        .map(|t| {
            let tc = s
                .target
                .constraints()
                .for_follower(t.k)
                .expect("one triangle per follower");
            let angles = s
                .target
                .constraints()
                .angles_for(t.k)
                .expect("one triangle per follower");
            let own = tc.follower_rate();
            let neighbor_rate = |a: usize| {
                if a < 2 {
                    Some(f64::INFINITY)
                } else {
                    fitted_rate(a)
                }
            };
            let cascade_bound = match (neighbor_rate(t.i), neighbor_rate(t.j)) {
                (Some(a), Some(b)) if rec.limit.is_some() => finite(own.min(a).min(b)),
                _ => None,
            };
            FollowerMetrics {
                agent: t.k + 1,
                neighbors: [t.i + 1, t.j + 1],
                follower_angle_deg: angles.follower_angle().to_degrees(),
                predicted_rate: own,
                cascade_bound,
                fitted: fits[t.k].as_ref().map(RateMetrics::from),
                activation_time: rec.activation_times.get(t.k).copied().flatten(),
            }
        })
        .collect();
    let collision = match s.activation {
        Activation::Sequential { .. } => Some(
            collision_report(s, rec)?
                .followers
                .iter()
                .map(|f| CollisionMetrics {
                    agent: f.agent + 1,
                    neighbors: [f.neighbors[0] + 1, f.neighbors[1] + 1],
                    bound: f.bound,
                    initial_offset: f.initial_offset,
                    precondition_holds: f.precondition_holds,
                    min_distance: f.min_distance,
                })
                .collect(),
        ),
        Activation::Simultaneous => None,
    };
    let segments = match s.mode {
        ControlMode::Shape => Vec::new(),
        ControlMode::Maneuver(_) => maneuver_segments(s, rec)?
            .iter()
            .map(SegmentMetrics::from)
            .collect(),
    };
    Ok(MetricsReport {
        scenario,
        terminal,
        limit,
        followers,
        collision,
        segments,
    })
}
