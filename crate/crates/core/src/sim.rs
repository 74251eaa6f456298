//! Closed-loop simulation and the monitors built on it.
//!
//! Integration is classical fixed-step RK4. Time is tracked as an integer
//! step count; schedule switches and activation decisions happen only at
//! step boundaries, so the right-hand side is smooth inside every step.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::{PredictedLimit, TargetFormation, TriangleAngles};
use crate::control::{
    first_follower_term, shape_control, shape_control_in_frame, ControlMode, FollowerLaw,
    FrameOffsets, Gains, ManeuverReference,
};
use crate::error::{Error, Result};
use crate::geometry::{shape_distance, wrap_angle, Configuration, Vec2, EPS_DEGENERATE};
use crate::math;

pub const DEFAULT_DT: f64 = 0.01;
/// Upper bound on the step for the gain-1 closed loop.
pub const MAX_DT: f64 = 0.05;
pub const DEFAULT_SEQUENTIAL_EPSILON: f64 = 1e-4;
/// Samples below this are excluded from every rate fit.
pub const RATE_FLOOR: f64 = 1e-12;
/// Lower edge of the automatic fit window.
pub const FIT_WINDOW_LOW: f64 = 1e-10;

/// Reference active on `[t_start, t_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub reference: ManeuverReference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Simultaneous,
    /// Follower `k` stays idle until both of its neighbors are within
    /// `epsilon` of their predicted limits. Once switched on it stays on.
    Sequential {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub p0: Configuration,
    pub target: TargetFormation,
    pub mode: ControlMode,
    pub schedule: Vec<ScheduleSegment>,
    pub dt: f64,
    pub duration: f64,
    pub activation: Activation,
    pub frame_offsets: Option<FrameOffsets>,
    pub gains: Gains,
    pub seed: u64,
}

impl Scenario {
    pub fn shape(p0: Configuration, target: TargetFormation, duration: f64) -> Self {
        Scenario {
            p0,
            target,
            mode: ControlMode::Shape,
            schedule: Vec::new(),
            dt: DEFAULT_DT,
            duration,
            activation: Activation::Simultaneous,
            frame_offsets: None,
            gains: Gains::default(),
            seed: 0,
        }
    }

    /// Maneuver scenario; the duration is the end of the last segment.
    pub fn maneuver(
        p0: Configuration,
        target: TargetFormation,
        law: FollowerLaw,
        schedule: Vec<ScheduleSegment>,
    ) -> Self {
        let duration = schedule.last().map_or(0.0, |s| s.t_end);
        Scenario {
            p0,
            target,
            mode: ControlMode::Maneuver(law),
            schedule,
            dt: DEFAULT_DT,
            duration,
            activation: Activation::Simultaneous,
            frame_offsets: None,
            gains: Gains::default(),
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.target.n()
    }

    /// Number of integration steps; samples are one more.
    pub fn step_count(&self) -> Result<usize> {
        steps_for(self.duration, self.dt).ok_or_else(|| {
            invalid(format!(
                "duration {} is not a multiple of dt {}",
                self.duration, self.dt
            ))
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.p0.len() != n {
            return Err(invalid(format!(
                "initial configuration has {} agents, target has {n}",
                self.p0.len()
            )));
        }
        if self.p0[0].distance(self.p0[1]) <= EPS_DEGENERATE {
            return Err(invalid(
                "leader and first follower coincide initially".to_string(),
            ));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > MAX_DT {
            return Err(Error::StepTooLarge { dt: self.dt });
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(invalid(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        self.step_count()?;
        if !(self.gains.angle > 0.0 && self.gains.first_follower > 0.0) {
            return Err(invalid("gains must be positive".to_string()));
        }
        if let Some(f) = &self.frame_offsets {
            if f.len() != n {
                return Err(invalid(format!("{} frame offsets for {n} agents", f.len())));
            }
        }
        match self.mode {
            ControlMode::Shape => {
                if !self.schedule.is_empty() {
                    return Err(invalid("shape mode takes no schedule".to_string()));
                }
            }
            ControlMode::Maneuver(_) => {
                self.segment_steps()?;
                if matches!(self.activation, Activation::Sequential { .. }) {
                    return Err(invalid(
                        "sequential activation is only defined in shape mode".to_string(),
                    ));
                }
            }
        }
        if let Activation::Sequential { epsilon } = self.activation {
            if !(epsilon > 0.0) {
                return Err(invalid(format!(
                    "activation epsilon must be positive, got {epsilon}"
                )));
            }
        }
        Ok(())
    }

    /// Segment boundaries as step indices `[start, end)`.
    fn segment_steps(&self) -> Result<Vec<(usize, usize)>> {
        if self.schedule.is_empty() {
            return Err(invalid("maneuver mode needs a schedule".to_string()));
        }
        let mut out = Vec::with_capacity(self.schedule.len());
        let mut expect = 0usize;
        for (idx, seg) in self.schedule.iter().enumerate() {
            if !(seg.t_start < seg.t_end) {
                return Err(invalid(format!("segment {} has t_start >= t_end", idx + 1)));
            }
            let a = steps_for(seg.t_start, self.dt).ok_or_else(|| {
                invalid(format!("segment {} start is not a multiple of dt", idx + 1))
            })?;
            let b = steps_for(seg.t_end, self.dt).ok_or_else(|| {
                invalid(format!("segment {} end is not a multiple of dt", idx + 1))
            })?;
            if a != expect {
                return Err(invalid(format!(
                    "segment {} starts at {} but the previous one ends at {}",
                    idx + 1,
                    seg.t_start,
                    expect as f64 * self.dt
                )));
            }
            out.push((a, b));
            expect = b;
        }
        if expect < self.step_count()? {
            return Err(invalid(
                "schedule ends before the simulation does".to_string(),
            ));
        }
        Ok(out)
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidScenario(msg)
}

fn steps_for(t: f64, dt: f64) -> Option<usize> {
    if !(t >= 0.0) || !(dt > 0.0) {
        return None;
    }
    let s = math::round(t / dt);
    if (s * dt - t).abs() <= 1e-9 * t.max(1.0) {
        Some(s as usize)
    } else {
        None
    }
}

/// Sampled closed-loop trajectory with derived series.
///
/// `leader_offset_error` (`‖p₂ − p₁ − δ*₁₂‖`) and `velocity_error`
/// (`max_k≥3 ‖ṗ_k − v*_r‖`) are filled in maneuver mode only.
/// `angle_error` is NaN at samples where an angle is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Configuration>,
    pub inputs: Vec<Vec<Vec2>>,
    pub angle_error: Vec<f64>,
    pub shape_distance: Vec<f64>,
    /// Per-sample, per-agent distance to the current limit configuration.
    pub limit_distance: Vec<Vec<f64>>,
    pub min_neighbor_distance: Vec<f64>,
    pub leader_offset_error: Vec<f64>,
    pub velocity_error: Vec<f64>,
    /// Shape-mode limit, fixed by the initial leader positions.
    pub limit: Option<PredictedLimit>,
    /// Time each agent's law was switched on (`Some(0.0)` when always on).
    pub activation_times: Vec<Option<f64>>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &Configuration {
        self.states
            .last()
            .expect("a record always holds the initial sample")
    }

    /// `‖p_k − p†_k‖` over time for one agent.
    pub fn agent_limit_distance(&self, k: usize) -> Vec<f64> {
        self.limit_distance.iter().map(|row| row[k]).collect()
    }

    /// Stacked `‖p − p†‖` over time.
    pub fn stacked_limit_distance(&self) -> Vec<f64> {
        self.limit_distance
            .iter()
            .map(|row| math::sqrt(row.iter().map(|d| d * d).sum()))
            .collect()
    }
}

/// Sum over all constraint angles of `|wrap(α − α*)|`, radians.
pub fn angle_error(
    config: &Configuration,
    acs: &crate::constraints::AngleConstraintSet,
) -> Result<f64> {
    let mut total = 0.0;
    for target in acs.angles() {
        let measured = TriangleAngles::measure(config, target.triangle).map_err(|_| {
            Error::DegenerateMeasurement {
                follower: target.triangle.k + 1,
            }
        })?;
        for (m, t) in measured.as_array().iter().zip(target.as_array()) {
            total += wrap_angle(m - t).abs();
        }
    }
    Ok(total)
}

struct Dynamics<'a> {
    s: &'a Scenario,
    segments: Vec<(usize, usize)>,
}

impl<'a> Dynamics<'a> {
    fn reference_at_step(&self, step: usize) -> Option<&'a ManeuverReference> {
        if self.segments.is_empty() {
            return None;
        }
        let idx = self
            .segments
            .iter()
            .position(|&(a, b)| a <= step && step < b)
            .unwrap_or(self.segments.len() - 1);
        Some(&self.s.schedule[idx].reference)
    }

    fn velocities(
        &self,
        state: &Configuration,
        reference: Option<&ManeuverReference>,
        active: &[bool],
    ) -> Result<Vec<Vec2>> {
        let s = self.s;
        let acs = s.target.constraints();
        let mut u = vec![Vec2::ZERO; state.len()];
        let v = reference.map_or(Vec2::ZERO, |r| r.velocity());
        for (k, uk) in u.iter_mut().enumerate() {
            *uk = match k {
                0 => v,
                1 => match (s.mode, reference) {
                    (ControlMode::Maneuver(law), Some(r)) => {
                        v + first_follower_term(state[0], state[1], r.delta_12(), law)?
                            * s.gains.first_follower
                    }
                    _ => Vec2::ZERO,
                },
                _ => {
                    let angle = if active[k] {
                        match &s.frame_offsets {
                            Some(f) => shape_control_in_frame(k, state, acs, f.get(k)),
                            None => shape_control(k, state, acs),
                        }
                    } else {
                        Vec2::ZERO
                    };
                    v + angle * s.gains.angle
                }
            };
        }
        Ok(u)
    }
}

fn axpy(x: &[Vec2], h: f64, k: &[Vec2]) -> Configuration {
    Configuration::from_vec_unchecked(x.iter().zip(k).map(|(&a, &b)| a + b * h).collect())
}

/// Integrate the closed loop for `s.duration` seconds.
pub fn integrate(s: &Scenario) -> Result<TrajectoryRecord> {
    s.validate()?;
    let n = s.n();
    let steps = s.step_count()?;
    let segments = match s.mode {
        ControlMode::Shape => Vec::new(),
        ControlMode::Maneuver(_) => s.segment_steps()?,
    };
    let dyn_ = Dynamics { s, segments };
    let acs = s.target.constraints();
    let p_star = s.target.p_star();
    let shape_limit = match s.mode {
        ControlMode::Shape => Some(s.target.predicted_limit(s.p0[0], s.p0[1])?),
        ControlMode::Maneuver(_) => None,
    };

    let mut active: Vec<bool> = vec![matches!(s.activation, Activation::Simultaneous); n];
    let mut activation_times: Vec<Option<f64>> = vec![None; n];
    active[0] = true;
    active[1] = true;

    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        inputs: Vec::with_capacity(steps + 1),
        angle_error: Vec::with_capacity(steps + 1),
        shape_distance: Vec::with_capacity(steps + 1),
        limit_distance: Vec::with_capacity(steps + 1),
        min_neighbor_distance: Vec::with_capacity(steps + 1),
        leader_offset_error: Vec::new(),
        velocity_error: Vec::new(),
        limit: shape_limit.clone(),
        activation_times: Vec::new(),
    };

    let mut x = s.p0.clone();
    for step in 0..=steps {
        let t = step as f64 * s.dt;
        if let (Activation::Sequential { epsilon }, Some(limit)) = (s.activation, &shape_limit) {
            update_activation(s, &x, limit, epsilon, &mut active);
        }
        for k in 0..n {
            if active[k] && activation_times[k].is_none() {
                activation_times[k] = Some(t);
            }
        }
        let reference = dyn_.reference_at_step(step);
        let u = dyn_.velocities(&x, reference, &active)?;

        // derived series
        let limit_now = match (&shape_limit, s.mode, reference) {
            (Some(l), _, _) => Some(l.p_dagger.clone()),
            (None, ControlMode::Maneuver(law), Some(r)) => {
                let anchor2 = match law {
                    FollowerLaw::RelativePosition => x[0] + r.delta_12(),
                    _ => x[1],
                };
                s.target
                    .predicted_limit(x[0], anchor2)
                    .ok()
                    .map(|l| l.p_dagger)
            }
            _ => None,
        };
        rec.limit_distance.push(match &limit_now {
            Some(l) => (0..n).map(|k| x[k].distance(l[k])).collect(),
            None => vec![f64::NAN; n],
        });
        rec.angle_error
            .push(angle_error(&x, acs).unwrap_or(f64::NAN));
        rec.shape_distance.push(shape_distance(&x, p_star)?);
        rec.min_neighbor_distance.push(
            s.target
                .graph()
                .edges()
                .map(|(i, j)| x[i].distance(x[j]))
                .fold(f64::INFINITY, f64::min),
        );
        if let Some(r) = reference {
            rec.leader_offset_error
                .push(((x[1] - x[0]) - r.delta_12()).norm());
            rec.velocity_error.push(
                u.iter()
                    .skip(2)
                    .map(|uk| (*uk - r.velocity()).norm())
                    .fold(0.0, f64::max),
            );
        }
        rec.times.push(t);
        rec.states.push(x.clone());
        rec.inputs.push(u.clone());

        if step == steps {
            break;
        }
        let h = s.dt;
        let p = x.positions();
        let k1 = u;
        let k2 = dyn_.velocities(&axpy(p, 0.5 * h, &k1), reference, &active)?;
        let k3 = dyn_.velocities(&axpy(p, 0.5 * h, &k2), reference, &active)?;
        let k4 = dyn_.velocities(&axpy(p, h, &k3), reference, &active)?;
        let next: Vec<Vec2> = (0..n)
            .map(|i| p[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
            .collect();
        x = Configuration::new(next)?;
    }
    rec.activation_times = activation_times;
    Ok(rec)
}

fn update_activation(
    s: &Scenario,
    x: &Configuration,
    limit: &PredictedLimit,
    epsilon: f64,
    active: &mut [bool],
) {
    for t in s.target.triangles().iter() {
        if active[t.k] {
            continue;
        }
        let settled = |a: usize| x[a].distance(limit.p_dagger[a]) < epsilon;
        if settled(t.i) && settled(t.j) {
            active[t.k] = true;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitWindow {
    /// Samples from the first point (after the series peak) at or below half
    /// the peak down to the last point above [`FIT_WINDOW_LOW`]. For a
    /// decaying series the peak is the initial value.
    Auto,
    /// Samples with `t0 ≤ t ≤ t1`.
    Range(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub label: String,
    /// `−d ln(x)/dt`, 1/s.
    pub rate: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares exponential rate of a positive series.
pub fn estimate_rate(times: &[f64], values: &[f64], window: FitWindow) -> Result<RateEstimate> {
    let len = times.len().min(values.len());
    let (lo, hi) = match window {
        FitWindow::Range(t0, t1) => {
            let lo = times[..len].iter().position(|&t| t >= t0).unwrap_or(len);
            let hi = times[..len]
                .iter()
                .rposition(|&t| t <= t1)
                .map_or(lo, |i| i + 1);
            (lo, hi.max(lo))
        }
        FitWindow::Auto => auto_window(&values[..len]),
    };
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut m = 0usize;
    let mut t_start = f64::NAN;
    let mut t_end = f64::NAN;
    for idx in lo..hi {
        let v = values[idx];
        if !(v > RATE_FLOOR) || !v.is_finite() {
            continue;
        }
        let t = times[idx];
        let y = math::ln(v);
        if m == 0 {
            t_start = t;
        }
        t_end = t;
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        syy += y * y;
        m += 1;
    }
    if m < 3 {
        return Err(Error::InsufficientData { got: m });
    }
    let mf = m as f64;
    let cov = sxy - sx * sy / mf;
    let var_t = sxx - sx * sx / mf;
    let var_y = syy - sy * sy / mf;
    if !(var_t > 0.0) {
        return Err(Error::InsufficientData { got: m });
    }
    let slope = cov / var_t;
    let r_squared = if var_y > 0.0 {
        (cov * cov) / (var_t * var_y)
    } else {
        1.0
    };
    Ok(RateEstimate {
        label: String::new(),
        rate: -slope,
        t_start,
        t_end,
        r_squared,
        samples: m,
    })
}

fn auto_window(values: &[f64]) -> (usize, usize) {
    let Some((peak_idx, peak)) = values
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
    else {
        return (0, 0);
    };
    let Some(lo) = (peak_idx..values.len()).find(|&i| values[i] <= 0.5 * peak) else {
        return (0, 0);
    };
    let hi = (lo..values.len())
        .find(|&i| !(values[i] >= FIT_WINDOW_LOW))
        .unwrap_or(values.len());
    (lo, hi)
}

/// Collision monitor for one follower.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerCollision {
    /// 0-based.
    pub agent: usize,
    pub neighbors: [usize; 2],
    /// `min(‖p†_k − p†_i‖, ‖p†_k − p†_j‖)`.
    pub bound: f64,
    /// `‖p_k(0) − p†_k‖`.
    pub initial_offset: f64,
    pub precondition_holds: bool,
    /// Smallest sampled distance to each neighbor over the run.
    pub min_distance: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    pub followers: Vec<FollowerCollision>,
}

impl CollisionReport {
    /// True when every follower meeting the precondition kept a positive
    /// distance to both neighbors.
    pub fn guarantee_holds(&self) -> bool {
        self.followers
            .iter()
            .filter(|f| f.precondition_holds)
            .all(|f| f.min_distance[0] > 0.0 && f.min_distance[1] > 0.0)
    }

    pub fn min_distance(&self) -> f64 {
        self.followers
            .iter()
            .flat_map(|f| f.min_distance)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Run a sequential-activation scenario and compare each follower's initial
/// offset with the collision-free bound, both measured against `p†`.
pub fn check_collision_bound(s: &Scenario) -> Result<CollisionReport> {
    if !matches!(s.activation, Activation::Sequential { .. }) {
        return Err(invalid(
            "collision check needs sequential activation".to_string(),
        ));
    }
    let rec = integrate(s)?;
    collision_report(s, &rec)
}

/// Collision monitor evaluated on an existing shape-mode record.
pub fn collision_report(s: &Scenario, rec: &TrajectoryRecord) -> Result<CollisionReport> {
    let limit = rec
        .limit
        .as_ref()
        .ok_or_else(|| invalid("collision check needs a shape-mode record".to_string()))?;
    let pd = &limit.p_dagger;
    let mut followers = Vec::new();
    for t in s.target.triangles().iter() {
        let bound = pd[t.k].distance(pd[t.i]).min(pd[t.k].distance(pd[t.j]));
        let initial_offset = s.p0[t.k].distance(pd[t.k]);
        let mut min_distance = [f64::INFINITY; 2];
        for x in &rec.states {
            min_distance[0] = min_distance[0].min(x[t.k].distance(x[t.i]));
            min_distance[1] = min_distance[1].min(x[t.k].distance(x[t.j]));
        }
        followers.push(FollowerCollision {
            agent: t.k,
            neighbors: [t.i, t.j],
            bound,
            initial_offset,
            precondition_holds: initial_offset < bound,
            min_distance,
        });
    }
    Ok(CollisionReport { followers })
}

/// Per-segment summary of a maneuver run. Terminal values are left limits at
/// `t_end`, evaluated with this segment's reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub reference: ManeuverReference,
    pub terminal_offset_error: f64,
    pub terminal_limit_distance: f64,
    pub terminal_shape_distance: f64,
    pub terminal_velocity_error: f64,
    pub terminal_leader_distance: f64,
    pub offset_rate: Option<RateEstimate>,
    pub limit_rate: Option<RateEstimate>,
    pub velocity_rate: Option<RateEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverRun {
    pub record: TrajectoryRecord,
    pub segments: Vec<SegmentSummary>,
}

pub fn run_maneuver(s: &Scenario) -> Result<ManeuverRun> {
    if !matches!(s.mode, ControlMode::Maneuver(_)) {
        return Err(invalid("run_maneuver needs maneuver mode".to_string()));
    }
    let record = integrate(s)?;
    let segments = maneuver_segments(s, &record)?;
    Ok(ManeuverRun { record, segments })
}

/// Per-segment terminal values and fitted rates of an existing maneuver
/// record.
pub fn maneuver_segments(s: &Scenario, record: &TrajectoryRecord) -> Result<Vec<SegmentSummary>> {
    let ControlMode::Maneuver(law) = s.mode else {
        return Err(invalid("segment summaries need maneuver mode".to_string()));
    };
    let steps = record.len() - 1;
    let bounds = s.segment_steps()?;
    let limit_series = record.stacked_limit_distance();
    let acs = s.target.constraints();
    let mut segments = Vec::with_capacity(bounds.len());
    for (idx, (&(a, b), seg)) in bounds.iter().zip(&s.schedule).enumerate() {
        if a >= steps {
            break;
        }
        let b = b.min(steps);
        let x = &record.states[b];
        let r = seg.reference;
        let anchor2 = match law {
            FollowerLaw::RelativePosition => x[0] + r.delta_12(),
            _ => x[1],
        };
        let limit = s.target.predicted_limit(x[0], anchor2)?;
        let terminal_velocity_error = (2..s.n())
            .map(|k| {
                let u = match &s.frame_offsets {
                    Some(f) => shape_control_in_frame(k, x, acs, f.get(k)),
                    None => shape_control(k, x, acs),
                };
                (u * s.gains.angle).norm()
            })
            .fold(0.0, f64::max);
        let times = &record.times[a..b];
        let fit = |label: &str, series: &[f64]| {
            estimate_rate(times, &series[a..b], FitWindow::Auto)
                .ok()
                .map(|mut e| {
                    e.label = label.to_string();
                    e
                })
        };
        segments.push(SegmentSummary {
            index: idx,
            t_start: seg.t_start,
            t_end: b as f64 * s.dt,
            reference: r,
            terminal_offset_error: ((x[1] - x[0]) - r.delta_12()).norm(),
            terminal_limit_distance: x.distance(&limit.p_dagger)?,
            terminal_shape_distance: shape_distance(x, s.target.p_star())?,
            terminal_velocity_error,
            terminal_leader_distance: x[0].distance(x[1]),
            offset_rate: fit("leader_offset_error", &record.leader_offset_error),
            limit_rate: fit("limit_distance", &limit_series),
            velocity_rate: fit("velocity_error", &record.velocity_error),
        });
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::{apply_similarity, SimilarityTransform};
    use crate::graph::SensingGraph;

    fn three(follower_angle_deg: f64) -> TargetFormation {
        fixtures::three_agent_target(follower_angle_deg.to_radians())
    }

    #[test]
    fn on_target_start_is_an_equilibrium() {
        let tf = fixtures::six_agent_target();
        let mut s = Scenario::shape(tf.p_star().clone(), tf, 2.0);
        s.dt = 0.01;
        let rec = integrate(&s).unwrap();
        assert_eq!(rec.len(), 201);
        for (u, e) in rec.inputs.iter().zip(&rec.angle_error) {
            assert!(u.iter().all(|v| v.norm() < 1e-14));
            assert!(*e < 1e-9);
        }
    }

    #[test]
    fn three_agent_closed_form() {
        let tf = three(60.0);
        let p0 =
            Configuration::new(vec![tf.p_star()[0], tf.p_star()[1], Vec2::new(0.5, 0.7)]).unwrap();
        let mut s = Scenario::shape(p0.clone(), tf.clone(), 5.0);
        s.dt = 0.001;
        let rec = integrate(&s).unwrap();
        let s2 = math::sin(60f64.to_radians()).powi(2);
        let d0 = p0[2].distance(tf.p_star()[2]);
        for (t, row) in rec.times.iter().zip(&rec.limit_distance).step_by(500) {
            let exact = math::exp(-s2 * t) * d0;
            assert!((row[2] - exact).abs() <= 1e-6 * exact, "t={t}");
        }
        // leader and first follower never move
        assert_eq!(rec.last_state()[0], p0[0]);
        assert_eq!(rec.last_state()[1], p0[1]);
    }

    #[test]
    fn determinism() {
        let s = fixtures::six_agent_shape_scenario();
        let mut s = s.clone();
        s.duration = 3.0;
        assert_eq!(integrate(&s).unwrap(), integrate(&s).unwrap());
    }

    #[test]
    fn validation_errors() {
        let mut s = fixtures::six_agent_shape_scenario();
        s.dt = 0.1;
        assert_eq!(integrate(&s), Err(Error::StepTooLarge { dt: 0.1 }));
        let mut s = fixtures::six_agent_shape_scenario();
        s.duration = 1.005;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        let mut s = fixtures::six_agent_shape_scenario();
        let mut p = s.p0.clone().into_positions();
        p[1] = p[0];
        s.p0 = Configuration::new(p).unwrap();
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        let mut s = fixtures::six_agent_maneuver_scenario();
        s.schedule[1].t_start = 50.005;
        assert!(s.validate().is_err());
        let mut s = fixtures::six_agent_maneuver_scenario();
        s.schedule.truncate(2);
        assert!(s.validate().is_err());
        let mut s = fixtures::six_agent_shape_scenario();
        s.schedule = fixtures::six_agent_maneuver_scenario().schedule;
        assert!(s.validate().is_err());
    }

    #[test]
    fn angle_error_examples() {
        let tf = fixtures::six_agent_target();
        let t = SimilarityTransform::new(0.4, 2.0, Vec2::new(3.0, 1.0)).unwrap();
        let q = apply_similarity(tf.p_star(), &t);
        assert!(angle_error(&q, tf.constraints()).unwrap() <= 1e-9);
        let mut p = tf.p_star().clone().into_positions();
        p[3] = p[2];
        let q = Configuration::new(p).unwrap();
        assert!(matches!(
            angle_error(&q, tf.constraints()),
            Err(Error::DegenerateMeasurement { .. })
        ));
    }

    #[test]
    fn angle_error_wraps() {
        // three-agent target whose at-follower angle is 2π − 0.1; measure a
        // configuration whose at-follower angle is 0.1 with the other two
        // angles left as they are → contributes 0.2 plus the other angles'
        // change
        let tri = crate::graph::Triangle { i: 0, j: 1, k: 2 };
        let target = TriangleAngles::new(tri, core::f64::consts::TAU - 0.1, 1.0, 1.0);
        let measured = TriangleAngles::new(tri, 0.1, 1.0, 1.0);
        let d: f64 = measured
            .as_array()
            .iter()
            .zip(target.as_array())
            .map(|(m, t)| wrap_angle(m - t).abs())
            .sum();
        assert!((d - 0.2).abs() < 1e-12);
        let off = TriangleAngles::new(tri, 1.0 + core::f64::consts::PI, 1.0, 1.0);
        let base = TriangleAngles::new(tri, 1.0, 1.0, 1.0);
        let d: f64 = off
            .as_array()
            .iter()
            .zip(base.as_array())
            .map(|(m, t)| wrap_angle(m - t).abs())
            .sum();
        assert!((d - core::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn synthetic_exponential_rate() {
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * math::exp(-2.0 * t)).collect();
        let e = estimate_rate(&times, &values, FitWindow::Auto).unwrap();
        assert!((e.rate - 2.0).abs() < 1e-9, "{}", e.rate);
        let e = estimate_rate(&times, &values, FitWindow::Range(1.0, 2.0)).unwrap();
        assert!((e.rate - 2.0).abs() < 1e-9);
        assert!(matches!(
            estimate_rate(&times[..2], &values[..2], FitWindow::Auto),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn sequential_activation_order() {
        let tf = fixtures::six_agent_target();
        let mut p = tf.p_star().clone().into_positions();
        for (k, v) in p.iter_mut().enumerate().skip(2) {
            *v += Vec2::new(0.05 * k as f64, -0.03);
        }
        let mut s = Scenario::shape(Configuration::new(p).unwrap(), tf, 60.0);
        s.activation = Activation::Sequential { epsilon: 1e-4 };
        let rec = integrate(&s).unwrap();
        let at = &rec.activation_times;
        assert_eq!(at[2], Some(0.0));
        // agent 4 waits for agent 3; agents 5 and 6 wait for agent 4
        assert!(at[3].unwrap() > 0.0);
        assert!(at[4].unwrap() > at[3].unwrap());
        assert_eq!(at[4], at[5]);
        let report = check_collision_bound(&s).unwrap();
        assert!(report.guarantee_holds());
    }

    #[test]
    fn collision_monitor_trivial_cases() {
        let tf = fixtures::six_agent_target();
        let mut s = Scenario::shape(tf.p_star().clone(), tf.clone(), 1.0);
        s.activation = Activation::Sequential { epsilon: 1e-4 };
        let r = check_collision_bound(&s).unwrap();
        for f in &r.followers {
            assert!(f.precondition_holds);
            let p = tf.p_star();
            assert!((f.min_distance[0] - p[f.agent].distance(p[f.neighbors[0]])).abs() < 1e-12);
        }
        // agent 3 pushed beyond its bound: reported, no claim made
        let mut p = tf.p_star().clone().into_positions();
        p[2] += Vec2::new(3.0, 0.0);
        s.p0 = Configuration::new(p).unwrap();
        let r = check_collision_bound(&s).unwrap();
        assert!(!r.followers[0].precondition_holds);
        s.activation = Activation::Simultaneous;
        assert!(check_collision_bound(&s).is_err());
    }

    #[test]
    fn maneuver_on_target_translates_rigidly() {
        let tf = fixtures::six_agent_target();
        let p = tf.p_star().clone();
        let r = ManeuverReference::new(Vec2::new(0.1, -0.05), p[1] - p[0]).unwrap();
        let seg = ScheduleSegment {
            t_start: 0.0,
            t_end: 5.0,
            reference: r,
        };
        let s = Scenario::maneuver(p, tf, FollowerLaw::RelativePosition, vec![seg]);
        let run = run_maneuver(&s).unwrap();
        for (u, e) in run
            .record
            .inputs
            .iter()
            .zip(&run.record.leader_offset_error)
        {
            assert!(u.iter().all(|v| (*v - r.velocity()).norm() < 1e-12));
            assert!(*e < 1e-12);
        }
        let seg = &run.segments[0];
        assert!(seg.terminal_shape_distance < 1e-9);
        assert!(seg.terminal_velocity_error < 1e-12);
    }

    #[test]
    fn maneuver_variants_run() {
        let base = fixtures::six_agent_maneuver_scenario();
        for law in [FollowerLaw::DistanceOnly, FollowerLaw::BearingOnly] {
            let mut s = base.clone();
            s.mode = ControlMode::Maneuver(law);
            let run = run_maneuver(&s).unwrap();
            let last = run.segments.last().unwrap();
            let d = last.reference.delta_12();
            let x = run.record.last_state();
            match law {
                FollowerLaw::DistanceOnly => {
                    assert!((x[0].distance(x[1]) - d.norm()).abs() < 1e-4)
                }
                _ => {
                    let b = (x[1] - x[0]) * (1.0 / x[0].distance(x[1]));
                    assert!((b - d * (1.0 / d.norm())).norm() < 1e-4)
                }
            }
            assert!(last.terminal_shape_distance < 1e-4);
        }
    }

    #[test]
    fn rigid_motion_equivariance() {
        let base = fixtures::six_agent_shape_scenario();
        let t = SimilarityTransform::new(1.0, 1.3, Vec2::new(0.7, -2.0)).unwrap();
        let mut moved = base.clone();
        moved.duration = 5.0;
        let mut base = base;
        base.duration = 5.0;
        moved.p0 = apply_similarity(&base.p0, &t);
        moved.target = TargetFormation::new(
            apply_similarity(base.target.p_star(), &t),
            SensingGraph::new(
                base.target
                    .graph()
                    .to_one_based()
                    .iter()
                    .map(|r| r.iter().map(|j| j - 1).collect())
                    .collect(),
            ),
        )
        .unwrap();
        let a = integrate(&base).unwrap();
        let b = integrate(&moved).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(apply_similarity(x, &t).max_deviation(y).unwrap() < 1e-9);
        }
    }
}
