//! TOML scenario files.
//!
//! ```toml
//! [agents]
//! n = 3
//!
//! [graph]
//! neighbors = [[], [1], [1, 2]]      # out-neighbors, 1-based
//!
//! [target]
//! positions = [[0, 0], [1, 0], [0.3, 0.9]]
//!
//! [initial]
//! positions = [[0, 0], [1, 0], [1, 1]]
//!
//! [mode]
//! kind = "shape"                     # or "maneuver"
//!
//! [sim]
//! dt = 0.01
//! duration = 30
//! ```
//!
//! Instead of `positions`, the target may be rebuilt from two anchors and an
//! angle table:
//!
//! ```toml
//! [target.reconstruct]
//! anchors = [[-1, 0.8], [-1, 0.1]]
//! angles_deg = [[1, 2, 3, 90], [2, 1, 3, 315]]   # vertex, a, b, degrees
//! ```
//!
//! Maneuver runs take `[schedule] rows = [[t_start, t_end, vx, vy, dx, dy], ...]`.
//! Angles are in degrees everywhere in the file.

use std::fmt;
use std::ops::Range;

use angleform_core::constraints::{AngleConstraintSet, TriangleAngles};
use angleform_core::geometry::{normalize_angle, signed_angle, EPS_DEGENERATE};
use angleform_core::graph::{triangle_set, validate_lff, TriangleSet};
use angleform_core::sim::{DEFAULT_DT, DEFAULT_SEQUENTIAL_EPSILON, MAX_DT};
use angleform_core::{
    reconstruct, Activation, Configuration, ControlMode, Error as CoreError, FollowerLaw,
    FrameOffsets, Gains, ManeuverReference, Scenario, ScheduleSegment, SensingGraph,
    TargetFormation, Vec2,
};
use rand::{Rng, SeedableRng};
use serde::Deserialize;
use toml::Spanned;

/// Shape runs without an explicit duration use this many seconds.
pub const DEFAULT_SHAPE_DURATION: f64 = 60.0;

/// One problem found in a scenario file. `line` and `column` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    Parse,
    Validation,
}

/// Everything wrong with a file, in source order where known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    pub kind: DiagnosticKind,
    pub items: Vec<Diagnostic>,
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            DiagnosticKind::Parse => "parse error",
            DiagnosticKind::Validation => "validation error",
        };
        for (idx, d) in self.items.iter().enumerate() {
            if idx > 0 {
                writeln!(f)?;
            }
            write!(f, "{what}: {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    agents: RawAgents,
    graph: RawGraph,
    target: Spanned<RawTarget>,
    initial: RawInitial,
    #[serde(default)]
    mode: Option<RawMode>,
    #[serde(default)]
    schedule: Option<RawSchedule>,
    #[serde(default)]
    sim: RawSim,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgents {
    n: Spanned<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    neighbors: Spanned<Vec<Vec<usize>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    positions: Option<Spanned<Vec<[f64; 2]>>>,
    reconstruct: Option<RawReconstruct>,
}

/// `(vertex, a, b, degrees)`, 1-based.
type AngleRow = (usize, usize, usize, f64);

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReconstruct {
    anchors: Spanned<[[f64; 2]; 2]>,
    angles_deg: Spanned<Vec<Spanned<AngleRow>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    positions: Spanned<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Shape,
    Maneuver,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawFollower {
    Relative,
    Distance,
    Bearing,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    kind: Spanned<RawKind>,
    follower: Option<Spanned<RawFollower>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    rows: Spanned<Vec<Spanned<[f64; 6]>>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawActivation {
    Simultaneous,
    Sequential,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<Spanned<f64>>,
    duration: Option<Spanned<f64>>,
    activation: Option<Spanned<RawActivation>>,
    epsilon: Option<Spanned<f64>>,
    frame_offsets_deg: Option<Spanned<Vec<f64>>>,
    random_frame_offsets: Option<Spanned<bool>>,
    seed: Option<u64>,
    angle_gain: Option<Spanned<f64>>,
    first_follower_gain: Option<Spanned<f64>>,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

/// Parse and validate a scenario file.
pub fn parse_scenario(src: &str, overrides: Overrides) -> Result<Scenario, Diagnostics> {
    let raw: RawFile = toml::from_str(src).map_err(|e| Diagnostics {
        kind: DiagnosticKind::Parse,
        items: vec![Diagnostic {
            message: e.message().trim().to_string(),
            ..locate(src, e.span())
        }],
    })?;
    Builder {
        src,
        diags: Vec::new(),
    }
    .build(raw, overrides)
}

fn locate(src: &str, span: Option<Range<usize>>) -> Diagnostic {
    match span {
        Some(r) => {
            let start = r.start.min(src.len());
            let before = &src[..start];
            let line = before.matches('\n').count() + 1;
            let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
            Diagnostic {
                line: Some(line),
                column: Some(column),
                message: String::new(),
            }
        }
        None => Diagnostic {
            line: None,
            column: None,
            message: String::new(),
        },
    }
}

struct Builder<'a> {
    src: &'a str,
    diags: Vec<Diagnostic>,
}

impl Builder<'_> {
    fn at(&mut self, span: Option<Range<usize>>, message: impl Into<String>) {
        let mut d = locate(self.src, span);
        d.column = None;
        d.message = message.into();
        self.diags.push(d);
    }

    fn fail(self) -> Diagnostics {
        Diagnostics {
            kind: DiagnosticKind::Validation,
            items: self.diags,
        }
    }

    fn points(
        &mut self,
        raw: &Spanned<Vec<[f64; 2]>>,
        n: usize,
        what: &str,
    ) -> Option<Configuration> {
        let span = Some(raw.span());
        let pts = raw.get_ref();
        if pts.len() != n {
            self.at(
                span,
                format!("{what} has {} positions, expected {n}", pts.len()),
            );
            return None;
        }
        match Configuration::new(pts.iter().map(|p| Vec2::new(p[0], p[1])).collect()) {
            Ok(c) => Some(c),
            Err(e) => {
                self.at(span, format!("{what}: {e}"));
                None
            }
        }
    }

    fn build(mut self, raw: RawFile, ov: Overrides) -> Result<Scenario, Diagnostics> {
        let n = *raw.agents.n.get_ref();
        let n_span = Some(raw.agents.n.span());
        if n < 3 {
            self.at(n_span, format!("need at least 3 agents, got {n}"));
            return Err(self.fail());
        }

        // graph
        let nb = &raw.graph.neighbors;
        let nb_span = Some(nb.span());
        let graph = if nb.get_ref().len() != n {
            self.at(
                nb_span.clone(),
                format!(
                    "neighbors lists {} agents, expected {n}",
                    nb.get_ref().len()
                ),
            );
            None
        } else {
            match SensingGraph::from_one_based(nb.get_ref()) {
                Err(e) => {
                    self.at(nb_span.clone(), format!("sensing graph: {e}"));
                    None
                }
                Ok(g) => match validate_lff(&g) {
                    Ok(()) => Some(g),
                    Err(vs) => {
                        for v in vs {
                            self.at(
                                nb_span.clone(),
                                format!("sensing graph is not leader-first-follower: {v}"),
                            );
                        }
                        None
                    }
                },
            }
        };

        // target
        let target_span = Some(raw.target.span());
        let raw_target = raw.target.into_inner();
        let p_star = match (&raw_target.positions, &raw_target.reconstruct, &graph) {
            (Some(_), Some(_), _) | (None, None, _) => {
                self.at(
                    target_span.clone(),
                    "[target] needs exactly one of `positions` or `reconstruct`",
                );
                None
            }
            (Some(p), None, _) => self.points(p, n, "target"),
            (None, Some(rc), Some(g)) => self.reconstruct_target(rc, g),
            (None, Some(_), None) => None,
        };
        let target = match (p_star, graph) {
            (Some(p), Some(g)) => match TargetFormation::new(p, g) {
                Ok(t) => Some(t),
                Err(e) => {
                    let msg = match e {
                        CoreError::DegenerateTarget { agent } => format!(
                            "target is not strongly nondegenerate: agent {agent} is collinear with its two neighbors"
                        ),
                        CoreError::CoincidentLeaders => {
                            "target places the leader and first follower at the same point".to_string()
                        }
                        other => format!("target: {other}"),
                    };
                    self.at(target_span.clone(), msg);
                    None
                }
            },
            _ => None,
        };

        // initial
        let init_span = Some(raw.initial.positions.span());
        let p0 = self.points(&raw.initial.positions, n, "initial configuration");
        if let Some(p0) = &p0 {
            if p0[0].distance(p0[1]) <= EPS_DEGENERATE {
                self.at(init_span, "leader and first follower coincide initially");
            }
        }

        // mode and schedule
        let (kind, follower) = match &raw.mode {
            None => (RawKind::Shape, None),
            Some(m) => (*m.kind.get_ref(), m.follower.as_ref()),
        };
        let law = match follower.map(|f| *f.get_ref()) {
            None | Some(RawFollower::Relative) => FollowerLaw::RelativePosition,
            Some(RawFollower::Distance) => FollowerLaw::DistanceOnly,
            Some(RawFollower::Bearing) => FollowerLaw::BearingOnly,
        };
        if kind == RawKind::Shape {
            if let Some(f) = follower {
                self.at(Some(f.span()), "`follower` only applies to maneuver mode");
            }
        }
        let dt = ov
            .dt
            .or(raw.sim.dt.as_ref().map(|d| *d.get_ref()))
            .unwrap_or(DEFAULT_DT);
        let dt_span = raw.sim.dt.as_ref().map(|d| d.span());
        if !(dt > 0.0) || !dt.is_finite() {
            self.at(dt_span.clone(), format!("dt must be positive, got {dt}"));
        } else if dt > MAX_DT {
            self.at(
                dt_span.clone(),
                format!("dt = {dt} exceeds the stability limit {MAX_DT}"),
            );
        }
        let mut schedule = Vec::new();
        match (kind, &raw.schedule) {
            (RawKind::Shape, Some(s)) => {
                self.at(Some(s.rows.span()), "shape mode takes no schedule");
            }
            (RawKind::Maneuver, None) => {
                self.at(
                    None,
                    "maneuver mode needs a [schedule] with at least one row",
                );
            }
            (RawKind::Maneuver, Some(s)) => {
                if s.rows.get_ref().is_empty() {
                    self.at(Some(s.rows.span()), "schedule has no rows");
                }
                let mut expect = 0.0;
                for row in s.rows.get_ref() {
                    let [t0, t1, vx, vy, dx, dy] = *row.get_ref();
                    let span = Some(row.span());
                    if (t0 - expect).abs() > 1e-9 * expect.max(1.0) {
                        self.at(
                            span.clone(),
                            format!("segment starts at {t0}, expected {expect}"),
                        );
                    }
                    if !(t1 > t0) {
                        self.at(
                            span.clone(),
                            format!("segment end {t1} is not after its start {t0}"),
                        );
                    }
                    for t in [t0, t1] {
                        if dt > 0.0 && !is_multiple(t, dt) {
                            self.at(
                                span.clone(),
                                format!("switch time {t} is not a multiple of dt = {dt}"),
                            );
                        }
                    }
                    match ManeuverReference::new(Vec2::new(vx, vy), Vec2::new(dx, dy)) {
                        Ok(reference) => schedule.push(ScheduleSegment {
                            t_start: t0,
                            t_end: t1,
                            reference,
                        }),
                        Err(e) => self.at(span.clone(), format!("segment reference: {e}")),
                    }
                    expect = t1;
                }
            }
            (RawKind::Shape, None) => {}
        }

        // sim
        let schedule_end = schedule.last().map(|s| s.t_end);
        let duration = ov
            .duration
            .or(raw.sim.duration.as_ref().map(|d| *d.get_ref()))
            .or(schedule_end)
            .unwrap_or(DEFAULT_SHAPE_DURATION);
        let dur_span = raw.sim.duration.as_ref().map(|d| d.span());
        if !(duration > 0.0) || !duration.is_finite() {
            self.at(
                dur_span.clone(),
                format!("duration must be positive, got {duration}"),
            );
        } else if dt > 0.0 && !is_multiple(duration, dt) {
            self.at(
                dur_span.clone(),
                format!("duration {duration} is not a multiple of dt = {dt}"),
            );
        }
        if let Some(end) = schedule_end {
            if duration > end + 1e-9 {
                self.at(
                    dur_span,
                    format!("duration {duration} runs past the schedule end {end}"),
                );
            }
        }
        let activation = match raw.sim.activation.as_ref().map(|a| *a.get_ref()) {
            None | Some(RawActivation::Simultaneous) => {
                if let Some(e) = &raw.sim.epsilon {
                    self.at(
                        Some(e.span()),
                        "`epsilon` only applies to sequential activation",
                    );
                }
                Activation::Simultaneous
            }
            Some(RawActivation::Sequential) => {
                if kind == RawKind::Maneuver {
                    let span = raw.sim.activation.as_ref().map(|a| a.span());
                    self.at(
                        span,
                        "sequential activation is only available in shape mode",
                    );
                }
                let epsilon = raw
                    .sim
                    .epsilon
                    .as_ref()
                    .map_or(DEFAULT_SEQUENTIAL_EPSILON, |e| *e.get_ref());
                if !(epsilon > 0.0) {
                    let span = raw.sim.epsilon.as_ref().map(|e| e.span());
                    self.at(span, format!("epsilon must be positive, got {epsilon}"));
                }
                Activation::Sequential { epsilon }
            }
        };
        let seed = raw.sim.seed.unwrap_or(0);
        let frame_offsets = match (&raw.sim.frame_offsets_deg, &raw.sim.random_frame_offsets) {
            (Some(f), Some(r)) if *r.get_ref() => {
                self.at(
                    Some(f.span()),
                    "give either `frame_offsets_deg` or `random_frame_offsets`, not both",
                );
                None
            }
            (Some(f), _) => {
                if f.get_ref().len() != n {
                    self.at(
                        Some(f.span()),
                        format!("{} frame offsets for {n} agents", f.get_ref().len()),
                    );
                    None
                } else {
                    let rad: Vec<f64> = f.get_ref().iter().map(|d| d.to_radians()).collect();
                    Some(FrameOffsets::from_angles(&rad))
                }
            }
            (None, Some(r)) if *r.get_ref() => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let rad: Vec<f64> = (0..n)
                    .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                    .collect();
                Some(FrameOffsets::from_angles(&rad))
            }
            _ => None,
        };
        let mut gains = Gains::default();
        for (slot, raw_gain, name) in [
            (&mut gains.angle, &raw.sim.angle_gain, "angle_gain"),
            (
                &mut gains.first_follower,
                &raw.sim.first_follower_gain,
                "first_follower_gain",
            ),
        ] {
            if let Some(g) = raw_gain {
                if *g.get_ref() > 0.0 && g.get_ref().is_finite() {
                    *slot = *g.get_ref();
                } else {
                    self.diags.push(Diagnostic {
                        column: None,
                        message: format!("{name} must be positive, got {}", g.get_ref()),
                        ..locate(self.src, Some(g.span()))
                    });
                }
            }
        }

        let (Some(target), Some(p0)) = (target, p0) else {
            return Err(self.fail());
        };
        if !self.diags.is_empty() {
            return Err(self.fail());
        }
        let mode = match kind {
            RawKind::Shape => ControlMode::Shape,
            RawKind::Maneuver => ControlMode::Maneuver(law),
        };
        let s = Scenario {
            p0,
            target,
            mode,
            schedule,
            dt,
            duration,
            activation,
            frame_offsets,
            gains,
            seed,
        };
        if let Err(e) = s.validate() {
            self.at(None, e.to_string());
            return Err(self.fail());
        }
        Ok(s)
    }

    fn reconstruct_target(
        &mut self,
        rc: &RawReconstruct,
        g: &SensingGraph,
    ) -> Option<Configuration> {
        let ts = match triangle_set(g) {
            Ok(ts) => ts,
            Err(e) => {
                self.at(Some(rc.angles_deg.span()), format!("sensing graph: {e}"));
                return None;
            }
        };
        let table: Vec<TableEntry> = rc
            .angles_deg
            .get_ref()
            .iter()
            .map(|e| {
                let (v, a, b, deg) = *e.get_ref();
                TableEntry {
                    vertex: v,
                    a,
                    b,
                    radians: deg.to_radians(),
                    span: e.span(),
                }
            })
            .collect();
        let angles = match angles_from_table(&ts, &table) {
            Ok(a) => a,
            Err((span, msg)) => {
                self.at(span.or(Some(rc.angles_deg.span())), msg);
                return None;
            }
        };
        let acs = match AngleConstraintSet::from_angles(g.n(), angles) {
            Ok(acs) => acs,
            Err(e) => {
                self.at(Some(rc.angles_deg.span()), format!("angle table: {e}"));
                return None;
            }
        };
        let [q1, q2] = *rc.anchors.get_ref();
        match reconstruct(Vec2::new(q1[0], q1[1]), Vec2::new(q2[0], q2[1]), &acs) {
            Ok(p) => Some(p),
            Err(e) => {
                self.at(Some(rc.anchors.span()), format!("reconstruction: {e}"));
                None
            }
        }
    }
}

fn is_multiple(t: f64, dt: f64) -> bool {
    let s = (t / dt).round();
    (s * dt - t).abs() <= 1e-9 * t.max(1.0)
}

struct TableEntry {
    vertex: usize,
    a: usize,
    b: usize,
    radians: f64,
    span: Range<usize>,
}

/// Convert `(vertex, a, b, angle)` rows into per-triangle angles. Each
/// triangle needs at least two of its three vertex angles; the third follows
/// from the angle sum (π for interior sweeps, 5π for exterior ones).
fn angles_from_table(
    ts: &TriangleSet,
    table: &[TableEntry],
) -> Result<Vec<TriangleAngles>, (Option<Range<usize>>, String)> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(ts.len());
    let mut used = vec![false; table.len()];
    for t in ts.iter() {
        let (i, j, k) = (t.i + 1, t.j + 1, t.k + 1);
        // sweep at each vertex in the constraint sense, as (vertex, from, to)
        let sweeps = [(k, i, j), (j, k, i), (i, j, k)];
        let mut known: [Option<f64>; 3] = [None; 3];
        for (row, e) in table.iter().enumerate() {
            let mut set = [e.vertex, e.a, e.b];
            set.sort_unstable();
            if set != [i, j, k] {
                continue;
            }
            used[row] = true;
            let slot = sweeps
                .iter()
                .position(|s| s.0 == e.vertex)
                .expect("vertex is in the triangle");
            let (_, from, _) = sweeps[slot];
            // a row (v, a, b) sweeps from b to a
            let value = if e.b == from {
                e.radians
            } else {
                std::f64::consts::TAU - e.radians
            };
            known[slot] = Some(normalize_angle(value));
        }
        let given: Vec<f64> = known.iter().flatten().copied().collect();
        if given.len() < 2 {
            return Err((
                None,
                format!("angle table needs at least two angles of triangle ({i},{j},{k})"),
            ));
        }
        let interior = given.iter().all(|&a| a < PI);
        let exterior = given.iter().all(|&a| a > PI);
        if !interior && !exterior {
            return Err((
                None,
                format!("angles of triangle ({i},{j},{k}) mix both orientations"),
            ));
        }
        let total = if interior { PI } else { 5.0 * PI };
        if given.len() == 2 {
            let missing = known
                .iter()
                .position(Option::is_none)
                .expect("one angle missing");
            known[missing] = Some(total - given.iter().sum::<f64>());
        } else if (given.iter().sum::<f64>() - total).abs() > 1e-3 {
            return Err((
                None,
                format!("angles of triangle ({i},{j},{k}) do not close the triangle"),
            ));
        }
        let [f, s, a] = known.map(|x| x.expect("all three known"));
        out.push(TriangleAngles::new(*t, f, s, a));
    }
    if let Some(row) = used.iter().position(|u| !u) {
        return Err((
            Some(table[row].span.clone()),
            "angle does not belong to any constraint triangle".to_string(),
        ));
    }
    Ok(out)
}

/// Render a scenario back into the file format; `parse_scenario` accepts the
/// result.
pub fn to_toml(s: &Scenario) -> String {
    use std::fmt::Write;
    let pts = |c: &Configuration| {
        let items: Vec<String> = c
            .iter()
            .map(|p| format!("[{:?}, {:?}]", p.x, p.y))
            .collect();
        format!("[{}]", items.join(", "))
    };
    let mut out = String::new();
    let _ = writeln!(out, "[agents]\nn = {}\n", s.n());
    let rows: Vec<String> = s
        .target
        .graph()
        .to_one_based()
        .iter()
        .map(|r| format!("{r:?}"))
        .collect();
    let _ = writeln!(out, "[graph]\nneighbors = [{}]\n", rows.join(", "));
    let _ = writeln!(out, "[target]\npositions = {}\n", pts(s.target.p_star()));
    let _ = writeln!(out, "[initial]\npositions = {}\n", pts(&s.p0));
    match s.mode {
        ControlMode::Shape => {
            let _ = writeln!(out, "[mode]\nkind = \"shape\"\n");
        }
        ControlMode::Maneuver(law) => {
            let f = match law {
                FollowerLaw::RelativePosition => "relative",
                FollowerLaw::DistanceOnly => "distance",
                FollowerLaw::BearingOnly => "bearing",
            };
            let _ = writeln!(out, "[mode]\nkind = \"maneuver\"\nfollower = \"{f}\"\n");
            let rows: Vec<String> = s
                .schedule
                .iter()
                .map(|g| {
                    let v = g.reference.velocity();
                    let d = g.reference.delta_12();
                    format!(
                        "[{:?}, {:?}, {:?}, {:?}, {:?}, {:?}]",
                        g.t_start, g.t_end, v.x, v.y, d.x, d.y
                    )
                })
                .collect();
            let _ = writeln!(out, "[schedule]\nrows = [{}]\n", rows.join(", "));
        }
    }
    let _ = writeln!(
        out,
        "[sim]\ndt = {:?}\nduration = {:?}\nseed = {}",
        s.dt, s.duration, s.seed
    );
    if let Activation::Sequential { epsilon } = s.activation {
        let _ = writeln!(out, "activation = \"sequential\"\nepsilon = {epsilon:?}");
    }
    if let Some(f) = &s.frame_offsets {
        let deg: Vec<String> =
            f.0.iter()
                .map(|r| format!("{:?}", r.angle().to_degrees()))
                .collect();
        let _ = writeln!(out, "frame_offsets_deg = [{}]", deg.join(", "));
    }
    let _ = writeln!(
        out,
        "angle_gain = {:?}\nfirst_follower_gain = {:?}",
        s.gains.angle, s.gains.first_follower
    );
    out
}

/// `true` when `(vertex, a, b)` read on `p` gives `deg` to within `tol_deg`.
pub fn table_matches(
    p: &Configuration,
    vertex: usize,
    a: usize,
    b: usize,
    deg: f64,
    tol_deg: f64,
) -> bool {
    signed_angle(p[b - 1], p[vertex - 1], p[a - 1])
        .map(|x| (x.to_degrees() - deg).abs() <= tol_deg)
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[agents]
n = 3

[graph]
neighbors = [[], [1], [1, 2]]

[target]
positions = [[0, 0], [1, 0], [0.3, 0.9]]

[initial]
positions = [[0, 0], [1, 0], [1, 1]]

[sim]
dt = 0.01
duration = 5
"#;

    #[test]
    fn minimal_file_parses() {
        let s = parse_scenario(MINIMAL, Overrides::default()).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.mode, ControlMode::Shape);
        assert_eq!(s.duration, 5.0);
    }

    #[test]
    fn overrides_apply() {
        let s = parse_scenario(
            MINIMAL,
            Overrides {
                dt: Some(0.02),
                duration: Some(2.0),
            },
        )
        .unwrap();
        assert_eq!((s.dt, s.duration), (0.02, 2.0));
        let e = parse_scenario(
            MINIMAL,
            Overrides {
                dt: Some(0.1),
                duration: None,
            },
        )
        .unwrap_err();
        assert!(e.items[0].message.contains("stability limit"), "{e}");
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_scenario("[agents]\nn = = 3\n", Overrides::default()).unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Parse);
        assert_eq!(e.items[0].line, Some(2));
        assert!(e.items[0].column.is_some());
    }

    #[test]
    fn second_agent_with_two_neighbors_is_rejected() {
        let src = MINIMAL.replace("[[], [1], [1, 2]]", "[[], [1, 3], [1, 2]]");
        let e = parse_scenario(&src, Overrides::default()).unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Validation);
        assert_eq!(e.items[0].line, Some(6));
        assert!(
            e.items
                .iter()
                .any(|d| d.message.contains("leader-first-follower")),
            "{e}"
        );
    }

    #[test]
    fn collinear_target_is_rejected() {
        let src = MINIMAL.replace("[[0, 0], [1, 0], [0.3, 0.9]]", "[[0, 0], [1, 0], [2, 0]]");
        let e = parse_scenario(&src, Overrides::default()).unwrap_err();
        assert!(e.items[0].message.contains("strongly nondegenerate"), "{e}");
        assert_eq!(e.items[0].line, Some(8));
    }

    #[test]
    fn several_problems_are_all_reported() {
        let src = MINIMAL
            .replace(
                "positions = [[0, 0], [1, 0], [1, 1]]",
                "positions = [[0, 0], [0, 0], [1, 1]]",
            )
            .replace("duration = 5", "duration = 5.005");
        let e = parse_scenario(&src, Overrides::default()).unwrap_err();
        assert_eq!(e.items.len(), 2, "{e}");
        assert_eq!(e.items[0].line, Some(12));
        assert_eq!(e.items[1].line, Some(16));
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        let src = MINIMAL.replace("dt = 0.01", "dt = 0.01\nstep = 2");
        let e = parse_scenario(&src, Overrides::default()).unwrap_err();
        assert_eq!(e.kind, DiagnosticKind::Parse);
    }

    #[test]
    fn reconstruct_from_table_matches_positions() {
        let tf = angleform_core::fixtures::six_agent_target();
        let src = format!(
            r#"
[agents]
n = 6
[graph]
neighbors = [[], [1], [1, 2], [2, 3], [1, 4], [1, 4]]
[target.reconstruct]
anchors = [[-1, 0.8], [-1, 0.1]]
angles_deg = [[1, 2, 3, 90], [2, 1, 3, 315], [3, 2, 4, 45], [4, 2, 3, 270],
              [4, 1, 5, 63.43], [5, 1, 4, 306.87], [4, 1, 6, 296.57], [6, 1, 4, 53.13]]
[initial]
positions = {}
"#,
            "[[0, 0.5], [-0.5, 0], [0, 0.025], [0.25, 0.4], [0.5, -0.35], [0.6, 0.2]]"
        );
        let s = parse_scenario(&src, Overrides::default()).unwrap();
        assert!(s.target.p_star().max_deviation(tf.p_star()).unwrap() < 1e-3);
        for (v, a, b, deg) in angleform_core::fixtures::SIX_AGENT_ANGLES_DEG {
            assert!(table_matches(s.target.p_star(), v, a, b, deg, 0.05));
        }
    }

    #[test]
    fn round_trip_through_toml() {
        for s in [
            angleform_core::fixtures::six_agent_shape_scenario(),
            angleform_core::fixtures::six_agent_maneuver_scenario(),
        ] {
            let back = parse_scenario(&to_toml(&s), Overrides::default()).unwrap();
            assert_eq!(back, s);
        }
    }
}
