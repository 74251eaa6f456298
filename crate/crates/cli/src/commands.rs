use std::fs;
use std::path::{Path, PathBuf};

use angleform_core::checks::{self, CriterionOutcome};
use angleform_core::{integrate, ControlMode, FollowerLaw, Scenario, TrajectoryRecord};
use log::{debug, info};

use crate::error::CliError;
use crate::plot;
use crate::report::{build_metrics, follower_fits, write_trajectory_csv, MetricsReport};
use crate::scenario_file::{parse_scenario, Overrides};

pub const SHAPE_SCENARIO: &str = include_str!("../scenarios/shape.toml");
pub const MANEUVER_SCENARIO: &str = include_str!("../scenarios/maneuver.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fixture {
    Shape,
    Maneuver,
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::Shape => "shape",
            Fixture::Maneuver => "maneuver",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Fixture::Shape => SHAPE_SCENARIO,
            Fixture::Maneuver => MANEUVER_SCENARIO,
        }
    }

    pub fn scenario(self) -> Scenario {
        parse_scenario(self.source(), Overrides::default()).expect("bundled scenarios are valid")
    }

    fn checks(self) -> Vec<CriterionOutcome> {
        match self {
            Fixture::Shape => vec![checks::a1(), checks::a2(), checks::a3()],
            Fixture::Maneuver => vec![checks::a5()],
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: PathBuf, contents: &[u8]) -> Result<(), CliError> {
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

pub fn validate(path: &Path) -> Result<Scenario, CliError> {
    let src = read(path)?;
    let s = parse_scenario(&src, Overrides::default())?;
    info!(
        "{}: ok ({} agents, {} steps)",
        path.display(),
        s.n(),
        s.step_count()?
    );
    Ok(s)
}

pub fn run(path: &Path, out: &Path, overrides: Overrides) -> Result<MetricsReport, CliError> {
    let src = read(path)?;
    let s = parse_scenario(&src, overrides)?;
    simulate_and_write(&s, out)
}

pub fn simulate_and_write(s: &Scenario, out: &Path) -> Result<MetricsReport, CliError> {
    info!(
        "integrating {} agents for {} s at dt = {}",
        s.n(),
        s.duration,
        s.dt
    );
    let rec = integrate(s)?;
    debug!("{} samples", rec.len());
    write_artifacts(s, &rec, out)
}

/// Write trajectory.csv, metrics.json and the three plots into `out`.
pub fn write_artifacts(
    s: &Scenario,
    rec: &TrajectoryRecord,
    out: &Path,
) -> Result<MetricsReport, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let csv_path = out.join("trajectory.csv");
    let file = fs::File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    write_trajectory_csv(std::io::BufWriter::new(file), rec)?;

    let metrics = build_metrics(s, rec)?;
    let mut json = serde_json::to_vec_pretty(&metrics)?;
    json.push(b'\n');
    write(out.join("metrics.json"), &json)?;

    let mut series = vec![("angle error [rad]".to_string(), rec.angle_error.clone())];
    series.push(("shape distance".to_string(), rec.shape_distance.clone()));
    if !rec.leader_offset_error.is_empty() {
        series.push((
            "‖p2 − p1 − δ*‖".to_string(),
            rec.leader_offset_error.clone(),
        ));
    }
    write(
        out.join("angle_error.svg"),
        plot::log_line_plot("Angle error", "error", &rec.times, &series).as_bytes(),
    )?;

    let edges: Vec<(usize, usize)> = s.target.graph().edges().collect();
    write(
        out.join("trajectory.svg"),
        plot::trajectory_plot("Agent trajectories", rec, &edges).as_bytes(),
    )?;

    let rates_svg = match s.mode {
        ControlMode::Shape => {
            let fits = follower_fits(s, rec);
            let labels: Vec<String> = (2..s.n()).map(|k| format!("agent {}", k + 1)).collect();
            let fitted: Vec<Option<f64>> = (2..s.n())
                .map(|k| fits[k].as_ref().map(|e| e.rate))
                .collect();
            let reference: Vec<f64> = metrics.followers.iter().map(|f| f.predicted_rate).collect();
            plot::rate_bars(
                "Follower decay rates",
                &labels,
                &fitted,
                &reference,
                "sin² follower angle",
            )
        }
        ControlMode::Maneuver(law) => {
            let labels: Vec<String> = metrics
                .segments
                .iter()
                .map(|g| format!("segment {}", g.segment))
                .collect();
            let fitted: Vec<Option<f64>> = metrics
                .segments
                .iter()
                .map(|g| g.offset_rate.as_ref().and_then(|r| r.rate))
                .collect();
            let expected = match law {
                FollowerLaw::RelativePosition => s.gains.first_follower,
                _ => f64::NAN,
            };
            let reference = vec![expected; labels.len()];
            plot::rate_bars(
                "Leader offset decay rate",
                &labels,
                &fitted,
                &reference,
                "first-follower gain",
            )
        }
    };
    write(out.join("rates.svg"), rates_svg.as_bytes())?;
    info!("wrote artifacts to {}", out.display());
    Ok(metrics)
}

pub struct Reproduction {
    pub fixture: Fixture,
    pub metrics: MetricsReport,
    pub outcomes: Vec<CriterionOutcome>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn summary(&self) -> String {
        let mut lines: Vec<String> = self.outcomes.iter().map(ToString::to_string).collect();
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        lines.push(format!(
            "{}: {passed} of {} criteria passed",
            self.fixture.name(),
            self.outcomes.len()
        ));
        lines.join("\n")
    }
}

pub fn reproduce(fixture: Fixture, out: &Path) -> Result<Reproduction, CliError> {
    let s = fixture.scenario();
    let metrics = simulate_and_write(&s, out)?;
    let outcomes = fixture.checks();
    let r = Reproduction {
        fixture,
        metrics,
        outcomes,
    };
    let mut text = r.summary();
    text.push('\n');
    write(out.join("acceptance.txt"), text.as_bytes())?;
    Ok(r)
}

/// Both fixtures in parallel, each into its own subdirectory of `out`.
pub fn reproduce_all(out: &Path) -> Vec<Result<Reproduction, CliError>> {
    let fixtures = [Fixture::Shape, Fixture::Maneuver];
    std::thread::scope(|scope| {
        let handles: Vec<_> = fixtures
            .iter()
            .map(|&f| {
                let dir = out.join(f.name());
                scope.spawn(move || reproduce(f, &dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("reproduction thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use angleform_core::fixtures;

    #[test]
    fn bundled_files_match_fixtures() {
        assert_eq!(
            Fixture::Shape.scenario(),
            fixtures::six_agent_shape_scenario()
        );
        assert_eq!(
            Fixture::Maneuver.scenario(),
            fixtures::six_agent_maneuver_scenario()
        );
    }
}
