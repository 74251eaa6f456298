use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::LffViolation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points coincide (distance below {threshold:e} m)")]
    CoincidentPoints { threshold: f64 },

    #[error("reference configuration has zero spread")]
    DegenerateReference,

    #[error("configuration lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("configuration needs at least {min} agents, got {got}")]
    TooFewAgents { min: usize, got: usize },

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("similarity scale must be nonzero")]
    ZeroScale,

    #[error("sensing graph is not leader-first-follower: {}", join_violations(.0))]
    InvalidSensingGraph(Vec<LffViolation>),

    #[error("target is not strongly nondegenerate at agent {agent} (1-based)")]
    DegenerateTarget { agent: usize },

    #[error("leader and first follower coincide")]
    CoincidentLeaders,

    #[error("first-follower reference offset must be nonzero")]
    ZeroLeaderOffset,

    #[error("angle measurement undefined: agents coincide in triangle [{follower}]")]
    DegenerateMeasurement { follower: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("step {dt} s exceeds the 0.05 s stability guard")]
    StepTooLarge { dt: f64 },

    #[error("not enough samples in the fit window ({got})")]
    InsufficientData { got: usize },
}

fn join_violations(v: &[LffViolation]) -> String {
    let mut out = String::new();
    for (n, item) in v.iter().enumerate() {
        if n > 0 {
            out.push_str("; ");
        }
        out.push_str(&alloc::format!("{item}"));
    }
    out
}
