use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ProblemKind;

/// How tabu search picks the neighborhood for the next iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TabuVersion {
    /// Version 1: a uniformly random neighborhood every iteration.
    Random,
    /// Version 2: stay in the current neighborhood until a move fails to improve.
    StayUntilNoImprove,
    /// Version 3: the next neighborhood in circular order every iteration.
    Cyclic,
}

/// What the tabu iteration budget counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TabuStop {
    /// Consecutive iterations without a new global best.
    NonImproving,
    /// All iterations of a phase.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Vns,
    /// GRASP with best-improvement local search.
    Grasp,
    GraspVns,
    GraspTabu,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Vns,
        Algorithm::Grasp,
        Algorithm::GraspVns,
        Algorithm::GraspTabu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vns => "vns",
            Algorithm::Grasp => "grasp",
            Algorithm::GraspVns => "grasp-vns",
            Algorithm::GraspTabu => "grasp-tabu",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected vns, grasp, grasp-vns or grasp-tabu)"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{name} = {value} is outside {range}")]
pub struct ConfigError {
    pub name: &'static str,
    pub value: String,
    pub range: &'static str,
}

/// Parameters shared by every solver. Fields an algorithm does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Greediness of the constructive heuristic, in `[0, 1]`.
    pub alpha: f64,
    pub grasp_iterations: u32,
    /// Number of random moves per VNS shake (Q), in `[1, 10]`.
    pub shake_strength: u32,
    /// Tabu list length, in `[5, 100]`.
    pub tabu_capacity: usize,
    /// Tabu iteration budget per phase, in `[50, 500]`.
    pub tabu_iterations: u32,
    pub tabu_version: TabuVersion,
    pub tabu_stop: TabuStop,
    /// Allow a tabu move when it produces a new global best.
    pub aspiration: bool,
    /// Standalone VNS stops after this many consecutive two-phase cycles without
    /// improvement. 0 runs until the time limit.
    pub vns_idle_cycles: u32,
    /// Cap on `(out, in)` pairs scanned per CHG enumeration.
    pub chg_budget: Option<usize>,
    /// Wall-clock limit in seconds; `f64::INFINITY` disables it.
    pub time_limit: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            grasp_iterations: 2000,
            shake_strength: 5,
            tabu_capacity: 50,
            tabu_iterations: 100,
            tabu_version: TabuVersion::StayUntilNoImprove,
            tabu_stop: TabuStop::NonImproving,
            aspiration: true,
            vns_idle_cycles: 25,
            chg_budget: None,
            time_limit: 600.0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Tuned parameters for `algorithm` on `kind` instances.
    pub fn preset(algorithm: Algorithm, kind: ProblemKind) -> Self {
        let base = Self::default();
        match (kind, algorithm) {
            (ProblemKind::MaxSpace, Algorithm::Vns) => Self {
                alpha: 0.2,
                shake_strength: 8,
                ..base
            },
            (ProblemKind::MaxSpace, Algorithm::Grasp) => Self {
                alpha: 0.3,
                grasp_iterations: 2000,
                ..base
            },
            (ProblemKind::MaxSpace, Algorithm::GraspTabu) => Self {
                alpha: 0.9,
                grasp_iterations: 2000,
                tabu_capacity: 55,
                tabu_iterations: 60,
                tabu_version: TabuVersion::StayUntilNoImprove,
                ..base
            },
            (ProblemKind::MaxSpace, Algorithm::GraspVns) => Self {
                alpha: 0.5,
                grasp_iterations: 1000,
                shake_strength: 10,
                ..base
            },
            (ProblemKind::MaxSpaceRdwv, Algorithm::Vns) => Self {
                alpha: 0.0,
                shake_strength: 5,
                ..base
            },
            (ProblemKind::MaxSpaceRdwv, Algorithm::Grasp) => Self {
                alpha: 0.3,
                grasp_iterations: 2000,
                ..base
            },
            (ProblemKind::MaxSpaceRdwv, Algorithm::GraspTabu) => Self {
                alpha: 0.2,
                grasp_iterations: 2000,
                tabu_capacity: 100,
                tabu_iterations: 320,
                tabu_version: TabuVersion::Cyclic,
                ..base
            },
            (ProblemKind::MaxSpaceRdwv, Algorithm::GraspVns) => Self {
                alpha: 0.2,
                grasp_iterations: 2000,
                shake_strength: 9,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn err(name: &'static str, value: impl fmt::Display, range: &'static str) -> ConfigError {
            ConfigError {
                name,
                value: value.to_string(),
                range,
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(err("alpha", self.alpha, "[0, 1]"));
        }
        if !(1..=10).contains(&self.shake_strength) {
            return Err(err("shake_strength", self.shake_strength, "[1, 10]"));
        }
        if !(5..=100).contains(&self.tabu_capacity) {
            return Err(err("tabu_capacity", self.tabu_capacity, "[5, 100]"));
        }
        if !(50..=500).contains(&self.tabu_iterations) {
            return Err(err("tabu_iterations", self.tabu_iterations, "[50, 500]"));
        }
        if self.grasp_iterations == 0 {
            return Err(err("grasp_iterations", 0, "[1, inf)"));
        }
        if self.time_limit.is_nan() || self.time_limit < 0.0 {
            return Err(err("time_limit", self.time_limit, "[0, inf]"));
        }
        Ok(())
    }
}
