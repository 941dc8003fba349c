//! Heuristics, an exact oracle and benchmarking tools for the MAXSPACE and MAXSPACE-RDWV
//! advertisement scheduling problems.
//!
//! An instance has `K` slots of capacity `L` and a list of ads. Each ad has a size, a value,
//! a frequency range and a release/deadline window; a scheduled ad places one copy in each
//! of between `freq_min` and `freq_max` distinct slots of its window. The goal is to
//! maximize the total value of the copies placed.

pub mod bench;
pub mod construct;
pub mod exact;
pub mod fenwick;
pub mod instances;
pub mod metaheuristics;
pub mod model;
pub mod neighborhoods;
pub mod solution;

pub use metaheuristics::{solve, Algorithm, SolveOutcome, SolverConfig};
pub use model::{Ad, Instance, ProblemKind, Schedule};
