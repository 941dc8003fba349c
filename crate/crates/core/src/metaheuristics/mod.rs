//! Local-search metaheuristics: VND/VNS, tabu search and GRASP.
//!
//! Every method works in two phases that differ only in how RPCK and MV moves are scored
//! (squared slack minimized, then maximized). Phases alternate in Minimize/Maximize cycles
//! until a whole cycle fails to improve the best primary value.
//!
//! All solvers stop at their own termination rule or at the configured wall-clock limit,
//! whichever comes first. The clock is checked between move applications and periodically
//! while scanning a neighborhood. Given the same instance, configuration and seed, a run
//! that is not cut short by the clock is fully deterministic.

mod config;
mod grasp;
mod tabu;
mod vns;

use std::time::{Duration, Instant};

pub use config::{Algorithm, ConfigError, SolverConfig, TabuStop, TabuVersion};
pub use grasp::{grasp, iteration_rng, LocalSearch};
pub use tabu::{tabu_search, TabuList};
pub use vns::{shake, vns, vns_from};

use crate::model::{Instance, Schedule};
use crate::neighborhoods::{
    enumerate, evaluate, score_delta, EnumOptions, Move, MoveDelta, NeighborhoodKind, Phase,
};

const CLOCK_CHECK_INTERVAL: usize = 256;

/// Wall-clock budget shared by a solver run.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    start: Instant,
    limit: Option<Duration>,
}

impl Deadline {
    /// `seconds` may be `f64::INFINITY` for no limit.
    pub fn after(seconds: f64) -> Self {
        let limit = (seconds.is_finite()).then(|| Duration::from_secs_f64(seconds.max(0.0)));
        Self {
            start: Instant::now(),
            limit,
        }
    }

    pub fn none() -> Self {
        Self::after(f64::INFINITY)
    }

    pub fn expired(&self) -> bool {
        match self.limit {
            Some(l) => self.start.elapsed() >= l,
            None => false,
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

/// Result of a complete solver run.
#[derive(Debug, Clone)]
pub struct SolveOutcome<'a> {
    pub schedule: Schedule<'a>,
    /// Iteration (GRASP iteration or VNS shake round, 1-based) at which the returned
    /// schedule was found; 0 means the initial solution was never improved.
    pub iter_best: u64,
    pub elapsed: Duration,
}

impl SolveOutcome<'_> {
    pub fn value(&self) -> i64 {
        self.schedule.primary_value()
    }
}

/// Runs `algorithm` on `instance`.
pub fn solve<'a>(
    instance: &'a Instance,
    algorithm: Algorithm,
    cfg: &SolverConfig,
) -> Result<SolveOutcome<'a>, ConfigError> {
    match algorithm {
        Algorithm::Vns => vns(instance, cfg),
        Algorithm::Grasp => grasp(instance, cfg, LocalSearch::BestImprovement),
        Algorithm::GraspVns => grasp(instance, cfg, LocalSearch::Vns),
        Algorithm::GraspTabu => grasp(instance, cfg, LocalSearch::Tabu),
    }
}

/// Shared, read-only knobs for the inner search loops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchContext<'d> {
    pub deadline: &'d Deadline,
    pub opts: EnumOptions,
}

impl<'d> SearchContext<'d> {
    pub(crate) fn new(cfg: &SolverConfig, deadline: &'d Deadline) -> Self {
        Self {
            deadline,
            opts: EnumOptions {
                chg_budget: cfg.chg_budget,
            },
        }
    }
}

/// A scored candidate move.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub mv: Move,
    pub delta: MoveDelta,
    pub score: i64,
}

/// Highest-scoring move of `kind` accepted by `allow`; ties go to the first enumerated.
/// Returns the best seen so far if the clock runs out mid-scan.
pub(crate) fn best_move<F>(
    s: &Schedule<'_>,
    kind: NeighborhoodKind,
    phase: Phase,
    ctx: &SearchContext<'_>,
    mut allow: F,
) -> Option<Candidate>
where
    F: FnMut(&Move, &MoveDelta, i64) -> bool,
{
    let mut best: Option<Candidate> = None;
    for (n, mv) in enumerate(s, kind, ctx.opts).enumerate() {
        if n % CLOCK_CHECK_INTERVAL == CLOCK_CHECK_INTERVAL - 1 && ctx.deadline.expired() {
            break;
        }
        let delta = evaluate(s, &mv);
        let score = score_delta(kind, delta, phase);
        if !allow(&mv, &delta, score) {
            continue;
        }
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(Candidate { mv, delta, score });
        }
    }
    best
}

/// Variable neighborhood descent in a fixed order with best improvement per neighborhood.
/// Returns whether the primary value increased.
pub fn vnd(
    s: &mut Schedule<'_>,
    phase: Phase,
    cfg: &SolverConfig,
    deadline: &Deadline,
) -> bool {
    vnd_in(s, phase, &SearchContext::new(cfg, deadline))
}

pub(crate) fn vnd_in(s: &mut Schedule<'_>, phase: Phase, ctx: &SearchContext<'_>) -> bool {
    let order = NeighborhoodKind::descent_order(s.instance().effective_kind());
    let start = s.primary_value();
    let mut k = 0;
    while k < order.len() && !ctx.deadline.expired() {
        match best_move(s, order[k], phase, ctx, |_, _, score| score > 0) {
            Some(c) => {
                s.apply(&c.mv).expect("enumerated moves are feasible");
                k = 0;
            }
            None => k += 1,
        }
    }
    s.primary_value() > start
}

/// Best-improvement local search over the union of all neighborhoods. Moves are ranked by
/// primary gain first, then by the phase score of repacking moves.
pub(crate) fn best_improvement_in(
    s: &mut Schedule<'_>,
    phase: Phase,
    ctx: &SearchContext<'_>,
) -> bool {
    let order = NeighborhoodKind::descent_order(s.instance().effective_kind());
    let start = s.primary_value();
    while !ctx.deadline.expired() {
        let mut best: Option<((i64, i64), Move)> = None;
        for &kind in order {
            let found = best_move(s, kind, phase, ctx, |_, _, score| score > 0);
            if let Some(c) = found {
                let key = if kind.is_repack() {
                    (0, c.score)
                } else {
                    (c.delta.primary, 0)
                };
                if best.as_ref().is_none_or(|(k, _)| key > *k) {
                    best = Some((key, c.mv));
                }
            }
        }
        match best {
            Some((_, mv)) => {
                s.apply(&mv).expect("enumerated moves are feasible");
            }
            None => break,
        }
    }
    s.primary_value() > start
}

/// Repeats Minimize/Maximize cycles of `step` until a cycle leaves the primary value
/// unchanged. `step` returns whether it improved the primary value.
pub(crate) fn two_phase<F>(deadline: &Deadline, mut step: F)
where
    F: FnMut(Phase) -> bool,
{
    loop {
        let mut improved = false;
        for phase in [Phase::Minimize, Phase::Maximize] {
            if deadline.expired() {
                return;
            }
            improved |= step(phase);
        }
        if !improved {
            return;
        }
    }
}

/// Two-phase VND.
pub fn vnd_two_phase(s: &mut Schedule<'_>, cfg: &SolverConfig, deadline: &Deadline) {
    let ctx = SearchContext::new(cfg, deadline);
    two_phase(deadline, |phase| vnd_in(s, phase, &ctx));
}

/// Two-phase best-improvement local search.
pub fn best_improvement(s: &mut Schedule<'_>, cfg: &SolverConfig, deadline: &Deadline) {
    let ctx = SearchContext::new(cfg, deadline);
    two_phase(deadline, |phase| best_improvement_in(s, phase, &ctx));
}
