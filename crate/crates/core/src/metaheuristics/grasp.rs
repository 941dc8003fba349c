use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    best_improvement_in, tabu_search, two_phase, vns_from, ConfigError, Deadline, SearchContext,
    SolveOutcome, SolverConfig,
};
use crate::construct::constructive;
use crate::model::{Instance, Schedule};

/// Local search run on each GRASP start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalSearch {
    BestImprovement,
    Vns,
    Tabu,
}

/// Generator for GRASP iteration `iteration` (0-based): the base seed's ChaCha8 stream
/// number `iteration`. Iterations are therefore independent of one another and of
/// execution order.
pub fn iteration_rng(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// GRASP: `grasp_iterations` rounds of randomized construction plus local search, keeping
/// the best schedule. Ties keep the earliest iteration. The first construction always runs,
/// so a zero time limit yields a constructive solution.
pub fn grasp<'a>(
    instance: &'a Instance,
    cfg: &SolverConfig,
    inner: LocalSearch,
) -> Result<SolveOutcome<'a>, ConfigError> {
    cfg.validate()?;
    let deadline = Deadline::after(cfg.time_limit);
    let ctx = SearchContext::new(cfg, &deadline);
    let mut best: Option<(Schedule<'a>, u64)> = None;

    for it in 0..u64::from(cfg.grasp_iterations) {
        if it > 0 && deadline.expired() {
            break;
        }
        let mut rng = iteration_rng(cfg.seed, it);
        let mut s = constructive(instance, cfg.alpha, &mut rng);
        if !deadline.expired() {
            s = match inner {
                LocalSearch::BestImprovement => {
                    two_phase(&deadline, |phase| best_improvement_in(&mut s, phase, &ctx));
                    s
                }
                LocalSearch::Vns => vns_from(s, cfg, 1, &mut rng, &deadline).0,
                LocalSearch::Tabu => tabu_search(s, cfg, &mut rng, &deadline),
            };
        }
        if best
            .as_ref()
            .is_none_or(|(b, _)| s.primary_value() > b.primary_value())
        {
            best = Some((s, it + 1));
        }
    }

    let (schedule, iter_best) = best.expect("at least one GRASP iteration runs");
    Ok(SolveOutcome {
        schedule,
        iter_best,
        elapsed: deadline.elapsed(),
    })
}
