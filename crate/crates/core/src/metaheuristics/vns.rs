use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{two_phase, vnd_in, ConfigError, Deadline, SearchContext, SolveOutcome, SolverConfig};
use crate::construct::constructive;
use crate::model::{Instance, Schedule};
use crate::neighborhoods::{enumerate, EnumOptions, NeighborhoodKind, Phase};

/// Applies `strength` moves drawn uniformly from the current neighborhood `kind`. A draw
/// from an empty neighborhood is skipped. Returns the number of moves applied.
pub fn shake<R: Rng + ?Sized>(
    s: &mut Schedule<'_>,
    kind: NeighborhoodKind,
    strength: u32,
    opts: EnumOptions,
    rng: &mut R,
) -> u32 {
    let mut applied = 0;
    for _ in 0..strength {
        let pick = enumerate(s, kind, opts).choose(rng);
        if let Some(mv) = pick {
            s.apply(&mv).expect("enumerated moves are feasible");
            applied += 1;
        }
    }
    applied
}

/// VNS from a constructive start.
pub fn vns<'a>(instance: &'a Instance, cfg: &SolverConfig) -> Result<SolveOutcome<'a>, ConfigError> {
    cfg.validate()?;
    let deadline = Deadline::after(cfg.time_limit);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = constructive(instance, cfg.alpha, &mut rng);
    let (schedule, iter_best) = vns_from(start, cfg, cfg.vns_idle_cycles, &mut rng, &deadline);
    Ok(SolveOutcome {
        schedule,
        iter_best,
        elapsed: deadline.elapsed(),
    })
}

/// VNS from a given start.
///
/// The start is first descended with two-phase VND. Each cycle then runs one Minimize and
/// one Maximize pass. A pass walks the descent order: shake the incumbent with `Q` moves of
/// neighborhood `k`, descend with VND, and accept on a strict gain in primary value
/// (returning to `k = 1`) or advance `k`. The search stops after `idle_cycles` consecutive
/// cycles without a gain (`0` means only the clock stops it).
///
/// Returns the incumbent and the shake round (1-based) at which it was last improved.
pub fn vns_from<'a, R: Rng + ?Sized>(
    start: Schedule<'a>,
    cfg: &SolverConfig,
    idle_cycles: u32,
    rng: &mut R,
    deadline: &Deadline,
) -> (Schedule<'a>, u64) {
    let ctx = SearchContext::new(cfg, deadline);
    let mut cur = start;
    if deadline.expired() {
        return (cur, 0);
    }
    two_phase(deadline, |phase| vnd_in(&mut cur, phase, &ctx));

    let order = NeighborhoodKind::descent_order(cur.instance().effective_kind());
    let mut round = 0u64;
    let mut iter_best = 0u64;
    let mut idle = 0u32;
    'cycles: loop {
        let mut improved = false;
        for phase in [Phase::Minimize, Phase::Maximize] {
            let mut k = 0;
            while k < order.len() {
                if deadline.expired() {
                    break 'cycles;
                }
                round += 1;
                let mut cand = cur.clone();
                shake(&mut cand, order[k], cfg.shake_strength, ctx.opts, rng);
                vnd_in(&mut cand, phase, &ctx);
                if cand.primary_value() > cur.primary_value() {
                    cur = cand;
                    iter_best = round;
                    improved = true;
                    k = 0;
                } else {
                    k += 1;
                }
            }
        }
        if improved {
            idle = 0;
        } else {
            idle += 1;
            if idle_cycles != 0 && idle >= idle_cycles {
                break;
            }
        }
    }
    (cur, iter_best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seven_ads() -> Instance {
        Instance::maxspace(4, 6, &[(6, 3), (4, 2), (2, 1), (3, 2), (1, 1), (1, 1), (5, 1)])
            .unwrap()
    }

    #[test]
    fn zero_time_limit_returns_constructive_solution() {
        let inst = seven_ads();
        let cfg = SolverConfig {
            time_limit: 0.0,
            alpha: 0.2,
            ..SolverConfig::default()
        };
        let out = vns(&inst, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let c = constructive(&inst, cfg.alpha, &mut rng);
        assert_eq!(out.schedule, c);
        assert_eq!(out.iter_best, 0);
    }

    #[test]
    fn vns_is_deterministic_and_not_worse_than_start() {
        let inst = seven_ads();
        let cfg = SolverConfig::preset(crate::metaheuristics::Algorithm::Vns, inst.kind());
        let a = vns(&inst, &cfg).unwrap();
        let b = vns(&inst, &cfg).unwrap();
        assert_eq!(a.schedule, b.schedule);
        let c = constructive(&inst, cfg.alpha, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
        assert!(a.value() >= c.primary_value());
        assert!(a.schedule.check_feasible().is_ok());
    }

    #[test]
    fn shake_on_empty_neighborhood_is_a_no_op() {
        let inst = seven_ads();
        let mut s = Schedule::empty(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(shake(&mut s, NeighborhoodKind::Mv, 4, EnumOptions::default(), &mut rng), 0);
        assert_eq!(shake(&mut s, NeighborhoodKind::Add, 2, EnumOptions::default(), &mut rng), 2);
        assert!(s.check_feasible().is_ok());
    }
}
