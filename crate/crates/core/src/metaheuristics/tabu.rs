use std::collections::VecDeque;

use rand::Rng;

use super::{best_move, Deadline, SearchContext, SolverConfig, TabuStop, TabuVersion};
use crate::model::Schedule;
use crate::neighborhoods::{MoveSignature, NeighborhoodKind, Phase};

/// Bounded FIFO of recently applied move signatures.
#[derive(Debug, Clone)]
pub struct TabuList {
    capacity: usize,
    recent: VecDeque<MoveSignature>,
}

impl TabuList {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            recent: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, sig: MoveSignature) {
        if self.capacity == 0 {
            return;
        }
        if self.recent.len() == self.capacity {
            self.recent.pop_front();
        }
        self.recent.push_back(sig);
    }

    pub fn contains(&self, sig: &MoveSignature) -> bool {
        self.recent.contains(sig)
    }

    pub fn len(&self) -> usize {
        self.recent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recent.is_empty()
    }
}

/// Tabu search from `start`, returning the best schedule seen.
///
/// Neighborhoods are numbered in definition order (ADD, CHG, RPCK, ADDCPY, MV). Each
/// iteration picks one according to `cfg.tabu_version`, applies its best non-tabu move even
/// when that move is worsening, and records the move's signature. A tabu move is still
/// allowed when `cfg.aspiration` is set and it yields a new global best. A phase ends after
/// `cfg.tabu_iterations` iterations (counted per `cfg.tabu_stop`); phases restart from the
/// best schedule and alternate while a cycle improves it.
pub fn tabu_search<'a, R: Rng + ?Sized>(
    start: Schedule<'a>,
    cfg: &SolverConfig,
    rng: &mut R,
    deadline: &Deadline,
) -> Schedule<'a> {
    let ctx = SearchContext::new(cfg, deadline);
    let order = NeighborhoodKind::listing_order(start.instance().effective_kind());
    let mut best = start;
    let mut tabu = TabuList::new(cfg.tabu_capacity);

    loop {
        let mut improved = false;
        for phase in [Phase::Minimize, Phase::Maximize] {
            if deadline.expired() {
                return best;
            }
            let mut cur = best.clone();
            let mut k = 0usize;
            let mut counted = 0u32;
            let mut iteration = 0u64;
            while counted < cfg.tabu_iterations && !deadline.expired() {
                k = match cfg.tabu_version {
                    TabuVersion::Random => rng.gen_range(0..order.len()),
                    TabuVersion::StayUntilNoImprove => k,
                    TabuVersion::Cyclic => (iteration as usize) % order.len(),
                };
                iteration += 1;

                let best_value = best.primary_value();
                let cur_value = cur.primary_value();
                let chosen = best_move(&cur, order[k], phase, &ctx, |mv, delta, _| {
                    !tabu.contains(&mv.signature())
                        || (cfg.aspiration && cur_value + delta.primary > best_value)
                });

                let mut new_best = false;
                let mut move_improved = false;
                if let Some(c) = chosen {
                    cur.apply(&c.mv).expect("enumerated moves are feasible");
                    tabu.push(c.mv.signature());
                    move_improved = c.score > 0;
                    if cur.primary_value() > best.primary_value() {
                        best = cur.clone();
                        new_best = true;
                        improved = true;
                    }
                }
                if cfg.tabu_version == TabuVersion::StayUntilNoImprove && !move_improved {
                    k = (k + 1) % order.len();
                }
                match cfg.tabu_stop {
                    TabuStop::NonImproving if new_best => counted = 0,
                    _ => counted += 1,
                }
            }
        }
        if !improved {
            return best;
        }
    }
}
