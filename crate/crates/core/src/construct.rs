//! First-fit placement and the randomized greedy constructive heuristic.

use std::cmp::Ordering;

use rand::Rng;

use crate::model::{Instance, ProblemKind, Schedule};
use crate::neighborhoods::Move;

/// Slots that first-fit would use for the unscheduled `ad`, or `None` when fewer than
/// `freq_min` copies fit.
///
/// Slots are scanned left to right over the ad's window; a copy goes into every slot with
/// room until `freq_max` copies are placed. The slack tree is consulted first: the interval
/// free-space sum and the least-loaded slot give cheap rejections, and when even the most
/// loaded slot of the window has room the first slots are taken without scanning.
pub fn first_fit_slots(s: &Schedule<'_>, ad: usize) -> Option<Vec<usize>> {
    debug_assert!(!s.is_scheduled(ad));
    let inst = s.instance();
    let a = inst.ad(ad);
    let cap = i64::from(inst.capacity());
    let size = i64::from(a.size);
    if size > cap {
        return None;
    }
    let (lo, hi) = (*a.window().start(), *a.window().end());
    let tree = s.tree();
    if !tree.can_place(a.freq_min, a.size, lo, hi) {
        return None;
    }
    if tree.min_load_slot(lo, hi).1 + size > cap {
        return None;
    }
    let want = a.freq_max as usize;
    if tree.max_load_slot(lo, hi).1 + size <= cap {
        return Some((lo..=hi).take(want).collect());
    }
    let slots: Vec<usize> = (lo..=hi)
        .filter(|&j| s.load(j) + size <= cap)
        .take(want)
        .collect();
    (slots.len() >= a.freq_min as usize).then_some(slots)
}

/// First-fit slots for the unscheduled `inn` as if every copy of `out` had been removed.
pub fn first_fit_slots_without(s: &Schedule<'_>, inn: usize, out: usize) -> Option<Vec<usize>> {
    let inst = s.instance();
    let a = inst.ad(inn);
    let cap = i64::from(inst.capacity());
    let size = i64::from(a.size);
    if size > cap {
        return None;
    }
    let (lo, hi) = (*a.window().start(), *a.window().end());
    let out_size = i64::from(inst.ad(out).size);
    let out_slots = s.placement(out);
    let freed_in_window = out_slots.iter().filter(|&&j| lo <= j && j <= hi).count() as i64;
    if s.tree().range_free(lo, hi) + freed_in_window * out_size
        < i64::from(a.freq_min) * size
    {
        return None;
    }
    let want = a.freq_max as usize;
    let slots: Vec<usize> = (lo..=hi)
        .filter(|&j| {
            let freed = if out_slots.binary_search(&j).is_ok() { out_size } else { 0 };
            s.load(j) - freed + size <= cap
        })
        .take(want)
        .collect();
    (slots.len() >= a.freq_min as usize).then_some(slots)
}

/// Places the unscheduled `ad` by first-fit. Returns `false` (schedule unchanged) when the
/// ad is discarded.
pub fn first_fit(s: &mut Schedule<'_>, ad: usize) -> bool {
    match first_fit_slots(s, ad) {
        Some(slots) => {
            s.apply(&Move::Add { ad, slots })
                .expect("first-fit placement is feasible");
            true
        }
        None => false,
    }
}

/// Greedy cost of an ad as an exact fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cost {
    pub num: u64,
    pub den: u64,
}

impl Cost {
    /// `s·w` for MAXSPACE, `v/s` for MAXSPACE-RDWV.
    pub fn of(instance: &Instance, ad: usize) -> Self {
        let a = instance.ad(ad);
        match instance.effective_kind() {
            ProblemKind::MaxSpace => Cost {
                num: u64::from(a.size) * u64::from(a.freq_min),
                den: 1,
            },
            ProblemKind::MaxSpaceRdwv => Cost {
                num: u64::from(a.value),
                den: u64::from(a.size),
            },
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

const ALPHA_SCALE: i128 = 1_000_000;

/// `cost >= max - alpha * (max - min)`, with `alpha = alpha_num / ALPHA_SCALE`.
fn in_restricted_list(cost: Cost, max: Cost, min: Cost, alpha_num: i128) -> bool {
    let (n, d) = (i128::from(cost.num), i128::from(cost.den));
    let (a, b) = (i128::from(max.num), i128::from(max.den));
    let (e, f) = (i128::from(min.num), i128::from(min.den));
    // Multiply both sides by ALPHA_SCALE * d * b * f.
    let lhs = ALPHA_SCALE * n * b * f;
    let rhs = ALPHA_SCALE * a * d * f - alpha_num * (a * f - e * b) * d;
    lhs >= rhs
}

/// Randomized greedy construction.
///
/// Costs are computed once. Each round the restricted candidate list holds the remaining
/// ads whose cost lies in `[max - alpha(max - min), max]`; one is drawn uniformly, placed by
/// first-fit if it fits and discarded otherwise. `alpha = 0` is pure greedy, `alpha = 1`
/// a uniformly random order. When all remaining costs are equal every candidate qualifies.
pub fn constructive<'a, R: Rng + ?Sized>(
    instance: &'a Instance,
    alpha: f64,
    rng: &mut R,
) -> Schedule<'a> {
    assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1]");
    let alpha_num = (alpha * ALPHA_SCALE as f64).round() as i128;
    let costs: Vec<Cost> = (0..instance.ad_count())
        .map(|i| Cost::of(instance, i))
        .collect();
    // Candidates sorted by decreasing cost, ties by index, so the list is always a prefix.
    let mut candidates: Vec<usize> = (0..instance.ad_count()).collect();
    candidates.sort_by(|&x, &y| costs[y].cmp(&costs[x]).then(x.cmp(&y)));

    let mut s = Schedule::empty(instance);
    while !candidates.is_empty() {
        let max = costs[candidates[0]];
        let min = costs[*candidates.last().unwrap()];
        let rc_len =
            candidates.partition_point(|&i| in_restricted_list(costs[i], max, min, alpha_num));
        let pick = rng.gen_range(0..rc_len);
        let ad = candidates.remove(pick);
        first_fit(&mut s, ad);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Ad;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seven_ads() -> Instance {
        Instance::maxspace(
            4,
            6,
            &[(6, 3), (4, 2), (2, 1), (3, 2), (1, 1), (1, 1), (5, 1)],
        )
        .unwrap()
    }

    #[test]
    fn first_fit_seven_ads_a1() {
        let inst = seven_ads();
        let mut s = Schedule::empty(&inst);
        assert!(first_fit(&mut s, 0));
        assert_eq!(s.placement(0), &[0, 1, 2]);
    }

    #[test]
    fn first_fit_discards_oversized() {
        let inst = Instance::maxspace(4, 6, &[(7, 1)]).unwrap();
        let mut s = Schedule::empty(&inst);
        assert!(!first_fit(&mut s, 0));
        assert_eq!(s.primary_value(), 0);
    }

    #[test]
    fn first_fit_respects_window() {
        let inst = Instance::new(
            ProblemKind::MaxSpaceRdwv,
            4,
            6,
            vec![Ad { size: 2, value: 1, freq_min: 1, freq_max: 3, release: 2, deadline: 3 }],
        )
        .unwrap();
        let mut s = Schedule::empty(&inst);
        assert!(first_fit(&mut s, 0));
        assert_eq!(s.placement(0), &[1, 2]);
    }

    #[test]
    fn first_fit_skips_full_slots_and_restores_on_failure() {
        let inst = Instance::maxspace(3, 6, &[(5, 1), (2, 2), (2, 3)]).unwrap();
        let mut s = Schedule::from_placement(&inst, vec![vec![1], vec![], vec![]]).unwrap();
        assert!(first_fit(&mut s, 1));
        assert_eq!(s.placement(1), &[0, 2]);
        let before = s.clone();
        assert!(!first_fit(&mut s, 2));
        assert_eq!(s, before);
    }

    #[test]
    fn seven_ads_costs() {
        let inst = seven_ads();
        let costs: Vec<u64> = (0..7).map(|i| Cost::of(&inst, i).num).collect();
        assert_eq!(costs, vec![18, 8, 2, 6, 1, 1, 5]);
    }

    #[test]
    fn rdwv_costs_compare_exactly() {
        let a = Cost { num: 1, den: 3 };
        let b = Cost { num: 2, den: 6 };
        assert_eq!(a.cmp(&b), Ordering::Equal);
        assert!(Cost { num: 34, den: 100 } > a);
    }

    #[test]
    fn restricted_list_bounds() {
        let max = Cost { num: 10, den: 1 };
        let min = Cost { num: 0, den: 1 };
        let c = |n| Cost { num: n, den: 1 };
        assert!(in_restricted_list(c(10), max, min, 0));
        assert!(!in_restricted_list(c(9), max, min, 0));
        assert!(in_restricted_list(c(0), max, min, ALPHA_SCALE));
        assert!(in_restricted_list(c(7), max, min, 300_000));
        assert!(!in_restricted_list(c(6), max, min, 300_000));
    }

    #[test]
    fn greedy_order_is_seed_independent() {
        let inst = seven_ads();
        let a = constructive(&inst, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        let b = constructive(&inst, 0.0, &mut ChaCha8Rng::seed_from_u64(99));
        assert_eq!(a, b);
        assert!(a.check_feasible().is_ok());
        // Decreasing cost: A1 (18) then A2 (8) then A4 (6) then A7 (5)...
        assert_eq!(a.placement(0), &[0, 1, 2]);
    }

    #[test]
    fn constructive_is_deterministic() {
        let inst = seven_ads();
        for seed in 0..20 {
            let a = constructive(&inst, 0.7, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = constructive(&inst, 0.7, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(a, b);
            assert!(a.check_feasible().is_ok());
        }
    }
}
