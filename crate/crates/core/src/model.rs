//! Problem instances, schedules, feasibility checking and objective evaluation.
//!
//! Slots and ads are addressed by 0-based indices throughout the library. Text formats
//! (instance files, solutions, LP files) use 1-based numbering.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fenwick::SlackTree;
use crate::neighborhoods::Move;

/// Which of the two problems an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemKind {
    /// Fixed frequency, value equal to size, no release dates or deadlines.
    MaxSpace,
    /// Release dates, deadlines, frequency bounds and free per-copy profit.
    MaxSpaceRdwv,
}

impl ProblemKind {
    pub fn token(self) -> &'static str {
        match self {
            ProblemKind::MaxSpace => "maxspace",
            ProblemKind::MaxSpaceRdwv => "rdwv",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One advertisement. `release` and `deadline` are 1-based slot numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ad {
    pub size: u32,
    pub value: u32,
    pub freq_min: u32,
    pub freq_max: u32,
    pub release: u32,
    pub deadline: u32,
}

impl Ad {
    /// A plain MAXSPACE ad embedded in the general model.
    pub fn maxspace(size: u32, frequency: u32, slot_count: usize) -> Self {
        Self {
            size,
            value: size,
            freq_min: frequency,
            freq_max: frequency,
            release: 1,
            deadline: slot_count as u32,
        }
    }

    /// 0-based slot indices where a copy may be placed.
    pub fn window(&self) -> RangeInclusive<usize> {
        (self.release as usize - 1)..=(self.deadline as usize - 1)
    }

    pub fn window_len(&self) -> usize {
        (self.deadline - self.release + 1) as usize
    }

    pub fn allows_slot(&self, slot: usize) -> bool {
        self.window().contains(&slot)
    }

    fn is_maxspace_shaped(&self, slot_count: usize) -> bool {
        self.freq_min == self.freq_max
            && self.value == self.size
            && self.release == 1
            && self.deadline as usize == slot_count
    }

    fn validate(&self, slot_count: usize) -> Result<(), String> {
        if self.size == 0 {
            return Err("size must be at least 1".into());
        }
        if self.value == 0 {
            return Err("value must be at least 1".into());
        }
        if self.freq_min == 0 {
            return Err("minimum frequency must be at least 1".into());
        }
        if self.freq_min > self.freq_max {
            return Err(format!(
                "minimum frequency {} exceeds maximum frequency {}",
                self.freq_min, self.freq_max
            ));
        }
        if self.release == 0 {
            return Err("release date must be at least 1".into());
        }
        if self.release > self.deadline {
            return Err(format!(
                "release date {} is after deadline {}",
                self.release, self.deadline
            ));
        }
        if self.deadline as usize > slot_count {
            return Err(format!(
                "deadline {} exceeds slot count {slot_count}",
                self.deadline
            ));
        }
        if (self.window_len() as u32) < self.freq_min {
            return Err(format!(
                "window [{}, {}] cannot hold {} copies",
                self.release, self.deadline, self.freq_min
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("instance needs at least one slot")]
    NoSlots,
    #[error("slot capacity must be at least 1")]
    ZeroCapacity,
    #[error("ad {ad}: {reason}")]
    InvalidAd { ad: usize, reason: String },
    #[error("ad {ad} does not satisfy the MAXSPACE restrictions")]
    NotMaxSpace { ad: usize },
}

/// An immutable problem instance: `K` slots of capacity `L` and a list of ads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    kind: ProblemKind,
    slot_count: usize,
    capacity: u32,
    ads: Vec<Ad>,
    maxspace_shaped: bool,
}

impl Instance {
    pub fn new(
        kind: ProblemKind,
        slot_count: usize,
        capacity: u32,
        ads: Vec<Ad>,
    ) -> Result<Self, ModelError> {
        if slot_count == 0 {
            return Err(ModelError::NoSlots);
        }
        if capacity == 0 {
            return Err(ModelError::ZeroCapacity);
        }
        for (i, ad) in ads.iter().enumerate() {
            ad.validate(slot_count)
                .map_err(|reason| ModelError::InvalidAd { ad: i + 1, reason })?;
            if kind == ProblemKind::MaxSpace && !ad.is_maxspace_shaped(slot_count) {
                return Err(ModelError::NotMaxSpace { ad: i + 1 });
            }
        }
        let maxspace_shaped = ads.iter().all(|a| a.is_maxspace_shaped(slot_count));
        Ok(Self {
            kind,
            slot_count,
            capacity,
            ads,
            maxspace_shaped,
        })
    }

    /// Plain MAXSPACE instance from `(size, frequency)` pairs.
    pub fn maxspace(
        slot_count: usize,
        capacity: u32,
        ads: &[(u32, u32)],
    ) -> Result<Self, ModelError> {
        let ads = ads
            .iter()
            .map(|&(s, w)| Ad::maxspace(s, w, slot_count))
            .collect();
        Self::new(ProblemKind::MaxSpace, slot_count, capacity, ads)
    }

    /// The declared kind, as read from a file or given to the constructor.
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// The kind the solvers dispatch on: `MaxSpace` whenever every ad satisfies the
    /// MAXSPACE restrictions, regardless of the declared kind. This makes an instance and
    /// its RDWV embedding indistinguishable to every algorithm.
    pub fn effective_kind(&self) -> ProblemKind {
        if self.maxspace_shaped {
            ProblemKind::MaxSpace
        } else {
            ProblemKind::MaxSpaceRdwv
        }
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn ads(&self) -> &[Ad] {
        &self.ads
    }

    pub fn ad(&self, index: usize) -> &Ad {
        &self.ads[index]
    }

    pub fn ad_count(&self) -> usize {
        self.ads.len()
    }

    /// The same ads declared as a MAXSPACE-RDWV instance.
    pub fn to_rdwv(&self) -> Instance {
        Instance {
            kind: ProblemKind::MaxSpaceRdwv,
            ..self.clone()
        }
    }
}

/// First violated constraint found by [`Schedule::check_feasible`]. Checks run in the
/// order overflow, duplicate, window, frequency.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("slot {slot} holds {load} > capacity {capacity}", slot = .slot + 1)]
    SlotOverflow { slot: usize, load: i64, capacity: u32 },
    #[error("ad {ad} has two copies in slot {slot}", ad = .ad + 1, slot = .slot + 1)]
    DuplicateCopy { ad: usize, slot: usize },
    #[error("ad {ad} placed in slot {slot}, outside its window", ad = .ad + 1, slot = .slot + 1)]
    WindowViolation { ad: usize, slot: usize },
    #[error("ad {ad} has {copies} copies, allowed 0 or {min}..={max}", ad = .ad + 1)]
    FrequencyViolation {
        ad: usize,
        copies: usize,
        min: u32,
        max: u32,
    },
    #[error("slot {slot} does not exist", slot = .slot + 1)]
    SlotOutOfRange { slot: usize },
    #[error("placement lists {given} ads, instance has {expected}")]
    AdCountMismatch { given: usize, expected: usize },
}

/// Why [`Schedule::apply`] refused a move.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("ad {} is not scheduled", .0 + 1)]
    NotScheduled(usize),
    #[error("ad {} is already scheduled", .0 + 1)]
    AlreadyScheduled(usize),
    #[error("move references the same ad twice")]
    SameAd,
    #[error("ad or slot index out of range")]
    OutOfRange,
    #[error("ad {} has no copy in slot {}", .ad + 1, .slot + 1)]
    MissingCopy { ad: usize, slot: usize },
    #[error(transparent)]
    Infeasible(#[from] Violation),
}

/// Everything needed to undo an applied move, plus its objective deltas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaRecord {
    /// `(ad, slot)` copies removed, in removal order.
    pub removed: Vec<(usize, usize)>,
    /// `(ad, slot)` copies added, in insertion order.
    pub added: Vec<(usize, usize)>,
    pub primary: i64,
    pub squared_slack: i64,
}

/// A mutable assignment of ad copies to slots with cached loads and objectives.
///
/// `placement[i]` lists the slots holding ad `i` and `slot_ads[j]` the ads in slot `j`, both
/// sorted. The two views, the loads, the [`SlackTree`] and the cached objective values are
/// only ever changed together by the private insert/remove primitives.
#[derive(Debug, Clone)]
pub struct Schedule<'a> {
    instance: &'a Instance,
    placement: Vec<Vec<usize>>,
    slot_ads: Vec<Vec<usize>>,
    loads: Vec<i64>,
    tree: SlackTree,
    value: i64,
    squared_slack: i64,
}

impl PartialEq for Schedule<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.instance, other.instance)
            && self.placement == other.placement
            && self.slot_ads == other.slot_ads
            && self.loads == other.loads
            && self.tree == other.tree
            && self.value == other.value
            && self.squared_slack == other.squared_slack
    }
}

fn slack_sq(capacity: i64, load: i64) -> i64 {
    let slack = capacity - load;
    slack * slack
}

/// `(ad, slot)` pairs.
type Copies = Vec<(usize, usize)>;

impl<'a> Schedule<'a> {
    pub fn empty(instance: &'a Instance) -> Self {
        let k = instance.slot_count();
        let cap = i64::from(instance.capacity());
        Self {
            instance,
            placement: vec![Vec::new(); instance.ad_count()],
            slot_ads: vec![Vec::new(); k],
            loads: vec![0; k],
            tree: SlackTree::new(k, cap),
            value: 0,
            squared_slack: k as i64 * cap * cap,
        }
    }

    /// Builds a schedule from raw per-ad slot lists without checking feasibility, so that
    /// [`check_feasible`](Self::check_feasible) can report on it. Only slot indices outside
    /// `0..K` are rejected here.
    pub fn from_placement(
        instance: &'a Instance,
        placement: Vec<Vec<usize>>,
    ) -> Result<Self, Violation> {
        if placement.len() != instance.ad_count() {
            return Err(Violation::AdCountMismatch {
                given: placement.len(),
                expected: instance.ad_count(),
            });
        }
        let k = instance.slot_count();
        let mut s = Self::empty(instance);
        for (ad, slots) in placement.into_iter().enumerate() {
            for slot in slots {
                if slot >= k {
                    return Err(Violation::SlotOutOfRange { slot });
                }
                s.insert_unchecked(ad, slot);
            }
        }
        Ok(s)
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    /// Sorted slots holding a copy of `ad`.
    pub fn placement(&self, ad: usize) -> &[usize] {
        &self.placement[ad]
    }

    /// Sorted ads with a copy in `slot`.
    pub fn ads_in_slot(&self, slot: usize) -> &[usize] {
        &self.slot_ads[slot]
    }

    pub fn load(&self, slot: usize) -> i64 {
        self.loads[slot]
    }

    pub fn loads(&self) -> &[i64] {
        &self.loads
    }

    pub fn free(&self, slot: usize) -> i64 {
        i64::from(self.instance.capacity()) - self.loads[slot]
    }

    pub fn copies(&self, ad: usize) -> usize {
        self.placement[ad].len()
    }

    pub fn is_scheduled(&self, ad: usize) -> bool {
        !self.placement[ad].is_empty()
    }

    pub fn contains(&self, ad: usize, slot: usize) -> bool {
        self.placement[ad].binary_search(&slot).is_ok()
    }

    pub fn tree(&self) -> &SlackTree {
        &self.tree
    }

    /// `Σ value_i · copies_i`.
    pub fn primary_value(&self) -> i64 {
        self.value
    }

    /// `Σ_j (L - load_j)²`.
    pub fn squared_slack(&self) -> i64 {
        self.squared_slack
    }

    /// Primary value recomputed from the placement, ignoring every cache.
    pub fn recompute_primary_value(&self) -> i64 {
        self.placement
            .iter()
            .zip(self.instance.ads())
            .map(|(slots, ad)| i64::from(ad.value) * slots.len() as i64)
            .sum()
    }

    /// Squared slack recomputed from the placement, ignoring every cache.
    pub fn recompute_squared_slack(&self) -> i64 {
        let cap = i64::from(self.instance.capacity());
        self.recompute_loads()
            .into_iter()
            .map(|l| slack_sq(cap, l))
            .sum()
    }

    pub fn recompute_loads(&self) -> Vec<i64> {
        let mut loads = vec![0i64; self.instance.slot_count()];
        for (ad, slots) in self.placement.iter().enumerate() {
            for &j in slots {
                loads[j] += i64::from(self.instance.ad(ad).size);
            }
        }
        loads
    }

    /// True when every cache agrees with a from-scratch recomputation.
    pub fn caches_consistent(&self) -> bool {
        let loads = self.recompute_loads();
        let mut slot_ads = vec![Vec::new(); self.instance.slot_count()];
        for (ad, slots) in self.placement.iter().enumerate() {
            for &j in slots {
                slot_ads[j].push(ad);
            }
        }
        loads == self.loads
            && slot_ads == self.slot_ads
            && self.tree == SlackTree::from_loads(i64::from(self.instance.capacity()), &loads)
            && self.value == self.recompute_primary_value()
            && self.squared_slack == self.recompute_squared_slack()
    }

    /// Validates the schedule against every constraint, reporting the first violation.
    pub fn check_feasible(&self) -> Result<(), Violation> {
        let inst = self.instance;
        let cap = i64::from(inst.capacity());
        for (slot, &load) in self.recompute_loads().iter().enumerate() {
            if load > cap {
                return Err(Violation::SlotOverflow {
                    slot,
                    load,
                    capacity: inst.capacity(),
                });
            }
        }
        for (ad, slots) in self.placement.iter().enumerate() {
            if let Some(w) = slots.windows(2).find(|w| w[0] == w[1]) {
                return Err(Violation::DuplicateCopy { ad, slot: w[0] });
            }
        }
        for (ad, slots) in self.placement.iter().enumerate() {
            let a = inst.ad(ad);
            if let Some(&slot) = slots.iter().find(|&&j| !a.allows_slot(j)) {
                return Err(Violation::WindowViolation { ad, slot });
            }
        }
        for (ad, slots) in self.placement.iter().enumerate() {
            let a = inst.ad(ad);
            let c = slots.len();
            if c != 0 && (c < a.freq_min as usize || c > a.freq_max as usize) {
                return Err(Violation::FrequencyViolation {
                    ad,
                    copies: c,
                    min: a.freq_min,
                    max: a.freq_max,
                });
            }
        }
        Ok(())
    }

    fn set_load(&mut self, slot: usize, new_load: i64) {
        let cap = i64::from(self.instance.capacity());
        self.squared_slack += slack_sq(cap, new_load) - slack_sq(cap, self.loads[slot]);
        self.loads[slot] = new_load;
        self.tree.point_update(slot, new_load);
    }

    fn insert_unchecked(&mut self, ad: usize, slot: usize) {
        let a = *self.instance.ad(ad);
        let pos = self.placement[ad].partition_point(|&j| j < slot);
        self.placement[ad].insert(pos, slot);
        let pos = self.slot_ads[slot].partition_point(|&i| i < ad);
        self.slot_ads[slot].insert(pos, ad);
        self.set_load(slot, self.loads[slot] + i64::from(a.size));
        self.value += i64::from(a.value);
    }

    fn remove_unchecked(&mut self, ad: usize, slot: usize) {
        let a = *self.instance.ad(ad);
        let pos = self.placement[ad]
            .binary_search(&slot)
            .expect("copy present");
        self.placement[ad].remove(pos);
        let pos = self.slot_ads[slot].binary_search(&ad).expect("copy present");
        self.slot_ads[slot].remove(pos);
        self.set_load(slot, self.loads[slot] - i64::from(a.size));
        self.value -= i64::from(a.value);
    }

    fn insert_checked(&mut self, ad: usize, slot: usize) -> Result<(), MoveError> {
        if ad >= self.instance.ad_count() || slot >= self.instance.slot_count() {
            return Err(MoveError::OutOfRange);
        }
        let a = self.instance.ad(ad);
        if !a.allows_slot(slot) {
            return Err(Violation::WindowViolation { ad, slot }.into());
        }
        if self.contains(ad, slot) {
            return Err(Violation::DuplicateCopy { ad, slot }.into());
        }
        let load = self.loads[slot] + i64::from(a.size);
        if load > i64::from(self.instance.capacity()) {
            return Err(Violation::SlotOverflow {
                slot,
                load,
                capacity: self.instance.capacity(),
            }
            .into());
        }
        self.insert_unchecked(ad, slot);
        Ok(())
    }

    fn remove_checked(&mut self, ad: usize, slot: usize) -> Result<(), MoveError> {
        if ad >= self.instance.ad_count() || slot >= self.instance.slot_count() {
            return Err(MoveError::OutOfRange);
        }
        if !self.contains(ad, slot) {
            return Err(MoveError::MissingCopy { ad, slot });
        }
        self.remove_unchecked(ad, slot);
        Ok(())
    }

    /// The copies a move removes and adds, after checking its ad-level preconditions.
    fn move_ops(&self, mv: &Move) -> Result<(Copies, Copies), MoveError> {
        let n = self.instance.ad_count();
        let in_range = |ad: usize| if ad < n { Ok(()) } else { Err(MoveError::OutOfRange) };
        Ok(match mv {
            Move::Add { ad, slots } => {
                in_range(*ad)?;
                if self.is_scheduled(*ad) {
                    return Err(MoveError::AlreadyScheduled(*ad));
                }
                (Vec::new(), slots.iter().map(|&j| (*ad, j)).collect())
            }
            Move::Chg { out, inn, slots } => {
                in_range(*out)?;
                in_range(*inn)?;
                if out == inn {
                    return Err(MoveError::SameAd);
                }
                if !self.is_scheduled(*out) {
                    return Err(MoveError::NotScheduled(*out));
                }
                if self.is_scheduled(*inn) {
                    return Err(MoveError::AlreadyScheduled(*inn));
                }
                (
                    self.placement[*out].iter().map(|&j| (*out, j)).collect(),
                    slots.iter().map(|&j| (*inn, j)).collect(),
                )
            }
            Move::Rpck {
                first,
                first_slot,
                second,
                second_slot,
            } => {
                in_range(*first)?;
                in_range(*second)?;
                if first == second {
                    return Err(MoveError::SameAd);
                }
                (
                    vec![(*first, *first_slot), (*second, *second_slot)],
                    vec![(*first, *second_slot), (*second, *first_slot)],
                )
            }
            Move::AddCpy { ad, slot } => {
                in_range(*ad)?;
                if !self.is_scheduled(*ad) {
                    return Err(MoveError::NotScheduled(*ad));
                }
                (Vec::new(), vec![(*ad, *slot)])
            }
            Move::Mv { ad, from, to } => {
                in_range(*ad)?;
                (vec![(*ad, *from)], vec![(*ad, *to)])
            }
        })
    }

    fn rollback(&mut self, removed: &[(usize, usize)], added: &[(usize, usize)]) {
        for &(ad, slot) in added.iter().rev() {
            self.remove_unchecked(ad, slot);
        }
        for &(ad, slot) in removed.iter().rev() {
            self.insert_unchecked(ad, slot);
        }
    }

    /// Applies a move, returning a record that [`revert`](Self::revert) can undo exactly.
    /// Moves that would break any schedule invariant are rejected and leave the schedule
    /// untouched.
    pub fn apply(&mut self, mv: &Move) -> Result<DeltaRecord, MoveError> {
        let (removals, additions) = self.move_ops(mv)?;
        let (value0, sq0) = (self.value, self.squared_slack);

        let mut removed = Vec::with_capacity(removals.len());
        for (ad, slot) in removals {
            if let Err(e) = self.remove_checked(ad, slot) {
                self.rollback(&removed, &[]);
                return Err(e);
            }
            removed.push((ad, slot));
        }
        let mut added = Vec::with_capacity(additions.len());
        for (ad, slot) in additions {
            if let Err(e) = self.insert_checked(ad, slot) {
                self.rollback(&removed, &added);
                return Err(e);
            }
            added.push((ad, slot));
        }
        for &ad in removed.iter().chain(&added).map(|(ad, _)| ad) {
            let a = self.instance.ad(ad);
            let c = self.placement[ad].len();
            if c != 0 && (c < a.freq_min as usize || c > a.freq_max as usize) {
                let (min, max) = (a.freq_min, a.freq_max);
                self.rollback(&removed, &added);
                return Err(Violation::FrequencyViolation {
                    ad,
                    copies: c,
                    min,
                    max,
                }
                .into());
            }
        }
        Ok(DeltaRecord {
            removed,
            added,
            primary: self.value - value0,
            squared_slack: self.squared_slack - sq0,
        })
    }

    /// Undoes the move that produced `record`. The record must come from the most recent
    /// un-reverted `apply` on this schedule.
    pub fn revert(&mut self, record: &DeltaRecord) {
        self.rollback(&record.removed, &record.added);
    }
}
