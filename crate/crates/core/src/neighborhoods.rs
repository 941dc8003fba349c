//! The five move types and their delta evaluation.
//!
//! | kind   | effect                                                              |
//! |--------|---------------------------------------------------------------------|
//! | ADD    | schedule an unscheduled ad by first-fit                             |
//! | CHG    | unschedule a scheduled ad, then schedule an unscheduled one by ADD  |
//! | RPCK   | swap the slots of one copy each of two scheduled ads                |
//! | ADDCPY | add one more copy of a scheduled ad that is below its max frequency |
//! | MV     | move one copy of an ad to another slot                              |
//!
//! ADD, CHG and ADDCPY are scored by the change in primary value. RPCK and MV never change
//! the primary value; they are scored by the change in squared slack, negated while
//! minimizing. A copy is identified by its slot, which is unique per ad.

use std::fmt;
use std::rc::Rc;

use crate::construct::{first_fit_slots, first_fit_slots_without};
use crate::model::{ProblemKind, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeighborhoodKind {
    Add,
    Chg,
    Rpck,
    AddCpy,
    Mv,
}

impl NeighborhoodKind {
    pub const ALL: [NeighborhoodKind; 5] = [
        NeighborhoodKind::Add,
        NeighborhoodKind::Chg,
        NeighborhoodKind::Rpck,
        NeighborhoodKind::AddCpy,
        NeighborhoodKind::Mv,
    ];

    /// RPCK and MV only redistribute copies.
    pub fn is_repack(self) -> bool {
        matches!(self, NeighborhoodKind::Rpck | NeighborhoodKind::Mv)
    }

    /// Descent order: cheapest neighborhoods first.
    pub fn descent_order(kind: ProblemKind) -> &'static [NeighborhoodKind] {
        use NeighborhoodKind::*;
        match kind {
            ProblemKind::MaxSpace => &[Mv, Rpck, Add, Chg],
            ProblemKind::MaxSpaceRdwv => &[Mv, Rpck, AddCpy, Add, Chg],
        }
    }

    /// Definition order, used for neighborhood numbering in tabu search.
    pub fn listing_order(kind: ProblemKind) -> &'static [NeighborhoodKind] {
        use NeighborhoodKind::*;
        match kind {
            ProblemKind::MaxSpace => &[Add, Chg, Rpck, Mv],
            ProblemKind::MaxSpaceRdwv => &[Add, Chg, Rpck, AddCpy, Mv],
        }
    }
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborhoodKind::Add => "ADD",
            NeighborhoodKind::Chg => "CHG",
            NeighborhoodKind::Rpck => "RPCK",
            NeighborhoodKind::AddCpy => "ADDCPY",
            NeighborhoodKind::Mv => "MV",
        })
    }
}

/// Direction of the squared-slack objective used by RPCK and MV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Level the slots.
    Minimize,
    /// Concentrate load into few slots.
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Move {
    /// Schedule `ad` in `slots` (its first-fit placement).
    Add { ad: usize, slots: Vec<usize> },
    /// Remove every copy of `out`, then schedule `inn` in `slots`.
    Chg {
        out: usize,
        inn: usize,
        slots: Vec<usize>,
    },
    /// The copy of `first` in `first_slot` and the copy of `second` in `second_slot`
    /// exchange slots.
    Rpck {
        first: usize,
        first_slot: usize,
        second: usize,
        second_slot: usize,
    },
    AddCpy { ad: usize, slot: usize },
    Mv { ad: usize, from: usize, to: usize },
}

/// What the tabu list remembers about a move: its kind and the ads involved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MoveSignature {
    pub kind: NeighborhoodKind,
    pub ads: (usize, Option<usize>),
}

impl Move {
    pub fn kind(&self) -> NeighborhoodKind {
        match self {
            Move::Add { .. } => NeighborhoodKind::Add,
            Move::Chg { .. } => NeighborhoodKind::Chg,
            Move::Rpck { .. } => NeighborhoodKind::Rpck,
            Move::AddCpy { .. } => NeighborhoodKind::AddCpy,
            Move::Mv { .. } => NeighborhoodKind::Mv,
        }
    }

    pub fn signature(&self) -> MoveSignature {
        let ads = match *self {
            Move::Add { ad, .. } | Move::AddCpy { ad, .. } | Move::Mv { ad, .. } => (ad, None),
            Move::Chg { out, inn, .. } => (out, Some(inn)),
            Move::Rpck { first, second, .. } => (first, Some(second)),
        };
        MoveSignature {
            kind: self.kind(),
            ads,
        }
    }
}

/// Change in both objectives caused by a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MoveDelta {
    pub primary: i64,
    pub squared_slack: i64,
}

/// Options shared by all enumerations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumOptions {
    /// Cap on the `(out, in)` pairs CHG examines per enumeration. `None` is unlimited.
    pub chg_budget: Option<usize>,
}

/// All feasible moves of one kind, lazily.
///
/// Order: ascending ad index, then copy (slot) index, then target slot. CHG iterates
/// removed ads outermost. RPCK lists each unordered pair once, with `first < second`.
/// ADDCPY is empty on instances where every ad has a fixed frequency.
pub fn enumerate<'s>(
    s: &'s Schedule<'_>,
    kind: NeighborhoodKind,
    opts: EnumOptions,
) -> Box<dyn Iterator<Item = Move> + 's> {
    let inst = s.instance();
    let n = inst.ad_count();
    let cap = i64::from(inst.capacity());
    match kind {
        NeighborhoodKind::Add => Box::new(
            (0..n)
                .filter(move |&i| !s.is_scheduled(i))
                .filter_map(move |ad| first_fit_slots(s, ad).map(|slots| Move::Add { ad, slots })),
        ),
        NeighborhoodKind::Chg => {
            let unscheduled: Rc<Vec<usize>> =
                Rc::new((0..n).filter(|&i| !s.is_scheduled(i)).collect());
            let pairs = (0..n).filter(move |&i| s.is_scheduled(i)).flat_map(move |out| {
                let u = Rc::clone(&unscheduled);
                (0..u.len()).map(move |k| (out, u[k]))
            });
            let pairs: Box<dyn Iterator<Item = (usize, usize)>> = match opts.chg_budget {
                Some(b) => Box::new(pairs.take(b)),
                None => Box::new(pairs),
            };
            Box::new(pairs.filter_map(move |(out, inn)| {
                first_fit_slots_without(s, inn, out).map(|slots| Move::Chg { out, inn, slots })
            }))
        }
        NeighborhoodKind::Rpck => Box::new((0..n).flat_map(move |first| {
            s.placement(first).iter().flat_map(move |&first_slot| {
                ((first + 1)..n).flat_map(move |second| {
                    s.placement(second).iter().filter_map(move |&second_slot| {
                        let m = Move::Rpck {
                            first,
                            first_slot,
                            second,
                            second_slot,
                        };
                        rpck_feasible(s, first, first_slot, second, second_slot).then_some(m)
                    })
                })
            })
        })),
        NeighborhoodKind::AddCpy => Box::new(
            (0..n)
                .filter(move |&ad| {
                    let a = inst.ad(ad);
                    s.is_scheduled(ad) && s.copies(ad) < a.freq_max as usize
                })
                .flat_map(move |ad| {
                    let size = i64::from(inst.ad(ad).size);
                    inst.ad(ad)
                        .window()
                        .filter(move |&slot| !s.contains(ad, slot) && s.load(slot) + size <= cap)
                        .map(move |slot| Move::AddCpy { ad, slot })
                }),
        ),
        NeighborhoodKind::Mv => Box::new((0..n).flat_map(move |ad| {
            let a = inst.ad(ad);
            let size = i64::from(a.size);
            s.placement(ad).iter().flat_map(move |&from| {
                a.window()
                    .filter(move |&to| {
                        to != from && !s.contains(ad, to) && s.load(to) + size <= cap
                    })
                    .map(move |to| Move::Mv { ad, from, to })
            })
        })),
    }
}

fn rpck_feasible(
    s: &Schedule<'_>,
    first: usize,
    p: usize,
    second: usize,
    q: usize,
) -> bool {
    if p == q {
        return false;
    }
    let inst = s.instance();
    let (a, b) = (inst.ad(first), inst.ad(second));
    let cap = i64::from(inst.capacity());
    let (sa, sb) = (i64::from(a.size), i64::from(b.size));
    a.allows_slot(q)
        && b.allows_slot(p)
        && !s.contains(first, q)
        && !s.contains(second, p)
        && s.load(p) - sa + sb <= cap
        && s.load(q) - sb + sa <= cap
}

/// Change in `(L - load)²` when `load` grows by `delta`.
#[inline]
fn slack_sq_change(cap: i64, load: i64, delta: i64) -> i64 {
    let before = cap - load;
    let after = before - delta;
    after * after - before * before
}

/// Objective deltas of a feasible move, without touching the schedule.
pub fn evaluate(s: &Schedule<'_>, m: &Move) -> MoveDelta {
    let inst = s.instance();
    let cap = i64::from(inst.capacity());
    let size = |ad: usize| i64::from(inst.ad(ad).size);
    let value = |ad: usize| i64::from(inst.ad(ad).value);
    match *m {
        Move::Add { ad, ref slots } => MoveDelta {
            primary: value(ad) * slots.len() as i64,
            squared_slack: slots
                .iter()
                .map(|&j| slack_sq_change(cap, s.load(j), size(ad)))
                .sum(),
        },
        Move::AddCpy { ad, slot } => MoveDelta {
            primary: value(ad),
            squared_slack: slack_sq_change(cap, s.load(slot), size(ad)),
        },
        Move::Mv { ad, from, to } => MoveDelta {
            primary: 0,
            squared_slack: slack_sq_change(cap, s.load(from), -size(ad))
                + slack_sq_change(cap, s.load(to), size(ad)),
        },
        Move::Rpck {
            first,
            first_slot,
            second,
            second_slot,
        } => {
            let d = size(second) - size(first);
            MoveDelta {
                primary: 0,
                squared_slack: slack_sq_change(cap, s.load(first_slot), d)
                    + slack_sq_change(cap, s.load(second_slot), -d),
            }
        }
        Move::Chg {
            out,
            inn,
            ref slots,
        } => {
            let removed = s.placement(out);
            let (so, si) = (size(out), size(inn));
            // Merge the two sorted slot lists so a shared slot sees the net change.
            let mut sq = 0;
            let (mut x, mut y) = (0, 0);
            while x < removed.len() || y < slots.len() {
                let (slot, delta) = match (removed.get(x), slots.get(y)) {
                    (Some(&r), Some(&a)) if r == a => {
                        x += 1;
                        y += 1;
                        (r, si - so)
                    }
                    (Some(&r), Some(&a)) if r < a => {
                        x += 1;
                        (r, -so)
                    }
                    (Some(&r), None) => {
                        x += 1;
                        (r, -so)
                    }
                    (_, Some(&a)) => {
                        y += 1;
                        (a, si)
                    }
                    (None, None) => unreachable!(),
                };
                sq += slack_sq_change(cap, s.load(slot), delta);
            }
            MoveDelta {
                primary: value(inn) * slots.len() as i64 - value(out) * removed.len() as i64,
                squared_slack: sq,
            }
        }
    }
}

/// Score of a delta for a move of `kind`; larger is better.
pub fn score_delta(kind: NeighborhoodKind, delta: MoveDelta, phase: Phase) -> i64 {
    if kind.is_repack() {
        match phase {
            Phase::Minimize => -delta.squared_slack,
            Phase::Maximize => delta.squared_slack,
        }
    } else {
        delta.primary
    }
}

/// Score of a feasible move under `phase`; larger is better.
pub fn score(s: &Schedule<'_>, m: &Move, phase: Phase) -> i64 {
    score_delta(m.kind(), evaluate(s, m), phase)
}
