//! Exhaustive oracle for tiny instances and LP-format model export.

use std::io::{self, Write};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instances::write_instance;
use crate::model::{Instance, ProblemKind, Schedule};

/// Largest search-space bound [`brute_force`] accepts.
pub const DEFAULT_SEARCH_LIMIT: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("search space has {bound} configurations, above the limit of {limit}")]
    SearchSpaceTooLarge { bound: u128, limit: u128 },
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of configurations the oracle may visit: the product over ads of one (ad not
/// scheduled) plus the number of window subsets with an admissible size. Saturates at
/// `u128::MAX`.
pub fn search_space_bound(instance: &Instance) -> u128 {
    instance.ads().iter().fold(1u128, |acc, ad| {
        let len = ad.window_len() as u128;
        let hi = u128::from(ad.freq_max).min(len);
        let options = (u128::from(ad.freq_min)..=hi)
            .fold(1u128, |o, c| o.saturating_add(binomial(len, c)));
        acc.saturating_mul(options)
    })
}

/// Optimal primary value and the first optimal schedule in enumeration order.
///
/// Ads are decided in index order. For each ad the search tries "not scheduled" first,
/// then copy counts from `freq_min` upwards, and for each count the window subsets in
/// lexicographic order. Branches that overflow a slot or cannot beat the incumbent are cut.
pub fn brute_force(instance: &Instance) -> Result<(i64, Schedule<'_>), ExactError> {
    brute_force_with_limit(instance, DEFAULT_SEARCH_LIMIT)
}

pub fn brute_force_with_limit(
    instance: &Instance,
    limit: u128,
) -> Result<(i64, Schedule<'_>), ExactError> {
    let bound = search_space_bound(instance);
    if bound > limit {
        return Err(ExactError::SearchSpaceTooLarge { bound, limit });
    }
    let n = instance.ad_count();
    let cap = i64::from(instance.capacity());
    let mut suffix = vec![0i64; n + 1];
    for i in (0..n).rev() {
        let ad = instance.ad(i);
        let best_copies = (ad.freq_max as usize).min(ad.window_len()) as i64;
        let reachable = if i64::from(ad.size) <= cap {
            i64::from(ad.value) * best_copies
        } else {
            0
        };
        suffix[i] = suffix[i + 1] + reachable;
    }
    let mut search = Search {
        instance,
        cap,
        suffix,
        loads: vec![0; instance.slot_count()],
        current: vec![Vec::new(); n],
        value: 0,
        best: None,
    };
    search.ad(0);
    let (value, placement) = search.best.expect("the empty schedule is always feasible");
    let schedule = Schedule::from_placement(instance, placement)
        .expect("oracle placements stay inside the slot range");
    Ok((value, schedule))
}

struct Search<'i> {
    instance: &'i Instance,
    cap: i64,
    suffix: Vec<i64>,
    loads: Vec<i64>,
    current: Vec<Vec<usize>>,
    value: i64,
    best: Option<(i64, Vec<Vec<usize>>)>,
}

impl Search<'_> {
    fn ad(&mut self, i: usize) {
        if let Some((best, _)) = &self.best {
            if self.value + self.suffix[i] <= *best {
                return;
            }
        }
        if i == self.current.len() {
            self.best = Some((self.value, self.current.clone()));
            return;
        }
        self.ad(i + 1);
        let ad = *self.instance.ad(i);
        if i64::from(ad.size) > self.cap {
            return;
        }
        let window = ad.window();
        let hi = (ad.freq_max as usize).min(ad.window_len());
        for copies in ad.freq_min as usize..=hi {
            self.subsets(i, copies, *window.start(), *window.end());
        }
    }

    fn subsets(&mut self, i: usize, remaining: usize, from: usize, last: usize) {
        let ad = *self.instance.ad(i);
        if remaining == 0 {
            let gain = i64::from(ad.value) * self.current[i].len() as i64;
            self.value += gain;
            self.ad(i + 1);
            self.value -= gain;
            return;
        }
        let size = i64::from(ad.size);
        if from + remaining > last + 1 {
            return;
        }
        for slot in from..=last + 1 - remaining {
            if self.loads[slot] + size > self.cap {
                continue;
            }
            self.loads[slot] += size;
            self.current[i].push(slot);
            self.subsets(i, remaining - 1, slot + 1, last);
            self.current[i].pop();
            self.loads[slot] -= size;
        }
    }
}

/// The integer programs [`export_ilp`] can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Maximize occupied space; scheduled ads get exactly `w_i` copies.
    MaxSpace,
    /// Schedule every ad with exactly `w_i` copies, minimizing the fullest slot `F`.
    MinSpace,
    /// Maximize profit with frequency bounds and release/deadline windows.
    MaxSpaceRdwv,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::MaxSpace => "maxspace",
            Formulation::MinSpace => "minspace",
            Formulation::MaxSpaceRdwv => "rdwv",
        }
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("the {0} formulation needs an instance whose ads all have fixed frequency, value equal to size and full windows")]
    NotMaxSpace(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

const TERMS_PER_LINE: usize = 10;

/// Accumulates one linear expression, wrapping long rows onto continuation lines.
struct Row {
    text: String,
    terms: usize,
}

impl Row {
    fn new(label: &str) -> Self {
        Self {
            text: format!(" {label}:"),
            terms: 0,
        }
    }

    fn term(&mut self, coef: i64, var: &str) {
        if self.terms > 0 && self.terms.is_multiple_of(TERMS_PER_LINE) {
            self.text.push_str("\n   ");
        }
        let sign = if coef < 0 { '-' } else { '+' };
        let mag = coef.unsigned_abs();
        if self.terms == 0 && sign == '+' {
            self.text.push(' ');
        } else {
            self.text.push(' ');
            self.text.push(sign);
            self.text.push(' ');
        }
        if mag != 1 {
            self.text.push_str(&format!("{mag} "));
        }
        self.text.push_str(var);
        self.terms += 1;
    }

    fn finish(mut self, sense: &str, rhs: i64) -> String {
        if self.terms == 0 {
            self.text.push_str(" 0");
        }
        if !sense.is_empty() {
            self.text.push_str(&format!(" {sense} {rhs}"));
        }
        self.text.push('\n');
        self.text
    }
}

fn x(i: usize, j: usize) -> String {
    format!("x_{}_{}", i + 1, j + 1)
}

fn y(i: usize) -> String {
    format!("y_{}", i + 1)
}

/// SHA-256 of the instance's canonical text, hex encoded.
pub fn instance_hash(instance: &Instance) -> String {
    let mut text = Vec::new();
    write_instance(instance, &mut text).expect("writing to memory cannot fail");
    hex::encode(Sha256::digest(&text))
}

/// Writes `which` for `instance` in CPLEX LP format.
///
/// Variables are `x_i_j` (ad `i` has a copy in slot `j`, both 1-based), `y_i` (ad `i` is
/// scheduled) and, for MINSPACE, the continuous height `F`. Rows are named `cap_j`,
/// `freq_i` (or `fmin_i`/`fmax_i` when the frequency is a range) and `win_i_j`.
pub fn export_ilp<W: Write>(
    instance: &Instance,
    which: Formulation,
    out: &mut W,
) -> Result<(), ExportError> {
    let maxspace_shaped = instance.effective_kind() == ProblemKind::MaxSpace;
    if which != Formulation::MaxSpaceRdwv && !maxspace_shaped {
        return Err(ExportError::NotMaxSpace(which.name()));
    }
    let n = instance.ad_count();
    let k = instance.slot_count();
    let cap = i64::from(instance.capacity());
    let ads = instance.ads();

    let mut text = format!(
        "\\ {} model: {n} ads, {k} slots, capacity {cap}\n\\ instance sha256 {}\n",
        which.name(),
        instance_hash(instance)
    );

    let mut obj = Row::new("obj");
    match which {
        Formulation::MaxSpace => {
            text.push_str("Maximize\n");
            for (i, ad) in ads.iter().enumerate() {
                obj.term(i64::from(ad.size) * i64::from(ad.freq_min), &y(i));
            }
        }
        Formulation::MinSpace => {
            text.push_str("Minimize\n");
            obj.term(1, "F");
        }
        Formulation::MaxSpaceRdwv => {
            text.push_str("Maximize\n");
            for (i, ad) in ads.iter().enumerate() {
                for j in 0..k {
                    obj.term(i64::from(ad.value), &x(i, j));
                }
            }
        }
    }
    text.push_str(&obj.finish("", 0));
    text.push_str("Subject To\n");

    for j in 0..k {
        let mut row = Row::new(&format!("cap_{}", j + 1));
        for (i, ad) in ads.iter().enumerate() {
            row.term(i64::from(ad.size), &x(i, j));
        }
        if which == Formulation::MinSpace {
            row.term(-1, "F");
            text.push_str(&row.finish("<=", 0));
        } else {
            text.push_str(&row.finish("<=", cap));
        }
    }

    for (i, ad) in ads.iter().enumerate() {
        let copies = |label: String| {
            let mut row = Row::new(&label);
            for j in 0..k {
                row.term(1, &x(i, j));
            }
            row
        };
        let (wmin, wmax) = (i64::from(ad.freq_min), i64::from(ad.freq_max));
        match which {
            Formulation::MinSpace => {
                text.push_str(&copies(format!("freq_{}", i + 1)).finish("=", wmin));
            }
            _ if wmin == wmax => {
                let mut row = copies(format!("freq_{}", i + 1));
                row.term(-wmin, &y(i));
                text.push_str(&row.finish("=", 0));
            }
            _ => {
                let mut lo = copies(format!("fmin_{}", i + 1));
                lo.term(-wmin, &y(i));
                text.push_str(&lo.finish(">=", 0));
                let mut hi = copies(format!("fmax_{}", i + 1));
                hi.term(-wmax, &y(i));
                text.push_str(&hi.finish("<=", 0));
            }
        }
    }

    if which == Formulation::MaxSpaceRdwv {
        for (i, ad) in ads.iter().enumerate() {
            for j in (0..k).filter(|&j| !ad.allows_slot(j)) {
                let mut row = Row::new(&format!("win_{}_{}", i + 1, j + 1));
                row.term(1, &x(i, j));
                text.push_str(&row.finish("=", 0));
            }
        }
    }

    if which == Formulation::MinSpace {
        text.push_str("Bounds\n F >= 0\n");
    }

    text.push_str("Binaries\n");
    let mut vars: Vec<String> = Vec::with_capacity(n * (k + 1));
    for i in 0..n {
        for j in 0..k {
            vars.push(x(i, j));
        }
    }
    if which != Formulation::MinSpace {
        vars.extend((0..n).map(y));
    }
    for chunk in vars.chunks(TERMS_PER_LINE) {
        text.push(' ');
        text.push_str(&chunk.join(" "));
        text.push('\n');
    }
    text.push_str("End\n");

    out.write_all(text.as_bytes())?;
    Ok(())
}
