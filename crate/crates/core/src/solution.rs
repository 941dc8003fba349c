//! Solution text format.
//!
//! ```text
//! slot 1: 1 4
//! slot 2: 1
//! slot 3:
//! value=18
//! ```
//!
//! One line per slot listing the 1-based ids of the ads placed there, then the primary value.

use std::io::{self, Write};

use thiserror::Error;

use crate::model::{Instance, Schedule, Violation};

pub fn write_solution<W: Write>(s: &Schedule<'_>, out: &mut W) -> io::Result<()> {
    for j in 0..s.instance().slot_count() {
        write!(out, "slot {}:", j + 1)?;
        for &ad in s.ads_in_slot(j) {
            write!(out, " {}", ad + 1)?;
        }
        writeln!(out)?;
    }
    writeln!(out, "value={}", s.primary_value())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("declared value {declared} differs from the schedule's value {actual}")]
    ValueMismatch { declared: i64, actual: i64 },
    #[error("infeasible schedule: {0}")]
    Infeasible(#[from] Violation),
}

/// Parses a solution for `instance` and checks it is feasible and matches its value line.
pub fn read_solution<'a>(instance: &'a Instance, text: &str) -> Result<Schedule<'a>, SolutionError> {
    let err = |line: usize, message: String| SolutionError::Syntax { line, message };
    let k = instance.slot_count();
    let n = instance.ad_count();
    let mut placement = vec![Vec::new(); n];
    let mut declared = None;
    let mut seen = vec![false; k];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if let Some(v) = raw.strip_prefix("value=") {
            declared = Some(v.parse::<i64>().map_err(|_| err(line, format!("invalid value `{v}`")))?);
            continue;
        }
        let (head, ads) = raw
            .split_once(':')
            .ok_or_else(|| err(line, "expected `slot j: ids`".into()))?;
        let j: usize = head
            .strip_prefix("slot ")
            .and_then(|t| t.trim().parse().ok())
            .filter(|&j| (1..=k).contains(&j))
            .ok_or_else(|| err(line, format!("invalid slot `{head}`")))?;
        if std::mem::replace(&mut seen[j - 1], true) {
            return Err(err(line, format!("slot {j} listed twice")));
        }
        for tok in ads.split_whitespace() {
            let id: usize = tok
                .parse()
                .ok()
                .filter(|&id| (1..=n).contains(&id))
                .ok_or_else(|| err(line, format!("invalid ad id `{tok}`")))?;
            placement[id - 1].push(j - 1);
        }
    }
    for slots in &mut placement {
        slots.sort_unstable();
    }
    let s = Schedule::from_placement(instance, placement)?;
    s.check_feasible()?;
    if let Some(declared) = declared {
        if declared != s.primary_value() {
            return Err(SolutionError::ValueMismatch {
                declared,
                actual: s.primary_value(),
            });
        }
    }
    Ok(s)
}
