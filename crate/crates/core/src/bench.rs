//! Benchmark grids and the comparison artifacts computed from them: performance profiles,
//! time profiles and pairwise win tables.
//!
//! Records are stored as CSV with the header
//! `instance,algorithm,seed,value,time_s,iter_best,feasible`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{self, Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metaheuristics::{solve, Algorithm, ConfigError, SolverConfig};
use crate::model::Instance;

const CSV_HEADER: &str = "instance,algorithm,seed,value,time_s,iter_best,feasible\n";

/// Environment variable capping the number of grid worker threads.
pub const WORKERS_ENV: &str = "MAXSPACE_WORKERS";

/// Result of one (instance, algorithm, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub value: i64,
    pub time_s: f64,
    pub iter_best: u64,
    /// False when the solver failed or returned an infeasible schedule.
    pub feasible: bool,
}

/// A labelled solver configuration. The grid overrides `seed` and `time_limit` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub label: String,
    pub algorithm: Algorithm,
    pub config: SolverConfig,
}

impl AlgorithmSpec {
    pub fn new(algorithm: Algorithm, config: SolverConfig) -> Self {
        Self {
            label: algorithm.name().to_string(),
            algorithm,
            config,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("algorithm {label}: {source}")]
    Config {
        label: String,
        #[source]
        source: ConfigError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Dimensions of a grid run, written next to the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub instances: Vec<String>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub seeds: Vec<u64>,
    pub time_limit: f64,
    pub workers: usize,
}

fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        (&a.instance, &a.algorithm, a.seed).cmp(&(&b.instance, &b.algorithm, b.seed))
    });
}

/// Runs every (instance, algorithm, seed) cell with wall-clock `limit` seconds.
///
/// Cells run on up to `MAXSPACE_WORKERS` threads (default: available parallelism). When
/// `csv_path` is given, each finished row is appended and flushed immediately, and the file
/// is rewritten in sorted order once the grid completes. A solver panic produces a row with
/// `feasible = false` instead of aborting the grid. The returned records are sorted by
/// instance, algorithm and seed.
pub fn run_grid(
    instances: &[(String, Instance)],
    algorithms: &[AlgorithmSpec],
    seeds: &[u64],
    limit: f64,
    csv_path: Option<&Path>,
) -> Result<Vec<RunRecord>, BenchError> {
    for spec in algorithms {
        let cfg = SolverConfig {
            time_limit: limit,
            ..spec.config.clone()
        };
        cfg.validate().map_err(|source| BenchError::Config {
            label: spec.label.clone(),
            source,
        })?;
    }

    let cells: Vec<(usize, usize, u64)> = (0..instances.len())
        .flat_map(|i| {
            (0..algorithms.len()).flat_map(move |a| seeds.iter().map(move |&s| (i, a, s)))
        })
        .collect();

    let sink = match csv_path {
        Some(p) => {
            let mut f = File::create(p)?;
            f.write_all(CSV_HEADER.as_bytes())?;
            Some(Mutex::new(csv::WriterBuilder::new().has_headers(false).from_writer(f)))
        }
        None => None,
    };
    let results = Mutex::new(Vec::with_capacity(cells.len()));
    let next = AtomicUsize::new(0);
    let append_error: Mutex<Option<csv::Error>> = Mutex::new(None);
    let workers = worker_count().min(cells.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, a, seed)) = cells.get(idx) else {
                    break;
                };
                let record = run_cell(&instances[i], &algorithms[a], seed, limit);
                if let Some(sink) = &sink {
                    let mut w = sink.lock().expect("csv writer lock");
                    if let Err(e) = w.serialize(&record).and_then(|_| w.flush().map_err(Into::into)) {
                        append_error.lock().expect("error lock").get_or_insert(e);
                    }
                }
                results.lock().expect("results lock").push(record);
            });
        }
    });

    if let Some(e) = append_error.into_inner().expect("error lock") {
        return Err(e.into());
    }
    let mut records = results.into_inner().expect("results lock");
    sort_records(&mut records);
    if let Some(p) = csv_path {
        drop(sink);
        let tmp = p.with_extension("csv.tmp");
        write_records(File::create(&tmp)?, &records)?;
        fs::rename(&tmp, p)?;
    }
    Ok(records)
}

fn run_cell(instance: &(String, Instance), spec: &AlgorithmSpec, seed: u64, limit: f64) -> RunRecord {
    let cfg = SolverConfig {
        seed,
        time_limit: limit,
        ..spec.config.clone()
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        solve(&instance.1, spec.algorithm, &cfg).map(|o| {
            (
                o.value(),
                o.elapsed.as_secs_f64(),
                o.iter_best,
                o.schedule.check_feasible().is_ok(),
            )
        })
    }));
    let (value, time_s, iter_best, feasible) = match outcome {
        Ok(Ok(r)) => r,
        Ok(Err(e)) => {
            log::error!("{} on {} (seed {seed}): {e}", spec.label, instance.0);
            (0, 0.0, 0, false)
        }
        Err(_) => {
            log::error!("{} on {} (seed {seed}) panicked", spec.label, instance.0);
            (0, 0.0, 0, false)
        }
    };
    RunRecord {
        instance: instance.0.clone(),
        algorithm: spec.label.clone(),
        seed,
        value,
        time_s,
        iter_best,
        feasible,
    }
}

pub fn write_records<W: Write>(mut out: W, records: &[RunRecord]) -> Result<(), csv::Error> {
    out.write_all(CSV_HEADER.as_bytes())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_manifest<W: Write>(out: W, manifest: &GridManifest) -> Result<(), serde_json::Error> {
    serde_json::to_writer_pretty(out, manifest)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("no records")]
    Empty,
    #[error("missing (instance, algorithm) cells: {}", format_gaps(.0))]
    MissingCells(Vec<(String, String)>),
}

fn format_gaps(gaps: &[(String, String)]) -> String {
    gaps.iter()
        .map(|(i, a)| format!("({i}, {a})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Per instance and algorithm, the best feasible value over seeds. Errors if any algorithm
/// lacks a feasible record on any instance.
pub fn best_values(records: &[RunRecord]) -> Result<BTreeMap<String, BTreeMap<String, i64>>, ProfileError> {
    if records.is_empty() {
        return Err(ProfileError::Empty);
    }
    let algorithms: BTreeSet<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
    let mut table: BTreeMap<String, BTreeMap<String, i64>> = BTreeMap::new();
    for r in records {
        let row = table.entry(r.instance.clone()).or_default();
        if r.feasible {
            let v = row.entry(r.algorithm.clone()).or_insert(r.value);
            *v = (*v).max(r.value);
        }
    }
    let mut gaps = Vec::new();
    for (inst, row) in &table {
        for &a in &algorithms {
            if !row.contains_key(a) {
                gaps.push((inst.clone(), a.to_string()));
            }
        }
    }
    if gaps.is_empty() {
        Ok(table)
    } else {
        Err(ProfileError::MissingCells(gaps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    /// Quality ratio threshold.
    pub x: f64,
    /// Fraction of instances where the algorithm reaches at least `x` times the best value.
    pub y: f64,
}

/// Thresholds 1.00, 0.99, ..., 0.00.
pub fn default_thresholds() -> Vec<f64> {
    (0..=100).map(|i| f64::from(100 - i) / 100.0).collect()
}

/// Performance profile of every algorithm at each threshold in `thresholds`.
///
/// Values are aggregated as the best over seeds. The reference value of an instance is the
/// best over algorithms, or the entry in `best_known` when present. Instances whose
/// reference is 0 are excluded with a warning.
pub fn performance_profile(
    records: &[RunRecord],
    thresholds: &[f64],
    best_known: Option<&HashMap<String, i64>>,
) -> Result<BTreeMap<String, Vec<ProfilePoint>>, ProfileError> {
    let table = best_values(records)?;
    let mut rated: Vec<(&BTreeMap<String, i64>, i64)> = Vec::new();
    for (inst, row) in &table {
        let reference = best_known
            .and_then(|b| b.get(inst).copied())
            .unwrap_or_else(|| row.values().copied().max().unwrap_or(0));
        if reference == 0 {
            log::warn!("instance {inst} has best value 0; excluded from the profile");
            continue;
        }
        rated.push((row, reference));
    }
    let algorithms: BTreeSet<&String> = table.values().flat_map(|r| r.keys()).collect();
    let total = rated.len();
    Ok(algorithms
        .into_iter()
        .map(|a| {
            let points = thresholds
                .iter()
                .map(|&x| {
                    let hits = rated
                        .iter()
                        .filter(|(row, best)| reaches(row[a], *best, x))
                        .count();
                    let y = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
                    ProfilePoint { x, y }
                })
                .collect();
            (a.clone(), points)
        })
        .collect())
}

fn reaches(value: i64, best: i64, x: f64) -> bool {
    value as f64 >= x * best as f64 - 1e-9 * best.unsigned_abs() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    pub t: f64,
    /// Fraction of the algorithm's runs that finished within `t` seconds.
    pub y: f64,
}

/// Cumulative run-time distribution per algorithm, one point per distinct run time.
pub fn time_profile(records: &[RunRecord]) -> Result<BTreeMap<String, Vec<TimePoint>>, ProfileError> {
    if records.is_empty() {
        return Err(ProfileError::Empty);
    }
    let mut times: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        times.entry(r.algorithm.clone()).or_default().push(r.time_s);
    }
    Ok(times
        .into_iter()
        .map(|(a, mut ts)| {
            ts.sort_by(f64::total_cmp);
            let n = ts.len() as f64;
            let mut points: Vec<TimePoint> = Vec::new();
            for (i, &t) in ts.iter().enumerate() {
                let y = (i + 1) as f64 / n;
                match points.last_mut() {
                    Some(p) if p.t == t => p.y = y,
                    _ => points.push(TimePoint { t, y }),
                }
            }
            (a, points)
        })
        .collect())
}

/// `counts[r][c]` is the number of instances where `algorithms[r]` found a strictly better
/// value than `algorithms[c]` (best over seeds). Diagonal cells are 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinTable {
    pub algorithms: Vec<String>,
    pub counts: Vec<Vec<usize>>,
    pub instances: usize,
}

pub fn win_table(records: &[RunRecord], algorithms: &[String]) -> Result<WinTable, ProfileError> {
    let table = best_values(records)?;
    let mut gaps = Vec::new();
    for (inst, row) in &table {
        for a in algorithms {
            if !row.contains_key(a) {
                gaps.push((inst.clone(), a.clone()));
            }
        }
    }
    if !gaps.is_empty() {
        return Err(ProfileError::MissingCells(gaps));
    }
    let m = algorithms.len();
    let mut counts = vec![vec![0; m]; m];
    for row in table.values() {
        for r in 0..m {
            for c in 0..m {
                if r != c && row[&algorithms[r]] > row[&algorithms[c]] {
                    counts[r][c] += 1;
                }
            }
        }
    }
    Ok(WinTable {
        algorithms: algorithms.to_vec(),
        counts,
        instances: table.len(),
    })
}

pub fn write_profile_csv<W: Write>(out: W, profile: &BTreeMap<String, Vec<ProfilePoint>>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "x", "y"])?;
    for (a, points) in profile {
        for p in points {
            w.write_record([a.clone(), p.x.to_string(), p.y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_time_profile_csv<W: Write>(out: W, profile: &BTreeMap<String, Vec<TimePoint>>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "t", "y"])?;
    for (a, points) in profile {
        for p in points {
            w.write_record([a.clone(), p.t.to_string(), p.y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Off-diagonal cells as `row,col,count`.
pub fn write_win_table_csv<W: Write>(out: W, table: &WinTable) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "count"])?;
    for (r, row) in table.algorithms.iter().enumerate() {
        for (c, col) in table.algorithms.iter().enumerate() {
            if r != c {
                w.write_record([row.clone(), col.clone(), table.counts[r][c].to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
