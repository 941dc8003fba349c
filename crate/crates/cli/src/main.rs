use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use maxspace::bench::{self, AlgorithmSpec, GridManifest};
use maxspace::exact::{self, Formulation};
use maxspace::instances::{self, BppClass, Dims, GeneratorSpec, InstanceClass, ManifestEntry};
use maxspace::metaheuristics::{solve, Algorithm, SolverConfig, TabuStop, TabuVersion};
use maxspace::solution::write_solution;
use maxspace::{Instance, ProblemKind};

#[derive(Parser)]
#[command(name = "maxspace", version, about = "Advertisement scheduling heuristics and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances and a manifest.
    Generate(GenerateArgs),
    /// Convert a BPPLIB cutting-stock or bin-packing file to an instance.
    Convert(ConvertArgs),
    /// Solve an instance with a heuristic.
    Solve(SolveArgs),
    /// Solve a tiny instance exactly by exhaustive search.
    Oracle(OracleArgs),
    /// Write an integer programming model in LP format.
    ExportIlp(ExportArgs),
    /// Run algorithms over a set of instances and seeds.
    Bench(BenchArgs),
    /// Compute performance profiles, time profiles and win tables from bench records.
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Maxspace,
    Rdwv,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Maxspace => ProblemKind::MaxSpace,
            KindArg::Rdwv => ProblemKind::MaxSpaceRdwv,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Problem kind of the generated instances.
    #[arg(long, value_enum, default_value = "rdwv")]
    kind: KindArg,
    /// Class as `size,freq,profit,window`, e.g. `small,infrequent,size-linked,no-window`.
    /// Repeatable; `all` selects every class valid for the kind.
    #[arg(long = "class", required = true)]
    classes: Vec<String>,
    /// Dimensions as `n,K,L`.
    #[arg(long)]
    dims: Dims,
    /// Instances per class.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Seed of the first instance; later instances use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    /// Derive K from the Falkenauer triples rule.
    #[arg(long)]
    triples: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TabuVersionArg {
    Random,
    Stay,
    Cyclic,
}

#[derive(Args)]
struct SolverFlags {
    /// Start from the tuned parameters for this problem kind.
    #[arg(long, value_enum)]
    preset: Option<KindArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    grasp_iterations: Option<u32>,
    /// Moves per VNS shake.
    #[arg(long)]
    shake_strength: Option<u32>,
    #[arg(long)]
    tabu_capacity: Option<usize>,
    #[arg(long)]
    tabu_iterations: Option<u32>,
    #[arg(long, value_enum)]
    tabu_version: Option<TabuVersionArg>,
    /// Count every tabu iteration toward the budget, not only non-improving ones.
    #[arg(long)]
    tabu_total_iterations: bool,
    /// Never allow tabu moves, even when they give a new best.
    #[arg(long)]
    no_aspiration: bool,
    /// Idle two-phase cycles before standalone VNS stops (0: run until the time limit).
    #[arg(long)]
    vns_idle_cycles: Option<u32>,
    /// Cap on (out, in) pairs scanned per CHG neighborhood.
    #[arg(long)]
    chg_budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
}

impl SolverFlags {
    fn config(&self, algorithm: Algorithm) -> SolverConfig {
        let mut cfg = match self.preset {
            Some(k) => SolverConfig::preset(algorithm, k.into()),
            None => SolverConfig::default(),
        };
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.grasp_iterations {
            cfg.grasp_iterations = v;
        }
        if let Some(v) = self.shake_strength {
            cfg.shake_strength = v;
        }
        if let Some(v) = self.tabu_capacity {
            cfg.tabu_capacity = v;
        }
        if let Some(v) = self.tabu_iterations {
            cfg.tabu_iterations = v;
        }
        if let Some(v) = self.tabu_version {
            cfg.tabu_version = match v {
                TabuVersionArg::Random => TabuVersion::Random,
                TabuVersionArg::Stay => TabuVersion::StayUntilNoImprove,
                TabuVersionArg::Cyclic => TabuVersion::Cyclic,
            };
        }
        if self.tabu_total_iterations {
            cfg.tabu_stop = TabuStop::Total;
        }
        if self.no_aspiration {
            cfg.aspiration = false;
        }
        if let Some(v) = self.vns_idle_cycles {
            cfg.vns_idle_cycles = v;
        }
        if self.chg_budget.is_some() {
            cfg.chg_budget = self.chg_budget;
        }
        cfg.seed = self.seed;
        cfg.time_limit = self.time_limit;
        cfg
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    algo: Algorithm,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the schedule found to this file.
    #[arg(long)]
    emit_solution: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Largest search-space bound to attempt.
    #[arg(long, default_value_t = exact::DEFAULT_SEARCH_LIMIT)]
    limit: u128,
    #[arg(long)]
    emit_solution: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Maxspace,
    Minspace,
    Rdwv,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    formulation: FormulationArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files or directories of `.inst` files.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', default_value = "vns,grasp,grasp-vns,grasp-tabu")]
    algos: Vec<Algorithm>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Tuned parameters to use; defaults to each instance set's declared kind.
    #[arg(long, value_enum)]
    preset: Option<KindArg>,
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Directory for records.csv and manifest.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    records: PathBuf,
    /// CSV of `instance,value` reference values overriding the best found.
    #[arg(long)]
    best_known: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// An error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const BAD_INSTANCE: u8 = 2;
const SOLVER: u8 = 3;

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Convert(a) => convert(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::ExportIlp(a) => export(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Profile(a) => profile(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .exit_with(BAD_INSTANCE)?;
    instances::read_instance(&text)
        .with_context(|| format!("invalid instance {}", path.display()))
        .exit_with(BAD_INSTANCE)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p)
                .with_context(|| format!("cannot create {}", p.display()))
                .exit_with(USAGE)?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_solution(path: &Path, schedule: &maxspace::Schedule<'_>) -> Result<(), Failure> {
    let mut out = output(Some(path))?;
    write_solution(schedule, &mut out)
        .and_then(|_| out.flush())
        .with_context(|| format!("cannot write {}", path.display()))
        .exit_with(USAGE)
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let kind: ProblemKind = a.kind.into();
    let mut classes = Vec::new();
    for c in &a.classes {
        if c == "all" {
            classes.extend(
                InstanceClass::all()
                    .into_iter()
                    .filter(|c| kind == ProblemKind::MaxSpaceRdwv || c.is_maxspace_compatible()),
            );
        } else {
            classes.push(c.parse::<InstanceClass>().map_err(|e| anyhow!("--class: {e}")).exit_with(USAGE)?);
        }
    }
    fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))
        .exit_with(USAGE)?;
    let specs: Vec<GeneratorSpec> = instances::batch_specs(kind, &classes, a.dims, a.count, a.seed);
    let mut manifest = Vec::with_capacity(specs.len());
    for spec in &specs {
        let inst = instances::generate(spec)
            .with_context(|| format!("class {}", spec.class))
            .exit_with(USAGE)?;
        let file = instances::spec_file_name(spec);
        fs::write(a.out.join(&file), instances::instance_to_string(&inst))
            .with_context(|| format!("cannot write {file}"))
            .exit_with(USAGE)?;
        manifest.push(ManifestEntry {
            file,
            kind,
            class: spec.class.to_string(),
            dims: spec.dims,
            seed: spec.seed,
        });
    }
    let path = a.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).exit_with(USAGE)?;
    fs::write(&path, text + "\n")
        .with_context(|| format!("cannot write {}", path.display()))
        .exit_with(USAGE)?;
    eprintln!("wrote {} instances to {}", specs.len(), a.out.display());
    Ok(())
}

fn convert(a: ConvertArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.input)
        .with_context(|| format!("cannot read {}", a.input.display()))
        .exit_with(BAD_INSTANCE)?;
    let class = if a.triples { BppClass::FalkenauerTriples } else { BppClass::Other };
    let conv = instances::from_bpplib(&text, class)
        .with_context(|| format!("invalid BPPLIB file {}", a.input.display()))
        .exit_with(BAD_INSTANCE)?;
    for &i in &conv.clamped {
        eprintln!(
            "warning: item {} demand exceeds K = {}; frequency clamped to K",
            i + 1,
            conv.instance.slot_count()
        );
    }
    let mut out = output(a.out.as_deref())?;
    instances::write_instance(&conv.instance, &mut out)
        .and_then(|_| out.flush())
        .exit_with(USAGE)
}

fn solve_cmd(a: SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance)?;
    let cfg = a.solver.config(a.algo);
    let outcome = solve(&inst, a.algo, &cfg).exit_with(USAGE)?;
    if let Err(v) = outcome.schedule.check_feasible() {
        return Err(anyhow!("solver returned an infeasible schedule: {v}")).exit_with(SOLVER);
    }
    println!(
        "value={} time_s={:.3} iter_best={}",
        outcome.value(),
        outcome.elapsed.as_secs_f64(),
        outcome.iter_best
    );
    eprintln!(
        "{} on {}: {} of {} ads scheduled",
        a.algo,
        a.instance.display(),
        (0..inst.ad_count()).filter(|&i| outcome.schedule.is_scheduled(i)).count(),
        inst.ad_count()
    );
    if let Some(p) = &a.emit_solution {
        emit_solution(p, &outcome.schedule)?;
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance)?;
    let (value, schedule) = exact::brute_force_with_limit(&inst, a.limit).exit_with(SOLVER)?;
    println!("value={value}");
    if let Some(p) = &a.emit_solution {
        emit_solution(p, &schedule)?;
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance)?;
    let which = match a.formulation {
        FormulationArg::Maxspace => Formulation::MaxSpace,
        FormulationArg::Minspace => Formulation::MinSpace,
        FormulationArg::Rdwv => Formulation::MaxSpaceRdwv,
    };
    let mut out = output(a.out.as_deref())?;
    match exact::export_ilp(&inst, which, &mut out) {
        Ok(()) => out.flush().exit_with(USAGE),
        Err(e @ exact::ExportError::NotMaxSpace(_)) => Err(e).exit_with(BAD_INSTANCE),
        Err(e) => Err(e).exit_with(USAGE),
    }
}

fn instance_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))
                .exit_with(USAGE)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "inst"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(anyhow!("no instance files found")).exit_with(USAGE);
    }
    Ok(files)
}

fn bench_cmd(a: BenchArgs) -> Result<(), Failure> {
    let files = instance_files(&a.instances)?;
    let mut loaded = Vec::with_capacity(files.len());
    for f in &files {
        let name = f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
        loaded.push((name, load_instance(f)?));
    }
    let kind = match a.preset {
        Some(k) => k.into(),
        None if loaded.iter().all(|(_, i)| i.kind() == ProblemKind::MaxSpace) => ProblemKind::MaxSpace,
        None => ProblemKind::MaxSpaceRdwv,
    };
    let specs: Vec<AlgorithmSpec> = a
        .algos
        .iter()
        .map(|&alg| AlgorithmSpec::new(alg, SolverConfig::preset(alg, kind)))
        .collect();
    fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))
        .exit_with(USAGE)?;
    let manifest = GridManifest {
        instances: loaded.iter().map(|(n, _)| n.clone()).collect(),
        algorithms: specs.clone(),
        seeds: a.seeds.clone(),
        time_limit: a.time_limit,
        workers: std::env::var(bench::WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    let manifest_file = File::create(a.out.join("manifest.json")).exit_with(USAGE)?;
    bench::write_manifest(manifest_file, &manifest).exit_with(USAGE)?;
    let csv = a.out.join("records.csv");
    let records = bench::run_grid(&loaded, &specs, &a.seeds, a.time_limit, Some(&csv)).exit_with(SOLVER)?;
    let failed = records.iter().filter(|r| !r.feasible).count();
    eprintln!("{} runs written to {} ({failed} failed)", records.len(), csv.display());
    if failed > 0 {
        return Err(anyhow!("{failed} runs failed")).exit_with(SOLVER);
    }
    Ok(())
}

fn read_best_known(path: &Path) -> Result<HashMap<String, i64>, Failure> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .exit_with(USAGE)?;
    let mut map = HashMap::new();
    for row in reader.deserialize::<(String, i64)>() {
        let (inst, value) = row.with_context(|| format!("in {}", path.display())).exit_with(USAGE)?;
        map.insert(inst, value);
    }
    Ok(map)
}

fn profile(a: ProfileArgs) -> Result<(), Failure> {
    let file = File::open(&a.records)
        .with_context(|| format!("cannot read {}", a.records.display()))
        .exit_with(USAGE)?;
    let records = bench::read_records(file).exit_with(USAGE)?;
    let best_known = a.best_known.as_deref().map(read_best_known).transpose()?;
    let perf = bench::performance_profile(&records, &bench::default_thresholds(), best_known.as_ref())
        .exit_with(USAGE)?;
    let times = bench::time_profile(&records).exit_with(USAGE)?;
    let algorithms: Vec<String> = perf.keys().cloned().collect();
    let wins = bench::win_table(&records, &algorithms).exit_with(USAGE)?;
    fs::create_dir_all(&a.out).exit_with(USAGE)?;
    let create = |name: &str| {
        File::create(a.out.join(name))
            .with_context(|| format!("cannot create {name}"))
            .exit_with(USAGE)
    };
    bench::write_profile_csv(create("profile.csv")?, &perf).exit_with(USAGE)?;
    bench::write_time_profile_csv(create("time_profile.csv")?, &times).exit_with(USAGE)?;
    bench::write_win_table_csv(create("win_table.csv")?, &wins).exit_with(USAGE)?;
    for (r, row) in wins.algorithms.iter().enumerate() {
        let cells: Vec<String> = wins.counts[r]
            .iter()
            .enumerate()
            .map(|(c, n)| if r == c { "-".into() } else { n.to_string() })
            .collect();
        eprintln!("{row:>12} {}", cells.join(" "));
    }
    Ok(())
}
