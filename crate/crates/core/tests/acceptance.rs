//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use maxspace::bench::{
    default_thresholds, performance_profile, read_records, run_grid, win_table, write_records,
    AlgorithmSpec, RunRecord,
};
use maxspace::construct::constructive;
use maxspace::exact::{brute_force, DEFAULT_SEARCH_LIMIT};
use maxspace::fenwick::SlackTree;
use maxspace::instances::{
    batch_specs, generate, sample_ad, Dims, FreqClass, GeneratorSpec, InstanceClass, ProfitClass,
    SizeClass, WindowClass, STANDARD_DIMS,
};
use maxspace::metaheuristics::{solve, vnd_two_phase, Algorithm, Deadline, SolverConfig};
use maxspace::neighborhoods::{enumerate, score, EnumOptions, NeighborhoodKind, Phase};
use maxspace::{Instance, ProblemKind, Schedule};
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{oracle_sized_instance, random_instance, random_schedule, seven_ads, seven_ads_optimum};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Preset with GRASP iterations capped, for suites that run hundreds of solves.
fn capped_preset(alg: Algorithm, kind: ProblemKind, grasp_iterations: u32) -> SolverConfig {
    let p = SolverConfig::preset(alg, kind);
    SolverConfig {
        grasp_iterations: p.grasp_iterations.min(grasp_iterations),
        time_limit: f64::INFINITY,
        ..p
    }
}

fn oracle_dominance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A1);
    let mut violations = Vec::new();
    let mut runs = 0;
    let mut kinds = [0usize; 2];
    for idx in 0..200 {
        let inst = oracle_sized_instance(&mut rng, 8, 4, 10, DEFAULT_SEARCH_LIMIT);
        kinds[usize::from(inst.kind() == ProblemKind::MaxSpaceRdwv)] += 1;
        let (opt, _) = brute_force(&inst).expect("bound checked");
        let mut results: Vec<(String, Schedule<'_>)> = Vec::new();
        let c = constructive(&inst, 0.3, &mut ChaCha8Rng::seed_from_u64(idx));
        let mut v = c.clone();
        vnd_two_phase(&mut v, &SolverConfig::default(), &Deadline::none());
        results.push(("constructive".into(), c));
        results.push(("vnd".into(), v));
        for alg in Algorithm::ALL {
            let cfg = capped_preset(alg, inst.kind(), 100);
            results.push((alg.name().into(), solve(&inst, alg, &cfg).unwrap().schedule));
        }
        for (name, s) in &results {
            runs += 1;
            if let Err(e) = s.check_feasible() {
                violations.push(format!("instance {idx} {name}: {e}"));
            }
            if s.primary_value() != s.recompute_primary_value() || s.primary_value() > opt {
                violations.push(format!("instance {idx} {name}: value {} vs optimum {opt}", s.primary_value()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "200 instances ({} maxspace, {} rdwv), {runs} heuristic runs, {} violations, {secs:.1}s",
        kinds[0],
        kinds[1],
        violations.len()
    );
    for v in violations.iter().take(5) {
        eprintln!("  {v}");
    }
    outcome(violations.is_empty() && secs < 300.0, detail)
}

fn oracle_attainment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA77A);
    let mut hits = 0;
    for _ in 0..50 {
        let inst = oracle_sized_instance(&mut rng, 8, 4, 10, DEFAULT_SEARCH_LIMIT);
        let (opt, _) = brute_force(&inst).unwrap();
        let cfg = SolverConfig {
            time_limit: 10.0,
            ..SolverConfig::preset(Algorithm::GraspVns, inst.kind())
        };
        if solve(&inst, Algorithm::GraspVns, &cfg).unwrap().value() == opt {
            hits += 1;
        }
    }
    let rate = hits as f64 / 50.0;
    outcome(rate >= 0.9, format!("GRASP+VNS reached the optimum on {hits}/50 ({:.0}%)", rate * 100.0))
}

fn figure_reproduction() -> Outcome {
    let inst = seven_ads();
    let golden = seven_ads_optimum();
    let (opt, _) = brute_force(&inst).unwrap();
    let cfg = SolverConfig {
        time_limit: 5.0,
        ..SolverConfig::preset(Algorithm::GraspVns, inst.kind())
    };
    let out = solve(&inst, Algorithm::GraspVns, &cfg).unwrap();
    let secs = out.elapsed.as_secs_f64();
    outcome(
        opt == golden && out.value() == golden && secs <= 5.0,
        format!("oracle {opt}, golden {golden}, GRASP+VNS {} in {secs:.2}s", out.value()),
    )
}

fn reduction_identity() -> Outcome {
    let classes: Vec<InstanceClass> = InstanceClass::all()
        .into_iter()
        .filter(|c| c.is_maxspace_compatible())
        .collect();
    let dims = Dims { n: 20, k: 30, l: 30 };
    let mut mismatches = 0;
    let mut solves = 0;
    for i in 0..100u64 {
        let class = classes[i as usize % classes.len()];
        let inst = generate(&GeneratorSpec { kind: ProblemKind::MaxSpace, class, dims, seed: i }).unwrap();
        let rdwv = inst.to_rdwv();
        for alg in Algorithm::ALL {
            let cfg = SolverConfig {
                seed: i,
                tabu_iterations: 50,
                ..capped_preset(alg, ProblemKind::MaxSpace, 3)
            };
            let a = solve(&inst, alg, &cfg).unwrap().value();
            let b = solve(&rdwv, alg, &cfg).unwrap().value();
            solves += 1;
            if a != b {
                mismatches += 1;
                eprintln!("  instance {i} {alg}: direct {a}, embedded {b}");
            }
        }
    }
    outcome(mismatches == 0, format!("100 instances x 4 algorithms, {mismatches}/{solves} value mismatches"))
}

fn fenwick_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF3);
    let mut mismatches = 0;
    let mut over_budget = 0;
    let mut worst = (0u64, 0u64);
    let mut queries = 0;
    let mut k = 1;
    let mut cap = 1;
    let mut loads: Vec<i64> = Vec::new();
    let mut tree = SlackTree::new(1, 1);
    for op in 0..10_000 {
        if op % 500 == 0 {
            k = rng.gen_range(1..=700);
            cap = rng.gen_range(1..=300);
            loads = (0..k).map(|_| rng.gen_range(0..=cap)).collect();
            tree = SlackTree::from_loads(cap, &loads);
        }
        if rng.gen_bool(0.5) {
            let j = rng.gen_range(0..k);
            loads[j] = rng.gen_range(0..=cap);
            tree.point_update(j, loads[j]);
            continue;
        }
        let (x, y) = (rng.gen_range(0..k), rng.gen_range(0..k));
        let (a, b) = (x.min(y), x.max(y));
        let budget = 4 * (k as f64).log2().ceil() as u64 + 8;
        let free: i64 = loads[a..=b].iter().map(|l| cap - l).sum();
        let min = (a..=b).min_by_key(|&j| (loads[j], j)).unwrap();
        let max = (a..=b).min_by_key(|&j| (Reverse(loads[j]), j)).unwrap();
        let copies = rng.gen_range(1..=(b - a + 1) as u32);
        let size = rng.gen_range(1..=cap as u32);
        let placeable = free >= i64::from(copies) * i64::from(size);
        let checks: [&dyn Fn(&SlackTree) -> bool; 4] = [
            &|t| t.range_free(a, b) == free,
            &|t| t.min_load_slot(a, b) == (min, loads[min]),
            &|t| t.max_load_slot(a, b) == (max, loads[max]),
            &|t| t.can_place(copies, size, a, b) == placeable,
        ];
        for check in checks {
            tree.reset_touches();
            queries += 1;
            if !check(&tree) {
                mismatches += 1;
            }
            let touches = tree.touches();
            if touches > budget {
                over_budget += 1;
            }
            // Track the query closest to its budget.
            if worst.1 == 0 || touches * worst.1 > worst.0 * budget {
                worst = (touches, budget);
            }
        }
    }
    outcome(
        mismatches == 0 && over_budget == 0,
        format!(
            "{queries} queries, {mismatches} mismatches, {over_budget} over the 4*ceil(log2 K)+8 budget, worst {}/{} touches, no rebuilds",
            worst.0, worst.1
        ),
    )
}

fn delta_exactness_and_neutrality() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE17A);
    let mut per_kind: BTreeMap<String, usize> = BTreeMap::new();
    let mut pairs = 0;
    let mut mismatches = 0;
    let mut repack_moves = 0;
    let mut repack_changes = 0;
    while pairs < 100_000 {
        let inst = random_instance(&mut rng, 14, 8, 20);
        let mut s = random_schedule(&inst, &mut rng, 4);
        for _ in 0..40 {
            let kind = NeighborhoodKind::ALL[rng.gen_range(0..5)];
            let Some(mv) = enumerate(&s, kind, EnumOptions::default()).choose(&mut rng) else {
                continue;
            };
            let mut after = s.clone();
            after.apply(&mv).unwrap();
            let dp = after.recompute_primary_value() - s.recompute_primary_value();
            let dq = after.recompute_squared_slack() - s.recompute_squared_slack();
            let expected = |phase| match (kind.is_repack(), phase) {
                (false, _) => dp,
                (true, Phase::Minimize) => -dq,
                (true, Phase::Maximize) => dq,
            };
            for phase in [Phase::Minimize, Phase::Maximize] {
                if score(&s, &mv, phase) != expected(phase) {
                    mismatches += 1;
                }
            }
            if kind.is_repack() {
                repack_moves += 1;
                if dp != 0 || after.primary_value() != s.primary_value() {
                    repack_changes += 1;
                }
            }
            *per_kind.entry(kind.to_string()).or_default() += 1;
            pairs += 1;
            // Walk on so later pairs see varied schedules.
            if rng.gen_bool(0.5) {
                s = after;
            }
        }
    }
    let counts: Vec<String> = per_kind.iter().map(|(k, n)| format!("{k} {n}")).collect();
    let all_kinds = per_kind.len() == 5;
    (
        outcome(
            mismatches == 0 && all_kinds,
            format!("{pairs} pairs ({}), {mismatches} score mismatches", counts.join(", ")),
        ),
        outcome(
            repack_changes == 0 && repack_moves > 0,
            format!("{repack_moves} RPCK/MV applications, {repack_changes} changed the primary value"),
        ),
    )
}

fn grid_instances() -> Vec<(String, Instance)> {
    let classes: Vec<InstanceClass> = InstanceClass::all()
        .into_iter()
        .filter(|c| c.freq == FreqClass::Infrequent)
        .collect();
    let dims = Dims { n: 10, k: 6, l: 12 };
    batch_specs(ProblemKind::MaxSpaceRdwv, &classes, dims, 2, 0)
        .into_iter()
        .take(20)
        .map(|spec| {
            let name = maxspace::instances::spec_file_name(&spec);
            (name, generate(&spec).unwrap())
        })
        .collect()
}

fn determinism(instances: &[(String, Instance)]) -> (Outcome, Vec<RunRecord>) {
    let limit = 10.0;
    let specs: Vec<AlgorithmSpec> = Algorithm::ALL
        .iter()
        .map(|&a| AlgorithmSpec::new(a, SolverConfig::preset(a, ProblemKind::MaxSpaceRdwv)))
        .collect();
    let start = Instant::now();
    let first = run_grid(instances, &specs, &[0], limit, None).unwrap();
    let second = run_grid(instances, &specs, &[0], limit, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let key = |r: &[RunRecord]| -> Vec<(String, String, i64, u64, bool)> {
        r.iter()
            .map(|x| (x.instance.clone(), x.algorithm.clone(), x.value, x.iter_best, x.feasible))
            .collect()
    };
    let same = key(&first) == key(&second);
    let capped = first.iter().chain(&second).filter(|r| r.time_s >= limit).count();
    let slowest = first.iter().chain(&second).map(|r| r.time_s).fold(0.0, f64::max);
    let feasible = first.iter().chain(&second).all(|r| r.feasible);
    (
        outcome(
            same && feasible && secs <= 900.0,
            format!(
                "2 x {} runs, value columns {}, {capped} runs hit the {limit}s limit, slowest {slowest:.2}s, {secs:.0}s total",
                first.len(),
                if same { "identical" } else { "DIFFER" }
            ),
        ),
        first,
    )
}

fn profile_algebra(records: &[RunRecord]) -> Outcome {
    let thresholds = default_thresholds();
    let prof = performance_profile(records, &thresholds, None).unwrap();
    let monotone = prof.values().all(|p| p.windows(2).all(|w| w[0].x > w[1].x && w[0].y <= w[1].y));

    let algs: Vec<String> = prof.keys().cloned().collect();
    let table = win_table(records, &algs).unwrap();
    let mut best: BTreeMap<(&str, &str), i64> = BTreeMap::new();
    for r in records {
        let e = best.entry((r.instance.as_str(), r.algorithm.as_str())).or_insert(r.value);
        *e = (*e).max(r.value);
    }
    let instances: Vec<&str> = records.iter().map(|r| r.instance.as_str()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut trichotomy = true;
    for a in 0..algs.len() {
        for b in 0..algs.len() {
            if a == b {
                trichotomy &= table.counts[a][b] == 0;
                continue;
            }
            let ties = instances
                .iter()
                .filter(|i| best[&(**i, algs[a].as_str())] == best[&(**i, algs[b].as_str())])
                .count();
            trichotomy &= table.counts[a][b] + table.counts[b][a] + ties == instances.len();
        }
    }

    let mut buf = Vec::new();
    write_records(&mut buf, records).unwrap();
    let reread = read_records(&buf[..]).unwrap();
    let round_trip = reread == records
        && performance_profile(&reread, &thresholds, None).unwrap() == prof
        && win_table(&reread, &algs).unwrap() == table;

    outcome(
        monotone && trichotomy && round_trip,
        format!(
            "monotone profiles {monotone}, trichotomy {trichotomy}, CSV round trip {round_trip} ({} records, {} instances)",
            records.len(),
            instances.len()
        ),
    )
}

fn generator_bounds() -> Outcome {
    let dims = STANDARD_DIMS[0];
    let k = dims.k as u32;
    let mut violations = 0;
    let mut draws = 0;
    for class in InstanceClass::all() {
        let mut rng = ChaCha8Rng::seed_from_u64(draws);
        let (slo, shi) = class.size.range(dims.l);
        let (min_lo, min_hi) = class.freq.min_range();
        let (max_lo, max_hi) = class.freq.max_range();
        let mut kinds = vec![ProblemKind::MaxSpaceRdwv];
        if class.is_maxspace_compatible() {
            kinds.push(ProblemKind::MaxSpace);
        }
        for kind in kinds {
            for _ in 0..100_000 {
                let ad = sample_ad(kind, class, dims, &mut rng);
                draws += 1;
                let mut ok = (slo..=shi).contains(&ad.size)
                    && ad.deadline >= ad.release
                    && ad.deadline - ad.release + 1 >= ad.freq_min;
                ok &= match class.profit {
                    ProfitClass::SizeLinked => ad.value == ad.size,
                    ProfitClass::Random => (1..=100).contains(&ad.value),
                };
                ok &= match kind {
                    ProblemKind::MaxSpace => ad.freq_min == ad.freq_max && (min_lo..=max_hi).contains(&ad.freq_min),
                    ProblemKind::MaxSpaceRdwv => {
                        (min_lo..=min_hi).contains(&ad.freq_min) && (max_lo..=max_hi).contains(&ad.freq_max)
                    }
                };
                ok &= match class.window {
                    WindowClass::None => ad.release == 1 && ad.deadline == k,
                    WindowClass::Random => {
                        (1..=k - ad.freq_min).contains(&ad.release)
                            && (ad.release + ad.freq_min..=k).contains(&ad.deadline)
                    }
                };
                if !ok {
                    violations += 1;
                }
            }
        }
    }
    let small = SizeClass::Small.range(50);
    outcome(
        violations == 0 && small == (1, 12),
        format!("{draws} draws over 36 classes, {violations} out of bounds; small sizes for L=50 are [{}, {}]", small.0, small.1),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "{} {n:>2} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        results.push((n, name, o));
    };
    run(1, "oracle dominance", &mut oracle_dominance);
    run(2, "oracle attainment", &mut oracle_attainment);
    run(3, "seven-ad example optimum", &mut figure_reproduction);
    run(4, "reduction identity", &mut reduction_identity);
    run(5, "Fenwick equivalence", &mut fenwick_equivalence);
    let mut neutral = None;
    run(6, "delta-evaluation exactness", &mut || {
        let (delta, n) = delta_exactness_and_neutrality();
        neutral = Some(n);
        delta
    });
    run(7, "two-phase neutrality", &mut || neutral.take().unwrap());
    let instances = grid_instances();
    let mut records = Vec::new();
    run(8, "bench determinism", &mut || {
        let (det, r) = determinism(&instances);
        records = r;
        det
    });
    run(9, "profile and table algebra", &mut || profile_algebra(&records));
    run(10, "generator class bounds", &mut generator_bounds);

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
