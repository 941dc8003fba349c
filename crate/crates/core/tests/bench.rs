mod common;

use std::collections::HashMap;

use maxspace::bench::{
    performance_profile, read_records, run_grid, time_profile, win_table, AlgorithmSpec,
};
use maxspace::construct::constructive;
use maxspace::metaheuristics::{Algorithm, SolverConfig};
use maxspace::ProblemKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_instance, seven_ads};

fn quick_specs() -> Vec<AlgorithmSpec> {
    Algorithm::ALL
        .iter()
        .map(|&a| {
            AlgorithmSpec::new(
                a,
                SolverConfig { grasp_iterations: 10, tabu_iterations: 50, ..SolverConfig::preset(a, ProblemKind::MaxSpaceRdwv) },
            )
        })
        .collect()
}

fn values(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{},{},{},{},{}", f[0], f[1], f[2], f[3], f[5], f[6])
        })
        .collect()
}

#[test]
fn one_row_per_cell() {
    let insts = vec![("t1".to_string(), seven_ads())];
    let specs = &quick_specs()[..2];
    let recs = run_grid(&insts, specs, &[0], 60.0, None).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.feasible));
}

#[test]
fn zero_limit_gives_constructive_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let insts: Vec<_> = (0..3).map(|i| (format!("i{i}"), random_instance(&mut rng, 10, 5, 12))).collect();
    let specs = quick_specs();
    let recs = run_grid(&insts, &specs, &[0, 1], 0.0, None).unwrap();
    for r in &recs {
        let inst = &insts.iter().find(|(n, _)| *n == r.instance).unwrap().1;
        let spec = specs.iter().find(|s| s.label == r.algorithm).unwrap();
        let mut rng = if spec.algorithm == Algorithm::Vns {
            ChaCha8Rng::seed_from_u64(r.seed)
        } else {
            maxspace::metaheuristics::iteration_rng(r.seed, 0)
        };
        let c = constructive(inst, spec.config.alpha, &mut rng);
        assert_eq!(r.value, c.primary_value(), "{r:?}");
    }
}

#[test]
fn rerun_is_identical_apart_from_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let insts: Vec<_> = (0..4).map(|i| (format!("i{i}"), random_instance(&mut rng, 10, 5, 12))).collect();
    let specs = quick_specs();
    let mut texts = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("run{run}.csv"));
        let recs = run_grid(&insts, &specs, &[0], 60.0, Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(read_records(text.as_bytes()).unwrap(), recs);
        texts.push(text);
    }
    assert_eq!(values(&texts[0]), values(&texts[1]));
}

#[test]
fn invalid_config_aborts_before_running() {
    let insts = vec![("t1".to_string(), seven_ads())];
    let mut specs = quick_specs();
    specs[0].config.shake_strength = 0;
    assert!(run_grid(&insts, &specs, &[0], 1.0, None).is_err());
}

#[test]
fn profiles_and_tables_from_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let insts: Vec<_> = (0..5).map(|i| (format!("i{i}"), random_instance(&mut rng, 10, 5, 12))).collect();
    let recs = run_grid(&insts, &quick_specs(), &[0, 1], 60.0, None).unwrap();
    let thresholds = maxspace::bench::default_thresholds();
    let prof = performance_profile(&recs, &thresholds, None).unwrap();
    for points in prof.values() {
        assert!(points.windows(2).all(|w| w[0].y <= w[1].y));
    }
    assert!(prof.values().any(|p| p[0].y == 1.0) || insts.is_empty());
    let times = time_profile(&recs).unwrap();
    for pts in times.values() {
        assert_eq!(pts.last().unwrap().y, 1.0);
    }
    let algs: Vec<String> = prof.keys().cloned().collect();
    let w = win_table(&recs, &algs).unwrap();
    for a in 0..algs.len() {
        for b in 0..algs.len() {
            if a != b {
                assert!(w.counts[a][b] + w.counts[b][a] <= w.instances);
            }
        }
    }
    // An oracle-style override can only lower the fractions.
    let best: HashMap<String, i64> = insts.iter().map(|(n, _)| (n.clone(), i64::MAX / 4)).collect();
    let low = performance_profile(&recs, &[1.0], Some(&best)).unwrap();
    assert!(low.values().all(|p| p[0].y == 0.0));
}
