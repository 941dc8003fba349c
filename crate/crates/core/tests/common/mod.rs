#![allow(dead_code)]

use std::path::PathBuf;

use maxspace::construct::constructive;
use maxspace::exact::search_space_bound;
use maxspace::neighborhoods::{enumerate, EnumOptions, NeighborhoodKind};
use maxspace::{Ad, Instance, ProblemKind, Schedule};
use rand::seq::IteratorRandom;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn seven_ads() -> Instance {
    let text = std::fs::read_to_string(data_path("seven_ads.inst")).unwrap();
    maxspace::instances::read_instance(&text).unwrap()
}

pub fn seven_ads_optimum() -> i64 {
    std::fs::read_to_string(data_path("seven_ads.optimum"))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

/// Random instance with at most `max_n` ads, `max_k` slots and capacity `max_l`. Half are
/// MAXSPACE, half RDWV. Some ads are larger than the capacity.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize, max_k: usize, max_l: u32) -> Instance {
    let k = rng.gen_range(1..=max_k);
    let l = rng.gen_range(1..=max_l);
    let n = rng.gen_range(1..=max_n);
    if rng.gen_bool(0.5) {
        let ads: Vec<(u32, u32)> = (0..n)
            .map(|_| (rng.gen_range(1..=l + 1), rng.gen_range(1..=k as u32)))
            .collect();
        Instance::maxspace(k, l, &ads).unwrap()
    } else {
        let ads = (0..n)
            .map(|_| {
                let release = rng.gen_range(1..=k as u32);
                let deadline = rng.gen_range(release..=k as u32);
                let len = deadline - release + 1;
                let freq_min = rng.gen_range(1..=len);
                Ad {
                    size: rng.gen_range(1..=l + 1),
                    value: rng.gen_range(1..=20),
                    freq_min,
                    freq_max: rng.gen_range(freq_min..=len + 1),
                    release,
                    deadline,
                }
            })
            .collect();
        Instance::new(ProblemKind::MaxSpaceRdwv, k, l, ads).unwrap()
    }
}

/// Like [`random_instance`] but resampled until the oracle's search space is at most `bound`.
pub fn oracle_sized_instance<R: Rng>(rng: &mut R, max_n: usize, max_k: usize, max_l: u32, bound: u128) -> Instance {
    loop {
        let inst = random_instance(rng, max_n, max_k, max_l);
        if search_space_bound(&inst) <= bound {
            return inst;
        }
    }
}

/// Constructive start followed by up to `steps` random moves.
pub fn random_schedule<'a, R: Rng>(inst: &'a Instance, rng: &mut R, steps: usize) -> Schedule<'a> {
    let alpha = rng.gen_range(0.0..=1.0);
    let mut s = constructive(inst, alpha, rng);
    for _ in 0..steps {
        let kind = NeighborhoodKind::ALL[rng.gen_range(0..5)];
        if let Some(mv) = enumerate(&s, kind, EnumOptions::default()).choose(rng) {
            s.apply(&mv).unwrap();
        }
    }
    s
}
