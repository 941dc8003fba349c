mod common;

use maxspace::instances::{
    from_bpplib, generate, instance_to_string, read_instance, sample_ad, BppClass, Dims,
    GeneratorSpec, InstanceClass, STANDARD_DIMS,
};
use maxspace::ProblemKind;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{data_path, random_instance, seven_ads};

proptest! {
    #[test]
    fn canonical_text_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 10, 8, 30);
        let text = instance_to_string(&inst);
        let back = read_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(instance_to_string(&back), text);
    }
}

#[test]
fn seven_ads_round_trips() {
    let inst = seven_ads();
    assert_eq!(read_instance(&instance_to_string(&inst)).unwrap(), inst);
    assert_eq!(inst.ad(0).size, 6);
    assert_eq!((inst.ad(0).freq_min, inst.ad(0).deadline), (3, 4));
}

#[test]
fn maxspace_kind_rejects_rdwv_ads() {
    let err = read_instance("maxspace 1 4 6\n6 5 3 3 1 4\n").unwrap_err();
    assert!(err.to_string().starts_with("line 2:"), "{err}");
}

#[test]
fn truncated_and_overlong_files_fail() {
    assert!(read_instance("rdwv 2 3 5\n1 1 1 1 1 3\n").is_err());
    assert!(read_instance("rdwv 1 3 5\n1 1 1 1 1 3\n1 1 1 1 1 3\n").is_err());
    assert!(read_instance("").is_err());
}

#[test]
fn every_class_generates_within_bounds_at_paper_sizes() {
    for class in InstanceClass::all() {
        let dims = STANDARD_DIMS[0];
        let spec = GeneratorSpec { kind: ProblemKind::MaxSpaceRdwv, class, dims, seed: 7 };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.ad_count(), dims.n);
        let (lo, hi) = class.size.range(dims.l);
        assert!(inst.ads().iter().all(|a| (lo..=hi).contains(&a.size)));
    }
}

#[test]
fn maxspace_generation_requires_compatible_class() {
    let dims = Dims { n: 20, k: 30, l: 40 };
    for class in InstanceClass::all() {
        let spec = GeneratorSpec { kind: ProblemKind::MaxSpace, class, dims, seed: 1 };
        match generate(&spec) {
            Ok(inst) => {
                assert!(class.is_maxspace_compatible());
                assert_eq!(inst.effective_kind(), ProblemKind::MaxSpace);
                let (lo, _) = class.freq.min_range();
                let (_, hi) = class.freq.max_range();
                assert!(inst.ads().iter().all(|a| (lo..=hi).contains(&a.freq_min)));
            }
            Err(_) => assert!(!class.is_maxspace_compatible() || class.freq.min_range().1 > 30),
        }
    }
}

#[test]
fn sample_ad_is_deterministic() {
    let class: InstanceClass = "medium,medium-freq,random-profit,window".parse().unwrap();
    let dims = STANDARD_DIMS[1];
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50).map(|_| sample_ad(ProblemKind::MaxSpaceRdwv, class, dims, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

#[test]
fn vendored_csp_sample_converts() {
    let text = std::fs::read_to_string(data_path("sample_csp.txt")).unwrap();
    let conv = from_bpplib(&text, BppClass::Other).unwrap();
    // 45*3 + 30*5 + 25*2 + 60 = 395, so K = ceil(395 / 100) = 4 and demand 5 clamps to 4.
    assert_eq!(conv.instance.slot_count(), 4);
    assert_eq!(conv.instance.capacity(), 100);
    assert_eq!(conv.clamped, vec![1]);
    assert_eq!(conv.instance.ad(1).freq_min, 4);
    let triples = from_bpplib(&text, BppClass::FalkenauerTriples).unwrap();
    assert_eq!(triples.instance.slot_count(), 4);
}
