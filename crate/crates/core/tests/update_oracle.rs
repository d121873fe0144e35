mod common;

use std::collections::BTreeMap;

use common::{brute_force_update, random_points, rel_err};
use esmap::{
    EvidenceVector, KernelParams, LabelMode, MapConfig, SemanticPoint, VoxelKey, VoxelMap,
    Weighting,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_matches_oracle(map: &VoxelMap, oracle: &BTreeMap<VoxelKey, Vec<f64>>) {
    assert_eq!(map.len(), oracle.len(), "touched voxel sets differ in size");
    for (key, want) in oracle {
        let got = map
            .get(key)
            .unwrap_or_else(|| panic!("voxel {key} missing"));
        for (g, w) in got.iter().zip(want) {
            assert!(rel_err(*g, *w) <= 1e-9, "voxel {key}: {g} vs {w}");
        }
    }
}

#[test]
fn thousand_points_three_classes_on_a_20_cube() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut cfg = MapConfig::new(3);
    cfg.resolution = 0.1;
    // 20³ voxel region
    let points = random_points(&mut rng, 1000, 3, 2.0);
    let mut map = VoxelMap::new(cfg).unwrap();
    map.update_scan(&points).unwrap();
    let mut oracle = BTreeMap::new();
    brute_force_update(&mut oracle, &cfg, &points);
    assert_matches_oracle(&map, &oracle);
}

#[test]
fn oracle_equivalence_across_configs_and_scans() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..6 {
        let k = [2, 3, 5][trial % 3];
        let mut cfg = MapConfig::new(k);
        cfg.resolution = rng.random_range(0.1..0.3);
        cfg.kernel =
            KernelParams::new(rng.random_range(0.1..0.8), rng.random_range(0.5..2.0)).unwrap();
        cfg.prior_alpha = rng.random_range(0.001..1.0);
        cfg.weight_floor = rng.random_range(0.0..0.3);
        cfg.label_mode = if trial % 2 == 0 {
            LabelMode::HardOneHot
        } else {
            LabelMode::SoftProbs
        };
        cfg.weighting = if trial % 4 == 3 {
            Weighting::Uniform
        } else {
            Weighting::OneMinusVacuity
        };
        let mut map = VoxelMap::new(cfg).unwrap();
        let mut oracle = BTreeMap::new();
        // several scans so increments land on existing voxels as well
        for _ in 0..3 {
            let n = rng.random_range(0..400);
            let pts = random_points(&mut rng, n, k, 1.5);
            map.update_scan(&pts).unwrap();
            brute_force_update(&mut oracle, &cfg, &pts);
        }
        assert_matches_oracle(&map, &oracle);
        assert_eq!(map.scan_count(), 3);
    }
}

#[test]
fn permuted_scan_is_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cfg = MapConfig::new(4);
    cfg.label_mode = LabelMode::SoftProbs;
    let mut pts = random_points(&mut rng, 800, 4, 1.0);
    let mut a = VoxelMap::new(cfg).unwrap();
    a.update_scan(&pts).unwrap();
    for _ in 0..3 {
        pts.shuffle(&mut rng);
        let mut b = VoxelMap::new(cfg).unwrap();
        b.update_scan(&pts).unwrap();
        assert_eq!(esmap::io::encode_map(&a), esmap::io::encode_map(&b));
    }
}

#[test]
fn sequential_fallback_matches_default_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = MapConfig::new(3);
    let pts = random_points(&mut rng, 1500, 3, 1.2);
    let mut a = VoxelMap::new(cfg).unwrap();
    let mut b = VoxelMap::new(cfg).unwrap();
    a.update_scan(&pts).unwrap();
    b.update_scan_sequential(&pts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn accumulation_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = MapConfig::new(3);
    let mut map = VoxelMap::new(cfg).unwrap();
    for _ in 0..5 {
        let before = map.clone();
        map.update_scan(&random_points(&mut rng, 200, 3, 1.0))
            .unwrap();
        for (key, old) in before.cells() {
            let new = map.get(key).unwrap();
            assert!(old.iter().zip(new).all(|(o, n)| n >= o));
            assert!(new.iter().sum::<f64>() >= old.iter().sum::<f64>());
        }
        for (_, a) in map.cells() {
            assert!(a.iter().all(|&v| v >= cfg.prior_alpha));
        }
    }
}

#[test]
fn points_never_reach_beyond_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cfg = MapConfig::new(3);
    cfg.kernel.length_scale = 0.25;
    cfg.resolution = 0.07;
    let pts = random_points(&mut rng, 50, 3, 3.0);
    let mut map = VoxelMap::new(cfg).unwrap();
    map.update_scan(&pts).unwrap();
    for (key, _) in map.cells() {
        let c = key.center(cfg.resolution);
        let near = pts.iter().any(|p| {
            let d: f64 = (0..3)
                .map(|a| (p.position[a] - c[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            d < cfg.kernel.length_scale
        });
        assert!(near, "voxel {key} touched without a point in range");
    }
}

#[test]
fn vacuous_measurements_change_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = MapConfig::new(3);
    let mut map = VoxelMap::new(cfg).unwrap();
    map.update_scan(&random_points(&mut rng, 500, 3, 1.0))
        .unwrap();
    let before = map.clone();
    let vacuous: Vec<_> = random_points(&mut rng, 500, 3, 1.0)
        .into_iter()
        .map(|p| SemanticPoint::with_evidence(p.position, EvidenceVector::zeros(3).unwrap()))
        .collect();
    map.update_scan(&vacuous).unwrap();
    assert_eq!(map.len(), before.len());
    for (key, a) in before.cells() {
        assert_eq!(map.get(key).unwrap(), a);
    }
}

/// One voxel, `clean` confident correct measurements and `noisy` vacuous
/// wrong ones, all at the voxel center.
fn contested(weighting: Weighting, clean: usize, noisy: usize) -> usize {
    let mut cfg = MapConfig::new(3);
    cfg.weighting = weighting;
    let key = VoxelKey::new(0, 0, 0);
    let c = key.center(cfg.resolution);
    let mut pts = Vec::new();
    for _ in 0..clean {
        pts.push(SemanticPoint::with_evidence(
            c,
            EvidenceVector::new(vec![1e9, 0.0, 0.0]).unwrap(),
        ));
    }
    for _ in 0..noisy {
        // near-zero evidence, argmax class 2
        pts.push(SemanticPoint::with_evidence(
            c,
            EvidenceVector::new(vec![0.0, 0.0, 1e-12]).unwrap(),
        ));
    }
    let mut map = VoxelMap::new(cfg).unwrap();
    map.update_scan(&pts).unwrap();
    map.query_voxel(&key).class
}

#[test]
fn confident_evidence_outvotes_vacuous_noise() {
    for noisy in [0, 1, 5, 50, 500, 5000] {
        assert_eq!(
            contested(Weighting::OneMinusVacuity, 3, noisy),
            0,
            "noisy={noisy}"
        );
    }
    assert_eq!(contested(Weighting::Uniform, 3, 2), 0);
    assert_eq!(contested(Weighting::Uniform, 3, 4), 2);
}
