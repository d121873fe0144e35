use std::path::Path;

use esmap::eval::{evaluate, EvalOptions};
use esmap::io::{self, scan::format_scan, scan::parse_scan};
use esmap::pipeline::write_dataset;
use esmap::{
    generate_synthetic, EvidenceVector, GroundTruth, MapConfig, SemanticPoint, SyntheticSceneSpec,
    VoxelKey, VoxelMap,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn any_f64() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn point(k: usize) -> impl Strategy<Value = SemanticPoint> {
    (
        [any_f64(), any_f64(), any_f64()],
        prop::collection::vec(prop::num::f64::POSITIVE | prop::num::f64::ZERO, k),
    )
        .prop_filter("finite", |(_, e)| e.iter().all(|v| v.is_finite()))
        .prop_map(|(pos, e)| SemanticPoint::with_evidence(pos, EvidenceVector::new(e).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scan_text_round_trip(points in prop::collection::vec(point(4), 0..50)) {
        let text = format_scan(&points, 4).unwrap();
        let (back, k) = parse_scan(&text, Path::new("s")).unwrap();
        prop_assert_eq!(k, 4);
        prop_assert_eq!(back, points);
    }

    #[test]
    fn map_binary_round_trip(
        cells in prop::collection::btree_map(
            (-1000i32..1000, -1000i32..1000, -50i32..50),
            prop::collection::vec(0.001f64..1e9, 3),
            0..200,
        ),
        scans in 0u64..1_000_000,
    ) {
        let map = VoxelMap::from_parts(
            MapConfig::new(3),
            cells.into_iter().map(|((i, j, k), a)| (VoxelKey::new(i, j, k), a)),
            scans,
        ).unwrap();
        let bytes = io::encode_map(&map);
        let back = io::decode_map(&bytes).unwrap();
        prop_assert_eq!(io::encode_map(&back), bytes);
        prop_assert_eq!(back, map);
    }
}

#[test]
fn thousand_random_scan_points_round_trip_through_files() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<_> = (0..1000)
        .map(|_| {
            let pos = [
                rng.random::<f64>() * 100.0 - 50.0,
                rng.random(),
                -rng.random::<f64>(),
            ];
            let e = (0..5).map(|_| rng.random::<f64>() * 30.0).collect();
            SemanticPoint::with_evidence(pos, EvidenceVector::new(e).unwrap())
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.esm");
    io::write_scan(&path, &pts, 5).unwrap();
    assert_eq!(io::read_scan(&path).unwrap(), (pts, 5));
}

#[test]
fn ten_thousand_voxel_map_round_trips_through_file() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = MapConfig::new(4);
    let mut cells = std::collections::BTreeMap::new();
    while cells.len() < 10_000 {
        let key = VoxelKey::new(
            rng.random_range(-500..500),
            rng.random_range(-500..500),
            rng.random_range(-20..20),
        );
        cells.insert(
            key,
            (0..4)
                .map(|_| 0.001 + rng.random::<f64>() * 50.0)
                .collect::<Vec<_>>(),
        );
    }
    let map = VoxelMap::from_parts(cfg, cells, 42).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    io::serialize_map(&map, &path).unwrap();
    let back = io::deserialize_map(&path).unwrap();
    for (key, a) in map.cells() {
        let b = back.get(key).unwrap();
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_eq!(back.config(), map.config());
    assert_eq!(back.scan_count(), 42);
}

#[test]
fn evaluation_ignores_enumeration_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = MapConfig::new(3);
    let mut cells = Vec::new();
    let mut truth_pairs = Vec::new();
    for i in 0..300 {
        let key = VoxelKey::new(i % 20, i / 20, 0);
        if rng.random_bool(0.7) {
            cells.push((
                key,
                (0..3)
                    .map(|_| 0.001 + rng.random::<f64>())
                    .collect::<Vec<_>>(),
            ));
        }
        truth_pairs.push((key, rng.random_range(0..3)));
    }
    let base_map = VoxelMap::from_parts(cfg, cells.clone(), 1).unwrap();
    let truth: GroundTruth = truth_pairs.iter().copied().collect();
    let want = evaluate(&base_map, &truth, EvalOptions::default()).unwrap();
    for _ in 0..5 {
        cells.shuffle(&mut rng);
        truth_pairs.shuffle(&mut rng);
        let map = VoxelMap::from_parts(cfg, cells.clone(), 1).unwrap();
        let truth: GroundTruth = truth_pairs.iter().copied().collect();
        let got = evaluate(&map, &truth, EvalOptions::default()).unwrap();
        assert_eq!(got, want);
    }
    for flag in [true, false] {
        let r = evaluate(
            &base_map,
            &truth,
            EvalOptions {
                include_unobserved: flag,
            },
        )
        .unwrap();
        for v in [r.overall_accuracy, r.miou]
            .into_iter()
            .chain(r.per_class_iou.iter().flatten().copied())
        {
            assert!((0.0..=1.0).contains(&v));
        }
        let max_iou = r
            .per_class_iou
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max);
        assert!(r.miou <= max_iou);
        let total: u64 = r.confusion.iter().flatten().sum();
        assert_eq!(total, r.evaluated_voxels);
    }
}

#[test]
fn synthetic_dataset_files_are_byte_identical() {
    let spec = SyntheticSceneSpec {
        seed: 99,
        extent: 2.0,
        num_classes: 3,
        points_per_scan: 500,
        num_scans: 3,
        noise_rate: 0.3,
        vacuity_correlation: 0.5,
        ..Default::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files_a = write_dataset(a.path(), &generate_synthetic(&spec).unwrap()).unwrap();
    let files_b = write_dataset(b.path(), &generate_synthetic(&spec).unwrap()).unwrap();
    assert_eq!(files_a.len(), files_b.len());
    for (fa, fb) in files_a.iter().zip(&files_b) {
        assert_eq!(
            fa.strip_prefix(a.path()).unwrap(),
            fb.strip_prefix(b.path()).unwrap()
        );
        assert_eq!(
            std::fs::read(fa).unwrap(),
            std::fs::read(fb).unwrap(),
            "{}",
            fa.display()
        );
    }
}
