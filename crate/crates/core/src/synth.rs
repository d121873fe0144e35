//! Seeded synthetic terrain scenes with controllable label corruption.
//!
//! The ground is the plane z = 0 over `[0, extent)²`, split along x into
//! bands of `band_width` meters, each carrying one terrain class. Every scan
//! has a random planar sensor pose and samples points inside a square window
//! around the sensor. A point's true class is the class of the ground-truth
//! voxel (at `truth_resolution`) that contains it.
//!
//! Corruption: with probability ρ (`noise_rate`) a point's label moves to a
//! uniformly drawn wrong class. A corrupted point gets `low_evidence` on the
//! wrong class with probability γ (`vacuity_correlation`), otherwise
//! `high_evidence` on the wrong class. Clean points get `high_evidence` on
//! the true class.
//!
//! Randomness comes from ChaCha8 seeded with `seed`: stream 0 draws the band
//! classes, stream `n + 1` draws scan `n`. Sampling uses `rand` 0.9's uniform
//! and Bernoulli samplers, which are platform-independent.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evidence::EvidenceVector;
use crate::io::kv::KeyValues;
use crate::io::{GroundTruth, Pose};
use crate::map::{SemanticPoint, VoxelKey};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSceneSpec {
    pub seed: u64,
    /// Side length of the square scene in meters.
    pub extent: f64,
    pub num_classes: usize,
    pub points_per_scan: usize,
    pub num_scans: usize,
    /// ρ: probability that a point's label is corrupted.
    pub noise_rate: f64,
    /// γ: probability that a corrupted point carries vacuous evidence.
    pub vacuity_correlation: f64,
    /// Total evidence of a confident prediction.
    pub high_evidence: f64,
    /// Total evidence of a vacuous prediction.
    pub low_evidence: f64,
    pub band_width: f64,
    pub truth_resolution: f64,
    /// Half side of the square sampling window around each sensor.
    pub scan_radius: f64,
    pub sensor_height: f64,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            extent: 4.0,
            num_classes: 4,
            points_per_scan: 5_000,
            num_scans: 10,
            noise_rate: 0.0,
            vacuity_correlation: 1.0,
            high_evidence: 20.0,
            low_evidence: 0.2,
            band_width: 0.4,
            truth_resolution: 0.1,
            scan_radius: 4.0,
            sensor_height: 0.5,
        }
    }
}

pub const SPEC_KEYS: &[&str] = &[
    "seed",
    "extent",
    "num_classes",
    "points_per_scan",
    "num_scans",
    "noise_rate",
    "vacuity_correlation",
    "high_evidence",
    "low_evidence",
    "band_width",
    "truth_resolution",
    "scan_radius",
    "sensor_height",
];

impl SyntheticSceneSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "{name} = {v} must be finite and > 0"
                )))
            }
        };
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "{name} = {v} must lie in [0, 1]"
                )))
            }
        };
        if self.num_classes < 2 {
            return Err(Error::validation(format!(
                "num_classes = {} must be >= 2",
                self.num_classes
            )));
        }
        positive("extent", self.extent)?;
        positive("high_evidence", self.high_evidence)?;
        positive("low_evidence", self.low_evidence)?;
        positive("band_width", self.band_width)?;
        positive("truth_resolution", self.truth_resolution)?;
        positive("scan_radius", self.scan_radius)?;
        if !self.sensor_height.is_finite() {
            return Err(Error::validation("sensor_height must be finite"));
        }
        unit("noise_rate", self.noise_rate)?;
        unit("vacuity_correlation", self.vacuity_correlation)?;
        if self.extent / self.truth_resolution > 1e6 {
            return Err(Error::validation("extent / truth_resolution is too large"));
        }
        Ok(())
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        kv.only(SPEC_KEYS)?;
        let mut s = Self::default();
        macro_rules! field {
            ($($name:ident),*) => {
                $(if let Some(v) = kv.get(stringify!($name))? {
                    s.$name = v;
                })*
            };
        }
        field!(
            seed,
            extent,
            num_classes,
            points_per_scan,
            num_scans,
            noise_rate,
            vacuity_correlation,
            high_evidence,
            low_evidence,
            band_width,
            truth_resolution,
            scan_radius,
            sensor_height
        );
        s.validate()?;
        Ok(s)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(text, path)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?, path)
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in [
            ("seed", self.seed.to_string()),
            ("extent", self.extent.to_string()),
            ("num_classes", self.num_classes.to_string()),
            ("points_per_scan", self.points_per_scan.to_string()),
            ("num_scans", self.num_scans.to_string()),
            ("noise_rate", self.noise_rate.to_string()),
            ("vacuity_correlation", self.vacuity_correlation.to_string()),
            ("high_evidence", self.high_evidence.to_string()),
            ("low_evidence", self.low_evidence.to_string()),
            ("band_width", self.band_width.to_string()),
            ("truth_resolution", self.truth_resolution.to_string()),
            ("scan_radius", self.scan_radius.to_string()),
            ("sensor_height", self.sensor_height.to_string()),
        ] {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }
}

/// Class layout of a generated scene.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    extent: f64,
    band_width: f64,
    band_classes: Vec<usize>,
}

impl Scene {
    pub fn class_at(&self, x: f64) -> usize {
        let b = (x / self.band_width).floor().max(0.0) as usize;
        self.band_classes[b.min(self.band_classes.len() - 1)]
    }

    /// Ground-truth labels of the z = 0 voxel layer at `resolution`, labelled
    /// by the class under each voxel center.
    pub fn truth_at(&self, resolution: f64) -> GroundTruth {
        let n = (self.extent / resolution).ceil() as i32;
        let mut truth = GroundTruth::new();
        for i in 0..n {
            let class = self.class_at((i as f64 + 0.5) * resolution);
            for j in 0..n {
                truth.insert(VoxelKey::new(i, j, 0), class);
            }
        }
        truth
    }
}

/// One scan in the sensor frame plus its sensor-to-world pose.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorScan {
    pub pose: Pose,
    pub points: Vec<SemanticPoint>,
    /// Whether each point's label was corrupted.
    pub corrupted: Vec<bool>,
    /// True class of each point.
    pub true_class: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub spec: SyntheticSceneSpec,
    pub scene: Scene,
    pub scans: Vec<SensorScan>,
    /// Labels at `spec.truth_resolution`.
    pub truth: GroundTruth,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn generate_scan(spec: &SyntheticSceneSpec, scene: &Scene, n: usize) -> SensorScan {
    let mut rng = rng_for(spec.seed, n as u64 + 1);
    let k = spec.num_classes;
    let sensor = [
        rng.random_range(0.0..spec.extent),
        rng.random_range(0.0..spec.extent),
    ];
    let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let pose = Pose::from_yaw_translation(yaw, [sensor[0], sensor[1], spec.sensor_height]);
    let lo = sensor.map(|c| (c - spec.scan_radius).max(0.0));
    let hi = sensor.map(|c| (c + spec.scan_radius).min(spec.extent));

    let mut scan = SensorScan {
        pose,
        points: Vec::with_capacity(spec.points_per_scan),
        corrupted: Vec::with_capacity(spec.points_per_scan),
        true_class: Vec::with_capacity(spec.points_per_scan),
    };
    for _ in 0..spec.points_per_scan {
        let world = [
            rng.random_range(lo[0]..hi[0]),
            rng.random_range(lo[1]..hi[1]),
            0.0,
        ];
        let local = pose.apply_inverse(world);
        // label from the position the mapping pipeline will reconstruct
        let rebuilt = pose.apply(local);
        let voxel = (rebuilt[0] / spec.truth_resolution).floor();
        let truth = scene.class_at((voxel + 0.5) * spec.truth_resolution);

        let corrupted = rng.random_bool(spec.noise_rate);
        let mut evidence = vec![0.0; k];
        if corrupted {
            let wrong = (truth + rng.random_range(1..k)) % k;
            evidence[wrong] = if rng.random_bool(spec.vacuity_correlation) {
                spec.low_evidence
            } else {
                spec.high_evidence
            };
        } else {
            evidence[truth] = spec.high_evidence;
        }
        scan.points.push(SemanticPoint::with_evidence(
            local,
            EvidenceVector::new(evidence).expect("generated evidence is valid"),
        ));
        scan.corrupted.push(corrupted);
        scan.true_class.push(truth);
    }
    scan
}

/// Generates a dataset; identical specs give identical datasets.
pub fn generate_synthetic(spec: &SyntheticSceneSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, 0);
    let bands = (spec.extent / spec.band_width).ceil().max(1.0) as usize;
    let mut order: Vec<usize> = (0..spec.num_classes).collect();
    order.shuffle(&mut rng);
    let scene = Scene {
        extent: spec.extent,
        band_width: spec.band_width,
        band_classes: (0..bands).map(|b| order[b % spec.num_classes]).collect(),
    };

    #[cfg(feature = "parallel")]
    let scans = (0..spec.num_scans)
        .into_par_iter()
        .map(|n| generate_scan(spec, &scene, n))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let scans = (0..spec.num_scans)
        .map(|n| generate_scan(spec, &scene, n))
        .collect();

    let truth = scene.truth_at(spec.truth_resolution);
    Ok(SyntheticDataset {
        spec: *spec,
        scene,
        scans,
        truth,
    })
}
