//! Sparse semantic voxel map with uncertainty-weighted Bayesian kernel
//! inference updates.
//!
//! Each voxel stores Dirichlet concentrations α*. A measurement at `x_i`
//! with weight `w_i` and label vector `ȳ_i` adds `k(‖x_i − x*‖)·w_i·ȳ_i` to
//! every voxel whose center `x*` lies strictly inside the kernel support.
//! Absent voxels are implicitly at the prior `(α0, …, α0)`.

mod update;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evidence::{self, ClassProbs, DirichletParams, EvidenceVector};
use crate::kernel::KernelParams;

/// Integer grid index of a voxel: `floor(position / resolution)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VoxelKey {
    pub i: i32,
    pub j: i32,
    pub k: i32,
}

impl VoxelKey {
    pub const fn new(i: i32, j: i32, k: i32) -> Self {
        Self { i, j, k }
    }

    pub fn from_position(position: [f64; 3], resolution: f64) -> Result<Self> {
        let mut idx = [0i32; 3];
        for (axis, (&p, out)) in position.iter().zip(idx.iter_mut()).enumerate() {
            if !p.is_finite() {
                return Err(Error::validation(format!(
                    "position[{axis}] = {p} is not finite"
                )));
            }
            let f = (p / resolution).floor();
            if f < i32::MIN as f64 || f > i32::MAX as f64 {
                return Err(Error::validation(format!(
                    "position[{axis}] = {p} is outside the addressable grid"
                )));
            }
            *out = f as i32;
        }
        Ok(Self::new(idx[0], idx[1], idx[2]))
    }

    pub fn center(&self, resolution: f64) -> [f64; 3] {
        [
            (self.i as f64 + 0.5) * resolution,
            (self.j as f64 + 0.5) * resolution,
            (self.k as f64 + 0.5) * resolution,
        ]
    }
}

impl fmt::Display for VoxelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.k)
    }
}

/// What a measurement contributes as its label vector ȳ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LabelMode {
    /// One-hot at the argmax of the expected probabilities.
    #[default]
    HardOneHot,
    /// The expected probabilities themselves.
    SoftProbs,
}

/// How a measurement's weight is derived from its uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Every measurement has weight 1.
    Uniform,
    /// `w = max(1 − u, w_min)` with `u` the measurement vacuity.
    #[default]
    OneMinusVacuity,
}

macro_rules! named_enum {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+) => {
        impl $ty {
            pub const NAMES: &'static [&'static str] = &[$($name),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(Error::validation(format!(
                        concat!("unknown ", $what, " '{}', expected one of: {}"),
                        other,
                        Self::NAMES.join(", ")
                    ))),
                }
            }
        }
    };
}

named_enum!(LabelMode, "label_mode",
    LabelMode::HardOneHot => "hard_onehot",
    LabelMode::SoftProbs => "soft_probs");

named_enum!(Weighting, "weighting",
    Weighting::Uniform => "uniform",
    Weighting::OneMinusVacuity => "one_minus_vacuity");

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapConfig {
    /// Voxel edge length in meters.
    pub resolution: f64,
    pub num_classes: usize,
    /// Per-class prior concentration α0.
    pub prior_alpha: f64,
    pub kernel: KernelParams,
    /// Lower bound w_min on measurement weights.
    pub weight_floor: f64,
    pub label_mode: LabelMode,
    pub weighting: Weighting,
}

impl MapConfig {
    /// Default configuration for `num_classes` classes.
    pub fn new(num_classes: usize) -> Self {
        Self {
            resolution: 0.1,
            num_classes,
            prior_alpha: 0.001,
            kernel: KernelParams::default(),
            weight_floor: 0.0,
            label_mode: LabelMode::default(),
            weighting: Weighting::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::validation(format!(
                "resolution = {} must be finite and > 0",
                self.resolution
            )));
        }
        if self.num_classes < 2 {
            return Err(Error::validation(format!(
                "num_classes = {} must be >= 2",
                self.num_classes
            )));
        }
        if !(self.prior_alpha.is_finite() && self.prior_alpha > 0.0) {
            return Err(Error::validation(format!(
                "prior_alpha = {} must be finite and > 0",
                self.prior_alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.weight_floor) {
            return Err(Error::validation(format!(
                "weight_floor = {} must lie in [0, 1]",
                self.weight_floor
            )));
        }
        self.kernel.validate()
    }

    pub fn prior(&self) -> Vec<f64> {
        vec![self.prior_alpha; self.num_classes]
    }
}

/// Semantic content attached to a measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Evidence(EvidenceVector),
    Label { class: usize, confidence: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticPoint {
    pub position: [f64; 3],
    pub payload: Payload,
}

impl SemanticPoint {
    pub fn with_evidence(position: [f64; 3], evidence: EvidenceVector) -> Self {
        Self {
            position,
            payload: Payload::Evidence(evidence),
        }
    }

    pub fn with_label(position: [f64; 3], class: usize, confidence: f64) -> Self {
        Self {
            position,
            payload: Payload::Label { class, confidence },
        }
    }

    fn check_payload(&self, k: usize) -> Result<()> {
        match &self.payload {
            Payload::Evidence(e) if e.num_classes() != k => Err(Error::validation(format!(
                "evidence has {} classes, map has {k}",
                e.num_classes()
            ))),
            Payload::Label { class, .. } if *class >= k => Err(Error::validation(format!(
                "label {class} out of range for {k} classes"
            ))),
            Payload::Label { confidence, .. } if !(0.0..=1.0).contains(confidence) => Err(
                Error::validation(format!("confidence {confidence} must lie in [0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    /// Measurement vacuity: K/S of the evidence Dirichlet, or `1 − confidence`.
    pub fn vacuity(&self) -> f64 {
        match &self.payload {
            Payload::Evidence(e) => e.num_classes() as f64 / (e.total() + e.num_classes() as f64),
            Payload::Label { confidence, .. } => 1.0 - confidence,
        }
    }
}

/// Weight of a measurement in `[w_min, 1]`.
pub fn point_weight(point: &SemanticPoint, config: &MapConfig) -> Result<f64> {
    point.check_payload(config.num_classes)?;
    Ok(weight_of(point, config))
}

fn weight_of(point: &SemanticPoint, config: &MapConfig) -> f64 {
    match config.weighting {
        Weighting::Uniform => 1.0,
        Weighting::OneMinusVacuity => (1.0 - point.vacuity()).max(config.weight_floor),
    }
}

/// The label vector ȳ a measurement contributes.
///
/// Hard-labelled points contribute their one-hot label in both modes.
pub fn point_label_vector(point: &SemanticPoint, config: &MapConfig) -> Result<Vec<f64>> {
    point.check_payload(config.num_classes)?;
    Ok(label_vector_of(point, config))
}

fn label_vector_of(point: &SemanticPoint, config: &MapConfig) -> Vec<f64> {
    let k = config.num_classes;
    match &point.payload {
        Payload::Label { class, .. } => evidence::one_hot(*class, k),
        Payload::Evidence(e) => {
            let probs = evidence::expected_probs(&evidence::dirichlet_from_evidence(e));
            match config.label_mode {
                LabelMode::HardOneHot => evidence::one_hot(probs.argmax(), k),
                LabelMode::SoftProbs => probs.into_inner(),
            }
        }
    }
}

/// Result of querying one voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelQuery {
    /// Most probable class, lowest index on ties.
    pub class: usize,
    pub probs: ClassProbs,
    /// `min(1, K/S*)`.
    pub vacuity: f64,
    /// Per-class Dirichlet variance `α_c(S − α_c) / (S²(S + 1))`.
    pub variance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoxelMap {
    config: MapConfig,
    cells: HashMap<VoxelKey, Vec<f64>>,
    scan_count: u64,
}

impl VoxelMap {
    pub fn new(config: MapConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            cells: HashMap::new(),
            scan_count: 0,
        })
    }

    /// Rebuilds a map from stored parts, checking every invariant.
    pub fn from_parts(
        config: MapConfig,
        cells: impl IntoIterator<Item = (VoxelKey, Vec<f64>)>,
        scan_count: u64,
    ) -> Result<Self> {
        let mut map = Self::new(config)?;
        for (key, alpha) in cells {
            if alpha.len() != config.num_classes {
                return Err(Error::validation(format!(
                    "voxel {key} has {} classes, expected {}",
                    alpha.len(),
                    config.num_classes
                )));
            }
            if let Some(a) = alpha
                .iter()
                .find(|a| !(a.is_finite() && **a >= config.prior_alpha))
            {
                return Err(Error::validation(format!(
                    "voxel {key} has alpha {a} below the prior {}",
                    config.prior_alpha
                )));
            }
            if map.cells.insert(key, alpha).is_some() {
                return Err(Error::validation(format!("voxel {key} appears twice")));
            }
        }
        map.scan_count = scan_count;
        Ok(map)
    }

    pub fn config(&self) -> &MapConfig {
        &self.config
    }

    pub fn scan_count(&self) -> u64 {
        self.scan_count
    }

    /// Number of voxels holding state.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Stored concentrations, `None` for voxels never touched.
    pub fn get(&self, key: &VoxelKey) -> Option<&[f64]> {
        self.cells.get(key).map(Vec::as_slice)
    }

    /// Concentrations of `key`, the prior when untouched.
    pub fn alpha(&self, key: &VoxelKey) -> DirichletParams {
        let a = self
            .get(key)
            .map_or_else(|| self.config.prior(), <[f64]>::to_vec);
        DirichletParams::new(a).expect("map invariants guarantee a valid Dirichlet")
    }

    /// Stored voxels in unspecified order.
    pub fn cells(&self) -> impl Iterator<Item = (&VoxelKey, &[f64])> {
        self.cells.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Stored voxels sorted by key.
    pub fn sorted_cells(&self) -> Vec<(VoxelKey, &[f64])> {
        let mut v: Vec<_> = self.cells.iter().map(|(k, a)| (*k, a.as_slice())).collect();
        v.sort_unstable_by_key(|(k, _)| *k);
        v
    }

    pub fn key_of(&self, position: [f64; 3]) -> Result<VoxelKey> {
        VoxelKey::from_position(position, self.config.resolution)
    }

    pub fn query_voxel(&self, key: &VoxelKey) -> VoxelQuery {
        let alpha = self.alpha(key);
        let s = alpha.strength();
        let k = alpha.num_classes() as f64;
        let probs = evidence::expected_probs(&alpha);
        let variance = alpha
            .as_slice()
            .iter()
            .map(|a| a * (s - a) / (s * s * (s + 1.0)))
            .collect();
        VoxelQuery {
            class: probs.argmax(),
            probs,
            vacuity: (k / s).min(1.0),
            variance,
        }
    }

    pub fn query_point(&self, position: [f64; 3]) -> Result<VoxelQuery> {
        Ok(self.query_voxel(&self.key_of(position)?))
    }
}
