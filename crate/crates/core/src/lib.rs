//! Evidential semantic mapping.
//!
//! Per-voxel Dirichlet evidence is accumulated with a compact-support
//! Bayesian kernel update in which every measurement is weighted by the
//! confidence of the evidential classifier that produced it.
//!
//! The `parallel` feature (on by default) runs scan integration and
//! synthetic scan generation on the rayon pool. Results are bit-identical
//! with and without it.

pub mod error;
pub mod eval;
pub mod evidence;
pub mod io;
pub mod kernel;
pub mod map;
pub mod pipeline;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{evaluate, EvalOptions, MetricsReport};
pub use evidence::{Activation, ClassProbs, DirichletParams, EvidenceVector};
pub use io::{GroundTruth, Pose};
pub use kernel::KernelParams;
pub use map::{
    LabelMode, MapConfig, Payload, SemanticPoint, VoxelKey, VoxelMap, VoxelQuery, Weighting,
};
pub use synth::{generate_synthetic, SyntheticDataset, SyntheticSceneSpec};
