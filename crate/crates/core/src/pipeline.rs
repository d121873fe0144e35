//! End-to-end mapping runs: dataset directories, map building, and
//! parameter sweeps.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalOptions, MetricsReport};
use crate::io::{self, transform_points, GroundTruth, Pose};
use crate::map::{LabelMode, MapConfig, SemanticPoint, VoxelMap, Weighting};
use crate::synth::{generate_synthetic, SyntheticDataset, SyntheticSceneSpec};

pub const SCAN_DIR: &str = "scans";
pub const POSES_FILE: &str = "poses.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const SPEC_FILE: &str = "spec.txt";

/// Map config matching a synthetic spec: its class count and truth grid.
pub fn config_for_spec(spec: &SyntheticSceneSpec) -> MapConfig {
    let mut cfg = MapConfig::new(spec.num_classes);
    cfg.resolution = spec.truth_resolution;
    cfg
}

/// Writes `scans/scan_NNNNN.esm`, `poses.txt`, `truth.txt`, `spec.txt` and a
/// matching `config.txt` under `dir`. Returns the paths written.
pub fn write_dataset(dir: &Path, data: &SyntheticDataset) -> Result<Vec<PathBuf>> {
    let scan_dir = dir.join(SCAN_DIR);
    fs::create_dir_all(&scan_dir)?;
    let k = data.spec.num_classes;
    let mut written = Vec::new();
    for (n, scan) in data.scans.iter().enumerate() {
        let path = scan_dir.join(format!("scan_{n:05}.esm"));
        io::write_scan(&path, &scan.points, k)?;
        written.push(path);
    }
    let poses: Vec<Pose> = data.scans.iter().map(|s| s.pose).collect();
    for (name, body) in [
        (POSES_FILE, io::poses::format_poses(&poses)),
        (TRUTH_FILE, io::truth::format_truth(&data.truth)),
        (SPEC_FILE, data.spec.to_key_values()),
        (
            CONFIG_FILE,
            io::format_map_config(&config_for_spec(&data.spec)),
        ),
    ] {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

/// Regular files in `dir`, sorted lexicographically by file name.
pub fn list_scan_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Reads every scan in `scan_dir` and moves it to the world frame with the
/// pose on the matching line of `poses_path`.
pub fn load_world_scans(
    scan_dir: &Path,
    poses_path: &Path,
    num_classes: usize,
) -> Result<Vec<Vec<SemanticPoint>>> {
    let files = list_scan_files(scan_dir)?;
    let poses = io::read_poses(poses_path)?;
    if poses.len() != files.len() {
        return Err(Error::validation(format!(
            "{} scan files but {} poses",
            files.len(),
            poses.len()
        )));
    }
    files
        .iter()
        .zip(&poses)
        .map(|(path, pose)| {
            let (points, k) = io::read_scan(path)?;
            if k != num_classes {
                return Err(Error::validation(format!(
                    "{} declares {k} classes, config has {num_classes}",
                    path.display()
                )));
            }
            Ok(transform_points(pose, &points))
        })
        .collect()
}

/// Integrates world-frame scans in order.
pub fn build_map(config: MapConfig, scans: &[Vec<SemanticPoint>]) -> Result<VoxelMap> {
    let mut map = VoxelMap::new(config)?;
    for scan in scans {
        map.update_scan(scan)?;
    }
    Ok(map)
}

/// Builds a map straight from a generated dataset.
pub fn build_from_dataset(config: MapConfig, data: &SyntheticDataset) -> Result<VoxelMap> {
    let mut map = VoxelMap::new(config)?;
    for scan in &data.scans {
        map.update_scan(&transform_points(&scan.pose, &scan.points))?;
    }
    Ok(map)
}

/// Parameters that can be swept by [`run_ablation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AblationParam {
    Weighting,
    LabelMode,
    LengthScale,
    Resolution,
    WeightFloor,
    NoiseRate,
}

impl AblationParam {
    pub const NAMES: &'static [&'static str] = &[
        "weighting",
        "label_mode",
        "length_scale",
        "resolution",
        "w_min",
        "noise_rate",
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationParam::Weighting => "weighting",
            AblationParam::LabelMode => "label_mode",
            AblationParam::LengthScale => "length_scale",
            AblationParam::Resolution => "resolution",
            AblationParam::WeightFloor => "w_min",
            AblationParam::NoiseRate => "noise_rate",
        }
    }
}

impl fmt::Display for AblationParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "weighting" => AblationParam::Weighting,
            "label_mode" => AblationParam::LabelMode,
            "length_scale" => AblationParam::LengthScale,
            "resolution" => AblationParam::Resolution,
            "w_min" => AblationParam::WeightFloor,
            "noise_rate" => AblationParam::NoiseRate,
            other => {
                return Err(Error::validation(format!(
                    "unknown sweep parameter '{other}', valid: {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

/// A parsed `PARAM=v1,v2,...` sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sweep {
    pub param: AblationParam,
    pub values: Vec<String>,
}

impl FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (param, values) = s
            .split_once('=')
            .ok_or_else(|| Error::validation(format!("sweep '{s}' is not PARAM=v1,v2,...")))?;
        let param: AblationParam = param.trim().parse()?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(String::is_empty) {
            return Err(Error::validation(format!("sweep '{s}' has an empty value")));
        }
        Ok(Sweep { param, values })
    }
}

/// One evaluated sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub value: String,
    pub report: MetricsReport,
    pub duration_s: f64,
}

fn num(param: AblationParam, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::validation(format!("{param} value '{v}' is not a number")))
}

/// Config, spec and the value's typed form, validated before any work.
fn variant(
    sweep: &Sweep,
    value: &str,
    base_config: MapConfig,
    base_spec: SyntheticSceneSpec,
) -> Result<(MapConfig, SyntheticSceneSpec)> {
    let mut cfg = base_config;
    let mut spec = base_spec;
    match sweep.param {
        AblationParam::Weighting => cfg.weighting = value.parse::<Weighting>()?,
        AblationParam::LabelMode => cfg.label_mode = value.parse::<LabelMode>()?,
        AblationParam::LengthScale => cfg.kernel.length_scale = num(sweep.param, value)?,
        AblationParam::Resolution => cfg.resolution = num(sweep.param, value)?,
        AblationParam::WeightFloor => cfg.weight_floor = num(sweep.param, value)?,
        AblationParam::NoiseRate => spec.noise_rate = num(sweep.param, value)?,
    }
    cfg.validate()?;
    spec.validate()?;
    Ok((cfg, spec))
}

/// Runs generate → build → evaluate for every sweep value. The dataset is
/// regenerated only when the swept parameter changes it; ground truth is
/// relabelled at the map resolution.
pub fn run_ablation(
    spec: &SyntheticSceneSpec,
    base_config: MapConfig,
    sweep: &Sweep,
    opts: EvalOptions,
) -> Result<Vec<AblationRow>> {
    if base_config.num_classes != spec.num_classes {
        return Err(Error::validation(format!(
            "config has {} classes, spec has {}",
            base_config.num_classes, spec.num_classes
        )));
    }
    let variants = sweep
        .values
        .iter()
        .map(|v| variant(sweep, v, base_config, *spec))
        .collect::<Result<Vec<_>>>()?;
    let shared = if sweep.param == AblationParam::NoiseRate {
        None
    } else {
        Some(generate_synthetic(spec)?)
    };

    let mut rows = Vec::with_capacity(variants.len());
    for (value, (cfg, vspec)) in sweep.values.iter().zip(variants) {
        let start = Instant::now();
        let owned;
        let data = match &shared {
            Some(d) => d,
            None => {
                owned = generate_synthetic(&vspec)?;
                &owned
            }
        };
        let map = build_from_dataset(cfg, data)?;
        let truth: GroundTruth = data.scene.truth_at(cfg.resolution);
        let report = evaluate(&map, &truth, opts)?;
        rows.push(AblationRow {
            value: value.clone(),
            report,
            duration_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

pub const ABLATION_HEADER: &str = "param,accuracy,miou,duration_s";

/// CSV with header `param,accuracy,miou,duration_s`; the first column holds
/// the swept value.
pub fn format_ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(ABLATION_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            r.value, r.report.overall_accuracy, r.report.miou, r.duration_s
        ));
    }
    out
}
