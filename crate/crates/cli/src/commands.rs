use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use esmap::eval::{evaluate, EvalOptions};
use esmap::io::{self, encode_map};
use esmap::pipeline::{self, Sweep};
use esmap::{generate_synthetic, SyntheticSceneSpec};

use crate::error::{Classify, CliError, CliResult};
use crate::manifest::Manifest;

/// Prints to stdout. A closed pipe (`esmap eval ... | head`) is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Internal(format!("writing to stdout: {e}")))
        }
        _ => Ok(()),
    }
}

/// Writes through a temporary file in the target directory, so the target
/// either holds the full contents or is left untouched.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .internal_err(&format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes).internal_err("writing temp file")?;
    tmp.persist(path)
        .map_err(|e| CliError::internal(format!("writing {}: {}", path.display(), e.error)))?;
    Ok(())
}

fn sibling_manifest(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn write_manifest(path: &Path, manifest: &Manifest) -> CliResult<()> {
    write_atomic(path, manifest.render().as_bytes())
}

/// Commands whose stdout is the result send their manifest to stderr unless
/// given a path.
fn manifest_to(path: Option<&Path>, manifest: &Manifest) -> CliResult<()> {
    match path {
        Some(p) => write_manifest(p, manifest),
        None => {
            eprint!("{}", manifest.render());
            Ok(())
        }
    }
}

pub fn build(
    scans: &Path,
    poses: &Path,
    config: &Path,
    out: &Path,
    manifest_path: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let cfg = io::read_map_config(config).input_err(&config.display().to_string())?;
    let world =
        pipeline::load_world_scans(scans, poses, cfg.num_classes).input_err("reading scans")?;
    let map = pipeline::build_map(cfg, &world).input_err("building map")?;
    write_atomic(out, &encode_map(&map))?;

    let mut m = Manifest::new("build");
    m.config(&cfg);
    m.path("input.scans", scans);
    m.path("input.poses", poses);
    m.path("input.config", config);
    m.path("output.map", out);
    m.set("scan_count", map.scan_count());
    m.set("voxels", map.len());
    m.duration(start.elapsed());
    write_manifest(
        &manifest_path.map_or_else(|| sibling_manifest(out), Path::to_path_buf),
        &m,
    )
}

pub fn eval(
    map_path: &Path,
    truth_path: &Path,
    include_unobserved: bool,
    manifest_path: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let map = io::deserialize_map(map_path).input_err(&map_path.display().to_string())?;
    let truth = io::read_truth(truth_path).input_err(&truth_path.display().to_string())?;
    let report =
        evaluate(&map, &truth, EvalOptions { include_unobserved }).input_err("evaluating")?;
    let body = report.to_key_values();
    emit(&format!("{body}include_unobserved={include_unobserved}\n"))?;

    let mut m = Manifest::new("eval");
    m.config(map.config());
    m.path("input.map", map_path);
    m.path("input.truth", truth_path);
    m.set("include_unobserved", include_unobserved);
    m.block("metric.", &body);
    m.duration(start.elapsed());
    manifest_to(manifest_path, &m)
}

fn parse_point(s: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Input(format!("point '{s}' is not \"x,y,z\""));
    let [x, y, z] = parts.as_slice() else {
        return Err(bad());
    };
    let num = |t: &str| {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(bad)
    };
    Ok([num(x)?, num(y)?, num(z)?])
}

/// `class=<c> probs=<p0>,<p1>,... vacuity=<u>` with six decimals.
pub fn format_query(q: &esmap::VoxelQuery) -> String {
    let probs: Vec<String> = q
        .probs
        .as_slice()
        .iter()
        .map(|p| format!("{p:.6}"))
        .collect();
    format!(
        "class={} probs={} vacuity={:.6}",
        q.class,
        probs.join(","),
        q.vacuity
    )
}

pub fn query(map_path: &Path, point: &str, manifest_path: Option<&Path>) -> CliResult<()> {
    let start = Instant::now();
    let pos = parse_point(point)?;
    let map = io::deserialize_map(map_path).input_err(&map_path.display().to_string())?;
    let q = map.query_point(pos).input_err("query")?;
    let line = format_query(&q);
    emit(&format!("{line}\n"))?;

    let mut m = Manifest::new("query");
    m.config(map.config());
    m.path("input.map", map_path);
    m.set("point", point);
    m.set("result", line);
    m.duration(start.elapsed());
    manifest_to(manifest_path, &m)
}

pub fn synth(spec_path: &Path, out: &Path) -> CliResult<()> {
    let start = Instant::now();
    let spec = SyntheticSceneSpec::read(spec_path).input_err(&spec_path.display().to_string())?;
    let data = generate_synthetic(&spec).input_err("generating dataset")?;
    fs::create_dir_all(out).internal_err(&format!("creating {}", out.display()))?;
    let files = pipeline::write_dataset(out, &data).internal_err("writing dataset")?;

    let mut m = Manifest::new("synth");
    m.config(&pipeline::config_for_spec(&spec));
    m.block("spec.", &spec.to_key_values());
    m.set("seed", spec.seed);
    m.path("input.spec", spec_path);
    m.path("output.dir", out);
    m.set("output.files", files.len());
    m.set("truth_voxels", data.truth.len());
    m.duration(start.elapsed());
    write_manifest(&out.join("manifest.txt"), &m)
}

pub fn ablate(
    spec_path: &Path,
    sweep: &str,
    out: &Path,
    config: Option<&Path>,
    include_unobserved: bool,
    manifest_path: Option<&Path>,
) -> CliResult<()> {
    let start = Instant::now();
    let sweep: Sweep = sweep.parse().map_err(CliError::input)?;
    let spec = SyntheticSceneSpec::read(spec_path).input_err(&spec_path.display().to_string())?;
    let cfg = match config {
        Some(p) => io::read_map_config(p).input_err(&p.display().to_string())?,
        None => pipeline::config_for_spec(&spec),
    };
    let rows = pipeline::run_ablation(&spec, cfg, &sweep, EvalOptions { include_unobserved })
        .input_err("ablation")?;
    let csv = pipeline::format_ablation_csv(&rows);
    write_atomic(out, csv.as_bytes())?;

    let mut m = Manifest::new("ablate");
    m.config(&cfg);
    m.block("spec.", &spec.to_key_values());
    m.set("seed", spec.seed);
    m.path("input.spec", spec_path);
    if let Some(p) = config {
        m.path("input.config", p);
    }
    m.set(
        "sweep",
        format!("{}={}", sweep.param, sweep.values.join(",")),
    );
    m.set("include_unobserved", include_unobserved);
    m.path("output.csv", out);
    for r in &rows {
        m.set(
            &format!("metric.{}.accuracy", r.value),
            format!("{:.6}", r.report.overall_accuracy),
        );
        m.set(
            &format!("metric.{}.miou", r.value),
            format!("{:.6}", r.report.miou),
        );
    }
    m.duration(start.elapsed());
    write_manifest(
        &manifest_path.map_or_else(|| sibling_manifest(out), Path::to_path_buf),
        &m,
    )
}
