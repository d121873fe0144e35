//! Pose files: one transform per line, the top three rows of the 4×4
//! matrix as 12 row-major numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::pose::Pose;
use crate::error::{Error, Result};

pub fn parse_poses(text: &str, path: &Path) -> Result<Vec<Pose>> {
    let mut poses = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(path, n + 1, format!("bad number '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: [f64; 12] = vals.try_into().map_err(|v: Vec<f64>| {
            Error::parse(
                path,
                n + 1,
                format!("expected 12 values, found {}", v.len()),
            )
        })?;
        poses.push(Pose::from_rows(rows).map_err(|e| Error::parse(path, n + 1, e.to_string()))?);
    }
    Ok(poses)
}

pub fn read_poses(path: &Path) -> Result<Vec<Pose>> {
    parse_poses(&fs::read_to_string(path)?, path)
}

pub fn format_poses(poses: &[Pose]) -> String {
    let mut out = String::new();
    for pose in poses {
        let row: Vec<String> = pose.to_rows().iter().map(f64::to_string).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

pub fn write_poses(path: &Path, poses: &[Pose]) -> Result<()> {
    fs::write(path, format_poses(poses))?;
    Ok(())
}
