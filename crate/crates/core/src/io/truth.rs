//! Ground-truth files: `i j k class_id` per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::VoxelKey;

pub type GroundTruth = BTreeMap<VoxelKey, usize>;

pub fn parse_truth(text: &str, path: &Path) -> Result<GroundTruth> {
    let mut truth = GroundTruth::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [i, j, k, c] = f.as_slice() else {
            return Err(Error::parse(
                path,
                n + 1,
                format!("expected 4 fields, found {}", f.len()),
            ));
        };
        let idx = |t: &str| {
            t.parse::<i32>()
                .map_err(|_| Error::parse(path, n + 1, format!("bad index '{t}'")))
        };
        let key = VoxelKey::new(idx(i)?, idx(j)?, idx(k)?);
        let class = c
            .parse::<usize>()
            .map_err(|_| Error::parse(path, n + 1, format!("bad class id '{c}'")))?;
        if truth.insert(key, class).is_some() {
            return Err(Error::parse(path, n + 1, format!("duplicate voxel {key}")));
        }
    }
    Ok(truth)
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    parse_truth(&fs::read_to_string(path)?, path)
}

pub fn format_truth(truth: &GroundTruth) -> String {
    let mut out = String::new();
    for (key, class) in truth {
        writeln!(out, "{} {} {} {class}", key.i, key.j, key.k).unwrap();
    }
    out
}

pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    fs::write(path, format_truth(truth))?;
    Ok(())
}
