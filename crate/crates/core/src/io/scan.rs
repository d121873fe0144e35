//! Text scan files.
//!
//! ```text
//! ESM1 <num_points> <K>
//! x y z e_1 ... e_K
//! ```
//!
//! Positions are in the sensor frame. Hard labels are stored as one-hot
//! evidence whose magnitude reproduces the label's vacuity `1 − confidence`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evidence::EvidenceVector;
use crate::map::{Payload, SemanticPoint};

pub const SCAN_MAGIC: &str = "ESM1";

/// Cap on the evidence used to encode a fully confident hard label.
pub const MAX_LABEL_EVIDENCE: f64 = 1e6;

/// Evidence vector equivalent to a payload over `k` classes.
pub fn payload_evidence(payload: &Payload, k: usize) -> Vec<f64> {
    match payload {
        Payload::Evidence(e) => e.as_slice().to_vec(),
        Payload::Label { class, confidence } => {
            // K/(K + e) = 1 − c  ⇒  e = K·c/(1 − c)
            let mag = if *confidence >= 1.0 {
                MAX_LABEL_EVIDENCE
            } else {
                (k as f64 * confidence / (1.0 - confidence)).min(MAX_LABEL_EVIDENCE)
            };
            let mut e = vec![0.0; k];
            e[*class] = mag;
            e
        }
    }
}

pub fn parse_scan(text: &str, path: &Path) -> Result<(Vec<SemanticPoint>, usize)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, k) = match fields.as_slice() {
        [magic, n, k] if *magic == SCAN_MAGIC => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::parse(path, 1, format!("bad point count '{n}'")))?;
            let k: usize = k
                .parse()
                .map_err(|_| Error::parse(path, 1, format!("bad class count '{k}'")))?;
            (n, k)
        }
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("expected '{SCAN_MAGIC} <num_points> <K>'"),
            ))
        }
    };
    if k < 2 {
        return Err(Error::parse(
            path,
            1,
            format!("class count {k} must be >= 2"),
        ));
    }

    let mut points = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(3 + k);
    for (n, line) in lines {
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        if points.len() == count {
            return Err(Error::parse(
                path,
                lineno,
                format!("more than the declared {count} points"),
            ));
        }
        values.clear();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number '{tok}'")))?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("non-finite value '{tok}'"),
                ));
            }
            values.push(v);
        }
        if values.len() != 3 + k {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} values, found {}", 3 + k, values.len()),
            ));
        }
        let evidence = EvidenceVector::new(values[3..].to_vec())
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        points.push(SemanticPoint::with_evidence(
            [values[0], values[1], values[2]],
            evidence,
        ));
    }
    if points.len() != count {
        return Err(Error::parse(
            path,
            text.lines().count().max(1),
            format!("declared {count} points, found {}", points.len()),
        ));
    }
    Ok((points, k))
}

pub fn read_scan(path: &Path) -> Result<(Vec<SemanticPoint>, usize)> {
    parse_scan(&fs::read_to_string(path)?, path)
}

/// Renders a scan; every point must carry `k` classes.
pub fn format_scan(points: &[SemanticPoint], k: usize) -> Result<String> {
    if k < 2 {
        return Err(Error::validation(format!("class count {k} must be >= 2")));
    }
    let mut out = String::with_capacity(32 + points.len() * (24 + 8 * k));
    writeln!(out, "{SCAN_MAGIC} {} {k}", points.len()).unwrap();
    for (n, p) in points.iter().enumerate() {
        if p.position.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "point {n} has a non-finite position"
            )));
        }
        let e = payload_evidence(&p.payload, k);
        if e.len() != k {
            return Err(Error::validation(format!(
                "point {n} has {} classes, expected {k}",
                e.len()
            )));
        }
        write!(out, "{} {} {}", p.position[0], p.position[1], p.position[2]).unwrap();
        for v in e {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_scan(path: &Path, points: &[SemanticPoint], k: usize) -> Result<()> {
    fs::write(path, format_scan(points, k)?)?;
    Ok(())
}
