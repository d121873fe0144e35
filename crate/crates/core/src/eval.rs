//! Per-voxel segmentation metrics.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::GroundTruth;
use crate::map::VoxelMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Score ground-truth voxels the map never touched, predicting the
    /// prior's argmax (class 0).
    pub include_unobserved: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            include_unobserved: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub overall_accuracy: f64,
    /// `None` for classes absent from the ground truth.
    pub per_class_iou: Vec<Option<f64>>,
    /// Mean IoU over classes present in the ground truth.
    pub miou: f64,
    pub evaluated_voxels: u64,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

impl MetricsReport {
    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Result<Self> {
        let k = confusion.len();
        if confusion.iter().any(|row| row.len() != k) {
            return Err(Error::validation("confusion matrix must be square"));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::validation("no voxels to evaluate"));
        }
        let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
        let per_class_iou: Vec<Option<f64>> = (0..k)
            .map(|c| {
                let row: u64 = confusion[c].iter().sum();
                if row == 0 {
                    return None;
                }
                let col: u64 = confusion.iter().map(|r| r[c]).sum();
                let tp = confusion[c][c];
                // TP / (TP + FP + FN) = TP / (row + col − TP)
                Some(tp as f64 / (row + col - tp) as f64)
            })
            .collect();
        let present: Vec<f64> = per_class_iou.iter().flatten().copied().collect();
        let miou = present.iter().sum::<f64>() / present.len() as f64;
        Ok(Self {
            overall_accuracy: correct as f64 / total as f64,
            per_class_iou,
            miou,
            evaluated_voxels: total,
            confusion,
        })
    }

    /// `key=value` lines: accuracy, miou, evaluated_voxels, `iou_<c>` and
    /// `confusion_<c>` rows.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "accuracy={:.6}", self.overall_accuracy).unwrap();
        writeln!(out, "miou={:.6}", self.miou).unwrap();
        writeln!(out, "evaluated_voxels={}", self.evaluated_voxels).unwrap();
        for (c, iou) in self.per_class_iou.iter().enumerate() {
            match iou {
                Some(v) => writeln!(out, "iou_{c}={v:.6}").unwrap(),
                None => writeln!(out, "iou_{c}=absent").unwrap(),
            }
        }
        for (c, row) in self.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(out, "confusion_{c}={}", cells.join(",")).unwrap();
        }
        out
    }
}

/// Scores the map's argmax against ground-truth voxel labels.
pub fn evaluate(map: &VoxelMap, truth: &GroundTruth, opts: EvalOptions) -> Result<MetricsReport> {
    if truth.is_empty() {
        return Err(Error::validation("ground truth is empty"));
    }
    let k = map.config().num_classes;
    let mut confusion = vec![vec![0u64; k]; k];
    for (key, &class) in truth {
        if class >= k {
            return Err(Error::validation(format!(
                "ground-truth class {class} at {key} exceeds the map's {k} classes"
            )));
        }
        if !opts.include_unobserved && map.get(key).is_none() {
            continue;
        }
        confusion[class][map.query_voxel(key).class] += 1;
    }
    MetricsReport::from_confusion(confusion)
}
