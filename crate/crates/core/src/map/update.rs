//! Scan integration.
//!
//! The update is organised as a gather over voxels: candidate voxels are
//! enumerated from each point's kernel support, then every candidate sums
//! the contributions of the points within range. Per voxel and class the
//! contributions are sorted before summation, so the result is bit-identical
//! under any permutation of the scan and between the sequential and parallel
//! paths.

use std::collections::HashMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{label_vector_of, weight_of, SemanticPoint, VoxelKey, VoxelMap};
use crate::error::{Error, Result};

/// A validated scan ready for accumulation.
struct PreparedScan {
    positions: Vec<[f64; 3]>,
    weights: Vec<f64>,
    /// Row-major `positions.len() × K`.
    labels: Vec<f64>,
    buckets: HashMap<[i64; 3], Vec<u32>>,
    bucket_size: f64,
}

#[inline]
fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn bucket_of(p: [f64; 3], size: f64) -> [i64; 3] {
    [
        (p[0] / size).floor() as i64,
        (p[1] / size).floor() as i64,
        (p[2] / size).floor() as i64,
    ]
}

impl VoxelMap {
    /// Validates the whole scan before anything is touched. Points with zero
    /// weight are dropped here; they cannot change the map.
    fn prepare(&self, points: &[SemanticPoint]) -> Result<PreparedScan> {
        let cfg = &self.config;
        let k = cfg.num_classes;
        let radius = cfg.kernel.support_radius();
        let mut scan = PreparedScan {
            positions: Vec::with_capacity(points.len()),
            weights: Vec::with_capacity(points.len()),
            labels: Vec::with_capacity(points.len() * k),
            buckets: HashMap::new(),
            bucket_size: radius,
        };
        for (n, p) in points.iter().enumerate() {
            p.check_payload(k)
                .map_err(|e| Error::validation(format!("point {n}: {e}")))?;
            // both corners of the support must stay addressable
            for offset in [-radius, radius] {
                let shifted = p.position.map(|x| x + offset);
                VoxelKey::from_position(shifted, cfg.resolution)
                    .map_err(|e| Error::validation(format!("point {n}: {e}")))?;
            }
            let w = weight_of(p, cfg);
            if w == 0.0 {
                continue;
            }
            let idx = scan.positions.len();
            if idx > u32::MAX as usize {
                return Err(Error::validation("scan has too many points"));
            }
            scan.positions.push(p.position);
            scan.weights.push(w);
            scan.labels.extend(label_vector_of(p, cfg));
            scan.buckets
                .entry(bucket_of(p.position, radius))
                .or_default()
                .push(idx as u32);
        }
        Ok(scan)
    }

    /// Voxels whose center lies strictly within the support of `position`.
    fn support_keys(&self, position: [f64; 3], out: &mut Vec<VoxelKey>) {
        let res = self.config.resolution;
        let radius = self.config.kernel.support_radius();
        let lo = position.map(|x| ((x - radius) / res).floor() as i32 - 1);
        let hi = position.map(|x| ((x + radius) / res).floor() as i32 + 1);
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    let key = VoxelKey::new(i, j, k);
                    if distance(key.center(res), position) < radius {
                        out.push(key);
                    }
                }
            }
        }
    }

    /// Summed increment for one voxel.
    fn voxel_increment(&self, scan: &PreparedScan, key: VoxelKey) -> Vec<f64> {
        let cfg = &self.config;
        let k = cfg.num_classes;
        let radius = cfg.kernel.support_radius();
        let center = key.center(cfg.resolution);
        let b = bucket_of(center, scan.bucket_size);

        // (kernel × weight, point index)
        let mut hits: Vec<(f64, u32)> = Vec::new();
        for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    let Some(members) = scan.buckets.get(&[b[0] + di, b[1] + dj, b[2] + dk]) else {
                        continue;
                    };
                    for &idx in members {
                        let d = distance(center, scan.positions[idx as usize]);
                        if d < radius {
                            hits.push((
                                cfg.kernel.eval_unchecked(d) * scan.weights[idx as usize],
                                idx,
                            ));
                        }
                    }
                }
            }
        }

        let mut terms = Vec::with_capacity(hits.len());
        (0..k)
            .map(|c| {
                terms.clear();
                terms.extend(
                    hits.iter()
                        .map(|&(kw, idx)| kw * scan.labels[idx as usize * k + c]),
                );
                terms.sort_unstable_by(f64::total_cmp);
                terms.iter().sum()
            })
            .collect()
    }

    fn apply(&mut self, increments: Vec<(VoxelKey, Vec<f64>)>) {
        let prior = self.config.prior_alpha;
        let k = self.config.num_classes;
        for (key, inc) in increments {
            let alpha = self.cells.entry(key).or_insert_with(|| vec![prior; k]);
            for (a, d) in alpha.iter_mut().zip(inc) {
                *a += d;
            }
        }
        self.scan_count += 1;
    }

    /// Integrates one scan of world-frame points using a single thread.
    ///
    /// An invalid point rejects the whole scan and leaves the map unchanged.
    pub fn update_scan_sequential(&mut self, points: &[SemanticPoint]) -> Result<()> {
        let scan = self.prepare(points)?;
        let mut keys = Vec::new();
        for &p in &scan.positions {
            self.support_keys(p, &mut keys);
        }
        keys.sort_unstable();
        keys.dedup();
        let increments = keys
            .into_iter()
            .map(|key| (key, self.voxel_increment(&scan, key)))
            .collect();
        self.apply(increments);
        Ok(())
    }

    /// Integrates one scan, partitioning the work across voxels on the rayon
    /// pool. Produces exactly the same map as [`update_scan_sequential`].
    ///
    /// [`update_scan_sequential`]: VoxelMap::update_scan_sequential
    #[cfg(feature = "parallel")]
    pub fn update_scan_parallel(&mut self, points: &[SemanticPoint]) -> Result<()> {
        let scan = self.prepare(points)?;
        let mut keys: Vec<VoxelKey> = scan
            .positions
            .par_iter()
            .fold(Vec::new, |mut acc, &p| {
                self.support_keys(p, &mut acc);
                acc
            })
            .flatten_iter()
            .collect();
        keys.par_sort_unstable();
        keys.dedup();
        let increments = keys
            .into_par_iter()
            .map(|key| (key, self.voxel_increment(&scan, key)))
            .collect();
        self.apply(increments);
        Ok(())
    }

    /// Integrates one scan of world-frame points.
    ///
    /// Every voxel whose center lies strictly within the kernel support of a
    /// point gains `k(d)·w·ȳ`; newly touched voxels start from the prior.
    /// Runs in parallel when the `parallel` feature is enabled.
    pub fn update_scan(&mut self, points: &[SemanticPoint]) -> Result<()> {
        #[cfg(feature = "parallel")]
        {
            self.update_scan_parallel(points)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.update_scan_sequential(points)
        }
    }
}
