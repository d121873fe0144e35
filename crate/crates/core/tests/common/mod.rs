#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use esmap::map::{point_label_vector, point_weight};
use esmap::{EvidenceVector, MapConfig, SemanticPoint, VoxelKey};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

/// Kernel closed form, written out independently of the library.
pub fn kernel_ref(d: f64, length_scale: f64, signal_scale: f64) -> f64 {
    if d >= length_scale {
        return 0.0;
    }
    let r = d / length_scale;
    let v =
        (1.0 / 3.0) * (2.0 + (2.0 * PI * r).cos()) * (1.0 - r) + (2.0 * PI * r).sin() / (2.0 * PI);
    signal_scale * v.max(0.0)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// O(N·M) accumulation over every voxel of the scan's bounding box and
/// every point, in point order. No spatial index.
pub fn brute_force_update(
    cells: &mut BTreeMap<VoxelKey, Vec<f64>>,
    cfg: &MapConfig,
    points: &[SemanticPoint],
) {
    if points.is_empty() {
        return;
    }
    let res = cfg.resolution;
    let ell = cfg.kernel.length_scale;
    let mut lo = [i32::MAX; 3];
    let mut hi = [i32::MIN; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(((p.position[a] - ell) / res).floor() as i32 - 1);
            hi[a] = hi[a].max(((p.position[a] + ell) / res).floor() as i32 + 1);
        }
    }
    let prepared: Vec<(f64, Vec<f64>)> = points
        .iter()
        .map(|p| {
            (
                point_weight(p, cfg).unwrap(),
                point_label_vector(p, cfg).unwrap(),
            )
        })
        .collect();
    for i in lo[0]..=hi[0] {
        for j in lo[1]..=hi[1] {
            for k in lo[2]..=hi[2] {
                let key = VoxelKey::new(i, j, k);
                let center = [
                    (i as f64 + 0.5) * res,
                    (j as f64 + 0.5) * res,
                    (k as f64 + 0.5) * res,
                ];
                let mut inc = vec![0.0; cfg.num_classes];
                let mut touched = false;
                for (p, (w, y)) in points.iter().zip(&prepared) {
                    if *w == 0.0 {
                        continue;
                    }
                    let d = dist(center, p.position);
                    if d < ell {
                        touched = true;
                        let kv = kernel_ref(d, ell, cfg.kernel.signal_scale);
                        for c in 0..cfg.num_classes {
                            inc[c] += kv * w * y[c];
                        }
                    }
                }
                if touched {
                    let a = cells.entry(key).or_insert_with(|| cfg.prior());
                    for c in 0..cfg.num_classes {
                        a[c] += inc[c];
                    }
                }
            }
        }
    }
}

/// Random evidence points inside `[0, side)³`.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, k: usize, side: f64) -> Vec<SemanticPoint> {
    (0..n)
        .map(|_| {
            let pos = [
                rng.random_range(0.0..side),
                rng.random_range(0.0..side),
                rng.random_range(0.0..side),
            ];
            let e = (0..k)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        rng.random_range(0.0..10.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            SemanticPoint::with_evidence(pos, EvidenceVector::new(e).unwrap())
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// One draw from Dir(alpha).
pub fn sample_dirichlet(rng: &mut ChaCha8Rng, gammas: &[Gamma<f64>], out: &mut [f64]) {
    let mut s = 0.0;
    for (o, g) in out.iter_mut().zip(gammas) {
        *o = g.sample(rng);
        s += *o;
    }
    for o in out.iter_mut() {
        *o /= s;
    }
}

pub fn gammas(alpha: &[f64]) -> Vec<Gamma<f64>> {
    alpha.iter().map(|&a| Gamma::new(a, 1.0).unwrap()).collect()
}

/// Monte Carlo E‖y − p‖² for p ~ Dir(alpha).
pub fn mc_expected_sq_error(rng: &mut ChaCha8Rng, alpha: &[f64], hot: usize, n: usize) -> f64 {
    let g = gammas(alpha);
    let mut p = vec![0.0; alpha.len()];
    let mut acc = 0.0;
    for _ in 0..n {
        sample_dirichlet(rng, &g, &mut p);
        acc += p
            .iter()
            .enumerate()
            .map(|(c, pc)| {
                let y = if c == hot { 1.0 } else { 0.0 };
                (y - pc) * (y - pc)
            })
            .sum::<f64>();
    }
    acc / n as f64
}

/// Monte Carlo E[log Dir(p; alpha) − log Dir(p; 1)] for p ~ Dir(alpha),
/// using statrs' log-gamma for the normalisers.
pub fn mc_kl_to_uniform(rng: &mut ChaCha8Rng, alpha: &[f64], n: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let k = alpha.len() as f64;
    let s: f64 = alpha.iter().sum();
    let log_norm = ln_gamma(s) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(k);
    let g = gammas(alpha);
    let mut p = vec![0.0; alpha.len()];
    let mut acc = 0.0;
    for _ in 0..n {
        sample_dirichlet(rng, &g, &mut p);
        acc += alpha
            .iter()
            .zip(&p)
            .map(|(a, pc)| if *a == 1.0 { 0.0 } else { (a - 1.0) * pc.ln() })
            .sum::<f64>();
    }
    log_norm + acc / n as f64
}

/// Monte Carlo variance of p_c for p ~ Dir(alpha).
pub fn mc_variance(rng: &mut ChaCha8Rng, alpha: &[f64], c: usize, n: usize) -> f64 {
    let g = gammas(alpha);
    let mut p = vec![0.0; alpha.len()];
    let (mut m1, mut m2) = (0.0, 0.0);
    for _ in 0..n {
        sample_dirichlet(rng, &g, &mut p);
        m1 += p[c];
        m2 += p[c] * p[c];
    }
    let m1 = m1 / n as f64;
    m2 / n as f64 - m1 * m1
}
