//! Binary map files.
//!
//! Layout, all integers and floats little-endian:
//!
//! | field          | type              |
//! |----------------|-------------------|
//! | magic          | `b"ESMMAP1"`      |
//! | num_classes    | u32               |
//! | resolution     | f64               |
//! | prior_alpha    | f64               |
//! | length_scale   | f64               |
//! | signal_scale   | f64               |
//! | weight_floor   | f64               |
//! | label_mode     | u8 (0 hard, 1 soft) |
//! | weighting      | u8 (0 uniform, 1 one_minus_vacuity) |
//! | scan_count     | u64               |
//! | num_records    | u64               |
//! | records        | `i32 i, i32 j, i32 k, K × f64 α` sorted by key |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::map::{LabelMode, MapConfig, VoxelKey, VoxelMap, Weighting};

pub const MAP_MAGIC: &[u8; 7] = b"ESMMAP1";
const MAGIC_STEM: &[u8; 6] = b"ESMMAP";

pub fn encode_map(map: &VoxelMap) -> Vec<u8> {
    let cfg = map.config();
    let k = cfg.num_classes;
    let cells = map.sorted_cells();
    let mut out = Vec::with_capacity(74 + cells.len() * (12 + 8 * k));
    out.extend_from_slice(MAP_MAGIC);
    out.extend_from_slice(&(k as u32).to_le_bytes());
    for v in [
        cfg.resolution,
        cfg.prior_alpha,
        cfg.kernel.length_scale,
        cfg.kernel.signal_scale,
        cfg.weight_floor,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(match cfg.label_mode {
        LabelMode::HardOneHot => 0,
        LabelMode::SoftProbs => 1,
    });
    out.push(match cfg.weighting {
        Weighting::Uniform => 0,
        Weighting::OneMinusVacuity => 1,
    });
    out.extend_from_slice(&map.scan_count().to_le_bytes());
    out.extend_from_slice(&(cells.len() as u64).to_le_bytes());
    for (key, alpha) in cells {
        for idx in [key.i, key.j, key.k] {
            out.extend_from_slice(&idx.to_le_bytes());
        }
        for a in alpha {
            out.extend_from_slice(&a.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self.buf.get(self.pos..end).ok_or_else(|| {
            Error::Format(format!(
                "truncated while reading {what} at byte {}",
                self.pos
            ))
        })?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }
}

pub fn decode_map(bytes: &[u8]) -> Result<VoxelMap> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 7] = r.take("magic")?;
    if &magic != MAP_MAGIC {
        if magic.starts_with(MAGIC_STEM) {
            return Err(Error::Format(format!(
                "unsupported map version '{}'",
                String::from_utf8_lossy(&magic[6..])
            )));
        }
        return Err(Error::Format("not a map file".into()));
    }
    let k = r.u32("num_classes")? as usize;
    let resolution = r.f64("resolution")?;
    let prior_alpha = r.f64("prior_alpha")?;
    let length_scale = r.f64("length_scale")?;
    let signal_scale = r.f64("signal_scale")?;
    let weight_floor = r.f64("weight_floor")?;
    let label_mode = match r.u8("label_mode")? {
        0 => LabelMode::HardOneHot,
        1 => LabelMode::SoftProbs,
        v => return Err(Error::Format(format!("unknown label_mode tag {v}"))),
    };
    let weighting = match r.u8("weighting")? {
        0 => Weighting::Uniform,
        1 => Weighting::OneMinusVacuity,
        v => return Err(Error::Format(format!("unknown weighting tag {v}"))),
    };
    let config = MapConfig {
        resolution,
        num_classes: k,
        prior_alpha,
        kernel: KernelParams {
            length_scale,
            signal_scale,
        },
        weight_floor,
        label_mode,
        weighting,
    };
    config
        .validate()
        .map_err(|e| Error::Format(format!("invalid config block: {e}")))?;
    let scan_count = r.u64("scan_count")?;
    let n = r.u64("num_records")?;

    let record_len = 12 + 8 * k as u64;
    let remaining = (bytes.len() - r.pos) as u64;
    if n.checked_mul(record_len) != Some(remaining) {
        return Err(Error::Format(format!(
            "{n} records of {record_len} bytes do not match the {remaining} bytes remaining"
        )));
    }
    let mut cells = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let key = VoxelKey::new(r.i32("key")?, r.i32("key")?, r.i32("key")?);
        let alpha = (0..k).map(|_| r.f64("alpha")).collect::<Result<Vec<_>>>()?;
        cells.push((key, alpha));
    }
    VoxelMap::from_parts(config, cells, scan_count).map_err(|e| Error::Format(e.to_string()))
}

pub fn serialize_map(map: &VoxelMap, path: &Path) -> Result<()> {
    fs::write(path, encode_map(map))?;
    Ok(())
}

pub fn deserialize_map(path: &Path) -> Result<VoxelMap> {
    decode_map(&fs::read(path)?)
}
