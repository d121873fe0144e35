//! Map configuration as `key=value` text, one field per line.

use std::fs;
use std::path::Path;

use super::kv::KeyValues;
use crate::error::{Error, Result};
use crate::map::MapConfig;

pub const CONFIG_KEYS: &[&str] = &[
    "resolution",
    "num_classes",
    "prior_alpha",
    "length_scale",
    "signal_scale",
    "weight_floor",
    "label_mode",
    "weighting",
];

/// Builds a config from parsed pairs. Omitted fields keep their defaults;
/// `num_classes` is required.
pub fn map_config_from_kv(kv: &KeyValues) -> Result<MapConfig> {
    kv.only(CONFIG_KEYS)?;
    let k = kv
        .get::<usize>("num_classes")?
        .ok_or_else(|| Error::validation("config is missing num_classes"))?;
    let mut cfg = MapConfig::new(k);
    if let Some(v) = kv.get("resolution")? {
        cfg.resolution = v;
    }
    if let Some(v) = kv.get("prior_alpha")? {
        cfg.prior_alpha = v;
    }
    if let Some(v) = kv.get("length_scale")? {
        cfg.kernel.length_scale = v;
    }
    if let Some(v) = kv.get("signal_scale")? {
        cfg.kernel.signal_scale = v;
    }
    if let Some(v) = kv.get("weight_floor")? {
        cfg.weight_floor = v;
    }
    if let Some(v) = kv.get("label_mode")? {
        cfg.label_mode = v;
    }
    if let Some(v) = kv.get("weighting")? {
        cfg.weighting = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_map_config(text: &str, path: &Path) -> Result<MapConfig> {
    map_config_from_kv(&KeyValues::parse(text, path)?)
}

pub fn read_map_config(path: &Path) -> Result<MapConfig> {
    parse_map_config(&fs::read_to_string(path)?, path)
}

/// Every field, in [`CONFIG_KEYS`] order.
pub fn format_map_config(cfg: &MapConfig) -> String {
    format!(
        "resolution={}\nnum_classes={}\nprior_alpha={}\nlength_scale={}\nsignal_scale={}\nweight_floor={}\nlabel_mode={}\nweighting={}\n",
        cfg.resolution,
        cfg.num_classes,
        cfg.prior_alpha,
        cfg.kernel.length_scale,
        cfg.kernel.signal_scale,
        cfg.weight_floor,
        cfg.label_mode,
        cfg.weighting,
    )
}

pub fn write_map_config(cfg: &MapConfig, path: &Path) -> Result<()> {
    fs::write(path, format_map_config(cfg))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{LabelMode, Weighting};

    #[test]
    fn round_trip() {
        let mut cfg = MapConfig::new(5);
        cfg.resolution = 0.2;
        cfg.kernel.length_scale = 0.45;
        cfg.weight_floor = 0.05;
        cfg.label_mode = LabelMode::SoftProbs;
        cfg.weighting = Weighting::Uniform;
        let back = parse_map_config(&format_map_config(&cfg), Path::new("c")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn defaults_and_errors() {
        let cfg = parse_map_config("num_classes=3\n", Path::new("c")).unwrap();
        assert_eq!(cfg, MapConfig::new(3));
        assert!(parse_map_config("resolution=0.1\n", Path::new("c")).is_err());
        assert!(parse_map_config("num_classes=3\nbogus=1\n", Path::new("c")).is_err());
        assert!(parse_map_config("num_classes=3\nweighting=maybe\n", Path::new("c")).is_err());
        assert!(parse_map_config("num_classes=3\nresolution=-1\n", Path::new("c")).is_err());
    }
}
