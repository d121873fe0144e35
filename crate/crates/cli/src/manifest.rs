//! Run manifests: `key=value` records of what a command read, wrote and
//! measured.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use esmap::io::format_map_config;
use esmap::MapConfig;

#[derive(Debug, Default)]
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.set("command", command);
        m.set("tool", concat!("esmap ", env!("CARGO_PKG_VERSION")));
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn path(&mut self, key: &str, path: &Path) {
        self.set(key, path.display());
    }

    /// Every map config field under `config.`.
    pub fn config(&mut self, cfg: &MapConfig) {
        for line in format_map_config(cfg).lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.set(&format!("config.{k}"), v);
            }
        }
    }

    /// Prefixes each `key=value` line of `block` with `prefix`.
    pub fn block(&mut self, prefix: &str, block: &str) {
        for line in block.lines() {
            if let Some((k, v)) = line.split_once('=') {
                self.set(&format!("{prefix}{k}"), v);
            }
        }
    }

    pub fn duration(&mut self, d: Duration) {
        self.set("duration_s", format!("{:.6}", d.as_secs_f64()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }
}
