//! Flat `key=value` text files.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed `key=value` lines in file order. `#` starts a comment.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    path: String,
    entries: Vec<(String, String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(
                    path,
                    n + 1,
                    format!("expected key=value, got '{line}'"),
                ));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::parse(path, n + 1, "empty key"));
            }
            if entries.iter().any(|(e, _, _)| e == k) {
                return Err(Error::parse(path, n + 1, format!("duplicate key '{k}'")));
            }
            entries.push((k.to_string(), v.to_string(), n + 1));
        }
        Ok(Self {
            path: path.display().to_string(),
            entries,
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    /// Parses `key` if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some((_, v, line)) = self.entries.iter().find(|(k, _, _)| k == key) else {
            return Ok(None);
        };
        v.parse().map(Some).map_err(|e| Error::Parse {
            path: self.path.clone(),
            line: *line,
            msg: format!("bad value for '{key}': {e}"),
        })
    }

    /// Rejects keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for (k, _, line) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Parse {
                    path: self.path.clone(),
                    line: *line,
                    msg: format!("unknown key '{k}', expected one of: {}", allowed.join(", ")),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let kv = KeyValues::parse("# hi\n a = 1 \n\nb=x # trailing\n", Path::new("t")).unwrap();
        assert_eq!(kv.get::<u32>("a").unwrap(), Some(1));
        assert_eq!(kv.raw("b"), Some("x"));
        assert_eq!(kv.get::<u32>("c").unwrap(), None);
        assert!(kv.get::<u32>("b").is_err());
        assert!(kv.only(&["a"]).is_err());
        assert!(kv.only(&["a", "b"]).is_ok());
    }

    #[test]
    fn rejects_garbage() {
        assert!(KeyValues::parse("novalue\n", Path::new("t")).is_err());
        assert!(KeyValues::parse("a=1\na=2\n", Path::new("t")).is_err());
        assert!(KeyValues::parse("=2\n", Path::new("t")).is_err());
    }
}
