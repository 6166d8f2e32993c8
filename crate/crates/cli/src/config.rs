//! Run configuration: flat `key=value` text shared by config files and the
//! canonical form embedded in every output.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Every key a config file or flag may set.
pub const KNOWN_KEYS: &[&str] = &[
    "subcommand", "experiment", "q", "chi", "xi", "sigma", "t", "T", "step", "smooth", "X",
    "bump", "Tmin", "Tmax", "Xmin", "Xmax", "points", "qt", "psi", "v", "c", "a", "b", "u",
    "k", "budget", "samples", "seed", "out", "threads",
];

/// Keys that steer execution without affecting values; kept out of the canonical text.
const EXECUTION_ONLY: &[&str] = &["out", "threads"];

/// Validated key=value settings. File values are overridden by flags.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value, got {raw:?}", i + 1))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            bail!("config line {}: unknown key {key:?}", i + 1);
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Layers `overrides` on top of the optional config-file text.
    pub fn from_sources(file_text: Option<&str>, overrides: Vec<(&str, String)>) -> Result<Self> {
        let mut entries = match file_text {
            Some(text) => parse_text(text)?,
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            debug_assert!(KNOWN_KEYS.contains(&k), "unregistered key {k}");
            entries.insert(k.to_string(), v);
        }
        Ok(Self { entries })
    }

    /// Parses canonical or hand-written text.
    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self {
            entries: parse_text(text)?,
        })
    }

    /// Sorted `key=value` lines, one per setting, execution-only keys omitted.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            if !EXECUTION_ONLY.contains(&k.as_str()) {
                out.push_str(k);
                out.push('=');
                out.push_str(v);
                out.push('\n');
            }
        }
        out
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set_default(&mut self, key: &str, value: impl Display) {
        self.entries
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("invalid value {v:?} for --{key}: {e}")),
        }
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)?
            .with_context(|| format!("missing required setting --{key}"))
    }

    /// Comma-separated list, e.g. `--T 50,100,200` or `--bump 1,2`.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.entries.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("invalid number {s:?} in --{key}: {e}"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let cfg = RunConfig::from_sources(
            Some("# comment\nq = 4\nchi=1\nxi=1/3\nthreads=8\n"),
            vec![("T", "50,100".into()), ("q", "5".into())],
        )
        .unwrap();
        assert_eq!(cfg.raw("q"), Some("5"));
        let text = cfg.canonical();
        assert_eq!(text, "T=50,100\nchi=1\nq=5\nxi=1/3\n");
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back.canonical(), text);
        assert_eq!(back.list("T").unwrap(), Some(vec![50.0, 100.0]));
    }

    #[test]
    fn rejects_unknown_and_malformed_lines() {
        assert!(RunConfig::parse("bogus=1").is_err());
        assert!(RunConfig::parse("q 4").is_err());
        let cfg = RunConfig::parse("q=four").unwrap();
        assert!(cfg.get::<u64>("q").is_err());
        assert!(cfg.require::<u64>("chi").is_err());
    }
}
