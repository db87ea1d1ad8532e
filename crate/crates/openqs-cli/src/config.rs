//! Flat key-value configuration with command-line precedence.
//!
//! A config file holds `key = value` lines (`#` starts a comment). Keys use
//! the same kebab-case names as the command-line flags; a flag given on the
//! command line always wins over the file.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| format!("config line {} is not `key = value`", lineno + 1))?;
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Config { values })
    }

    /// Resolve one setting: command line beats config file beats default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|e| format!("config key `{key}`: {e}")),
            None => Ok(default),
        }
    }

    /// Optional setting with no default.
    pub fn resolve_opt<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config key `{key}`: {e}")),
            None => Ok(None),
        }
    }
}

/// Comma-separated list of integers (e.g. `8,16,32`).
pub fn parse_usize_list(raw: &str) -> Result<Vec<usize>, String> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad list entry `{tok}`: {e}"))
        })
        .collect()
}
