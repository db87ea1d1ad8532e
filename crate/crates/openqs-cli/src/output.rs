//! Deterministic experiment outputs: one CSV per series and one JSON
//! summary per run.
//!
//! CSV files start with a single `#` header line carrying the tool version
//! and a timestamp — the only non-deterministic byte in the file; everything
//! after it (the column header and the data rows) is byte-identical across
//! reruns with the same config and seed. Floats are printed with Rust's
//! shortest round-trip formatting, `.` decimal point, no locale.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OPENQS_OUT_DIR";

pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// In-memory CSV: rows are buffered and written once, in order, at the end.
pub struct Csv {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Csv {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn write(&self, path: &Path, timestamp_micros: u128) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = std::fs::File::create(path)?;
        writeln!(
            file,
            "# openq {} generated-at {}",
            env!("CARGO_PKG_VERSION"),
            timestamp_micros
        )?;
        writeln!(file, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(file, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// JSON summary of one experiment run.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub experiment: String,
    pub version: String,
    pub generated_at_micros: u128,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, String>,
    pub results: BTreeMap<String, serde_json::Value>,
    pub assertions: Vec<Assertion>,
}

impl Summary {
    pub fn new(experiment: &str, seed: Option<u64>, timestamp_micros: u128) -> Self {
        Summary {
            schema_version: SUMMARY_SCHEMA_VERSION,
            experiment: experiment.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at_micros: timestamp_micros,
            seed,
            config: BTreeMap::new(),
            results: BTreeMap::new(),
            assertions: Vec::new(),
        }
    }

    pub fn config_kv(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable result"),
        );
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let text = serde_json::to_string_pretty(self).expect("serializable summary");
        std::fs::write(path, text)
    }
}

pub fn now_micros() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_micros())
        .unwrap_or(0)
}
