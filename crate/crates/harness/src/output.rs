//! CSV tables and key = value manifests.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::seeds::{self, Scope, Stream};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    let x = x + 0.0;
    format!("{x:.16e}")
}

/// Label for per-chi file names, e.g. `radial_0.05.csv`.
pub fn chi_label(chi: f64) -> String {
    format!("{}", chi + 0.0)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Writes a header and rows to `path`.
pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|c| c.as_ref()))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads a CSV written by [`write_csv`] into header and string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

pub fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Ordered `key = value` lines describing one command invocation.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let mut m = Self::default();
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("command", command);
        m.set("start_unix", format!("{:.3}", unix_seconds()));
        m.set("master_seed", config.run.seed);
        m.echo_config(config);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn echo_config(&mut self, config: &RunConfig) {
        let table: toml::Table = toml::from_str(&config.to_toml()).expect("configuration re-parses");
        for (section, body) in &table {
            if let toml::Value::Table(keys) = body {
                for (key, value) in keys {
                    self.set(&format!("config.{section}.{key}"), value);
                }
            }
        }
    }

    /// Records the stream ids a run draws from.
    pub fn streams(&mut self, scope: Scope) {
        let prefix = match scope {
            Scope::CalibrationFlow => "stream.calibration_flow".to_string(),
            Scope::CalibrationReplica(i) => format!("stream.calibration_replica_{i}"),
            Scope::Point(chi) => format!("stream.chi_{}", chi_label(chi)),
        };
        for s in Stream::ALL {
            self.set(&format!("{prefix}.{}", s.name()), seeds::stream_id(scope, s));
        }
    }

    pub fn finish(&mut self) {
        self.set("end_unix", format!("{:.3}", unix_seconds()));
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Self { entries }
    }

    pub fn write(&mut self, path: &Path) -> Result<()> {
        self.finish();
        std::fs::write(path, self.to_text()).map_err(|e| HarnessError::io(path, e))
    }
}

/// Standard locations inside an output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn calibration(&self) -> PathBuf {
        self.file("calibration.csv")
    }

    pub fn snapshot_dir(&self, chi: f64) -> PathBuf {
        self.root.join(format!("snapshots_{}", chi_label(chi)))
    }

    pub fn per_chi(&self, stem: &str, chi: f64) -> PathBuf {
        self.file(&format!("{stem}_{}.csv", chi_label(chi)))
    }
}
