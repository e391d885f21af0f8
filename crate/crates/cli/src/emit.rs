use crate::config::{RunConfig, SCHEMA};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// The common frame of every JSON report.
#[derive(Serialize, Deserialize)]
pub struct Report<R> {
    pub schema: String,
    pub command: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub pass: bool,
    pub traces: Vec<String>,
    pub result: R,
}

pub struct Emitter {
    dir: PathBuf,
    config: RunConfig,
    hash: String,
    traces: Vec<String>,
}

/// Shortest round-trip text for a float; `nan`, `inf`, `-inf` otherwise.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        serde_json::to_string(&v).expect("finite float")
    }
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

impl Emitter {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let dir = config.out_dir.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let hash = config.hash();
        Ok(Self { dir, config, hash, traces: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `<command>_<name>.csv` and returns its file name.
    pub fn trace(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
        let file = format!("{}_{}.csv", self.config.command, file_stem(name));
        let path = self.dir.join(&file);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.traces.push(file.clone());
        Ok(file)
    }

    /// `(x, value)` pairs as a two-column trace.
    pub fn pairs(&mut self, name: &str, header: [&str; 2], points: &[(f64, f64)]) -> Result<Option<String>> {
        if points.is_empty() {
            return Ok(None);
        }
        self.trace(name, &header, points.iter().map(|p| vec![num(p.0), num(p.1)])).map(Some)
    }

    /// Writes `<name>.json` with the traces written so far.
    pub fn report<R: Serialize>(&mut self, name: &str, pass: bool, result: &R) -> Result<PathBuf> {
        let report = Report {
            schema: SCHEMA.into(),
            command: self.config.command.clone(),
            config_hash: self.hash.clone(),
            config: self.config.clone(),
            pass,
            traces: std::mem::take(&mut self.traces),
            result,
        };
        let path = self.dir.join(format!("{}.json", file_stem(name)));
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
