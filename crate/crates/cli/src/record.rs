//! Run records and the per-run output directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::CliError;

pub const DIMENSIONLESS: &str = "dimensionless";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: f64,
    pub unit: String,
}

/// A pass/fail comparison against a configured limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Upper bound, exclusive.
    pub limit: f64,
    /// Lower bound, inclusive, for range checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < limit`.
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            lower: None,
            pass: value < limit,
        }
    }

    /// Passes when `lower <= value <= upper`.
    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit: upper,
            lower: Some(lower),
            pass: value >= lower && value <= upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub command: String,
    pub config_hash: String,
    pub metrics: BTreeMap<String, Metric>,
    pub checks: Vec<Check>,
    /// Members of a sweep that failed, with their error messages.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    /// Emitted files, relative to the run directory.
    pub files: Vec<String>,
}

impl RunRecord {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).map(|m| m.value)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Accumulates a run's outputs inside `<out>/<command>-<hash prefix>/`.
#[derive(Debug)]
pub struct RunDir {
    dir: PathBuf,
    record: RunRecord,
}

impl RunDir {
    pub fn create(out: &Path, command: &str, cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let hash = cfg.hash();
        let run_id = format!("{command}-{}", &hash[..12]);
        let dir = out.join(&run_id);
        fs::create_dir_all(&dir).map_err(|source| CliError::Output {
            path: dir.clone(),
            source,
        })?;
        let mut run = Self {
            dir,
            record: RunRecord {
                run_id,
                command: command.into(),
                config_hash: hash,
                metrics: BTreeMap::new(),
                checks: Vec::new(),
                failures: Vec::new(),
                warnings: Vec::new(),
                files: Vec::new(),
            },
        };
        run.write_text("config.toml", &cfg.to_toml())?;
        Ok(run)
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn metric(&mut self, key: &str, value: f64, unit: &str) {
        self.record.metrics.insert(
            key.into(),
            Metric {
                value,
                unit: unit.into(),
            },
        );
    }

    pub fn dimensionless(&mut self, key: &str, value: f64) {
        self.metric(key, value, DIMENSIONLESS);
    }

    pub fn check(&mut self, check: Check) {
        if !check.pass {
            log::warn!("check {} failed: {:.3e} vs limit {:.3e}", check.name, check.value, check.limit);
        }
        self.record.checks.push(check);
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.record.warnings.push(message);
    }

    pub fn failure(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::error!("{message}");
        self.record.failures.push(message);
    }

    fn target(&mut self, name: &str) -> PathBuf {
        if !self.record.files.iter().any(|f| f == name) {
            self.record.files.push(name.into());
        }
        self.dir.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.target(name);
        fs::write(&path, text).map_err(|source| CliError::Output { path, source })
    }

    /// Open a file for a writer-based emitter.
    pub fn writer(&mut self, name: &str) -> Result<std::io::BufWriter<fs::File>, CliError> {
        let path = self.target(name);
        fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|source| CliError::Output { path, source })
    }

    /// CSV from a header and rows of numbers.
    pub fn write_table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    pub fn snapshot(&mut self, name: &str, snap: &gravloc_core::Snapshot) -> Result<(), CliError> {
        let w = self.writer(name)?;
        snap.write_to(w)?;
        Ok(())
    }

    /// Leave `error.json` behind for a run that stopped early.
    pub fn fail(mut self, err: &CliError) {
        let report = serde_json::json!({
            "run_id": self.record.run_id,
            "error": err.kind(),
            "exit_code": err.exit_code(),
            "message": err.to_string(),
        });
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = self.write_text("error.json", &(text + "\n")) {
            log::error!("{e}");
        }
    }

    /// Write `summary.json` and return the record.
    pub fn finish(mut self) -> Result<RunRecord, CliError> {
        self.target("summary.json");
        let mut text = serde_json::to_string_pretty(&self.record).expect("record serializes");
        text.push('\n');
        let path = self.dir.join("summary.json");
        let mut f = fs::File::create(&path).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        f.write_all(text.as_bytes())
            .map_err(|source| CliError::Output { path, source })?;
        Ok(self.record)
    }
}

/// Shared gnuplot preamble writing to a PNG next to the script.
pub fn gnuplot_header(title: &str, output: &str) -> String {
    format!(
        "set terminal pngcairo size 900,600\nset output '{output}'\nset datafile separator ','\nset key autotitle columnhead\nset title '{title}'\nset grid\n"
    )
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// (max − min) / mean.
pub fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}
