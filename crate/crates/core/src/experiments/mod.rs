//! Seeded, configured experiment runs and their persisted results.
//!
//! A run is described by one JSON [`ExperimentConfig`]; command-line flags
//! override fields of the file, and fields absent from both fall back to the
//! built-in desk-scale default of the experiment. Every random draw comes
//! from a stream derived from `(seed, label)` with labels that name the
//! replica, never the thread, so result values do not depend on the thread
//! count.
//!
//! Outputs in `output_dir`: `result.csv` or `result.json` (the row table
//! and, for JSON, the summary) and `run.json`, the [`RunRecord`]. Only
//! `run.json` carries wall time.

mod registry;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::permutation::ActivityConvention;
use crate::rng::RNG_ALGORITHM;
use crate::torus::make_dims;

pub use registry::*;

pub const EXPERIMENTS: [&str; 8] = [
    "oracle-equivalence",
    "global-shift-decay",
    "glauber-stationarity",
    "splitmerge-invariant",
    "pd1-convergence",
    "contact-concentration",
    "gapchain-hitting",
    "strand-separation",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(invalid("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

/// One experiment invocation. Unset fields take the experiment's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cprime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Worker threads; unset uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Sweep over `m`; a set `m` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_values: Option<Vec<usize>>,
    /// Sweep over `a`; a set `a` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_values: Option<Vec<f64>>,
    /// Gap-chain activity; defaults to the activity of `a` when `a` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j1_values: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_max_values: Option<Vec<usize>>,
    /// Separation constant `D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// PD(1) reference sample size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<ActivityConvention>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// `m_values` unless `m` is set.
    pub(crate) fn ms(&self, default: &[usize]) -> Vec<usize> {
        match (self.m, &self.m_values) {
            (Some(m), _) => vec![m],
            (None, Some(v)) => v.clone(),
            (None, None) => default.to_vec(),
        }
    }

    pub(crate) fn a_list(&self, default: &[f64]) -> Vec<f64> {
        match (self.a, &self.a_values) {
            (Some(a), _) => vec![a],
            (None, Some(v)) => v.clone(),
            (None, None) => default.to_vec(),
        }
    }

    /// Checks the experiment name and the parameter preconditions of the
    /// modules it will call, without running anything.
    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::UnknownExperiment(self.experiment.clone()));
        }
        for a in self.a.iter().chain(self.a_values.iter().flatten()) {
            if !(*a > 0.0 && *a < 0.5) {
                return Err(invalid("a", format!("need 0 < a < 1/2, got {a}")));
            }
        }
        if let Some(c) = self.cprime {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid("cprime", format!("need a positive constant, got {c}")));
            }
        }
        for (name, v) in [("samples", self.samples), ("reps", self.reps), ("reference_samples", self.reference_samples)] {
            if v == Some(0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be positive"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid("lambda", format!("need a positive activity, got {l}")));
            }
        }
        let cprime = self.cprime.unwrap_or(1.0);
        let gamma_needed = match self.experiment.as_str() {
            "pd1-convergence" | "splitmerge-invariant" => Some(1),
            "contact-concentration" => Some(2),
            _ => None,
        };
        let default_ms = default_ms(&self.experiment);
        let ms = self.ms(default_ms);
        for &m in &ms {
            match self.experiment.as_str() {
                "oracle-equivalence" | "global-shift-decay" if !(3..=24).contains(&m) => {
                    return Err(invalid("m", format!("column oracle needs 3 <= m <= 24, got {m}")));
                }
                "oracle-equivalence" | "global-shift-decay" | "gapchain-hitting" => {}
                _ => {
                    if m < 3 {
                        return Err(invalid("m", format!("need m >= 3, got {m}")));
                    }
                    let dims = make_dims(m, cprime)?;
                    if let Some(g) = gamma_needed {
                        dims.require_gamma(g)?;
                    }
                }
            }
        }
        if self.experiment == "gapchain-hitting" {
            let j2 = self.j2.unwrap_or(200);
            for &j1 in self.j1_values.as_deref().unwrap_or(&[2]) {
                if j1 <= 1 || j1 > j2 {
                    return Err(invalid("j1_values", format!("need 1 < j1 <= j2, got j1 = {j1}, j2 = {j2}")));
                }
            }
            for &i in self.i_max_values.as_deref().unwrap_or(&[2]) {
                if i < 2 {
                    return Err(invalid("i_max_values", "need i_max >= 2"));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn default_ms(experiment: &str) -> &'static [usize] {
    match experiment {
        "oracle-equivalence" => &[3, 4, 5, 6, 7, 8],
        "global-shift-decay" => &[4, 6, 8, 10, 12],
        "glauber-stationarity" => &[64],
        "contact-concentration" => &[4096, 8192, 16384],
        _ => &[4096],
    }
}

/// Row table and summary of an experiment, before persistence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub rows: serde_json::Value,
    pub summary: serde_json::Value,
    #[serde(skip)]
    pub csv: String,
}

impl ExperimentResult {
    pub(crate) fn from_report<R: Report>(experiment: &str, report: &R) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in report.rows() {
            w.serialize(row)?;
        }
        let csv = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("csv output is utf-8");
        Ok(Self {
            experiment: experiment.to_string(),
            rows: serde_json::to_value(report.rows())?,
            summary: serde_json::to_value(report)?,
            csv,
        })
    }

    /// Bytes of `result.csv` or `result.json`.
    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>> {
        Ok(match format {
            OutputFormat::Csv => self.csv.clone().into_bytes(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self)?;
                s.push('\n');
                s.into_bytes()
            }
        })
    }
}

/// A typed experiment report: per-row table plus summary fields.
pub trait Report: Serialize {
    type Row: Serialize;
    fn rows(&self) -> &[Self::Row];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub result: ExperimentResult,
    pub wall_time_secs: f64,
    pub version: String,
    pub rng_algorithm: String,
}

/// Runs the experiment without writing anything.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let go = || registry::dispatch(config);
    match config.threads {
        None => go(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?
            .install(go),
    }
}

/// Runs the experiment and, when `output_dir` is set, writes its files.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let result = execute(config)?;
    let record = RunRecord {
        config: config.clone(),
        result,
        wall_time_secs: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
    };
    if let Some(dir) = &config.output_dir {
        write_outputs(&record, dir)?;
    }
    Ok(record)
}

pub fn result_file_name(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "result.csv",
        OutputFormat::Json => "result.json",
    }
}

pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let format = record.config.format;
    fs::write(dir.join(result_file_name(format)), record.result.render(format)?)?;
    let mut s = serde_json::to_string_pretty(record)?;
    s.push('\n');
    fs::write(dir.join("run.json"), s)?;
    Ok(())
}
