//! CSV and JSON result files.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::format::sig12;
use super::to_flat_config;
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, ExperimentOutput, Metrics};
use crate::quantum::{Bit, Direction};
use crate::scalar::Scalar;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_COLUMNS: [&str; 9] = [
    "trial",
    "step",
    "p0_before",
    "measured_bit",
    "chosen_machine",
    "reward",
    "update_direction",
    "update_magnitude",
    "p0_after",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub root_seed: u64,
    pub artifact_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub trial: usize,
    pub step: usize,
    pub p0_before: f64,
    pub measured: Vec<Bit>,
    pub chosen: Vec<Bit>,
    pub reward: Vec<Bit>,
    pub update_direction: Option<Direction>,
    pub update_magnitude: Option<f64>,
    pub p0_after: f64,
}

/// Everything one run emits: enough metadata to rerun it, every step, and the
/// summary metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecordSet {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
    /// Absent only for runs with no steps.
    pub summary: Option<Metrics>,
}

impl OutputRecordSet {
    pub fn new<T: Scalar>(config: &ExperimentConfig, output: &ExperimentOutput<T>) -> Self {
        let rows = output
            .trajectories
            .iter()
            .flat_map(|t| {
                t.records.iter().map(move |r| Row {
                    trial: t.trial,
                    step: r.round,
                    p0_before: r.p_before.to_f64_lossless(),
                    measured: r.measured.clone(),
                    chosen: r.chosen.clone(),
                    reward: r.rewards.clone(),
                    update_direction: r.update.map(|u| u.direction),
                    update_magnitude: r.update.map(|u| u.magnitude.to_f64_lossless()),
                    p0_after: r.p_after.to_f64_lossless(),
                })
            })
            .collect();
        Self {
            metadata: Metadata::for_config(config),
            rows,
            summary: Some(output.metrics.clone()),
        }
    }

    /// A record set with metadata only.
    pub fn empty(config: &ExperimentConfig) -> Self {
        Self {
            metadata: Metadata::for_config(config),
            rows: Vec::new(),
            summary: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in to_flat_config(&self.metadata.config).lines() {
            writeln!(out, "# {line}").unwrap();
        }
        writeln!(out, "# artifact_version = \"{}\"", self.metadata.artifact_version).unwrap();
        writeln!(out, "{}", CSV_COLUMNS.join(",")).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.trial,
                r.step,
                sig12(r.p0_before),
                bit_list(&r.measured),
                bit_list(&r.chosen),
                bit_list(&r.reward),
                r.update_direction.map_or("none", Direction::as_str),
                r.update_magnitude.map(sig12).unwrap_or_default(),
                sig12(r.p0_after),
            )
            .unwrap();
        }
        if let Some(m) = &self.summary {
            write_summary(&mut out, m);
        }
        out
    }
}

impl Metadata {
    fn for_config(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            root_seed: config.seed,
            artifact_version: ARTIFACT_VERSION.to_owned(),
        }
    }
}

fn bit_list(bits: &[Bit]) -> String {
    bits.iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_owned(), sig12)
}

fn write_summary(out: &mut String, m: &Metrics) {
    let list = |v: &[f64]| v.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(";");
    let lines = [
        ("trials", m.trials.to_string()),
        ("horizon", m.horizon.to_string()),
        ("window", m.window.to_string()),
        ("mean_reward_per_user", list(&m.mean_reward_per_user)),
        (
            "mean_regret_per_user",
            m.mean_regret_per_user
                .as_deref()
                .map_or_else(|| "undefined".to_owned(), list),
        ),
        ("mean_regret", opt(m.mean_regret)),
        ("total_conflicts", m.total_conflicts.to_string()),
        ("final_p0_mean", sig12(m.final_p0_mean)),
        ("final_p0_std", sig12(m.final_p0_std)),
        ("best_arm_fraction_mean", opt(m.best_arm_fraction_mean)),
        ("zero_fraction_mean", sig12(m.zero_fraction_mean)),
    ];
    for (k, v) in lines {
        writeln!(out, "#! summary.{k} = {v}").unwrap();
    }
}

/// Where results go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(std::path::PathBuf),
}

/// Writes a record set in the requested format.
pub fn emit(records: &OutputRecordSet, format: OutputFormat, destination: &Destination) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => records.to_csv(),
        OutputFormat::Json => records.to_json()?,
    };
    write_text(&text, destination)
}

pub(crate) fn write_text(text: &str, destination: &Destination) -> Result<()> {
    match destination {
        Destination::Stdout => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
        Destination::File(path) => std::fs::write(path, text)?,
    }
    Ok(())
}
