//! Command-line front end: argument and config-file parsing, scenario
//! dispatch and result emission.
//!
//! Settings are layered: scenario defaults, then the optional `--config`
//! file, then flags. A config file is a flat `key = value` document using the
//! field names of [`ExperimentConfig`]; the metadata block of an emitted CSV
//! file (or the `metadata` object of an emitted JSON file) is accepted as a
//! config file too, which replays the run exactly.

mod emit;
mod format;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize};

pub use emit::{
    emit, Destination, Metadata, OutputFormat, OutputRecordSet, Row, ARTIFACT_VERSION,
    CSV_COLUMNS,
};
pub use format::sig12;

use crate::bandit::DriftMode;
use crate::error::{Error, Result};
use crate::harness::{
    chi_square_pairs_test, frequency_test, run_experiment, run_trial, ExperimentConfig, Scenario,
};
use crate::quantum::Bit;

/// Environment variable naming the directory results are written to when
/// `--out` is not given.
pub const OUTPUT_DIR_ENV: &str = "QUBIT_BANDIT_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "qubit-bandit",
    version,
    about = "Qubit-measurement decisions for two-machine bandit games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure a fixed qubit repeatedly and test the bit stream.
    Qrng(QrngArgs),
    /// Single agent learning which of two machines pays more.
    Single(LearnerArgs),
    /// Two competing users kept on different machines by an anticorrelated pair.
    DuoConflict(DuoArgs),
    /// Two cooperating users on paired machines sharing a correlated pair.
    Coop(LearnerArgs),
    /// n users sharing a GHZ state with majority updates.
    Ghz(GhzArgs),
}

#[derive(Debug, Args)]
struct QrngArgs {
    /// Number of bits to emit.
    #[arg(long, default_value_t = 100_000)]
    count: usize,
    /// Probability of measuring 0.
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat key = value config file, or a previously emitted CSV/JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reward probability of machine 0.
    #[arg(long)]
    p1: Option<f64>,
    /// Reward probability of machine 1.
    #[arg(long)]
    p2: Option<f64>,
    /// Initial probability of measuring 0.
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    drift_mode: Option<DriftModeArg>,
    /// Per-round step of the reward-probability random walk.
    #[arg(long)]
    drift_step: Option<f64>,
    /// Trailing share of the horizon used for convergence statistics.
    #[arg(long)]
    window_fraction: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum DriftModeArg {
    None,
    BoundedRandomWalk,
}

impl From<DriftModeArg> for DriftMode {
    fn from(a: DriftModeArg) -> Self {
        match a {
            DriftModeArg::None => DriftMode::None,
            DriftModeArg::BoundedRandomWalk => DriftMode::BoundedRandomWalk,
        }
    }
}

#[derive(Debug, Args)]
struct LearnerArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Step constant added to or removed from the probability of 0.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Args)]
struct DuoArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First-branch probability of the anticorrelated pair (0.5 is fair).
    #[arg(long)]
    p_first: Option<f64>,
}

#[derive(Debug, Args)]
struct GhzArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of users.
    #[arg(long)]
    n: Option<usize>,
    /// Graded constants c_1,c_2,…, strictly decreasing, ceil(n/2) of them.
    #[arg(long, value_delimiter = ',')]
    constants: Option<Vec<f64>>,
}

/// Config values that may be absent; one layer of the settings stack.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub scenario: Option<Scenario>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub c: Option<f64>,
    pub ghz_constants: Option<Vec<f64>>,
    pub n_users: Option<usize>,
    pub initial_p0: Option<f64>,
    pub horizon: Option<usize>,
    pub trials: Option<usize>,
    #[serde(default, deserialize_with = "seed_value")]
    pub seed: Option<u64>,
    pub drift_mode: Option<DriftMode>,
    pub drift_step: Option<f64>,
    pub p_first: Option<f64>,
    pub window_fraction: Option<f64>,
    /// Written into emitted metadata; informational when read back.
    pub artifact_version: Option<String>,
}

/// Seeds above `i64::MAX` do not fit a TOML integer and are written quoted.
fn seed_value<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<u64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Seed {
        Int(u64),
        Text(String),
    }
    match Option::<Seed>::deserialize(d)? {
        None => Ok(None),
        Some(Seed::Int(v)) => Ok(Some(v)),
        Some(Seed::Text(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
    }
}

impl PartialConfig {
    fn overlay(&mut self, top: PartialConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(
            scenario,
            p1,
            p2,
            c,
            ghz_constants,
            n_users,
            initial_p0,
            horizon,
            trials,
            seed,
            drift_mode,
            drift_step,
            p_first,
            window_fraction,
            artifact_version
        );
    }

    fn resolve(self, scenario: Scenario) -> Result<ExperimentConfig> {
        if let Some(s) = self.scenario {
            if s != scenario {
                return Err(Error::config(
                    "scenario",
                    format!(
                        "config is for `{}` but the subcommand runs `{}`",
                        s.as_str(),
                        scenario.as_str()
                    ),
                ));
            }
        }
        let d = ExperimentConfig::new(scenario);
        let drift_mode = self.drift_mode.unwrap_or(if self.drift_step.is_some() {
            DriftMode::BoundedRandomWalk
        } else {
            d.drift_mode
        });
        let config = ExperimentConfig {
            scenario,
            p1: self.p1.unwrap_or(d.p1),
            p2: self.p2.unwrap_or(d.p2),
            c: self.c.unwrap_or(d.c),
            ghz_constants: self.ghz_constants.unwrap_or(d.ghz_constants),
            n_users: self.n_users.unwrap_or(d.n_users),
            initial_p0: self.initial_p0.unwrap_or(d.initial_p0),
            horizon: self.horizon.unwrap_or(d.horizon),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
            drift_mode,
            drift_step: self.drift_step.unwrap_or(d.drift_step),
            p_first: self.p_first.unwrap_or(d.p_first),
            window_fraction: self.window_fraction.unwrap_or(d.window_fraction),
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<&ExperimentConfig> for PartialConfig {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            scenario: Some(c.scenario),
            p1: Some(c.p1),
            p2: Some(c.p2),
            c: Some(c.c),
            ghz_constants: Some(c.ghz_constants.clone()),
            n_users: Some(c.n_users),
            initial_p0: Some(c.initial_p0),
            horizon: Some(c.horizon),
            trials: Some(c.trials),
            seed: Some(c.seed),
            drift_mode: Some(c.drift_mode),
            drift_step: Some(c.drift_step),
            p_first: Some(c.p_first),
            window_fraction: Some(c.window_fraction),
            artifact_version: None,
        }
    }
}

impl CommonArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            p1: self.p1,
            p2: self.p2,
            initial_p0: self.p0,
            horizon: self.horizon,
            trials: self.trials,
            seed: self.seed,
            drift_mode: self.drift_mode.map(Into::into),
            drift_step: self.drift_step,
            window_fraction: self.window_fraction,
            ..PartialConfig::default()
        }
    }
}

/// Writes a config as the flat `key = value` document accepted by
/// `--config`. Floats use the shortest representation that round-trips.
pub fn to_flat_config(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let list = c
        .ghz_constants
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    let seed = if c.seed <= i64::MAX as u64 {
        c.seed.to_string()
    } else {
        format!("\"{}\"", c.seed)
    };
    let drift = match c.drift_mode {
        DriftMode::None => "none",
        DriftMode::BoundedRandomWalk => "bounded_random_walk",
    };
    writeln!(s, "scenario = \"{}\"", c.scenario.as_str()).unwrap();
    writeln!(s, "p1 = {:?}", c.p1).unwrap();
    writeln!(s, "p2 = {:?}", c.p2).unwrap();
    writeln!(s, "c = {:?}", c.c).unwrap();
    writeln!(s, "ghz_constants = [{list}]").unwrap();
    writeln!(s, "n_users = {}", c.n_users).unwrap();
    writeln!(s, "initial_p0 = {:?}", c.initial_p0).unwrap();
    writeln!(s, "horizon = {}", c.horizon).unwrap();
    writeln!(s, "trials = {}", c.trials).unwrap();
    writeln!(s, "seed = {seed}").unwrap();
    writeln!(s, "drift_mode = \"{drift}\"").unwrap();
    writeln!(s, "drift_step = {:?}", c.drift_step).unwrap();
    writeln!(s, "p_first = {:?}", c.p_first).unwrap();
    writeln!(s, "window_fraction = {:?}", c.window_fraction).unwrap();
    s
}

/// Parses a flat `key = value` config document.
pub fn parse_flat_config(text: &str) -> Result<PartialConfig> {
    toml::from_str(text).map_err(|e| Error::Parse(e.message().to_owned()))
}

/// The leading `# key = value` block of an emitted CSV file.
pub fn csv_metadata(text: &str) -> Result<PartialConfig> {
    let block: String = text
        .lines()
        .map_while(|l| l.strip_prefix("# "))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        });
    if block.is_empty() {
        return Err(Error::Parse("CSV file has no metadata block".into()));
    }
    parse_flat_config(&block)
}

pub fn load_config_file(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            Ok(PartialConfig::from(&OutputRecordSet::from_json(&text)?.metadata.config))
        }
        Some("csv") => csv_metadata(&text),
        _ => parse_flat_config(&text),
    }
}

/// A fully parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Run {
        config: ExperimentConfig,
        format: OutputFormat,
        destination: Destination,
    },
    /// `--help` or `--version` text.
    Info(String),
}

/// Chooses where output goes: `--out` wins, then the directory named by
/// [`OUTPUT_DIR_ENV`], then standard output.
pub fn resolve_destination(
    out: Option<PathBuf>,
    env_dir: Option<OsString>,
    config: &ExperimentConfig,
    extension: &str,
) -> Destination {
    match (out, env_dir) {
        (Some(path), _) => Destination::File(path),
        (None, Some(dir)) if !dir.is_empty() => Destination::File(PathBuf::from(dir).join(
            format!("{}_seed{}.{}", config.scenario.as_str(), config.seed, extension),
        )),
        _ => Destination::Stdout,
    }
}

/// Parses a full argument vector (program name first).
pub fn parse_config<I, S>(args: I) -> Result<Invocation>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(Invocation::Info(e.render().to_string()))
                }
                _ => Err(Error::Usage(
                    e.render()
                        .to_string()
                        .lines()
                        .next()
                        .unwrap_or("invalid arguments")
                        .trim_start_matches("error: ")
                        .to_owned(),
                )),
            };
        }
    };
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV);

    if let Command::Qrng(q) = &cli.command {
        if q.count < 1 {
            return Err(Error::config("count", "must be at least 1"));
        }
        let config = PartialConfig {
            initial_p0: q.p0,
            horizon: Some(q.count),
            seed: q.seed,
            ..PartialConfig::default()
        }
        .resolve(Scenario::Qrng)?;
        let destination = resolve_destination(q.out.clone(), env_dir, &config, "txt");
        return Ok(Invocation::Run {
            config,
            format: OutputFormat::Csv,
            destination,
        });
    }

    let (scenario, common, extra) = match cli.command {
        Command::Qrng(_) => unreachable!("handled above"),
        Command::Single(a) => (
            Scenario::SingleAgent,
            a.common,
            PartialConfig {
                c: a.c,
                ..Default::default()
            },
        ),
        Command::Coop(a) => (
            Scenario::CoopPair,
            a.common,
            PartialConfig {
                c: a.c,
                ..Default::default()
            },
        ),
        Command::DuoConflict(a) => (
            Scenario::DuoConflict,
            a.common,
            PartialConfig {
                p_first: a.p_first,
                ..Default::default()
            },
        ),
        Command::Ghz(a) => (
            Scenario::Ghz,
            a.common,
            PartialConfig {
                n_users: a.n,
                ghz_constants: a.constants,
                ..Default::default()
            },
        ),
    };
    let mut layered = match &common.config {
        Some(path) => load_config_file(path)?,
        None => PartialConfig::default(),
    };
    let mut flags = common.partial();
    flags.overlay(extra);
    layered.overlay(flags);
    let config = layered.resolve(scenario)?;
    let destination =
        resolve_destination(common.out.clone(), env_dir, &config, common.format.extension());
    Ok(Invocation::Run {
        config,
        format: common.format,
        destination,
    })
}

/// Runs a parsed invocation.
pub fn execute(invocation: Invocation) -> Result<()> {
    match invocation {
        Invocation::Info(text) => {
            print!("{text}");
            Ok(())
        }
        Invocation::Run {
            config,
            destination,
            ..
        } if config.scenario == Scenario::Qrng => run_qrng(&config, &destination),
        Invocation::Run {
            config,
            format,
            destination,
        } => {
            let output = run_experiment(&config)?;
            emit(&OutputRecordSet::new(&config, &output), format, &destination)
        }
    }
}

/// Entry point used by the binary.
pub fn run<I, S>(args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    execute(parse_config(args)?)
}

/// Bits as a `0`/`1` line followed by `#`-prefixed test summaries.
pub fn qrng_report(config: &ExperimentConfig, bits: &[Bit]) -> (String, String) {
    let mut stream: String = bits.iter().map(|b| if b.is_one() { '1' } else { '0' }).collect();
    stream.push('\n');

    let zeros = bits.iter().filter(|b| !b.is_one()).count();
    let mut summary = String::new();
    writeln!(
        summary,
        "# qrng count = {}, p0 = {}, seed = {}",
        bits.len(),
        sig12(config.initial_p0),
        config.seed
    )
    .unwrap();
    writeln!(summary, "# zero_fraction = {}", sig12(zeros as f64 / bits.len() as f64)).unwrap();
    match frequency_test(bits) {
        Ok(t) => writeln!(
            summary,
            "# frequency_test: z = {}, p_value = {}, {}",
            sig12(t.z),
            sig12(t.p_value),
            if t.passed { "pass" } else { "fail" }
        ),
        Err(e) => writeln!(summary, "# frequency_test: skipped, {e}"),
    }
    .unwrap();
    match chi_square_pairs_test(bits) {
        Ok(t) => writeln!(
            summary,
            "# chi_square_pairs_test: statistic = {}, p_value = {}, {}",
            sig12(t.statistic),
            sig12(t.p_value),
            if t.passed { "pass" } else { "fail" }
        ),
        Err(e) => writeln!(summary, "# chi_square_pairs_test: skipped, {e}"),
    }
    .unwrap();
    (stream, summary)
}

fn run_qrng(config: &ExperimentConfig, destination: &Destination) -> Result<()> {
    let trajectory = run_trial::<f64>(config, 0)?;
    let bits: Vec<Bit> = trajectory.records.iter().map(|r| r.measured[0]).collect();
    let (stream, summary) = qrng_report(config, &bits);
    match destination {
        Destination::Stdout => emit::write_text(&(stream + &summary), destination),
        Destination::File(_) => {
            emit::write_text(&(stream + &summary), destination)?;
            emit::write_text(&summary, &Destination::Stdout)
        }
    }
}
