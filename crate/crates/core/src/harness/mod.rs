//! Seeded Monte Carlo runner.
//!
//! Trial `i` always draws from stream `i` under the root seed, so results do
//! not depend on how many threads run the trials or in which order.

mod config;
mod metrics;
mod randomness;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Scenario};
pub use metrics::{aggregate, window_regret, Metrics, TrialMetrics};
pub use randomness::{
    chi_square_pairs_test, frequency_test, ChiSquarePairsTest, FrequencyTest, MONOBIT_CRITICAL_Z,
    MONOBIT_MIN_LEN, PAIRS_MIN_LEN, SIGNIFICANCE,
};

use crate::bandit::drift_step;
use crate::error::Result;
use crate::policies::{coop_pair_step, duo_conflict_step, ghz_step, single_agent_step, StepRecord};
use crate::quantum::{measure_qubit, Qubit};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// The ordered step records of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub trial: usize,
    pub records: Vec<StepRecord<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Each step starts where the previous one ended.
    pub fn is_chained(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[0].p_after == w[1].p_before)
    }

    pub fn final_p0(&self) -> Option<T> {
        self.records.last().map(|r| r.p_after)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput<T> {
    pub trajectories: Vec<Trajectory<T>>,
    pub metrics: Metrics,
}

/// Runs one trial of the configured scenario on stream `trial`.
pub fn run_trial<T: Scalar>(config: &ExperimentConfig, trial: usize) -> Result<Trajectory<T>> {
    config.validate()?;
    let mut rng = RandomStream::derived(config.seed, trial as u64);
    let mut env = config.bandit::<T>()?;
    let mut replicated = config.replicated::<T>()?;
    let cfg = config.update_config::<T>()?;
    let constants = match config.scenario {
        Scenario::Ghz => Some(config.constants::<T>()?),
        _ => None,
    };
    let p_first = T::from_f64_lossy(config.p_first);
    let mut p = T::from_f64_lossy(config.initial_p0);

    let mut records = Vec::with_capacity(config.horizon);
    for t in 0..config.horizon {
        let record = match config.scenario {
            Scenario::Qrng => {
                let b = measure_qubit(&Qubit::new(p)?, &mut rng);
                StepRecord {
                    round: 0,
                    p_before: p,
                    measured: vec![b],
                    chosen: Vec::new(),
                    rewards: Vec::new(),
                    update: None,
                    p_after: p,
                }
            }
            Scenario::SingleAgent => single_agent_step(p, &env, &cfg, &mut rng).1,
            Scenario::DuoConflict => duo_conflict_step(p_first, &replicated, &mut rng)?,
            Scenario::CoopPair => coop_pair_step(p, &replicated, &cfg, &mut rng)?.1,
            Scenario::Ghz => {
                let k = constants.as_ref().expect("ghz constants resolved above");
                ghz_step(p, &replicated, k, &mut rng)?.1
            }
        };
        p = record.p_after;
        records.push(record.at_round(t));
        if env.drift.is_active() {
            env = drift_step(&env, &mut rng);
            replicated.template = env;
        }
    }
    Ok(Trajectory { trial, records })
}

/// Runs every trial (in parallel) and aggregates the metrics.
pub fn run_experiment_as<T: Scalar>(config: &ExperimentConfig) -> Result<ExperimentOutput<T>> {
    config.validate()?;
    let trajectories = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial::<T>(config, i))
        .collect::<Result<Vec<_>>>()?;
    let metrics = aggregate(config, &trajectories)?;
    Ok(ExperimentOutput {
        trajectories,
        metrics,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput<f64>> {
    run_experiment_as::<f64>(config)
}
