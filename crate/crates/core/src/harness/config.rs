use serde::{Deserialize, Serialize};

use crate::bandit::{DriftMode, DriftModel, ReplicatedBandit, TwoArmBandit};
use crate::error::{Error, Result};
use crate::policies::{GhzConstants, UpdateConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Repeated measurement of a fixed qubit.
    Qrng,
    SingleAgent,
    DuoConflict,
    CoopPair,
    Ghz,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Qrng => "qrng",
            Scenario::SingleAgent => "single_agent",
            Scenario::DuoConflict => "duo_conflict",
            Scenario::CoopPair => "coop_pair",
            Scenario::Ghz => "ghz",
        }
    }

    pub fn default_users(self) -> usize {
        match self {
            Scenario::Qrng | Scenario::SingleAgent => 1,
            Scenario::DuoConflict | Scenario::CoopPair => 2,
            Scenario::Ghz => 3,
        }
    }

    /// Whether the scenario plays machines at all.
    pub fn has_rewards(self) -> bool {
        self != Scenario::Qrng
    }
}

/// Fully resolved description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Reward probability of machine 0.
    pub p1: f64,
    /// Reward probability of machine 1.
    pub p2: f64,
    pub c: f64,
    pub ghz_constants: Vec<f64>,
    pub n_users: usize,
    /// Starting probability of outcome 0; equal odds unless told otherwise.
    pub initial_p0: f64,
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    pub drift_mode: DriftMode,
    pub drift_step: f64,
    /// First-branch probability of the anticorrelated pair in the duo game.
    pub p_first: f64,
    /// Trailing share of the horizon used for convergence statistics.
    pub window_fraction: f64,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            p1: 0.5,
            p2: 0.5,
            c: 0.01,
            ghz_constants: Vec::new(),
            n_users: scenario.default_users(),
            initial_p0: 0.5,
            horizon: 1000,
            trials: 1,
            seed: 0,
            drift_mode: DriftMode::None,
            drift_step: 0.0,
            p_first: 0.5,
            window_fraction: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |field: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(field, format!("must lie in [0, 1], got {v}")))
            }
        };
        prob("p1", self.p1)?;
        prob("p2", self.p2)?;
        prob("initial_p0", self.initial_p0)?;
        prob("p_first", self.p_first)?;
        if self.horizon < 1 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if self.trials < 1 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::config(
                "window_fraction",
                format!("must lie in (0, 1], got {}", self.window_fraction),
            ));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::config(
                "c",
                format!("must lie in (0, 1], got {}", self.c),
            ));
        }
        match self.drift_mode {
            DriftMode::None => {}
            DriftMode::BoundedRandomWalk => {
                if self.scenario == Scenario::Qrng {
                    return Err(Error::config("drift_mode", "qrng has no machines to drift"));
                }
                DriftModel::random_walk(self.drift_step)?;
            }
        }
        let users_ok = match self.scenario {
            Scenario::Qrng | Scenario::SingleAgent => self.n_users == 1,
            Scenario::DuoConflict | Scenario::CoopPair => self.n_users == 2,
            Scenario::Ghz => self.n_users >= 2,
        };
        if !users_ok {
            return Err(Error::config(
                "n_users",
                format!(
                    "{} does not support {} users",
                    self.scenario.as_str(),
                    self.n_users
                ),
            ));
        }
        if self.scenario == Scenario::Ghz {
            GhzConstants::new(self.n_users, self.ghz_constants.clone()).map_err(|e| {
                Error::config("ghz_constants", e.to_string())
            })?;
        } else if !self.ghz_constants.is_empty() {
            return Err(Error::config(
                "ghz_constants",
                "only the ghz scenario takes graded constants",
            ));
        }
        Ok(())
    }

    pub fn drift<T: Scalar>(&self) -> Result<DriftModel<T>> {
        match self.drift_mode {
            DriftMode::None => Ok(DriftModel::none()),
            DriftMode::BoundedRandomWalk => {
                DriftModel::random_walk(T::from_f64_lossy(self.drift_step))
            }
        }
    }

    pub fn bandit<T: Scalar>(&self) -> Result<TwoArmBandit<T>> {
        Ok(
            TwoArmBandit::new(T::from_f64_lossy(self.p1), T::from_f64_lossy(self.p2))?
                .with_drift(self.drift()?),
        )
    }

    pub fn replicated<T: Scalar>(&self) -> Result<ReplicatedBandit<T>> {
        ReplicatedBandit::new(self.bandit()?, self.n_users.max(2))
    }

    pub fn update_config<T: Scalar>(&self) -> Result<UpdateConfig<T>> {
        UpdateConfig::new(T::from_f64_lossy(self.c))
    }

    pub fn constants<T: Scalar>(&self) -> Result<GhzConstants<T>> {
        GhzConstants::new(
            self.n_users,
            self.ghz_constants
                .iter()
                .map(|&c| T::from_f64_lossy(c))
                .collect(),
        )
    }

    /// Best fixed-arm reward probability, or `None` when the arms drift.
    pub fn best_reward_probability(&self) -> Option<f64> {
        (self.drift_mode == DriftMode::None && self.scenario.has_rewards())
            .then(|| self.p1.max(self.p2))
    }
}
