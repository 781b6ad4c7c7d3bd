use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scenario};
use super::Trajectory;
use crate::error::{Error, Result};
use crate::oracle::window_len;
use crate::quantum::Bit;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial: usize,
    /// Total reward collected by each user.
    pub reward_per_user: Vec<u64>,
    /// `T·max(P1, P2) − reward` per user; absent when arms drift.
    pub regret_per_user: Option<Vec<f64>>,
    /// Rounds in which two competing users were sent to the same machine.
    pub conflicts: u64,
    pub final_p0: f64,
    /// Share of user-rounds in the trailing window spent on a best arm.
    pub best_arm_fraction: Option<f64>,
    /// Share of rounds whose first measured bit was 0.
    pub zero_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub trials: usize,
    pub horizon: usize,
    pub window: usize,
    pub mean_reward_per_user: Vec<f64>,
    pub mean_regret_per_user: Option<Vec<f64>>,
    /// Mean over trials and users.
    pub mean_regret: Option<f64>,
    pub total_conflicts: u64,
    pub final_p0_mean: f64,
    pub final_p0_std: f64,
    pub best_arm_fraction_mean: Option<f64>,
    pub zero_fraction_mean: f64,
    pub per_trial: Vec<TrialMetrics>,
}

fn best_arms(config: &ExperimentConfig) -> Option<[bool; 2]> {
    config.best_reward_probability().map(|best| {
        [config.p1 == best, config.p2 == best]
    })
}

fn trial_metrics<T: Scalar>(
    config: &ExperimentConfig,
    trajectory: &Trajectory<T>,
    window: usize,
) -> TrialMetrics {
    let users = if config.scenario.has_rewards() {
        config.n_users
    } else {
        0
    };
    let horizon = trajectory.records.len();
    let start = horizon.saturating_sub(window);

    let mut reward_per_user = vec![0u64; users];
    let mut conflicts = 0u64;
    let mut zeros = 0usize;
    let mut best_hits = 0usize;
    let best = best_arms(config);
    for (t, r) in trajectory.records.iter().enumerate() {
        for (u, reward) in r.rewards.iter().enumerate() {
            reward_per_user[u] += reward.is_one() as u64;
        }
        if config.scenario == Scenario::DuoConflict && r.chosen[0] == r.chosen[1] {
            conflicts += 1;
        }
        zeros += (r.measured.first() == Some(&Bit::Zero)) as usize;
        if let (Some(best), true) = (best, t >= start) {
            best_hits += r.chosen.iter().filter(|c| best[c.index()]).count();
        }
    }

    let regret_per_user = config.best_reward_probability().map(|best| {
        reward_per_user
            .iter()
            .map(|&r| horizon as f64 * best - r as f64)
            .collect()
    });
    TrialMetrics {
        trial: trajectory.trial,
        reward_per_user,
        regret_per_user,
        conflicts,
        final_p0: trajectory
            .final_p0()
            .map_or(config.initial_p0, |p| p.to_f64_lossless()),
        best_arm_fraction: best
            .filter(|_| users > 0 && horizon > 0)
            .map(|_| best_hits as f64 / (window.min(horizon) * users) as f64),
        zero_fraction: if horizon > 0 {
            zeros as f64 / horizon as f64
        } else {
            0.0
        },
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Aggregates equal-length trajectories. Per-trial metrics are reported in
/// trial order regardless of input order.
pub fn aggregate<T: Scalar>(
    config: &ExperimentConfig,
    trajectories: &[Trajectory<T>],
) -> Result<Metrics> {
    let first = trajectories
        .first()
        .ok_or(Error::EmptyInput("no trajectories to aggregate"))?;
    let horizon = first.len();
    if let Some(bad) = trajectories.iter().find(|t| t.len() != horizon) {
        return Err(Error::LengthMismatch {
            what: "steps per trajectory",
            expected: horizon,
            got: bad.len(),
        });
    }
    let window = window_len(horizon, config.window_fraction);
    let mut per_trial: Vec<TrialMetrics> = trajectories
        .iter()
        .map(|t| trial_metrics(config, t, window))
        .collect();
    per_trial.sort_by_key(|m| m.trial);

    let users = per_trial[0].reward_per_user.len();
    let mean_reward_per_user: Vec<f64> = (0..users)
        .map(|u| mean(per_trial.iter().map(|m| m.reward_per_user[u] as f64)))
        .collect();
    let mean_regret_per_user: Option<Vec<f64>> = per_trial[0].regret_per_user.as_ref().map(|_| {
        (0..users)
            .map(|u| {
                mean(
                    per_trial
                        .iter()
                        .map(|m| m.regret_per_user.as_ref().expect("uniform")[u]),
                )
            })
            .collect()
    });
    let mean_regret = mean_regret_per_user
        .as_ref()
        .filter(|v| !v.is_empty())
        .map(|v| mean(v.iter().copied()));
    let final_p0_mean = mean(per_trial.iter().map(|m| m.final_p0));
    let final_p0_std = if per_trial.len() > 1 {
        (per_trial
            .iter()
            .map(|m| (m.final_p0 - final_p0_mean).powi(2))
            .sum::<f64>()
            / (per_trial.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    let best_arm_fraction_mean = per_trial[0]
        .best_arm_fraction
        .map(|_| mean(per_trial.iter().filter_map(|m| m.best_arm_fraction)));

    Ok(Metrics {
        trials: per_trial.len(),
        horizon,
        window,
        mean_reward_per_user,
        mean_regret_per_user,
        mean_regret,
        total_conflicts: per_trial.iter().map(|m| m.conflicts).sum(),
        final_p0_mean,
        final_p0_std,
        best_arm_fraction_mean,
        zero_fraction_mean: mean(per_trial.iter().map(|m| m.zero_fraction)),
        per_trial,
    })
}

/// Mean regret accumulated over rounds `[start, end)`, averaged over trials
/// and users. `None` when regret is undefined (drifting arms or no machines).
pub fn window_regret<T: Scalar>(
    config: &ExperimentConfig,
    trajectories: &[Trajectory<T>],
    start: usize,
    end: usize,
) -> Option<f64> {
    let best = config.best_reward_probability()?;
    if trajectories.is_empty() || config.n_users == 0 || end <= start {
        return None;
    }
    let per_trial = trajectories.iter().map(|t| {
        let records = &t.records[start.min(t.len())..end.min(t.len())];
        let rewards: u64 = records
            .iter()
            .flat_map(|r| r.rewards.iter())
            .map(|r| r.is_one() as u64)
            .sum();
        (records.len() as f64 * best * config.n_users as f64 - rewards as f64)
            / config.n_users as f64
    });
    Some(mean(per_trial))
}
