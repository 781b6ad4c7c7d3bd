//! Exact reference computations for the update rules.
//!
//! Under a fixed step constant every reachable probability is the start value
//! moved by whole multiples of `c`, possibly clamped and moved again, so the
//! reachable set is a finite lattice and the policy is a finite Markov chain.
//! This module enumerates one-step transitions and evolves the chain exactly,
//! giving the Monte Carlo simulator something independent to be checked
//! against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::TwoArmBandit;
use crate::error::{Error, Result};
use crate::policies::{
    majority_update_rule, single_agent_step, GhzConstants, UpdateConfig,
};
use crate::quantum::{shift_unchecked, Bit, Direction};
use crate::rng::RandomStream;
use crate::scalar::{is_probability, Scalar};

/// Default cap on the number of lattice states.
pub const DEFAULT_STATE_BOUND: usize = 100_000;

/// Distribution over next states, sorted by state, with near-equal states
/// merged and zero-probability outcomes dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDistribution<T> {
    entries: Vec<(T, T)>,
}

impl<T: Scalar> TransitionDistribution<T> {
    /// Builds a distribution from raw `(state, probability)` outcomes.
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut raw: Vec<(T, T)> = outcomes
            .into_iter()
            .filter(|&(_, w)| w > T::zero())
            .collect();
        // Stable sort keeps enumeration order among equal states.
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("states are finite"));
        let tol = T::lattice_tolerance();
        let mut entries: Vec<(T, T)> = Vec::with_capacity(raw.len());
        for (state, w) in raw {
            match entries.last_mut() {
                Some(last) if (state - last.0).abs() <= tol => last.1 = last.1 + w,
                _ => entries.push((state, w)),
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[(T, T)] {
        &self.entries
    }

    pub fn total_mass(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, &(_, w)| acc + w)
    }

    pub fn mean(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, &(s, w)| acc + s * w)
    }

    /// Probability mass within lattice tolerance of `state`.
    pub fn mass_at(&self, state: T) -> T {
        let tol = T::lattice_tolerance();
        self.entries
            .iter()
            .filter(|(s, _)| (*s - state).abs() <= tol)
            .fold(T::zero(), |acc, &(_, w)| acc + w)
    }
}

fn check_inputs<T: Scalar>(p0: T, p1: T, p2: T) -> Result<()> {
    for (name, v) in [("p0", p0), ("P1", p1), ("P2", p2)] {
        if !is_probability(v) {
            return Err(Error::InvalidProbability {
                name,
                value: v.to_f64_lossless(),
            });
        }
    }
    Ok(())
}

fn check_step<T: Scalar>(c: T) -> Result<()> {
    if c.is_nan() || c <= T::zero() {
        return Err(Error::NonPositiveIncrement(c.to_f64_lossless()));
    }
    Ok(())
}

/// Exact one-step law of the single-agent update from `p0`.
pub fn enumerate_single_step<T: Scalar>(
    p0: T,
    p1: T,
    p2: T,
    c: T,
) -> Result<TransitionDistribution<T>> {
    check_inputs(p0, p1, p2)?;
    check_step(c)?;
    let one = T::one();
    let q0 = one - p0;
    let up = shift_unchecked(p0, Direction::Toward0, c);
    let down = shift_unchecked(p0, Direction::Toward1, c);
    Ok(TransitionDistribution::from_outcomes([
        // M0 rewarded, M0 unrewarded, M1 rewarded, M1 unrewarded
        (up, p0 * p1),
        (down, p0 * (one - p1)),
        (down, q0 * p2),
        (up, q0 * (one - p2)),
    ]))
}

/// Exact one-step law of the cooperative paired-machine update.
pub fn enumerate_coop_step<T: Scalar>(
    p0: T,
    p1: T,
    p2: T,
    c: T,
) -> Result<TransitionDistribution<T>> {
    check_inputs(p0, p1, p2)?;
    check_step(c)?;
    let one = T::one();
    let two = one + one;
    let mut outcomes = Vec::with_capacity(6);
    for (b, pb, reward_p) in [(Bit::Zero, p0, p1), (Bit::One, one - p0, p2)] {
        let toward = Direction::toward(b);
        outcomes.push((shift_unchecked(p0, toward, c), pb * reward_p * reward_p));
        outcomes.push((
            shift_unchecked(p0, toward.reverse(), c),
            pb * (one - reward_p) * (one - reward_p),
        ));
        outcomes.push((p0, pb * two * reward_p * (one - reward_p)));
    }
    Ok(TransitionDistribution::from_outcomes(outcomes))
}

fn binomial_pmf<T: Scalar>(n: usize, k: usize, p: T) -> T {
    let mut coeff = T::one();
    for j in 0..k {
        coeff = coeff * T::from_usize(n - j).unwrap() / T::from_usize(j + 1).unwrap();
    }
    coeff * p.powi(k as i32) * (T::one() - p).powi((n - k) as i32)
}

/// Exact one-step law of the `n`-user GHZ majority update, enumerating the
/// number of rewarded users under the measured branch.
pub fn enumerate_ghz_step<T: Scalar>(
    p0: T,
    p1: T,
    p2: T,
    constants: &GhzConstants<T>,
) -> Result<TransitionDistribution<T>> {
    check_inputs(p0, p1, p2)?;
    let n = constants.n();
    let mut outcomes = Vec::with_capacity(2 * (n + 1));
    for (b, pb, reward_p) in [(Bit::Zero, p0, p1), (Bit::One, T::one() - p0, p2)] {
        for k in 0..=n {
            let rewards: Vec<Bit> = (0..n).map(|u| Bit::from_bool(u < k)).collect();
            let next = match majority_update_rule(n, &rewards)? {
                None => p0,
                Some(m) => {
                    let toward = Direction::toward(b);
                    let dir = if m.majority_rewarded {
                        toward
                    } else {
                        toward.reverse()
                    };
                    shift_unchecked(p0, dir, constants.get(m.index).expect("index in range"))
                }
            };
            outcomes.push((next, pb * binomial_pmf(n, k, reward_p)));
        }
    }
    Ok(TransitionDistribution::from_outcomes(outcomes))
}

/// Mean one-step change of `p0` under the single-agent rule, ignoring
/// clamping: `c·[p0·(2·P1 − 1) + (1 − p0)·(1 − 2·P2)]`.
pub fn expected_drift<T: Scalar>(p0: T, p1: T, p2: T, c: T) -> Result<T> {
    check_inputs(p0, p1, p2)?;
    check_step(c)?;
    let one = T::one();
    let two = one + one;
    Ok(c * (p0 * (two * p1 - one) + (one - p0) * (one - two * p2)))
}

/// Sampled drift curve `(p0, E[Δp0])` on an even grid of `points` values.
pub fn drift_curve<T: Scalar>(p1: T, p2: T, c: T, points: usize) -> Result<Vec<(T, T)>> {
    if points < 2 {
        return Err(Error::EmptyInput("drift curve needs at least two points"));
    }
    let last = T::from_usize(points - 1).unwrap();
    (0..points)
        .map(|i| {
            let p0 = T::from_usize(i).unwrap() / last;
            expected_drift(p0, p1, p2, c).map(|d| (p0, d))
        })
        .collect()
}

/// The reachable state lattice of a policy together with its transition
/// lists, ready for power iteration.
#[derive(Debug, Clone)]
pub struct MarkovLattice<T> {
    states: Vec<T>,
    /// `(state value, index)` sorted by value for tolerance lookups.
    sorted: Vec<(T, usize)>,
    transitions: Vec<Vec<(usize, T)>>,
    initial: usize,
}

impl<T: Scalar> MarkovLattice<T> {
    /// Discovers every state reachable from `initial` under `step` by breadth
    /// first search, failing once more than `bound` states are found.
    pub fn explore<F>(initial: T, bound: usize, step: F) -> Result<Self>
    where
        F: Fn(T) -> Result<TransitionDistribution<T>>,
    {
        let mut lattice = Self {
            states: vec![initial],
            sorted: vec![(initial, 0)],
            transitions: Vec::new(),
            initial: 0,
        };
        let mut next = 0;
        while next < lattice.states.len() {
            let dist = step(lattice.states[next])?;
            let mut row = Vec::with_capacity(dist.entries().len());
            for &(s, w) in dist.entries() {
                let j = match lattice.index_of(s) {
                    Some(j) => j,
                    None => {
                        if lattice.states.len() >= bound {
                            return Err(Error::GridTooLarge { bound });
                        }
                        lattice.insert(s)
                    }
                };
                row.push((j, w));
            }
            lattice.transitions.push(row);
            next += 1;
        }
        Ok(lattice)
    }

    /// Lattice of the single-agent policy.
    pub fn single_agent(initial: T, p1: T, p2: T, c: T) -> Result<Self> {
        Self::single_agent_bounded(initial, p1, p2, c, DEFAULT_STATE_BOUND)
    }

    pub fn single_agent_bounded(initial: T, p1: T, p2: T, c: T, bound: usize) -> Result<Self> {
        check_inputs(initial, p1, p2)?;
        check_step(c)?;
        let tol = T::lattice_tolerance();
        if c <= tol * T::from_f64_lossy(4.0) {
            return Err(Error::LatticeUnresolvable {
                c: c.to_f64_lossless(),
                tolerance: tol.to_f64_lossless(),
            });
        }
        Self::explore(initial, bound, |p| enumerate_single_step(p, p1, p2, c))
    }

    fn insert(&mut self, s: T) -> usize {
        let idx = self.states.len();
        self.states.push(s);
        let pos = self
            .sorted
            .partition_point(|&(v, _)| v < s);
        self.sorted.insert(pos, (s, idx));
        idx
    }

    /// Index of the lattice state within tolerance of `value`, if any.
    pub fn index_of(&self, value: T) -> Option<usize> {
        let tol = T::lattice_tolerance();
        let pos = self.sorted.partition_point(|&(v, _)| v < value);
        [pos.checked_sub(1), Some(pos)]
            .into_iter()
            .flatten()
            .filter_map(|i| self.sorted.get(i))
            .filter(|(v, _)| (*v - value).abs() <= tol)
            .min_by(|a, b| {
                (a.0 - value)
                    .abs()
                    .partial_cmp(&(b.0 - value).abs())
                    .expect("finite")
            })
            .map(|&(_, i)| i)
    }

    pub fn states(&self) -> &[T] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Unit mass on the initial state.
    pub fn initial_mass(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.states.len()];
        m[self.initial] = T::one();
        m
    }

    /// One application of the transition matrix.
    pub fn step(&self, mass: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.states.len()];
        for (i, row) in self.transitions.iter().enumerate() {
            let m = mass[i];
            if m == T::zero() {
                continue;
            }
            for &(j, w) in row {
                out[j] = out[j] + m * w;
            }
        }
        out
    }

    pub fn mass_after(&self, horizon: usize) -> Vec<T> {
        let mut mass = self.initial_mass();
        for _ in 0..horizon {
            mass = self.step(&mass);
        }
        mass
    }

    pub fn mean(&self, mass: &[T]) -> T {
        self.states
            .iter()
            .zip(mass)
            .fold(T::zero(), |acc, (&s, &m)| acc + s * m)
    }

    pub fn to_distribution(&self, mass: &[T]) -> TransitionDistribution<T> {
        TransitionDistribution::from_outcomes(self.states.iter().copied().zip(mass.iter().copied()))
    }
}

/// Exact distribution of the single-agent state after `horizon` steps.
pub fn evolve_distribution<T: Scalar>(
    initial: T,
    p1: T,
    p2: T,
    c: T,
    horizon: usize,
) -> Result<TransitionDistribution<T>> {
    let lattice = MarkovLattice::single_agent(initial, p1, p2, c)?;
    Ok(lattice.to_distribution(&lattice.mass_after(horizon)))
}

/// Number of trailing steps in a convergence window.
pub fn window_len(horizon: usize, fraction: f64) -> usize {
    ((horizon as f64 * fraction).round() as usize).clamp(1, horizon.max(1))
}

/// Sample mean with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let std_err = (var / n).sqrt();
        Self {
            mean,
            std_err,
            ci95_low: mean - 1.96 * std_err,
            ci95_high: mean + 1.96 * std_err,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err + 1e-12
    }
}

/// Side-by-side comparison of the single-agent long-run behaviour with the
/// closed-form value `P1/(P1+P2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub p1: f64,
    pub p2: f64,
    pub c: f64,
    pub horizon: usize,
    pub trials: usize,
    pub window: usize,
    /// `P1/(P1+P2)` read as the limiting probability of outcome 0.
    pub closed_form_p0: f64,
    /// Per-trial time average of `p0` after each step of the window.
    pub measured_p0: Estimate,
    /// Per-trial fraction of rounds in the window that played `M0`.
    pub measured_m0_fraction: Estimate,
    /// Markov-chain expectation of the window-averaged `p0`.
    pub exact_p0: Option<f64>,
    /// Markov-chain expectation of the window fraction of `M0` rounds.
    pub exact_m0_fraction: Option<f64>,
    /// `measured_p0.mean − closed_form_p0`.
    pub discrepancy: f64,
    /// Measured means within five standard errors of the exact values.
    pub consistent_with_exact: Option<bool>,
}

/// Runs `trials` single-agent games of `horizon` steps from `p0 = 0.5` and
/// reports the long-run statistics next to `P1/(P1+P2)` and the exact chain.
/// Agreement with the closed form is reported, never assumed.
pub fn asymptotic_claim_report<T: Scalar>(
    p1: T,
    p2: T,
    c: T,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<AsymptoticReport> {
    let half = T::from_f64_lossy(0.5);
    check_inputs(half, p1, p2)?;
    if horizon == 0 || trials == 0 {
        return Err(Error::EmptyInput("horizon and trial count must be positive"));
    }
    let env = TwoArmBandit::new(p1, p2)?;
    let cfg = UpdateConfig::new(c)?;
    let window = window_len(horizon, 0.2);
    let start = horizon - window;

    let per_trial: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RandomStream::derived(seed, trial);
            let mut p = half;
            let (mut p_sum, mut m0) = (0.0, 0usize);
            for t in 0..horizon {
                let (next, rec) = single_agent_step(p, &env, &cfg, &mut rng);
                if t >= start {
                    p_sum += next.to_f64_lossless();
                    m0 += (rec.chosen[0] == Bit::Zero) as usize;
                }
                p = next;
            }
            (p_sum / window as f64, m0 as f64 / window as f64)
        })
        .collect();
    let p_samples: Vec<f64> = per_trial.iter().map(|x| x.0).collect();
    let m_samples: Vec<f64> = per_trial.iter().map(|x| x.1).collect();
    let measured_p0 = Estimate::from_samples(&p_samples);
    let measured_m0_fraction = Estimate::from_samples(&m_samples);

    let exact = match MarkovLattice::single_agent(half, p1, p2, c) {
        Ok(lattice) => {
            let mut mass = lattice.initial_mass();
            let (mut p_acc, mut m_acc) = (0.0, 0.0);
            for t in 0..horizon {
                let before = lattice.mean(&mass).to_f64_lossless();
                mass = lattice.step(&mass);
                if t >= start {
                    m_acc += before;
                    p_acc += lattice.mean(&mass).to_f64_lossless();
                }
            }
            Some((p_acc / window as f64, m_acc / window as f64))
        }
        Err(Error::GridTooLarge { .. } | Error::LatticeUnresolvable { .. }) => None,
        Err(e) => return Err(e),
    };

    let (p1f, p2f) = (p1.to_f64_lossless(), p2.to_f64_lossless());
    let closed_form_p0 = if p1f + p2f > 0.0 {
        p1f / (p1f + p2f)
    } else {
        f64::NAN
    };
    Ok(AsymptoticReport {
        p1: p1f,
        p2: p2f,
        c: c.to_f64_lossless(),
        horizon,
        trials,
        window,
        closed_form_p0,
        measured_p0,
        measured_m0_fraction,
        exact_p0: exact.map(|e| e.0),
        exact_m0_fraction: exact.map(|e| e.1),
        discrepancy: measured_p0.mean - closed_form_p0,
        consistent_with_exact: exact.map(|(ep, em)| {
            measured_p0.agrees_with(ep, 5.0) && measured_m0_fraction.agrees_with(em, 5.0)
        }),
    })
}
