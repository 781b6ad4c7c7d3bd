//! Decision procedures driven by measurement.
//!
//! Every procedure is a pure step function `state → (state', record)`. The
//! draw order inside a step is fixed (measurement first, then pulls in user
//! order) so that trajectories are reproducible from a seed.

use serde::{Deserialize, Serialize};

use crate::bandit::{pull, pull_pair, ReplicatedBandit, TwoArmBandit};
use crate::error::{Error, Result};
use crate::quantum::{
    measure_ghz, measure_pair, measure_qubit, shift_unchecked, Bit, Correlation, Direction,
    EntangledPair, GhzState, Qubit,
};
use crate::rng::UniformSource;
use crate::scalar::{is_probability, Scalar};

/// Step constant `c` for single-qubit and pair updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateConfig<T> {
    c: T,
}

impl<T: Scalar> UpdateConfig<T> {
    pub fn new(c: T) -> Result<Self> {
        if c.is_nan() || c <= T::zero() || !is_probability(c) {
            return Err(Error::NonPositiveIncrement(c.to_f64_lossless()));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> T {
        self.c
    }
}

/// Number of graded constants needed for `n` users: `⌈n/2⌉`.
pub fn required_constant_count(n: usize) -> usize {
    n.div_ceil(2)
}

/// Graded constants `c_1 > c_2 > … > c_⌈n/2⌉ > 0` for an `n`-user GHZ game.
/// `c_1` applies when every user agrees, `c_2` with one dissenter, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzConstants<T> {
    n: usize,
    constants: Vec<T>,
}

impl<T: Scalar> GhzConstants<T> {
    pub fn new(n: usize, constants: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidUserCount { min: 2, got: n });
        }
        let expected = required_constant_count(n);
        if constants.len() != expected {
            return Err(Error::ConstantCount {
                n,
                expected,
                got: constants.len(),
            });
        }
        let positive = constants
            .iter()
            .all(|&c| c > T::zero() && c <= T::one());
        let decreasing = constants.windows(2).all(|w| w[0] > w[1]);
        if !positive || !decreasing {
            return Err(Error::ConstantsNotDecreasing(
                constants.iter().map(|c| c.to_f64_lossless()).collect(),
            ));
        }
        Ok(Self { n, constants })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.constants
    }

    /// `c_i`, 1-based.
    pub fn get(&self, index: usize) -> Option<T> {
        index
            .checked_sub(1)
            .and_then(|i| self.constants.get(i))
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Update<T> {
    pub direction: Direction,
    pub magnitude: T,
}

/// What happened in one round.
///
/// `measured`, `chosen` and `rewards` hold one entry per user; the single-agent
/// and QRNG settings have one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub round: usize,
    pub p_before: T,
    pub measured: Vec<Bit>,
    pub chosen: Vec<Bit>,
    pub rewards: Vec<Bit>,
    pub update: Option<Update<T>>,
    pub p_after: T,
}

impl<T: Scalar> StepRecord<T> {
    pub fn at_round(mut self, round: usize) -> Self {
        self.round = round;
        self
    }

    /// `p_after` is what the recorded update produces from `p_before`.
    pub fn is_consistent(&self) -> bool {
        match self.update {
            Some(u) => shift_unchecked(self.p_before, u.direction, u.magnitude) == self.p_after,
            None => self.p_before == self.p_after,
        }
    }
}

fn apply<T: Scalar>(p0: T, update: Option<Update<T>>) -> T {
    match update {
        Some(u) => shift_unchecked(p0, u.direction, u.magnitude),
        None => p0,
    }
}

/// One round of the single-agent two-machine game.
///
/// Measure the qubit, play machine `M_b`, then rotate toward `b` if it paid
/// and away from `b` if it did not. Two draws: measurement, pull.
pub fn single_agent_step<T: Scalar, R: UniformSource + ?Sized>(
    p0: T,
    env: &TwoArmBandit<T>,
    cfg: &UpdateConfig<T>,
    rng: &mut R,
) -> (T, StepRecord<T>) {
    let b = measure_qubit(&Qubit::unchecked(p0), rng);
    let reward = pull(env.arm(b), rng);
    let toward_b = Direction::toward(b);
    let update = Some(Update {
        direction: if reward.is_one() {
            toward_b
        } else {
            toward_b.reverse()
        },
        magnitude: cfg.c,
    });
    let p_after = apply(p0, update);
    let record = StepRecord {
        round: 0,
        p_before: p0,
        measured: vec![b],
        chosen: vec![b],
        rewards: vec![reward],
        update,
        p_after,
    };
    (p_after, record)
}

/// Machine assignment for two competing users from the maximally
/// anticorrelated pair. The users always land on different machines. One draw.
pub fn duo_conflict_assign<R: UniformSource + ?Sized>(rng: &mut R) -> (Bit, Bit) {
    measure_pair(
        &EntangledPair::<f64>::maximal(Correlation::Anticorrelated),
        rng,
    )
}

/// As [`duo_conflict_assign`], from a non-maximally entangled pair
/// `√p·|01⟩ + √(1−p)·|10⟩`. The first user gets `M0` with probability `p`.
pub fn duo_conflict_assign_biased<T: Scalar, R: UniformSource + ?Sized>(
    p_first: T,
    rng: &mut R,
) -> Result<(Bit, Bit)> {
    let pair = EntangledPair::new(Correlation::Anticorrelated, p_first)?;
    Ok(measure_pair(&pair, rng))
}

/// One round of conflict-free competitive play: assign, then each user pulls
/// their machine. Nothing is learned. Three draws.
pub fn duo_conflict_step<T: Scalar, R: UniformSource + ?Sized>(
    p_first: T,
    env: &ReplicatedBandit<T>,
    rng: &mut R,
) -> Result<StepRecord<T>> {
    if env.n_users() != 2 {
        return Err(Error::LengthMismatch {
            what: "users for the duo game",
            expected: 2,
            got: env.n_users(),
        });
    }
    let (u, v) = duo_conflict_assign_biased(p_first, rng)?;
    let rewards = pull_pair(env, &[u, v], rng)?;
    Ok(StepRecord {
        round: 0,
        p_before: p_first,
        measured: vec![u, v],
        chosen: vec![u, v],
        rewards,
        update: None,
        p_after: p_first,
    })
}

/// One round of cooperative play on paired machines from the correlated pair
/// `√p0·|00⟩ + √(1−p0)·|11⟩`.
///
/// Both rewarded: rotate toward the common bit. Both unrewarded: rotate away.
/// Split outcome: the state is reused as is. Three draws.
pub fn coop_pair_step<T: Scalar, R: UniformSource + ?Sized>(
    p0: T,
    env: &ReplicatedBandit<T>,
    cfg: &UpdateConfig<T>,
    rng: &mut R,
) -> Result<(T, StepRecord<T>)> {
    if env.n_users() != 2 {
        return Err(Error::LengthMismatch {
            what: "users for the cooperative pair",
            expected: 2,
            got: env.n_users(),
        });
    }
    let (b, _) = measure_pair(&EntangledPair::unchecked(Correlation::Correlated, p0), rng);
    let rewards = pull_pair(env, &[b, b], rng)?;
    let update = match (rewards[0], rewards[1]) {
        (Bit::One, Bit::One) => Some(Direction::toward(b)),
        (Bit::Zero, Bit::Zero) => Some(Direction::toward(b).reverse()),
        _ => None,
    }
    .map(|direction| Update {
        direction,
        magnitude: cfg.c,
    });
    let p_after = apply(p0, update);
    Ok((
        p_after,
        StepRecord {
            round: 0,
            p_before: p0,
            measured: vec![b, b],
            chosen: vec![b, b],
            rewards,
            update,
            p_after,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityOutcome {
    /// 1-based index of the constant to apply.
    pub index: usize,
    pub majority_rewarded: bool,
}

/// Picks the graded constant for a reward vector.
///
/// With `k` users rewarded and `m = max(k, n − k)`, there is no decision when
/// `m ≤ n/2` (an even split); otherwise the constant index is `n − m + 1`, so
/// unanimity selects `c_1` and each extra dissenter moves one step down.
pub fn majority_update_rule(n: usize, rewards: &[Bit]) -> Result<Option<MajorityOutcome>> {
    if rewards.len() != n {
        return Err(Error::LengthMismatch {
            what: "reward bits",
            expected: n,
            got: rewards.len(),
        });
    }
    let rewarded = rewards.iter().filter(|r| r.is_one()).count();
    let majority = rewarded.max(n - rewarded);
    if 2 * majority <= n {
        return Ok(None);
    }
    Ok(Some(MajorityOutcome {
        index: n - majority + 1,
        majority_rewarded: rewarded > n - rewarded,
    }))
}

/// One round of `n`-user play on a GHZ state. All users observe the same bit
/// and play the same machine index on their own copies; the majority of
/// reward outcomes selects the constant and direction. `n + 1` draws.
pub fn ghz_step<T: Scalar, R: UniformSource + ?Sized>(
    p0: T,
    env: &ReplicatedBandit<T>,
    constants: &GhzConstants<T>,
    rng: &mut R,
) -> Result<(T, StepRecord<T>)> {
    let n = env.n_users();
    if constants.n() != n {
        return Err(Error::ConstantCount {
            n,
            expected: required_constant_count(n),
            got: constants.as_slice().len(),
        });
    }
    let b = measure_ghz(&GhzState::unchecked(n, p0), rng);
    let choices = vec![b; n];
    let rewards = pull_pair(env, &choices, rng)?;
    let update = majority_update_rule(n, &rewards)?.map(|m| {
        let toward_b = Direction::toward(b);
        Update {
            direction: if m.majority_rewarded {
                toward_b
            } else {
                toward_b.reverse()
            },
            magnitude: constants
                .get(m.index)
                .expect("majority index is within ceil(n/2)"),
        }
    });
    let p_after = apply(p0, update);
    Ok((
        p_after,
        StepRecord {
            round: 0,
            p_before: p0,
            measured: choices.clone(),
            chosen: choices,
            rewards,
            update,
            p_after,
        },
    ))
}
