//! Bernoulli slot machines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::Bit;
use crate::rng::UniformSource;
use crate::scalar::{is_probability, Scalar};

/// A machine that pays one unit with probability `p_reward`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliArm<T> {
    p_reward: T,
}

impl<T: Scalar> BernoulliArm<T> {
    pub fn new(p_reward: T) -> Result<Self> {
        if !is_probability(p_reward) {
            return Err(Error::InvalidProbability {
                name: "p_reward",
                value: p_reward.to_f64_lossless(),
            });
        }
        Ok(Self { p_reward })
    }

    pub fn p_reward(&self) -> T {
        self.p_reward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    #[default]
    None,
    /// Each round, every arm moves by `±step_size` with a fair sign, clamped
    /// to `[0, 1]`.
    BoundedRandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftModel<T> {
    pub mode: DriftMode,
    pub step_size: T,
}

impl<T: Scalar> DriftModel<T> {
    pub fn none() -> Self {
        Self {
            mode: DriftMode::None,
            step_size: T::zero(),
        }
    }

    pub fn random_walk(step_size: T) -> Result<Self> {
        if step_size.is_nan() || step_size <= T::zero() || !is_probability(step_size) {
            return Err(Error::config(
                "drift_step",
                format!(
                    "random-walk drift needs a step in (0, 1], got {}",
                    step_size
                ),
            ));
        }
        Ok(Self {
            mode: DriftMode::BoundedRandomWalk,
            step_size,
        })
    }

    pub fn is_active(&self) -> bool {
        self.mode != DriftMode::None
    }
}

/// Machines `M0` (reward probability P1) and `M1` (reward probability P2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoArmBandit<T> {
    pub arm0: BernoulliArm<T>,
    pub arm1: BernoulliArm<T>,
    pub drift: DriftModel<T>,
}

impl<T: Scalar> TwoArmBandit<T> {
    pub fn new(p1: T, p2: T) -> Result<Self> {
        Ok(Self {
            arm0: BernoulliArm::new(p1)?,
            arm1: BernoulliArm::new(p2)?,
            drift: DriftModel::none(),
        })
    }

    pub fn with_drift(mut self, drift: DriftModel<T>) -> Self {
        self.drift = drift;
        self
    }

    pub fn arm(&self, which: Bit) -> &BernoulliArm<T> {
        match which {
            Bit::Zero => &self.arm0,
            Bit::One => &self.arm1,
        }
    }

    /// `max(P1, P2)`.
    pub fn best_reward_probability(&self) -> T {
        self.arm0.p_reward.max(self.arm1.p_reward)
    }
}

/// `n_users` independent copies of the same two machines (M0/M1 for the first
/// user, N0/N1 for the second, and so on).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicatedBandit<T> {
    pub template: TwoArmBandit<T>,
    n_users: usize,
}

impl<T: Scalar> ReplicatedBandit<T> {
    pub fn new(template: TwoArmBandit<T>, n_users: usize) -> Result<Self> {
        if n_users < 2 {
            return Err(Error::InvalidUserCount {
                min: 2,
                got: n_users,
            });
        }
        Ok(Self { template, n_users })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }
}

/// Returns `One` (rewarded) with probability `p_reward`. One draw.
#[inline]
pub fn pull<T: Scalar, R: UniformSource + ?Sized>(arm: &BernoulliArm<T>, rng: &mut R) -> Bit {
    Bit::from_bool(rng.next_uniform() < arm.p_reward.to_f64_lossless())
}

/// Every user pulls their own copy of the arm they chose, in user order.
pub fn pull_pair<T: Scalar, R: UniformSource + ?Sized>(
    env: &ReplicatedBandit<T>,
    choices: &[Bit],
    rng: &mut R,
) -> Result<Vec<Bit>> {
    if choices.len() != env.n_users {
        return Err(Error::LengthMismatch {
            what: "arm choices",
            expected: env.n_users,
            got: choices.len(),
        });
    }
    Ok(choices
        .iter()
        .map(|&c| pull(env.template.arm(c), rng))
        .collect())
}

/// Advances the reward probabilities by one round of drift. Draws one sign per
/// arm (arm 0 first) when the random walk is active, none otherwise.
pub fn drift_step<T: Scalar, R: UniformSource + ?Sized>(
    env: &TwoArmBandit<T>,
    rng: &mut R,
) -> TwoArmBandit<T> {
    match env.drift.mode {
        DriftMode::None => *env,
        DriftMode::BoundedRandomWalk => {
            let step = env.drift.step_size;
            let mut walk = |arm: &BernoulliArm<T>| {
                let p = if rng.next_uniform() < 0.5 {
                    arm.p_reward + step
                } else {
                    arm.p_reward - step
                };
                BernoulliArm {
                    p_reward: p.max(T::zero()).min(T::one()),
                }
            };
            let arm0 = walk(&env.arm0);
            let arm1 = walk(&env.arm1);
            TwoArmBandit {
                arm0,
                arm1,
                drift: env.drift,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use proptest::prelude::*;

    /// Replays a fixed list of draws.
    struct Scripted(Vec<f64>, usize);

    impl UniformSource for Scripted {
        fn next_uniform(&mut self) -> f64 {
            let u = self.0[self.1];
            self.1 += 1;
            u
        }
    }

    #[test]
    fn deterministic_arms() {
        let mut rng = RandomStream::new(1);
        let always = BernoulliArm::new(1.0).unwrap();
        let never = BernoulliArm::new(0.0).unwrap();
        for _ in 0..10_000 {
            assert_eq!(pull(&always, &mut rng), Bit::One);
            assert_eq!(pull(&never, &mut rng), Bit::Zero);
        }
    }

    #[test]
    fn reward_frequency() {
        let arm = BernoulliArm::new(0.8).unwrap();
        let mut rng = RandomStream::new(77);
        let n = 100_000;
        let hits = (0..n).filter(|_| pull(&arm, &mut rng).is_one()).count();
        let f = hits as f64 / n as f64;
        assert!((0.79..=0.81).contains(&f), "{f}");
        assert!((f - 0.8).abs() < 5.0 * (0.8 * 0.2 / n as f64).sqrt());
    }

    #[test]
    fn invalid_arm_rejected() {
        assert!(BernoulliArm::new(1.2).is_err());
        assert!(BernoulliArm::new(-0.1).is_err());
        assert!(BernoulliArm::new(f64::NAN).is_err());
    }

    #[test]
    fn pull_pair_trivial_cases() {
        let mut rng = RandomStream::new(2);
        let env = ReplicatedBandit::new(TwoArmBandit::new(1.0, 0.0).unwrap(), 2).unwrap();
        assert_eq!(
            pull_pair(&env, &[Bit::Zero, Bit::Zero], &mut rng).unwrap(),
            vec![Bit::One, Bit::One]
        );
        let env = ReplicatedBandit::new(TwoArmBandit::new(1.0, 0.0).unwrap(), 3).unwrap();
        assert_eq!(
            pull_pair(&env, &[Bit::One; 3], &mut rng).unwrap(),
            vec![Bit::Zero; 3]
        );
        assert!(matches!(
            pull_pair(&env, &[Bit::One; 2], &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn replicated_pulls_are_independent() {
        let env = ReplicatedBandit::new(TwoArmBandit::new(0.5, 0.5).unwrap(), 2).unwrap();
        let mut rng = RandomStream::new(31);
        let n = 100_000;
        let mut joint = [0usize; 4];
        for _ in 0..n {
            let r = pull_pair(&env, &[Bit::Zero, Bit::Zero], &mut rng).unwrap();
            joint[r[0].index() * 2 + r[1].index()] += 1;
        }
        for count in joint {
            let f = count as f64 / n as f64;
            assert!((0.24..=0.26).contains(&f), "{joint:?}");
        }
    }

    #[test]
    fn replicated_rejects_single_user() {
        assert!(ReplicatedBandit::new(TwoArmBandit::new(0.5, 0.5).unwrap(), 1).is_err());
    }

    #[test]
    fn drift_off_is_identity() {
        let env = TwoArmBandit::new(0.3, 0.9).unwrap();
        let mut rng = RandomStream::new(4);
        for _ in 0..100 {
            assert_eq!(drift_step(&env, &mut rng), env);
        }
    }

    #[test]
    fn drift_clamps_at_one() {
        let env = TwoArmBandit::new(1.0_f64, 0.0)
            .unwrap()
            .with_drift(DriftModel::random_walk(0.05).unwrap());
        // Draw below 0.5 is the + sign for both arms.
        let mut up = Scripted(vec![0.1, 0.1], 0);
        let next = drift_step(&env, &mut up);
        assert_eq!(next.arm0.p_reward(), 1.0);
        assert!((next.arm1.p_reward() - 0.05).abs() < 1e-15);
        let mut down = Scripted(vec![0.9, 0.9], 0);
        let next = drift_step(&env, &mut down);
        assert!((next.arm0.p_reward() - 0.95).abs() < 1e-15);
        assert_eq!(next.arm1.p_reward(), 0.0);
    }

    #[test]
    fn symmetric_walk_stays_centred() {
        // 10^6 drift steps in total, split into independent walks from 0.5.
        let walks = 10_000;
        let steps = 100;
        let template = TwoArmBandit::new(0.5, 0.5)
            .unwrap()
            .with_drift(DriftModel::random_walk(0.01).unwrap());
        let mut sum = 0.0;
        for w in 0..walks {
            let mut rng = RandomStream::derived(123, w);
            let mut env = template;
            for _ in 0..steps {
                env = drift_step(&env, &mut rng);
                sum += env.arm0.p_reward();
            }
        }
        let mean = sum / (walks * steps) as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn random_walk_rejects_bad_step() {
        assert!(DriftModel::random_walk(0.0).is_err());
        assert!(DriftModel::random_walk(1.5).is_err());
    }

    proptest! {
        #[test]
        fn drift_never_leaves_unit_interval(
            p1 in 0.0_f64..=1.0,
            p2 in 0.0_f64..=1.0,
            step in 0.001_f64..=0.5,
            seed in any::<u64>(),
        ) {
            let mut env = TwoArmBandit::new(p1, p2)
                .unwrap()
                .with_drift(DriftModel::random_walk(step).unwrap());
            let mut rng = RandomStream::new(seed);
            for _ in 0..500 {
                env = drift_step(&env, &mut rng);
                prop_assert!((0.0..=1.0).contains(&env.arm0.p_reward()));
                prop_assert!((0.0..=1.0).contains(&env.arm1.p_reward()));
            }
        }
    }
}
