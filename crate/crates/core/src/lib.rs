//! Binary decisions from simulated qubit measurements, applied to two-machine
//! bandit games.
//!
//! The core types are generic over the probability scalar (`f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.
//!
//! ```
//! use qubit_bandit::{single_agent_step, RandomStream, TwoArmBandit, UpdateConfig};
//!
//! let env = TwoArmBandit::new(0.8, 0.2).unwrap();
//! let cfg = UpdateConfig::new(0.01).unwrap();
//! let mut rng = RandomStream::new(42);
//! let mut p0 = 0.5;
//! for _ in 0..2000 {
//!     p0 = single_agent_step(p0, &env, &cfg, &mut rng).0;
//! }
//! assert!(p0 > 0.9);
//! ```

pub mod bandit;
pub mod cli;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod policies;
pub mod quantum;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentConfig, Scenario};
pub use policies::{
    coop_pair_step, duo_conflict_assign, ghz_step, majority_update_rule, single_agent_step,
};
pub use quantum::{
    angle_to_p0, measure_ghz, measure_pair, measure_qubit, p0_to_angle, shift_probability, Bit,
    Correlation, Direction,
};
pub use rng::{RandomStream, UniformSource};
pub use scalar::Scalar;

pub type Qubit = quantum::Qubit<f64>;
pub type EntangledPair = quantum::EntangledPair<f64>;
pub type GhzState = quantum::GhzState<f64>;
pub type BernoulliArm = bandit::BernoulliArm<f64>;
pub type TwoArmBandit = bandit::TwoArmBandit<f64>;
pub type ReplicatedBandit = bandit::ReplicatedBandit<f64>;
pub type DriftModel = bandit::DriftModel<f64>;
pub type UpdateConfig = policies::UpdateConfig<f64>;
pub type GhzConstants = policies::GhzConstants<f64>;
pub type StepRecord = policies::StepRecord<f64>;
pub type TransitionDistribution = oracle::TransitionDistribution<f64>;
pub type Trajectory = harness::Trajectory<f64>;

pub type Qubit32 = quantum::Qubit<f32>;
pub type TwoArmBandit32 = bandit::TwoArmBandit<f32>;
pub type UpdateConfig32 = policies::UpdateConfig<f32>;
pub type GhzConstants32 = policies::GhzConstants<f32>;
