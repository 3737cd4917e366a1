//! Adversarial test synthesis for safety-critical controllers.
//!
//! An adversary chooses a test parameter vector `d` (obstacle positions,
//! dynamics perturbations) to minimize the best instantaneous progress a
//! system can make toward its reach goal while every avoid barrier's CBF
//! condition holds. The inner maximization over inputs is an exact LP
//! (continuous time) or an enumeration (discrete time); tests that leave no
//! safe input at all score the floor `m` and are maximally difficult.

pub mod cbf;
pub mod continuous;
pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod lp;
pub mod monitor;
pub mod par;
pub mod scenarios;
pub mod synthesis;
pub mod types;

pub use cbf::{BarrierFunction, ClassKappa, ReachAvoidSpec};
pub use continuous::{ContinuousScenario, SearchConfig};
pub use discrete::{DiscreteScenario, EnumerationConfig};
pub use dynamics::{ContinuousDynamics, DiscreteDynamics};
pub use error::{Error, Result};
pub use lp::{LpOutcome, LpProblem, Polytope};
pub use par::Execution;
pub use synthesis::{SatisfactionFloor, SynthesisResult};
pub use types::{BoxSet, InputVector, StateVector, TestMap, TestSpace, TestVector};
