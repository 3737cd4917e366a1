//! Ready-to-run scenarios: the unicycle, the grid world and the constrained
//! quadruped grid, plus a baseline controller and a closed-loop simulator.

pub mod controller;
pub mod gridworld;
pub mod quadgrid;
pub mod simulate;
pub mod unicycle;

pub use controller::greedy_safe_controller;
pub use gridworld::{build_gridworld, build_gridworld_with_cache, solve_reward, RewardCache, RewardGrid};
pub use quadgrid::{build_quadgrid, build_quadgrid_with, QuadGridConfig};
pub use simulate::{simulate_adversarial, SimulationConfig, SimulationLog};
pub use unicycle::{build_unicycle, build_unicycle_with, UnicycleConfig};
