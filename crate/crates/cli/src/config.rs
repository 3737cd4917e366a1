//! Flat TOML scenario files. Every key is optional except `scenario`;
//! unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Unicycle,
    Gridworld,
    Quadgrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    Parallel,
    Sequential,
}

impl From<ExecutionMode> for adversary_core::Execution {
    fn from(m: ExecutionMode) -> Self {
        match m {
            ExecutionMode::Parallel => Self::Parallel,
            ExecutionMode::Sequential => Self::Sequential,
        }
    }
}

/// Scenario file as written by the user.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub goal: Option<Vec<f64>>,
    pub obstacles: Option<usize>,
    pub avoid_gain: Option<f64>,
    /// Satisfaction floor `m`; overrides the scenario default.
    pub floor: Option<f64>,
    /// Predictive horizon `N` (grid world only).
    pub horizon_steps: Option<usize>,
    pub path_constrained: Option<bool>,
    pub grid_points: Option<usize>,
    pub refine_iterations: Option<usize>,
    pub progress_margin: Option<f64>,
    pub seed: Option<u64>,
    pub execution: Option<ExecutionMode>,
    pub state: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub synth_period: Option<f64>,
    pub sim_horizon: Option<f64>,
    pub obstacle_speed: Option<f64>,
    pub floor_state_points: Option<Vec<usize>>,
    pub floor_test_points: Option<usize>,
    pub budget: Option<u64>,
    /// Test vector supplying the components a sweep holds fixed.
    pub sweep_base: Option<Vec<f64>>,
}

/// Fully defaulted settings; this is what outputs echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub scenario: ScenarioKind,
    pub goal: Vec<f64>,
    pub obstacles: usize,
    pub avoid_gain: f64,
    pub floor: Option<f64>,
    pub horizon_steps: usize,
    pub path_constrained: bool,
    pub grid_points: usize,
    pub refine_iterations: usize,
    pub progress_margin: f64,
    pub seed: u64,
    pub execution: ExecutionMode,
    pub state: Option<Vec<f64>>,
    pub dt: f64,
    pub synth_period: f64,
    pub sim_horizon: f64,
    pub obstacle_speed: f64,
    pub floor_state_points: Option<Vec<usize>>,
    pub floor_test_points: usize,
    pub budget: u64,
    pub sweep_base: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fills defaults and checks value ranges.
    pub fn settings(&self) -> Result<Settings, CliError> {
        let (goal, obstacles, avoid_gain) = match self.scenario {
            ScenarioKind::Unicycle => (vec![0.5, 0.5], 1, 10.0),
            ScenarioKind::Gridworld => (vec![7.0, 9.0], 1, 1.0),
            ScenarioKind::Quadgrid => (vec![3.5, 2.5], 2, 1.0),
        };
        let s = Settings {
            scenario: self.scenario,
            goal: self.goal.clone().unwrap_or(goal),
            obstacles: self.obstacles.unwrap_or(obstacles),
            avoid_gain: self.avoid_gain.unwrap_or(avoid_gain),
            floor: self.floor,
            horizon_steps: self.horizon_steps.unwrap_or(1),
            path_constrained: self.path_constrained.unwrap_or(false),
            grid_points: self.grid_points.unwrap_or(25),
            refine_iterations: self.refine_iterations.unwrap_or(40),
            progress_margin: self.progress_margin.unwrap_or(0.0),
            seed: self.seed.unwrap_or(0),
            execution: self.execution.unwrap_or(ExecutionMode::Parallel),
            state: self.state.clone(),
            dt: self.dt.unwrap_or(0.01),
            synth_period: self.synth_period.unwrap_or(0.1),
            sim_horizon: self.sim_horizon.unwrap_or(10.0),
            obstacle_speed: self.obstacle_speed.unwrap_or(1.0),
            floor_state_points: self.floor_state_points.clone(),
            floor_test_points: self.floor_test_points.unwrap_or(5),
            budget: self.budget.unwrap_or(10_000_000),
            sweep_base: self.sweep_base.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

fn bad(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {why}"))
}

impl Settings {
    fn validate(&self) -> Result<(), CliError> {
        if self.goal.len() != 2 || self.goal.iter().any(|v| !v.is_finite()) {
            return Err(bad("goal", "expected two finite numbers"));
        }
        if self.scenario == ScenarioKind::Gridworld
            && self.goal.iter().any(|v| v.fract() != 0.0 || !(0.0..=9.0).contains(v))
        {
            return Err(bad("goal", "grid goals are integer cells in 0..=9"));
        }
        if self.scenario == ScenarioKind::Quadgrid && self.obstacles != 2 {
            return Err(bad("obstacles", "the quadruped grid has exactly two obstacles"));
        }
        if self.scenario == ScenarioKind::Gridworld && self.obstacles != 1 {
            return Err(bad("obstacles", "the grid world has exactly one obstacle"));
        }
        if !(self.avoid_gain > 0.0 && self.avoid_gain.is_finite()) {
            return Err(bad("avoid_gain", "must be positive"));
        }
        if self.floor.is_some_and(|m| !m.is_finite()) {
            return Err(bad("floor", "must be finite"));
        }
        if self.horizon_steps == 0 {
            return Err(bad("horizon_steps", "must be at least 1"));
        }
        if self.horizon_steps > 1 && self.scenario != ScenarioKind::Gridworld {
            return Err(bad("horizon_steps", "predictive horizons apply to the grid world only"));
        }
        if self.grid_points == 0 {
            return Err(bad("grid_points", "must be at least 1"));
        }
        if !self.progress_margin.is_finite() {
            return Err(bad("progress_margin", "must be finite"));
        }
        for (name, v) in [("dt", self.dt), ("synth_period", self.synth_period)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(name, "must be positive"));
            }
        }
        if self.synth_period < self.dt {
            return Err(bad("synth_period", "must be at least dt"));
        }
        if !(self.sim_horizon >= 0.0 && self.sim_horizon.is_finite()) {
            return Err(bad("sim_horizon", "must be finite and nonnegative"));
        }
        if self.obstacle_speed.is_nan() || self.obstacle_speed < 0.0 {
            return Err(bad("obstacle_speed", "must be nonnegative"));
        }
        if self.floor_test_points == 0 || self.floor_state_points.as_ref().is_some_and(|p| p.contains(&0)) {
            return Err(bad("floor_state_points", "resolutions must be positive"));
        }
        if self.budget == 0 {
            return Err(bad("budget", "must be positive"));
        }
        Ok(())
    }
}
