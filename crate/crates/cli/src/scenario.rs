//! Builds core scenarios from [`Settings`] and wraps the synthesizers behind
//! one interface for the commands.

use std::sync::Arc;

use adversary_core::continuous::{self, resolve_floor, ContinuousScenario, FloorResolution, SearchConfig};
use adversary_core::discrete::{self, DiscreteScenario, EnumerationConfig};
use adversary_core::scenarios::gridworld::{build_gridworld_with_cache, RewardCache, GRID_FLOOR};
use adversary_core::scenarios::{build_quadgrid_with, build_unicycle_with, QuadGridConfig, UnicycleConfig};
use adversary_core::synthesis::{FloorProvenance, SatisfactionFloor};
use adversary_core::{BoxSet, Execution, StateVector, SynthesisResult, TestSpace, TestVector};
use serde::Serialize;

use crate::config::{ScenarioKind, Settings};
use crate::error::CliError;

pub enum Built {
    Continuous(ContinuousScenario),
    Discrete(DiscreteScenario),
}

pub fn build(settings: &Settings, cache: &Arc<RewardCache>) -> Result<Built, CliError> {
    match settings.scenario {
        ScenarioKind::Unicycle => {
            let defaults = UnicycleConfig::default();
            let cfg = UnicycleConfig {
                goal: [settings.goal[0], settings.goal[1]],
                obstacles: settings.obstacles,
                avoid_gain: settings.avoid_gain,
                floor: settings.floor.unwrap_or(defaults.floor),
                ..defaults
            };
            Ok(Built::Continuous(build_unicycle_with(&cfg)?))
        }
        ScenarioKind::Quadgrid => {
            let cfg = QuadGridConfig {
                goal: [settings.goal[0], settings.goal[1]],
                avoid_gain: settings.avoid_gain,
                ..QuadGridConfig::default()
            };
            let scn = build_quadgrid_with(&cfg)?;
            Ok(Built::Continuous(match settings.floor {
                Some(m) => scn.with_floor(m),
                None => scn,
            }))
        }
        ScenarioKind::Gridworld => {
            let goal = [settings.goal[0] as usize, settings.goal[1] as usize];
            grid_for_goal(settings, goal, cache).map(Built::Discrete)
        }
    }
}

/// Grid world for `goal`, sharing reward grids through `cache`.
pub fn grid_for_goal(settings: &Settings, goal: [usize; 2], cache: &Arc<RewardCache>) -> Result<DiscreteScenario, CliError> {
    Ok(build_gridworld_with_cache(goal, Arc::clone(cache))?
        .with_floor(settings.floor.unwrap_or(GRID_FLOOR))
        .with_horizon(settings.horizon_steps)?
        .with_path_constraints(settings.path_constrained))
}

pub fn search_config(settings: &Settings) -> SearchConfig {
    SearchConfig {
        grid_points: settings.grid_points,
        refine_iterations: settings.refine_iterations,
        execution: settings.execution.into(),
        progress_margin: settings.progress_margin,
        ..SearchConfig::default()
    }
}

pub fn enumeration_config(settings: &Settings) -> EnumerationConfig {
    EnumerationConfig {
        execution: settings.execution.into(),
        budget: settings.budget as u128,
        ..EnumerationConfig::default()
    }
}

/// Floor and where it came from, in output form.
#[derive(Debug, Clone, Serialize)]
pub struct FloorReport {
    pub m: f64,
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_minimum: Option<f64>,
}

impl From<&SatisfactionFloor> for FloorReport {
    fn from(f: &SatisfactionFloor) -> Self {
        match &f.provenance {
            FloorProvenance::UserSupplied => Self {
                m: f.m,
                source: "pinned",
                grid_minimum: None,
            },
            FloorProvenance::GridEstimate { grid_minimum, .. } => Self {
                m: f.m,
                source: "grid-estimate",
                grid_minimum: Some(*grid_minimum),
            },
        }
    }
}

impl Built {
    pub fn state_dim(&self) -> usize {
        match self {
            Self::Continuous(s) => s.dynamics().state_dim(),
            Self::Discrete(_) => 2,
        }
    }

    pub fn state_bounds(&self) -> BoxSet {
        match self {
            Self::Continuous(s) => s.state_bounds().clone(),
            Self::Discrete(_) => BoxSet::new(vec![0.0; 2], vec![9.0; 2]).expect("valid grid bounds"),
        }
    }

    pub fn floor(&self, settings: &Settings) -> Result<SatisfactionFloor, CliError> {
        match self {
            Self::Continuous(s) => {
                let n = s.dynamics().state_dim();
                let res = FloorResolution {
                    state_points: settings.floor_state_points.clone().unwrap_or_else(|| vec![9; n]),
                    test_points: settings.floor_test_points,
                };
                if res.state_points.len() != n {
                    return Err(CliError::Config(format!(
                        "field `floor_state_points`: expected {n} entries, got {}",
                        res.state_points.len()
                    )));
                }
                Ok(resolve_floor(s, &res, Execution::from(settings.execution))?)
            }
            Self::Discrete(s) => Ok(SatisfactionFloor::user(s.floor().unwrap_or(GRID_FLOOR))),
        }
    }

    /// Runs the scenario's synthesizer at `(x, t)`.
    pub fn synthesize(&self, x: &StateVector, t: f64, m: f64, settings: &Settings) -> Result<SynthesisResult, CliError> {
        Ok(match self {
            Self::Continuous(s) => {
                let search = search_config(settings);
                if s.test_space().is_mapped() {
                    continuous::synthesize_constrained(s, x, t, m, &search)?
                } else {
                    continuous::synthesize(s, x, m, &search)?
                }
            }
            Self::Discrete(s) => {
                let cfg = enumeration_config(settings);
                if s.horizon() == 1 {
                    discrete::synthesize_discrete(s, x, m, &cfg)?
                } else {
                    discrete::synthesize_predictive(s, x, m, s.horizon(), &cfg)?
                }
            }
        })
    }

    /// Difficulty of a single test, as the synthesizer scores it.
    pub fn difficulty(&self, x: &[f64], d: &[f64], m: f64, settings: &Settings) -> Result<f64, CliError> {
        Ok(match self {
            Self::Continuous(s) => continuous::difficulty_with_margin(s, x, d, m, settings.progress_margin)?.value,
            Self::Discrete(s) => {
                if s.horizon() == 1 {
                    discrete::difficulty_mbar(s, x, d, m).value
                } else {
                    discrete::difficulty_predictive(s, x, d, m, s.horizon())?.value
                }
            }
        })
    }

    /// Test vector a sweep starts from: the first admissible test at `x`.
    pub fn base_test(&self, x: &StateVector) -> Result<TestVector, CliError> {
        let space = match self {
            Self::Continuous(s) => s.test_space().resolve(x, 0.0)?,
            Self::Discrete(s) => s.test_space().resolve(x, 0.0)?,
        };
        Ok(match space {
            TestSpace::Box(b) => {
                TestVector::new(b.lower().iter().zip(b.upper()).map(|(l, u)| 0.5 * (l + u)).collect())
            }
            TestSpace::Finite(items) => items[0].clone(),
            TestSpace::Mapped(_) => unreachable!("resolve never returns a map"),
        })
    }
}
