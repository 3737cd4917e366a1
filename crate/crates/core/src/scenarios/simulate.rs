//! Closed-loop simulation of a controller against a re-synthesizing adversary.
//!
//! Forward Euler at `dt`. Every `synth_period` the adversary solves the
//! constrained minimax problem at the current state; each block of
//! `obstacle_block` test components (one planar obstacle) then moves toward
//! its commanded value at no more than `obstacle_speed`.

use std::f64::consts::TAU;

use crate::continuous::{synthesize_constrained, ContinuousScenario, SearchConfig};
use crate::error::{Error, Result};
use crate::monitor::{monitor_trajectory, MonitorReport, Stamped};
use crate::types::{InputVector, StateVector, TestVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub synth_period: f64,
    pub horizon: f64,
    /// Speed cap per obstacle block; `inf` teleports, `0` freezes.
    pub obstacle_speed: f64,
    pub obstacle_block: usize,
    /// Satisfaction floor handed to the synthesizer.
    pub floor: f64,
    pub search: SearchConfig,
    /// Obstacle positions at `t = 0`; defaults to the first command.
    pub initial_test: Option<TestVector>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            synth_period: 0.1,
            horizon: 10.0,
            obstacle_speed: 1.0,
            obstacle_block: 2,
            floor: -5.0,
            search: SearchConfig::default(),
            initial_test: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSample {
    pub time: f64,
    pub state: StateVector,
    pub input: InputVector,
    /// Test vector most recently commanded by the adversary.
    pub commanded: TestVector,
    /// Test vector actually in effect (current obstacle positions).
    pub actual: TestVector,
    /// `min_j h^G_j(x, actual)`.
    pub min_barrier: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCommand {
    pub time: f64,
    pub state: StateVector,
    pub test: TestVector,
    pub difficulty: f64,
    pub in_gamma: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Abort {
    pub time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationLog {
    pub samples: Vec<SimSample>,
    pub commands: Vec<TestCommand>,
    pub monitor: MonitorReport,
    /// Set when integration stopped early; the log is then partial.
    pub abort: Option<Abort>,
}

impl SimulationLog {
    pub fn min_barrier_series(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.time, s.min_barrier)).collect()
    }
}

fn steps_for(span: f64, dt: f64) -> usize {
    (span / dt).round() as usize
}

/// Runs the closed loop from `x0`. The controller sees the obstacle positions
/// in effect, not the commanded ones.
pub fn simulate_adversarial<C>(
    scn: &ContinuousScenario,
    x0: &StateVector,
    controller: C,
    config: &SimulationConfig,
) -> Result<SimulationLog>
where
    C: Fn(&ContinuousScenario, &[f64], &[f64]) -> Result<InputVector>,
{
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    if !(config.synth_period >= config.dt && config.synth_period.is_finite()) {
        return Err(Error::InvalidInput("synthesis period must be at least dt".into()));
    }
    if !(config.horizon >= 0.0 && config.horizon.is_finite()) {
        return Err(Error::InvalidInput("horizon must be finite and nonnegative".into()));
    }
    if config.obstacle_speed.is_nan() || config.obstacle_speed < 0.0 || config.obstacle_block == 0 {
        return Err(Error::InvalidInput(
            "obstacle speed must be nonnegative and the block size positive".into(),
        ));
    }
    if x0.len() != scn.dynamics().state_dim() || !x0.is_finite() {
        return Err(Error::InvalidInput("initial state has the wrong size or is not finite".into()));
    }

    let steps = steps_for(config.horizon, config.dt);
    let period = steps_for(config.synth_period, config.dt).max(1);
    let spec = scn.spec();
    let mut state = x0.clone();
    let mut commands: Vec<TestCommand> = Vec::new();
    let mut samples: Vec<SimSample> = Vec::with_capacity(steps + 1);
    let mut actual: Option<TestVector> = config.initial_test.clone();
    let mut abort = None;

    for k in 0..=steps {
        let time = k as f64 * config.dt;
        if k % period == 0 && (k < steps || steps == 0) {
            let result = synthesize_constrained(scn, &state, time, config.floor, &config.search)?;
            commands.push(TestCommand {
                time,
                state: state.clone(),
                test: result.d_star.clone(),
                difficulty: result.difficulty,
                in_gamma: result.in_gamma,
            });
        }
        let commanded = commands.last().expect("first step always synthesizes").test.clone();
        let current = actual.get_or_insert_with(|| commanded.clone()).clone();
        let input = controller(scn, &state, &current)?;
        samples.push(SimSample {
            time,
            state: state.clone(),
            input: input.clone(),
            commanded: commanded.clone(),
            actual: current.clone(),
            min_barrier: spec.min_avoid(&state, &current),
        });
        if k == steps {
            break;
        }

        let rate = scn.dynamics().derivative(&state, &current, &input)?;
        let mut next: Vec<f64> = state.iter().zip(&rate).map(|(x, v)| x + config.dt * v).collect();
        if let Some(i) = scn.angle_index() {
            next[i] = next[i].rem_euclid(TAU);
        }
        if next.iter().any(|v| !v.is_finite()) {
            abort = Some(Abort {
                time: time + config.dt,
                reason: "state became non-finite during integration".into(),
            });
            break;
        }
        state = StateVector::new(next);
        actual = Some(move_toward(&current, &commanded, config.obstacle_speed * config.dt, config.obstacle_block));
    }

    let trajectory: Vec<_> = samples.iter().map(|s| Stamped::new(s.time, s.state.clone())).collect();
    let tests: Vec<_> = samples.iter().map(|s| Stamped::new(s.time, s.actual.clone())).collect();
    let monitor = monitor_trajectory(spec, &trajectory, &tests)?;
    Ok(SimulationLog {
        samples,
        commands,
        monitor,
        abort,
    })
}

/// Moves each `block`-sized chunk of `from` toward `to` by at most `max_step`.
fn move_toward(from: &TestVector, to: &TestVector, max_step: f64, block: usize) -> TestVector {
    let mut out = from.to_vec();
    for (cur, target) in out.chunks_mut(block).zip(to.chunks(block)) {
        let dist = cur
            .iter()
            .zip(target)
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt();
        if dist <= max_step {
            cur.copy_from_slice(target);
        } else {
            let scale = max_step / dist;
            for (a, b) in cur.iter_mut().zip(target) {
                *a += scale * (b - *a);
            }
        }
    }
    TestVector::new(out)
}
