//! Sampled-time reach-avoid monitoring of logged trajectories.

use crate::cbf::ReachAvoidSpec;
use crate::error::{Error, Result};
use crate::types::{StateVector, TestVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Stamped<T> {
    pub time: f64,
    pub value: T,
}

impl<T> Stamped<T> {
    pub fn new(time: f64, value: T) -> Self {
        Self { time, value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub satisfied: bool,
    /// First sample time with `h^F >= 0` no later than the deadline.
    pub reach_time: Option<f64>,
    /// `min_{t, j} h^G_j(x(t), d(t))`; `+inf` without avoid barriers.
    pub min_avoid_value: f64,
    /// Consecutive sample pairs whose finite-difference `h^F` rate exceeds
    /// the progress margin.
    pub progress_steps: usize,
}

/// Checks the sampled trajectory against `spec`. Test vectors are held
/// constant between their time stamps; samples before the first stamp use
/// the first test vector.
pub fn monitor_trajectory(
    spec: &ReachAvoidSpec,
    trajectory: &[Stamped<StateVector>],
    tests: &[Stamped<TestVector>],
) -> Result<MonitorReport> {
    if trajectory.is_empty() {
        return Err(Error::InvalidInput("trajectory is empty".into()));
    }
    if tests.is_empty() {
        return Err(Error::InvalidInput("test sequence is empty".into()));
    }
    for (name, times) in [
        ("trajectory", trajectory.iter().map(|s| s.time).collect::<Vec<_>>()),
        ("test sequence", tests.iter().map(|s| s.time).collect()),
    ] {
        if times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidInput(format!(
                "{name} time stamps must be strictly increasing"
            )));
        }
    }

    let mut held = 0;
    let mut reach_time = None;
    let mut min_avoid_value = f64::INFINITY;
    let mut progress_steps = 0;
    let mut previous: Option<(f64, f64)> = None;
    for sample in trajectory {
        while held + 1 < tests.len() && tests[held + 1].time <= sample.time {
            held += 1;
        }
        let d = &tests[held].value;
        let x = &sample.value;
        min_avoid_value = min_avoid_value.min(spec.min_avoid(x, d));
        let reach = spec.reach().value(x, d);
        if reach_time.is_none() && reach >= 0.0 && sample.time <= spec.deadline() {
            reach_time = Some(sample.time);
        }
        if let Some((t0, h0)) = previous {
            if (reach - h0) / (sample.time - t0) - spec.progress_margin() > 0.0 {
                progress_steps += 1;
            }
        }
        previous = Some((sample.time, reach));
    }
    Ok(MonitorReport {
        satisfied: min_avoid_value >= 0.0 && reach_time.is_some(),
        reach_time,
        min_avoid_value,
        progress_steps,
    })
}
