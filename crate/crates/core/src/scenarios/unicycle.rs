//! Planar unicycle `x = [px, py, theta]` driving to a goal disc among disc obstacles.
//!
//! `x' = [cos theta, 0; sin theta, 0; 0, 1] u`, `u` in `[-0.2, 0.2] x [-1, 1]`.
//! Barriers: `h^F = r_g^2 - |Px - g|^2`, `h^G_j = |Px - o_j|^2 - r_o^2`, with
//! `d = [o_1, o_2, ...]` in `[-1, 1]^(2 N_o)`.

use std::f64::consts::PI;

use crate::cbf::{BarrierFunction, ClassKappa, ReachAvoidSpec};
use crate::continuous::ContinuousScenario;
use crate::dynamics::ContinuousDynamics;
use crate::error::{Error, Result};
use crate::types::{BoxSet, TestSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct UnicycleConfig {
    pub goal: [f64; 2],
    pub obstacles: usize,
    pub goal_radius: f64,
    pub obstacle_radius: f64,
    pub avoid_gain: f64,
    pub floor: f64,
    pub deadline: f64,
}

impl Default for UnicycleConfig {
    fn default() -> Self {
        Self {
            goal: [0.5, 0.5],
            obstacles: 1,
            goal_radius: 0.25,
            obstacle_radius: 0.175,
            avoid_gain: 10.0,
            floor: -5.0,
            deadline: f64::INFINITY,
        }
    }
}

pub fn build_unicycle(goal: [f64; 2], obstacles: usize) -> Result<ContinuousScenario> {
    build_unicycle_with(&UnicycleConfig {
        goal,
        obstacles,
        ..UnicycleConfig::default()
    })
}

pub fn build_unicycle_with(config: &UnicycleConfig) -> Result<ContinuousScenario> {
    let [gx, gy] = config.goal;
    if !(-1.0..=1.0).contains(&gx) || !(-1.0..=1.0).contains(&gy) {
        return Err(Error::InvalidInput("unicycle goal must lie in [-1, 1]^2".into()));
    }
    if !(config.goal_radius > 0.0 && config.obstacle_radius > 0.0) {
        return Err(Error::InvalidInput("unicycle radii must be positive".into()));
    }
    let n_o = config.obstacles;
    let p = 2 * n_o;
    let dynamics = ContinuousDynamics::nominal(
        3,
        2,
        p,
        |_| vec![0.0; 3],
        |x| {
            let (s, c) = x[2].sin_cos();
            vec![vec![c, 0.0], vec![s, 0.0], vec![0.0, 1.0]]
        },
    );

    let rg2 = config.goal_radius.powi(2);
    let reach = BarrierFunction::new(
        "goal",
        move |x, _| rg2 - (x[0] - gx).powi(2) - (x[1] - gy).powi(2),
        move |x, _| vec![-2.0 * (x[0] - gx), -2.0 * (x[1] - gy), 0.0],
    );
    let ro2 = config.obstacle_radius.powi(2);
    let mut avoid = Vec::with_capacity(n_o);
    let mut gains = Vec::with_capacity(n_o);
    for j in 0..n_o {
        avoid.push(BarrierFunction::new(
            format!("obstacle_{}", j + 1),
            move |x, d| (x[0] - d[2 * j]).powi(2) + (x[1] - d[2 * j + 1]).powi(2) - ro2,
            move |x, d| vec![2.0 * (x[0] - d[2 * j]), 2.0 * (x[1] - d[2 * j + 1]), 0.0],
        ));
        gains.push(ClassKappa::linear(config.avoid_gain)?);
    }
    let spec = ReachAvoidSpec::new(reach, avoid, gains, 0.0, config.deadline)?;

    Ok(ContinuousScenario::new(
        "unicycle",
        dynamics,
        spec,
        BoxSet::new(vec![-0.2, -1.0], vec![0.2, 1.0])?,
        TestSpace::Box(BoxSet::new(vec![-1.0; p], vec![1.0; p])?),
        BoxSet::new(vec![-1.0, -1.0, 0.0], vec![1.0, 1.0, 2.0 * PI])?,
    )?
    .with_floor(config.floor)
    .with_angle_index(2))
}
