//! Single-integrator stand-in for a legged robot crossing a unit grid, with
//! two obstacle agents restricted to the corners of the cell the robot is in.

use crate::cbf::{BarrierFunction, ClassKappa, ReachAvoidSpec};
use crate::continuous::ContinuousScenario;
use crate::dynamics::ContinuousDynamics;
use crate::error::Result;
use crate::types::{BoxSet, StateVector, TestMap, TestSpace, TestVector};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadGridConfig {
    pub goal: [f64; 2],
    pub radius: f64,
    pub avoid_gain: f64,
    pub deadline: f64,
}

impl Default for QuadGridConfig {
    fn default() -> Self {
        Self {
            goal: [3.5, 2.5],
            radius: 0.3,
            avoid_gain: 1.0,
            deadline: f64::INFINITY,
        }
    }
}

/// `{floor x1, ceil x1} x {floor x2, ceil x2}`, lexicographic. Integral
/// coordinates collapse the set.
pub fn cell_corners(x: &[f64]) -> Vec<[f64; 2]> {
    let axis = |v: f64| {
        let (lo, hi) = (v.floor(), v.ceil());
        if lo == hi {
            vec![lo]
        } else {
            vec![lo, hi]
        }
    };
    let xs = axis(x[0]);
    let ys = axis(x[1]);
    xs.iter().flat_map(|&a| ys.iter().map(move |&b| [a, b])).collect()
}

/// Every assignment of the two obstacles to corners of the cell containing `x`.
pub fn corner_tests(x: &[f64]) -> Vec<TestVector> {
    let corners = cell_corners(x);
    corners
        .iter()
        .flat_map(|a| corners.iter().map(move |b| TestVector::from([a[0], a[1], b[0], b[1]])))
        .collect()
}

pub fn corner_map() -> TestMap {
    TestMap::new(|x: &StateVector, _t| TestSpace::Finite(corner_tests(x)))
}

fn radial(x: &[f64], c: &[f64]) -> (f64, [f64; 2]) {
    let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
    let r = dx.hypot(dy);
    if r == 0.0 {
        (0.0, [0.0, 0.0])
    } else {
        (r, [dx / r, dy / r])
    }
}

pub fn build_quadgrid() -> Result<ContinuousScenario> {
    build_quadgrid_with(&QuadGridConfig::default())
}

pub fn build_quadgrid_with(config: &QuadGridConfig) -> Result<ContinuousScenario> {
    let dynamics = ContinuousDynamics::nominal(
        2,
        2,
        4,
        |_| vec![0.0; 2],
        |_| vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    );
    let goal = config.goal;
    let radius = config.radius;
    let reach = BarrierFunction::new(
        "goal",
        move |x, _| radius - radial(x, &goal).0,
        move |x, _| {
            let (_, e) = radial(x, &goal);
            vec![-e[0], -e[1]]
        },
    );
    let mut avoid = Vec::new();
    let mut gains = Vec::new();
    for j in 0..2 {
        avoid.push(BarrierFunction::new(
            format!("agent_{}", j + 1),
            move |x, d| radial(x, &d[2 * j..2 * j + 2]).0 - radius,
            move |x, d| radial(x, &d[2 * j..2 * j + 2]).1.to_vec(),
        ));
        gains.push(ClassKappa::linear(config.avoid_gain)?);
    }
    let spec = ReachAvoidSpec::new(reach, avoid, gains, 0.0, config.deadline)?;
    ContinuousScenario::new(
        "quadgrid",
        dynamics,
        spec,
        BoxSet::new(vec![-5.0, -5.0], vec![5.0, 5.0])?,
        TestSpace::Mapped(corner_map()),
        BoxSet::new(vec![-1.0, -2.0], vec![4.0, 3.0])?,
    )
}
