//! 10 x 10 grid world with one obstacle cell chosen by the adversary.
//!
//! The barriers come from a harmonic value grid: `V = 10` at the goal, `-10`
//! at the obstacle, and every other cell equals the mean of its five
//! successors (stay, left, right, up, down, with blocked moves staying put).
//! `R*` then lifts the goal to `10.1` and drops the obstacle to `-10.1`, and
//! `h^F = R* - 10`, `h^G = R* + 10`. A goal and obstacle on the same cell have
//! no solution; `R*` is then identically zero.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::cbf::{BarrierFunction, ClassKappa, ReachAvoidSpec};
use crate::discrete::DiscreteScenario;
use crate::dynamics::DiscreteDynamics;
use crate::error::{Error, Result};
use crate::types::{InputVector, TestSpace, TestVector};

pub const GRID_SIZE: usize = 10;
pub const GOAL_VALUE: f64 = 10.0;
pub const GOAL_VALUE_MODIFIED: f64 = 10.1;
pub const GRID_FLOOR: f64 = -15.0;
/// Bound on `|V - update(V)|` at non-fixed cells after the dense solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Grid cell `[x0, x1]`, both in `0..GRID_SIZE`.
pub type Cell = [usize; 2];

pub type ValueGrid = [[f64; GRID_SIZE]; GRID_SIZE];

/// Action labels and displacements, in canonical (tie-breaking) order.
pub const ACTIONS: [(&str, [f64; 2]); 5] = [
    ("stay", [0.0, 0.0]),
    ("left", [-1.0, 0.0]),
    ("right", [1.0, 0.0]),
    ("up", [0.0, 1.0]),
    ("down", [0.0, -1.0]),
];

/// Successor of `cell` under an action displacement; moves off the grid stay put.
pub fn successor(cell: Cell, delta: [f64; 2]) -> Cell {
    let move_axis = |v: usize, dv: f64| {
        let next = v as i64 + dv as i64;
        if (0..GRID_SIZE as i64).contains(&next) {
            Some(next as usize)
        } else {
            None
        }
    };
    match (move_axis(cell[0], delta[0]), move_axis(cell[1], delta[1])) {
        (Some(a), Some(b)) => [a, b],
        _ => cell,
    }
}

/// Nearest cell to a (possibly fractional) state, clamped to the grid.
pub fn cell_of(x: &[f64]) -> Cell {
    let axis = |v: f64| v.round().clamp(0.0, (GRID_SIZE - 1) as f64) as usize;
    [axis(x[0]), axis(x[1])]
}

pub fn is_cell(c: Cell) -> bool {
    c[0] < GRID_SIZE && c[1] < GRID_SIZE
}

/// Base value grid `R(d)` (if solvable) and the modified `R*(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardGrid {
    goal: Cell,
    obstacle: Cell,
    base: Option<ValueGrid>,
    modified: ValueGrid,
}

impl RewardGrid {
    pub fn is_feasible(&self) -> bool {
        self.base.is_some()
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn obstacle(&self) -> Cell {
        self.obstacle
    }

    pub fn base(&self) -> Option<&ValueGrid> {
        self.base.as_ref()
    }

    pub fn modified(&self) -> &ValueGrid {
        &self.modified
    }

    pub fn at(&self, c: Cell) -> f64 {
        self.modified[c[0]][c[1]]
    }
}

/// Mean of `grid` over the five successors of `cell`.
pub fn successor_mean(grid: &ValueGrid, cell: Cell) -> f64 {
    ACTIONS
        .iter()
        .map(|(_, delta)| {
            let s = successor(cell, *delta);
            0.2 * grid[s[0]][s[1]]
        })
        .sum()
}

/// Solves the absorbing harmonic system by dense LU and applies the `R*` overrides.
pub fn solve_reward(goal: Cell, obstacle: Cell) -> Result<RewardGrid> {
    if !is_cell(goal) || !is_cell(obstacle) {
        return Err(Error::InvalidInput(format!(
            "cells must lie in 0..{GRID_SIZE}: goal {goal:?}, obstacle {obstacle:?}"
        )));
    }
    if goal == obstacle {
        return Ok(RewardGrid {
            goal,
            obstacle,
            base: None,
            modified: [[0.0; GRID_SIZE]; GRID_SIZE],
        });
    }
    let n = GRID_SIZE * GRID_SIZE;
    let idx = |c: Cell| c[0] * GRID_SIZE + c[1];
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..GRID_SIZE {
        for j in 0..GRID_SIZE {
            let c = [i, j];
            let k = idx(c);
            a[(k, k)] = 1.0;
            if c == goal {
                b[k] = GOAL_VALUE;
            } else if c == obstacle {
                b[k] = -GOAL_VALUE;
            } else {
                for (_, delta) in ACTIONS {
                    a[(k, idx(successor(c, delta)))] -= 0.2;
                }
            }
        }
    }
    let v = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("reward system has no unique solution".into()))?;

    let mut base = [[0.0; GRID_SIZE]; GRID_SIZE];
    for i in 0..GRID_SIZE {
        for j in 0..GRID_SIZE {
            base[i][j] = v[idx([i, j])];
        }
    }
    base[goal[0]][goal[1]] = GOAL_VALUE;
    base[obstacle[0]][obstacle[1]] = -GOAL_VALUE;
    let residual = max_residual(&base, goal, obstacle);
    if residual > RESIDUAL_TOLERANCE {
        return Err(Error::Singular(format!(
            "reward residual {residual:e} exceeds {RESIDUAL_TOLERANCE:e}"
        )));
    }

    let mut modified = base;
    modified[goal[0]][goal[1]] = GOAL_VALUE_MODIFIED;
    modified[obstacle[0]][obstacle[1]] = -GOAL_VALUE_MODIFIED;
    Ok(RewardGrid {
        goal,
        obstacle,
        base: Some(base),
        modified,
    })
}

/// `max |V - successor_mean(V)|` over cells other than `goal` and `obstacle`.
pub fn max_residual(grid: &ValueGrid, goal: Cell, obstacle: Cell) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..GRID_SIZE {
        for j in 0..GRID_SIZE {
            let c = [i, j];
            if c != goal && c != obstacle {
                worst = worst.max((grid[i][j] - successor_mean(grid, c)).abs());
            }
        }
    }
    worst
}

/// Concurrent memo of reward grids keyed by `(goal, obstacle)`.
#[derive(Debug, Default)]
pub struct RewardCache {
    grids: RwLock<HashMap<(Cell, Cell), Arc<RewardGrid>>>,
}

impl RewardCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, goal: Cell, obstacle: Cell) -> Result<Arc<RewardGrid>> {
        if let Some(g) = self.grids.read().expect("reward cache poisoned").get(&(goal, obstacle)) {
            return Ok(Arc::clone(g));
        }
        let solved = Arc::new(solve_reward(goal, obstacle)?);
        let mut map = self.grids.write().expect("reward cache poisoned");
        Ok(Arc::clone(map.entry((goal, obstacle)).or_insert(solved)))
    }

    pub fn len(&self) -> usize {
        self.grids.read().expect("reward cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn grid_dynamics() -> DiscreteDynamics {
    let alphabet = ACTIONS
        .iter()
        .map(|(label, delta)| (label.to_string(), InputVector::from(*delta)))
        .collect();
    DiscreteDynamics::new(alphabet, |x, u| {
        let next = successor(cell_of(x), [u[0], u[1]]);
        vec![next[0] as f64, next[1] as f64]
    })
    .expect("grid alphabet is nonempty")
}

/// All cells in row-major order, as test vectors.
pub fn all_cells() -> Vec<TestVector> {
    (0..GRID_SIZE)
        .flat_map(|i| (0..GRID_SIZE).map(move |j| TestVector::from([i as f64, j as f64])))
        .collect()
}

pub fn build_gridworld(goal: Cell) -> Result<DiscreteScenario> {
    build_gridworld_with_cache(goal, Arc::new(RewardCache::new()))
}

pub fn build_gridworld_with_cache(goal: Cell, cache: Arc<RewardCache>) -> Result<DiscreteScenario> {
    if !is_cell(goal) {
        return Err(Error::InvalidInput(format!("goal {goal:?} is off the grid")));
    }
    let reward = move |cache: &RewardCache, x: &[f64], d: &[f64]| {
        cache
            .get(goal, cell_of(d))
            .expect("reward system is nonsingular for on-grid cells")
            .at(cell_of(x))
    };
    let reach_cache = Arc::clone(&cache);
    let reach = BarrierFunction::discrete("goal", move |x, d| {
        reward(&reach_cache, x, d) - GOAL_VALUE
    });
    let avoid = BarrierFunction::discrete("obstacle", move |x, d| reward(&cache, x, d) + GOAL_VALUE);
    let spec = ReachAvoidSpec::new(reach, vec![avoid], vec![ClassKappa::Linear(1.0)], 0.0, f64::INFINITY)?;
    Ok(
        DiscreteScenario::new("gridworld", grid_dynamics(), spec, TestSpace::Finite(all_cells()))?
            .with_floor(GRID_FLOOR),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_values_and_overrides() {
        let r = solve_reward([7, 9], [5, 5]).unwrap();
        let base = r.base().unwrap();
        assert_eq!(base[7][9], 10.0);
        assert_eq!(base[5][5], -10.0);
        assert_eq!(r.at([7, 9]), 10.1);
        assert_eq!(r.at([5, 5]), -10.1);
        assert!(max_residual(base, [7, 9], [5, 5]) <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn interior_cells_average_four_neighbours() {
        let r = solve_reward([7, 9], [5, 5]).unwrap();
        let v = r.base().unwrap();
        for c in [[3, 3], [6, 2], [2, 7]] {
            let mean = 0.25 * (v[c[0] - 1][c[1]] + v[c[0] + 1][c[1]] + v[c[0]][c[1] - 1] + v[c[0]][c[1] + 1]);
            assert!((v[c[0]][c[1]] - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn overlap_is_infeasible() {
        let r = solve_reward([4, 4], [4, 4]).unwrap();
        assert!(!r.is_feasible());
        assert!(r.modified().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn off_grid_cells_are_rejected() {
        assert!(solve_reward([10, 0], [0, 0]).is_err());
        assert!(build_gridworld([0, 10]).is_err());
    }

    #[test]
    fn boundary_moves_stay() {
        assert_eq!(successor([9, 5], [1.0, 0.0]), [9, 5]);
        assert_eq!(successor([0, 0], [0.0, -1.0]), [0, 0]);
        assert_eq!(successor([3, 5], [0.0, 1.0]), [3, 6]);
    }

    #[test]
    fn cache_reuses_solutions() {
        let cache = RewardCache::new();
        let a = cache.get([1, 1], [2, 2]).unwrap();
        let b = cache.get([1, 1], [2, 2]).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }
}
