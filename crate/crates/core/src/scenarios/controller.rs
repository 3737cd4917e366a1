//! Baseline system under test: greedy progress subject to the avoid CBF rows.

use crate::cbf::{feasible_input_polytope, lie_derivatives};
use crate::continuous::ContinuousScenario;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpOutcome, LpProblem, Polytope};
use crate::types::InputVector;

/// Maximizes the reach rate over the feasible-input polytope. When that is
/// empty, maximizes the smallest slack of the avoid rows over the input box.
pub fn greedy_safe_controller(scn: &ContinuousScenario, x: &[f64], d: &[f64]) -> Result<InputVector> {
    let spec = scn.spec();
    let dynamics = scn.dynamics();
    let feasible = feasible_input_polytope(spec, dynamics, x, d, scn.input_space())?;
    let reach = lie_derivatives(spec.reach(), dynamics, x, d)?;
    match solve_lp(&LpProblem::new(reach.input, feasible)?)? {
        LpOutcome::Optimal { point, .. } => return Ok(InputVector::new(point)),
        LpOutcome::Unbounded => return Err(Error::UnboundedInner),
        LpOutcome::Infeasible => {}
    }

    // Variables (u, s): maximize s subject to -L_g h_j u + s <= L_f h_j + alpha_j(h_j).
    let m = dynamics.input_dim();
    let mut poly = Polytope::unconstrained(m + 1);
    for (h, alpha) in spec.avoid().iter().zip(spec.gains()) {
        let lie = lie_derivatives(h, dynamics, x, d)?;
        let mut row: Vec<f64> = lie.input.iter().map(|v| -v).collect();
        row.push(1.0);
        poly.push(row, lie.drift + alpha.apply(h.value(x, d)))?;
    }
    for (row, b) in scn.input_space().rows().iter().zip(scn.input_space().rhs()) {
        let mut row = row.clone();
        row.push(0.0);
        poly.push(row, *b)?;
    }
    let mut objective = vec![0.0; m];
    objective.push(1.0);
    match solve_lp(&LpProblem::new(objective, poly)?)? {
        LpOutcome::Optimal { mut point, .. } => {
            point.truncate(m);
            Ok(InputVector::new(point))
        }
        _ => Err(Error::UnboundedInner),
    }
}
