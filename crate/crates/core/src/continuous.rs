//! Continuous-time adversary: difficulty `M(x, d)`, floor estimation and the
//! minimax test synthesizer over boxes, finite sets and state/time maps.
//!
//! The inner maximization over inputs is an exact LP. The outer minimization
//! over a box is a deterministic uniform grid followed by compass search from
//! the best grid point; finite test sets are enumerated exhaustively. Any test
//! that empties the feasible-input polytope attains the floor `m`, which is a
//! global minimum, so the search stops at the first such test.

use log::debug;

use crate::cbf::{feasible_input_polytope, filter, lie_derivatives, ReachAvoidSpec};
use crate::dynamics::ContinuousDynamics;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpOutcome, LpProblem, Polytope};
use crate::par::{self, Execution};
use crate::synthesis::{check_floor, FloorProvenance, SatisfactionFloor, SynthesisResult, FLOOR_MARGIN};
use crate::types::{BoxSet, Grid, InputVector, StateVector, TestSpace, TestVector};

/// A control-affine system, its reach-avoid task, a box input set and the
/// adversary's test space.
#[derive(Debug, Clone)]
pub struct ContinuousScenario {
    name: String,
    dynamics: ContinuousDynamics,
    spec: ReachAvoidSpec,
    input_box: BoxSet,
    input_space: Polytope,
    test_space: TestSpace,
    state_bounds: BoxSet,
    floor: Option<f64>,
    angle_index: Option<usize>,
}

impl ContinuousScenario {
    pub fn new(
        name: impl Into<String>,
        dynamics: ContinuousDynamics,
        spec: ReachAvoidSpec,
        input_box: BoxSet,
        test_space: TestSpace,
        state_bounds: BoxSet,
    ) -> Result<Self> {
        let check = |context, expected, actual| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    actual,
                })
            }
        };
        check("input box", dynamics.input_dim(), input_box.dim())?;
        check("state bounds", dynamics.state_dim(), state_bounds.dim())?;
        match &test_space {
            TestSpace::Box(b) => check("test box", dynamics.test_dim(), b.dim())?,
            TestSpace::Finite(items) => {
                test_space.validate()?;
                check("finite test space", dynamics.test_dim(), items[0].len())?;
            }
            TestSpace::Mapped(_) => {}
        }
        let input_space = Polytope::from_box(input_box.lower(), input_box.upper())?;
        Ok(Self {
            name: name.into(),
            dynamics,
            spec,
            input_box,
            input_space,
            test_space,
            state_bounds,
            floor: None,
            angle_index: None,
        })
    }

    /// Pins the satisfaction floor `m`.
    pub fn with_floor(mut self, m: f64) -> Self {
        self.floor = Some(m);
        self
    }

    /// Marks a state component as a heading to be wrapped into `[0, 2pi)`.
    pub fn with_angle_index(mut self, index: usize) -> Self {
        self.angle_index = Some(index);
        self
    }

    pub fn with_test_space(mut self, test_space: TestSpace) -> Result<Self> {
        let floor = self.floor;
        let angle = self.angle_index;
        self = Self::new(
            self.name,
            self.dynamics,
            self.spec,
            self.input_box,
            test_space,
            self.state_bounds,
        )?;
        self.floor = floor;
        self.angle_index = angle;
        Ok(self)
    }

    pub fn with_spec(mut self, spec: ReachAvoidSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn with_dynamics(mut self, dynamics: ContinuousDynamics) -> Result<Self> {
        if dynamics.input_dim() != self.dynamics.input_dim()
            || dynamics.state_dim() != self.dynamics.state_dim()
            || dynamics.test_dim() != self.dynamics.test_dim()
        {
            return Err(Error::InvalidInput(
                "replacement dynamics must keep state, input and test dimensions".into(),
            ));
        }
        self.dynamics = dynamics;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dynamics(&self) -> &ContinuousDynamics {
        &self.dynamics
    }

    pub fn spec(&self) -> &ReachAvoidSpec {
        &self.spec
    }

    pub fn input_box(&self) -> &BoxSet {
        &self.input_box
    }

    pub fn input_space(&self) -> &Polytope {
        &self.input_space
    }

    pub fn test_space(&self) -> &TestSpace {
        &self.test_space
    }

    pub fn state_bounds(&self) -> &BoxSet {
        &self.state_bounds
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn angle_index(&self) -> Option<usize> {
        self.angle_index
    }
}

/// Outer search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Grid points per non-degenerate test axis.
    pub grid_points: usize,
    /// Compass-search iterations after the grid.
    pub refine_iterations: usize,
    /// Refinement stops once every step is below this fraction of the test-box diameter.
    pub step_tolerance: f64,
    /// Grid indices evaluated per batch before checking for an early exit.
    pub chunk_size: usize,
    pub execution: Execution,
    /// Constant subtracted from the reach rate on the non-fallback branch.
    pub progress_margin: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 25,
            refine_iterations: 40,
            step_tolerance: 1e-4,
            chunk_size: 64,
            execution: Execution::default(),
            progress_margin: 0.0,
        }
    }
}

/// Value of the inner maximization at one `(x, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Difficulty {
    pub value: f64,
    /// `None` when no input satisfies the avoid constraints.
    pub maximizer: Option<InputVector>,
}

impl Difficulty {
    pub fn in_gamma(&self) -> bool {
        self.maximizer.is_none()
    }
}

/// `M(x, d)`: best achievable reach rate over inputs that keep every avoid
/// barrier's CBF condition, or `m` when there are none.
pub fn difficulty(scn: &ContinuousScenario, x: &[f64], d: &[f64], m: f64) -> Result<Difficulty> {
    difficulty_with_margin(scn, x, d, m, 0.0)
}

/// [`difficulty`] with the reach rate shifted down by `margin` on the
/// non-fallback branch.
pub fn difficulty_with_margin(
    scn: &ContinuousScenario,
    x: &[f64],
    d: &[f64],
    m: f64,
    margin: f64,
) -> Result<Difficulty> {
    let feasible = feasible_input_polytope(&scn.spec, &scn.dynamics, x, d, &scn.input_space)?;
    let reach = lie_derivatives(scn.spec.reach(), &scn.dynamics, x, d)?;
    match solve_lp(&LpProblem::new(reach.input, feasible.clone())?)? {
        LpOutcome::Infeasible => Ok(Difficulty {
            value: m,
            maximizer: None,
        }),
        LpOutcome::Unbounded => Err(Error::UnboundedInner),
        LpOutcome::Optimal { value, point } => {
            let value = filter(reach.drift + value - margin, point.as_slice(), &feasible, m);
            Ok(Difficulty {
                value,
                maximizer: Some(InputVector::new(point)),
            })
        }
    }
}

/// Grid resolution for [`compute_m`].
#[derive(Debug, Clone, PartialEq)]
pub struct FloorResolution {
    /// Points per state axis.
    pub state_points: Vec<usize>,
    /// Points per test axis (box test spaces only).
    pub test_points: usize,
}

/// The scenario's pinned floor, or a grid estimate at `resolution`.
pub fn resolve_floor(
    scn: &ContinuousScenario,
    resolution: &FloorResolution,
    exec: Execution,
) -> Result<SatisfactionFloor> {
    match scn.floor {
        Some(m) => Ok(SatisfactionFloor::user(m)),
        None => compute_m(scn, resolution, exec),
    }
}

/// Grid estimate of the satisfaction floor: the minimum reach rate over state
/// grid x test grid x input-box vertices, lowered by a 10% absolute margin.
///
/// A linear rate attains its minimum over the input box at a vertex, so only
/// vertices are visited.
pub fn compute_m(
    scn: &ContinuousScenario,
    resolution: &FloorResolution,
    exec: Execution,
) -> Result<SatisfactionFloor> {
    let states = Grid::with_counts(scn.state_bounds.clone(), resolution.state_points.clone())?;
    if states.is_empty() {
        return Err(Error::InvalidInput("state grid for the floor estimate is empty".into()));
    }
    let vertices = scn.input_box.vertices();
    let per_state = par::map_indexed(states.len(), exec, |i| -> Result<f64> {
        let x = StateVector::new(states.point(i));
        let tests: Vec<Vec<f64>> = match scn.test_space.resolve(&x, 0.0)? {
            TestSpace::Box(b) => {
                let g = b.grid(resolution.test_points);
                (0..g.len()).map(|k| g.point(k)).collect()
            }
            TestSpace::Finite(items) => items.into_iter().map(TestVector::into_inner).collect(),
            TestSpace::Mapped(_) => unreachable!("resolve never returns a map"),
        };
        if tests.is_empty() {
            return Err(Error::InvalidInput("test grid for the floor estimate is empty".into()));
        }
        let mut lowest = f64::INFINITY;
        for d in &tests {
            let lie = lie_derivatives(scn.spec.reach(), &scn.dynamics, &x, d)?;
            for v in &vertices {
                lowest = lowest.min(lie.rate(v));
            }
        }
        Ok(lowest)
    });
    let mut grid_minimum = f64::INFINITY;
    for v in per_state {
        grid_minimum = grid_minimum.min(v?);
    }
    Ok(SatisfactionFloor {
        m: grid_minimum - FLOOR_MARGIN * grid_minimum.abs(),
        provenance: FloorProvenance::GridEstimate {
            state_points: resolution.state_points.clone(),
            test_points: resolution.test_points,
            margin: FLOOR_MARGIN,
            grid_minimum,
        },
    })
}

/// Minimax synthesis over the scenario's box or finite test space.
pub fn synthesize(
    scn: &ContinuousScenario,
    x: &StateVector,
    m: f64,
    search: &SearchConfig,
) -> Result<SynthesisResult> {
    if scn.test_space.is_mapped() {
        return Err(Error::InvalidTestSpace(
            "state-dependent test maps need synthesize_constrained".into(),
        ));
    }
    synthesize_in(scn, &scn.test_space, x, m, search)
}

/// Synthesis against dynamics whose drift, actuation or additive term depend
/// on `d`. The scenario's [`ContinuousDynamics`] already carries that
/// dependence, so this shares [`synthesize`]'s search.
pub fn synthesize_perturbed(
    scn: &ContinuousScenario,
    x: &StateVector,
    m: f64,
    search: &SearchConfig,
) -> Result<SynthesisResult> {
    synthesize(scn, x, m, search)
}

/// Synthesis over the test space evaluated at `(x, t)`; the result always
/// lies in that set.
pub fn synthesize_constrained(
    scn: &ContinuousScenario,
    x: &StateVector,
    t: f64,
    m: f64,
    search: &SearchConfig,
) -> Result<SynthesisResult> {
    let space = scn.test_space.resolve(x, t)?;
    if let TestSpace::Finite(items) = &space {
        if items[0].len() != scn.dynamics.test_dim() {
            return Err(Error::DimensionMismatch {
                context: "mapped test space",
                expected: scn.dynamics.test_dim(),
                actual: items[0].len(),
            });
        }
    }
    synthesize_in(scn, &space, x, m, search)
}

enum Candidates<'a> {
    Grid(Grid),
    List(&'a [TestVector]),
}

impl Candidates<'_> {
    fn len(&self) -> usize {
        match self {
            Candidates::Grid(g) => g.len(),
            Candidates::List(items) => items.len(),
        }
    }

    fn point(&self, i: usize) -> Vec<f64> {
        match self {
            Candidates::Grid(g) => g.point(i),
            Candidates::List(items) => items[i].to_vec(),
        }
    }
}

fn synthesize_in(
    scn: &ContinuousScenario,
    space: &TestSpace,
    x: &StateVector,
    m: f64,
    search: &SearchConfig,
) -> Result<SynthesisResult> {
    if x.len() != scn.dynamics.state_dim() {
        return Err(Error::DimensionMismatch {
            context: "state",
            expected: scn.dynamics.state_dim(),
            actual: x.len(),
        });
    }
    if !x.is_finite() || !m.is_finite() {
        return Err(Error::NonFinite("synthesis state or floor"));
    }
    let candidates = match space {
        TestSpace::Box(b) => Candidates::Grid(b.grid(search.grid_points.max(1))),
        TestSpace::Finite(items) => Candidates::List(items),
        TestSpace::Mapped(_) => unreachable!("callers resolve maps first"),
    };
    let margin = search.progress_margin;
    let n = candidates.len();
    let scan = par::scan_until(
        n,
        search.chunk_size,
        search.execution,
        |i| difficulty_with_margin(scn, x, &candidates.point(i), m, margin),
        |r| r.as_ref().map_or(true, Difficulty::in_gamma),
    );
    let mut evaluated = Vec::with_capacity(scan.results.len());
    for r in scan.results {
        evaluated.push(r?);
    }
    check_floor(m, evaluated.iter().filter(|d| !d.in_gamma()).map(|d| &d.value))?;

    let early_exit = scan.first_stop.is_some();
    let best = scan.first_stop.unwrap_or_else(|| {
        (1..evaluated.len()).fold(0, |best, i| {
            if evaluated[i].value < evaluated[best].value {
                i
            } else {
                best
            }
        })
    });
    let mut d_star = candidates.point(best);
    let mut best_value = evaluated[best].clone();
    let mut evaluations = evaluated.len();

    if let (Candidates::Grid(grid), false) = (&candidates, early_exit) {
        let TestSpace::Box(bounds) = space else {
            unreachable!()
        };
        let (d, value, extra) = compass_search(scn, x, m, search, bounds, grid, d_star, best_value)?;
        d_star = d;
        best_value = value;
        evaluations += extra;
    }

    let mut warnings = Vec::new();
    if scn.spec.reach().value(x, &d_star) >= 0.0 {
        warnings.push("start state already satisfies the reach predicate".to_owned());
    }
    if scn.spec.min_avoid(x, &d_star) < 0.0 {
        warnings.push("start state violates an avoid predicate under the synthesized test".to_owned());
    }
    if !scn.state_bounds.contains(x) {
        warnings.push("start state lies outside the state bounds".to_owned());
    }
    for w in &warnings {
        debug!("{}: {w}", scn.name);
    }

    Ok(SynthesisResult {
        d_star: TestVector::new(d_star),
        difficulty: best_value.value,
        in_gamma: best_value.in_gamma(),
        inner_maximizer: best_value.maximizer,
        input_sequence: None,
        evaluations,
        early_exit,
        candidates: n,
        warnings,
    })
}

/// Coordinate polling with step halving; accepts strict improvements only.
#[allow(clippy::too_many_arguments)]
fn compass_search(
    scn: &ContinuousScenario,
    x: &StateVector,
    m: f64,
    search: &SearchConfig,
    bounds: &BoxSet,
    grid: &Grid,
    start: Vec<f64>,
    start_value: Difficulty,
) -> Result<(Vec<f64>, Difficulty, usize)> {
    let diameter = bounds.diameter();
    let mut steps = grid.spacing();
    let mut current = start;
    let mut value = start_value;
    let mut evaluations = 0;
    if diameter == 0.0 {
        return Ok((current, value, evaluations));
    }
    let threshold = search.step_tolerance * diameter;
    for _ in 0..search.refine_iterations {
        if steps.iter().cloned().fold(0.0, f64::max) < threshold || value.in_gamma() {
            break;
        }
        let mut improved = false;
        'poll: for axis in 0..current.len() {
            if steps[axis] == 0.0 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let mut candidate = current.clone();
                candidate[axis] += sign * steps[axis];
                bounds.clamp(&mut candidate);
                if candidate == current {
                    continue;
                }
                let trial = difficulty_with_margin(scn, x, &candidate, m, search.progress_margin)?;
                evaluations += 1;
                if !trial.in_gamma() {
                    check_floor(m, [&trial.value])?;
                }
                if trial.value < value.value {
                    current = candidate;
                    value = trial;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    Ok((current, value, evaluations))
}
