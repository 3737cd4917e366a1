//! Barrier functions, reach-avoid specifications and the feasible-input
//! machinery shared by both synthesizers.

use std::fmt;
use std::sync::Arc;

use crate::dynamics::ContinuousDynamics;
use crate::error::{Error, Result};
use crate::lp::{phase_one_feasible, Polytope};

type ValueFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Scalar `h(x, d)` whose zero superlevel set encodes a predicate, with an
/// optional analytic state gradient. Discrete scenarios omit the gradient.
#[derive(Clone)]
pub struct BarrierFunction {
    name: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl BarrierFunction {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }

    pub fn discrete(
        name: impl Into<String>,
        value: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[f64], d: &[f64]) -> f64 {
        (self.value)(x, d)
    }

    pub fn gradient(&self, x: &[f64], d: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x, d))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

impl fmt::Debug for BarrierFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BarrierFunction")
            .field("name", &self.name)
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

/// Extended class-kappa function `alpha`.
#[derive(Clone)]
pub enum ClassKappa {
    /// `alpha(r) = gain * r`.
    Linear(f64),
    /// Any strictly increasing `alpha` with `alpha(0) = 0`. Makes the
    /// barrier rows depend nonlinearly on `h` but keeps them linear in `u`.
    Monotone(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ClassKappa {
    pub fn linear(gain: f64) -> Result<Self> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::InvalidInput(format!(
                "class-kappa gain must be positive, got {gain}"
            )));
        }
        Ok(ClassKappa::Linear(gain))
    }

    pub fn apply(&self, r: f64) -> f64 {
        match self {
            ClassKappa::Linear(gain) => gain * r,
            ClassKappa::Monotone(f) => f(r),
        }
    }
}

impl fmt::Debug for ClassKappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKappa::Linear(gain) => write!(f, "Linear({gain})"),
            ClassKappa::Monotone(_) => f.write_str("Monotone(..)"),
        }
    }
}

/// Timed reach-avoid task: reach `h^F >= 0` by `deadline` while keeping every
/// avoid barrier nonnegative.
#[derive(Debug, Clone)]
pub struct ReachAvoidSpec {
    reach: BarrierFunction,
    avoid: Vec<BarrierFunction>,
    gains: Vec<ClassKappa>,
    progress_margin: f64,
    deadline: f64,
}

impl ReachAvoidSpec {
    pub fn new(
        reach: BarrierFunction,
        avoid: Vec<BarrierFunction>,
        gains: Vec<ClassKappa>,
        progress_margin: f64,
        deadline: f64,
    ) -> Result<Self> {
        if avoid.len() != gains.len() {
            return Err(Error::DimensionMismatch {
                context: "avoid gains",
                expected: avoid.len(),
                actual: gains.len(),
            });
        }
        if !(progress_margin >= 0.0 && progress_margin.is_finite()) {
            return Err(Error::InvalidInput(
                "progress margin must be a nonnegative real".into(),
            ));
        }
        if deadline.is_nan() || deadline <= 0.0 {
            return Err(Error::InvalidInput("deadline must be positive".into()));
        }
        Ok(Self {
            reach,
            avoid,
            gains,
            progress_margin,
            deadline,
        })
    }

    pub fn reach(&self) -> &BarrierFunction {
        &self.reach
    }

    pub fn avoid(&self) -> &[BarrierFunction] {
        &self.avoid
    }

    pub fn gains(&self) -> &[ClassKappa] {
        &self.gains
    }

    pub fn progress_margin(&self) -> f64 {
        self.progress_margin
    }

    /// Deadline in time units; may be infinite.
    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    /// Smallest step count `k` with `deadline <= k * dt`.
    pub fn step_deadline(&self, dt: f64) -> Option<u64> {
        let k = (self.deadline / dt).ceil();
        (k.is_finite() && k >= 0.0).then_some(k as u64)
    }

    /// Same task without avoid barriers.
    pub fn without_avoid(&self) -> Self {
        Self {
            avoid: Vec::new(),
            gains: Vec::new(),
            ..self.clone()
        }
    }

    /// Same task with one more avoid barrier.
    pub fn with_avoid(&self, barrier: BarrierFunction, gain: ClassKappa) -> Self {
        let mut spec = self.clone();
        spec.avoid.push(barrier);
        spec.gains.push(gain);
        spec
    }

    /// Minimum over avoid barriers at `(x, d)`; `+inf` without any.
    pub fn min_avoid(&self, x: &[f64], d: &[f64]) -> f64 {
        self.avoid
            .iter()
            .map(|h| h.value(x, d))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `h' = drift + input . u` along control-affine dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct LieDerivatives {
    /// `dh/dx . (f + C d)`.
    pub drift: f64,
    /// `dh/dx . g`.
    pub input: Vec<f64>,
}

impl LieDerivatives {
    pub fn rate(&self, u: &[f64]) -> f64 {
        self.drift + self.input.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }
}

pub fn lie_derivatives(
    h: &BarrierFunction,
    dynamics: &ContinuousDynamics,
    x: &[f64],
    d: &[f64],
) -> Result<LieDerivatives> {
    let grad = h
        .gradient(x, d)
        .ok_or_else(|| Error::MissingGradient(h.name().to_owned()))?;
    if grad.len() != dynamics.state_dim() {
        return Err(Error::DimensionMismatch {
            context: "barrier gradient",
            expected: dynamics.state_dim(),
            actual: grad.len(),
        });
    }
    let f = dynamics.drift(x, d)?;
    let g = dynamics.actuation(x, d)?;
    let drift = grad.iter().zip(&f).map(|(a, b)| a * b).sum();
    let input = (0..dynamics.input_dim())
        .map(|k| grad.iter().zip(&g).map(|(gi, row)| gi * row[k]).sum())
        .collect();
    Ok(LieDerivatives { drift, input })
}

/// Set membership used by [`filter`].
pub trait Membership<P: ?Sized> {
    fn contains_point(&self, point: &P) -> bool;
}

impl Membership<[f64]> for Polytope {
    fn contains_point(&self, point: &[f64]) -> bool {
        self.contains(point)
    }
}

impl<T: PartialEq> Membership<T> for [T] {
    fn contains_point(&self, point: &T) -> bool {
        self.contains(point)
    }
}

/// `value` if `point` lies in `set`, otherwise `fallback`.
pub fn filter<P: ?Sized, S: Membership<P> + ?Sized>(
    value: f64,
    point: &P,
    set: &S,
    fallback: f64,
) -> f64 {
    if set.contains_point(point) {
        value
    } else {
        fallback
    }
}

/// Inputs in `input_space` satisfying every avoid barrier's CBF condition at
/// `(x, d)`. Rows are `-L_g h_j u <= L_f h_j + alpha_j(h_j)` for each avoid
/// barrier in order, followed by the rows of `input_space`.
pub fn feasible_input_polytope(
    spec: &ReachAvoidSpec,
    dynamics: &ContinuousDynamics,
    x: &[f64],
    d: &[f64],
    input_space: &Polytope,
) -> Result<Polytope> {
    if input_space.dim() != dynamics.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "input space",
            expected: dynamics.input_dim(),
            actual: input_space.dim(),
        });
    }
    let mut poly = Polytope::unconstrained(input_space.dim());
    for (h, alpha) in spec.avoid().iter().zip(spec.gains()) {
        let lie = lie_derivatives(h, dynamics, x, d)?;
        let row = lie.input.iter().map(|v| -v).collect();
        poly.push(row, lie.drift + alpha.apply(h.value(x, d)))?;
    }
    poly.stacked(input_space)
}

/// True iff the feasible-input polytope is empty, i.e. the test lies in the
/// maximally difficult partition.
pub fn gamma_membership(feasible_inputs: &Polytope) -> Result<bool> {
    Ok(!phase_one_feasible(feasible_inputs)?)
}
