//! Control-affine continuous dynamics and finite-alphabet discrete dynamics.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::types::{InputVector, StateVector};

type DriftFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;
type ActuationFn = dyn Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync;
type StepFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// `x' = f(x, d) + g(x, d) u + C d`.
///
/// The nominal constructor ignores `d` in `f` and `g`; the perturbed one
/// passes it through. `C` defaults to zero and is stored as `n x p` rows.
#[derive(Clone)]
pub struct ContinuousDynamics {
    state_dim: usize,
    input_dim: usize,
    test_dim: usize,
    drift: Arc<DriftFn>,
    actuation: Arc<ActuationFn>,
    perturbation: Option<Vec<Vec<f64>>>,
}

impl ContinuousDynamics {
    pub fn nominal(
        state_dim: usize,
        input_dim: usize,
        test_dim: usize,
        drift: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        actuation: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            state_dim,
            input_dim,
            test_dim,
            drift: Arc::new(move |x, _| drift(x)),
            actuation: Arc::new(move |x, _| actuation(x)),
            perturbation: None,
        }
    }

    pub fn perturbed(
        state_dim: usize,
        input_dim: usize,
        test_dim: usize,
        drift: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        actuation: impl Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            state_dim,
            input_dim,
            test_dim,
            drift: Arc::new(drift),
            actuation: Arc::new(actuation),
            perturbation: None,
        }
    }

    /// Adds the additive term `C d`; `c` has `state_dim` rows of `test_dim` entries.
    pub fn with_perturbation(mut self, c: Vec<Vec<f64>>) -> Result<Self> {
        if c.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                context: "perturbation matrix rows",
                expected: self.state_dim,
                actual: c.len(),
            });
        }
        if let Some(row) = c.iter().find(|r| r.len() != self.test_dim) {
            return Err(Error::DimensionMismatch {
                context: "perturbation matrix columns",
                expected: self.test_dim,
                actual: row.len(),
            });
        }
        self.perturbation = Some(c);
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn test_dim(&self) -> usize {
        self.test_dim
    }

    /// `f(x, d) + C d`.
    pub fn drift(&self, x: &[f64], d: &[f64]) -> Result<Vec<f64>> {
        self.check_args(x, d)?;
        let mut f = (self.drift)(x, d);
        if f.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                context: "drift output",
                expected: self.state_dim,
                actual: f.len(),
            });
        }
        if let Some(c) = &self.perturbation {
            for (fi, row) in f.iter_mut().zip(c) {
                *fi += row.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        Ok(f)
    }

    /// `g(x, d)` as `state_dim` rows of `input_dim` entries.
    pub fn actuation(&self, x: &[f64], d: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_args(x, d)?;
        let g = (self.actuation)(x, d);
        if g.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                context: "actuation rows",
                expected: self.state_dim,
                actual: g.len(),
            });
        }
        if let Some(row) = g.iter().find(|r| r.len() != self.input_dim) {
            return Err(Error::DimensionMismatch {
                context: "actuation columns",
                expected: self.input_dim,
                actual: row.len(),
            });
        }
        Ok(g)
    }

    /// Full state derivative at `(x, d, u)`.
    pub fn derivative(&self, x: &[f64], d: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "input",
                expected: self.input_dim,
                actual: u.len(),
            });
        }
        let mut dx = self.drift(x, d)?;
        let g = self.actuation(x, d)?;
        for (v, row) in dx.iter_mut().zip(&g) {
            *v += row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(dx)
    }

    fn check_args(&self, x: &[f64], d: &[f64]) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                context: "state",
                expected: self.state_dim,
                actual: x.len(),
            });
        }
        if d.len() != self.test_dim {
            return Err(Error::DimensionMismatch {
                context: "test vector",
                expected: self.test_dim,
                actual: d.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for ContinuousDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousDynamics")
            .field("state_dim", &self.state_dim)
            .field("input_dim", &self.input_dim)
            .field("test_dim", &self.test_dim)
            .field("perturbation", &self.perturbation)
            .finish_non_exhaustive()
    }
}

/// `x_{k+1} = f(x_k, u_k)` over a finite, labelled input alphabet.
#[derive(Clone)]
pub struct DiscreteDynamics {
    alphabet: Vec<InputVector>,
    labels: Vec<String>,
    step: Arc<StepFn>,
}

impl DiscreteDynamics {
    pub fn new(
        alphabet: Vec<(String, InputVector)>,
        step: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidInput("input alphabet is empty".into()));
        }
        let (labels, alphabet) = alphabet.into_iter().unzip();
        Ok(Self {
            alphabet,
            labels,
            step: Arc::new(step),
        })
    }

    pub fn alphabet(&self) -> &[InputVector] {
        &self.alphabet
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn step(&self, x: &[f64], u: &[f64]) -> StateVector {
        StateVector::new((self.step)(x, u))
    }

    /// Successor under the `index`-th alphabet entry.
    pub fn step_index(&self, x: &[f64], index: usize) -> StateVector {
        self.step(x, &self.alphabet[index])
    }
}

impl fmt::Debug for DiscreteDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteDynamics")
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_adds_c_times_d() {
        let dynamics = ContinuousDynamics::nominal(2, 1, 2, |_| vec![1.0, 0.0], |_| {
            vec![vec![1.0], vec![0.0]]
        })
        .with_perturbation(vec![vec![1.0, 0.0], vec![0.0, 2.0]])
        .unwrap();
        assert_eq!(dynamics.drift(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(
            dynamics.derivative(&[0.0, 0.0], &[1.0, 1.0], &[3.0]).unwrap(),
            vec![5.0, 2.0]
        );
    }

    #[test]
    fn bad_shapes_are_rejected() {
        let dynamics = ContinuousDynamics::nominal(2, 1, 0, |_| vec![0.0], |_| vec![vec![1.0]]);
        assert!(dynamics.drift(&[0.0, 0.0], &[]).is_err());
        assert!(dynamics.drift(&[0.0], &[]).is_err());
        assert!(dynamics.clone().with_perturbation(vec![vec![1.0]]).is_err());
    }

    #[test]
    fn empty_alphabet_is_rejected() {
        assert!(DiscreteDynamics::new(vec![], |x, _| x.to_vec()).is_err());
    }
}
