//! Vector newtypes, boxes and test spaces.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};

macro_rules! vector_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(entries: Vec<f64>) -> Self {
                Self(entries)
            }

            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                Self(v.to_vec())
            }
        }

        impl<const N: usize> From<[f64; N]> for $name {
            fn from(v: [f64; N]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

vector_newtype!(
    /// System state `x`.
    StateVector
);
vector_newtype!(
    /// Control input `u`.
    InputVector
);
vector_newtype!(
    /// Test parameter vector `d`: the part of the environment the adversary sets.
    /// Discrete scenarios store cell indices as integral floats.
    TestVector
);

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("box bounds"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvalidInput(format!(
                "box lower bound exceeds upper bound in component {i}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The degenerate box holding exactly `point`.
    pub fn point(point: &[f64]) -> Result<Self> {
        Self::new(point.to_vec(), point.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, p: &mut [f64]) {
        for (v, (lo, hi)) in p.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Euclidean length of the diagonal.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// All `2^dim` corners, first component varying slowest.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        if mask >> (n - 1 - i) & 1 == 1 {
                            self.upper[i]
                        } else {
                            self.lower[i]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Uniform grid with `points` samples per non-degenerate axis.
    pub fn grid(&self, points: usize) -> Grid {
        Grid::new(self.clone(), points)
    }
}

/// Lazily indexed tensor grid over a [`BoxSet`], last component varying fastest.
#[derive(Debug, Clone)]
pub struct Grid {
    bounds: BoxSet,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(bounds: BoxSet, points: usize) -> Self {
        let counts = bounds
            .lower
            .iter()
            .zip(&bounds.upper)
            .map(|(lo, hi)| if lo == hi { 1 } else { points })
            .collect();
        Self { bounds, counts }
    }

    pub fn with_counts(bounds: BoxSet, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != bounds.dim() {
            return Err(Error::DimensionMismatch {
                context: "grid resolution",
                expected: bounds.dim(),
                actual: counts.len(),
            });
        }
        Ok(Self { bounds, counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        if self.counts.is_empty() {
            return 1;
        }
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spacing along each axis; degenerate or single-point axes report half the width.
    pub fn spacing(&self) -> Vec<f64> {
        (0..self.bounds.dim())
            .map(|i| {
                let width = self.bounds.upper[i] - self.bounds.lower[i];
                if self.counts[i] > 1 {
                    width / (self.counts[i] - 1) as f64
                } else {
                    width / 2.0
                }
            })
            .collect()
    }

    pub fn axis_value(&self, axis: usize, k: usize) -> f64 {
        let lo = self.bounds.lower[axis];
        let hi = self.bounds.upper[axis];
        match self.counts[axis] {
            0 | 1 => 0.5 * (lo + hi),
            n if k + 1 == n => hi,
            n => lo + (hi - lo) * k as f64 / (n - 1) as f64,
        }
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.counts.len()];
        for axis in (0..self.counts.len()).rev() {
            let n = self.counts[axis];
            out[axis] = self.axis_value(axis, rem % n);
            rem /= n;
        }
        out
    }
}

type MapFn = dyn Fn(&StateVector, f64) -> TestSpace + Send + Sync;

/// State- and time-dependent admissible test set.
#[derive(Clone)]
pub struct TestMap(Arc<MapFn>);

impl TestMap {
    pub fn new(f: impl Fn(&StateVector, f64) -> TestSpace + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn eval(&self, x: &StateVector, t: f64) -> TestSpace {
        (self.0)(x, t)
    }
}

impl fmt::Debug for TestMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TestMap(..)")
    }
}

/// Admissible test parameters.
#[derive(Debug, Clone)]
pub enum TestSpace {
    Box(BoxSet),
    /// Canonically ordered finite set; this order breaks ties.
    Finite(Vec<TestVector>),
    Mapped(TestMap),
}

impl TestSpace {
    pub fn is_mapped(&self) -> bool {
        matches!(self, TestSpace::Mapped(_))
    }

    /// Evaluates a mapped space at `(x, t)`; other spaces are returned as-is.
    /// The result is always a valid `Box` or `Finite`.
    pub fn resolve(&self, x: &StateVector, t: f64) -> Result<TestSpace> {
        let space = match self {
            TestSpace::Mapped(map) => map.eval(x, t),
            other => other.clone(),
        };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TestSpace::Box(_) => Ok(()),
            TestSpace::Finite(items) => {
                let Some(first) = items.first() else {
                    return Err(Error::InvalidTestSpace("finite test space is empty".into()));
                };
                if let Some(bad) = items.iter().find(|d| d.len() != first.len()) {
                    return Err(Error::DimensionMismatch {
                        context: "finite test space",
                        expected: first.len(),
                        actual: bad.len(),
                    });
                }
                if items.iter().any(|d| !d.is_finite()) {
                    return Err(Error::NonFinite("finite test space"));
                }
                Ok(())
            }
            TestSpace::Mapped(_) => Err(Error::InvalidTestSpace(
                "a test map must return a box or a finite set".into(),
            )),
        }
    }

    /// Membership of `d` in the space evaluated at `(x, t)`.
    pub fn contains(&self, d: &[f64], x: &StateVector, t: f64) -> Result<bool> {
        Ok(match self.resolve(x, t)? {
            TestSpace::Box(b) => b.contains(d),
            TestSpace::Finite(items) => items.iter().any(|item| item.as_slice() == d),
            TestSpace::Mapped(_) => unreachable!("resolve never returns a map"),
        })
    }
}
