//! Result and floor types shared by the continuous and discrete synthesizers.

use crate::error::{Error, Result};
use crate::types::{InputVector, TestVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub d_star: TestVector,
    /// Difficulty at `d_star`.
    pub difficulty: f64,
    /// `d_star` leaves no feasible input, so `difficulty` is the floor.
    pub in_gamma: bool,
    /// Inner maximizer at `d_star` (first input of the sequence when predictive).
    pub inner_maximizer: Option<InputVector>,
    /// Full maximizing input sequence for predictive synthesis.
    pub input_sequence: Option<Vec<InputVector>>,
    /// Number of difficulty evaluations.
    pub evaluations: usize,
    /// Search stopped at the first test with an empty feasible set.
    pub early_exit: bool,
    /// Size of the candidate set (grid points or finite tests).
    pub candidates: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FloorProvenance {
    UserSupplied,
    GridEstimate {
        state_points: Vec<usize>,
        test_points: usize,
        margin: f64,
        grid_minimum: f64,
    },
}

/// Minimum satisfaction value `m`: a lower bound on the reach-rate objective,
/// returned whenever the feasible set is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionFloor {
    pub m: f64,
    pub provenance: FloorProvenance,
}

impl SatisfactionFloor {
    pub fn user(m: f64) -> Self {
        Self {
            m,
            provenance: FloorProvenance::UserSupplied,
        }
    }
}

/// Relative margin subtracted from a grid-estimated floor.
pub const FLOOR_MARGIN: f64 = 0.1;

/// Fails if any non-fallback difficulty sits below the floor.
pub(crate) fn check_floor<'a>(floor: f64, values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    let observed = values.into_iter().copied().fold(f64::INFINITY, f64::min);
    if observed < floor {
        return Err(Error::FloorViolated { floor, observed });
    }
    Ok(())
}
