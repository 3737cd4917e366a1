use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("barrier `{0}` has no analytic gradient")]
    MissingGradient(String),

    #[error("invalid test space: {0}")]
    InvalidTestSpace(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inner problem is unbounded; the input space must be a compact polytope")]
    UnboundedInner,

    #[error("enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("satisfaction floor m = {floor} exceeds an observed difficulty {observed}")]
    FloorViolated { floor: f64, observed: f64 },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("simplex did not terminate within {0} pivots")]
    PivotLimit(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
