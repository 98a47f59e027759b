use thiserror::Error;

/// Errors produced by the core toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cyclic factor {0} is smaller than 2")]
    FactorTooSmall(u64),
    #[error("group order {order} exceeds the configured maximum {max}")]
    OrderExceeded { order: u128, max: usize },
    #[error("operation requires a prime-field group F_p^n")]
    NotPrimeField,
    #[error("scalar {scalar} is not a unit modulo {modulus}")]
    ScalarNotUnit { scalar: u64, modulus: u32 },
    #[error("coordinate shape mismatch: expected {expected} residues, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("residue {value} out of range for factor {modulus}")]
    ResidueOutOfRange { value: u64, modulus: u32 },
    #[error("operands live in different groups")]
    GroupMismatch,
    #[error("operands disagree on side or measure convention")]
    ConventionMismatch,
    #[error("unsupported norm exponent")]
    UnsupportedNorm,
    #[error("parameter {name} = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("operation requires a non-empty set")]
    EmptySet,
    #[error("{what}: required {needed} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("postcondition violated: {0}")]
    Postcondition(String),
    #[error("subspace basis is degenerate: {0}")]
    DegenerateBasis(String),
    #[error("equation: {0}")]
    Equation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
