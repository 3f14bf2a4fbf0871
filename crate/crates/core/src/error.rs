//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by group, dynamics, quantization and asymptotics routines.
#[derive(Debug, Error)]
pub enum EquiweylError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown character label {0}")]
    UnknownCharacter(String),

    #[error("inconsistent character/stabilizer pair: multiplicity {value} is not an integer within {tol}")]
    NonIntegerMultiplicity { value: f64, tol: f64 },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("energy drift {drift:.3e} exceeds 10x tolerance {tol:.3e} at t={t}")]
    EnergyDrift { drift: f64, tol: f64, t: f64 },

    #[error("hypothesis violation ({hypothesis}): {detail}")]
    HypothesisViolation { hypothesis: String, detail: String },

    #[error("rejected configuration: {0}")]
    RejectedConfiguration(String),

    #[error("projector not idempotent (defect {defect:.3e}); suggested Haar node count: {suggested_nodes}")]
    InsufficientHaarNodes { defect: f64, suggested_nodes: usize },

    #[error("operators do not commute: {0}")]
    CommutatorViolation(String),

    #[error("symbol degree {degree} exceeds supported maximum {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("caustic configuration: {0}")]
    Caustic(String),

    #[error("square-root branch ambiguity: eigenvalue {re:.3e}{im:+.3e}i lies on the negative real axis")]
    BranchAmbiguity { re: f64, im: f64 },

    #[error("test-function support [{lo}, {hi}] exceeds the trusted window [{win_lo}, {win_hi}]")]
    TruncationBias {
        lo: f64,
        hi: f64,
        win_lo: f64,
        win_hi: f64,
    },

    #[error("Monte Carlo acceptance rate {rate:.3e} below 1e-4")]
    McAcceptanceTooLow { rate: f64 },

    #[error("chart parametrization not available for this model")]
    ChartMissing,

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, EquiweylError>;
