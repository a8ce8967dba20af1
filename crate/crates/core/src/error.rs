//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the simulation core.
#[derive(Debug, Error)]
pub enum Error {
    /// Spin quantum number is not a positive half-integer.
    #[error("invalid spin quantum number: {0}")]
    InvalidSpin(String),

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix expected to be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    /// A matrix expected to be unitary is not, within tolerance.
    #[error("matrix is not unitary: residual {residual:.3e} exceeds {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    /// A state vector or density matrix failed validation.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The requested window contains no basis states for this spin.
    #[error("empty window: {0}")]
    EmptyWindow(String),

    /// A window projection removed essentially all of the state's weight.
    #[error(
        "window projection annihilates the state: discarded weight {discarded:.17e} \
         exceeds 1 - 1e-12"
    )]
    WindowAnnihilation { discarded: f64 },

    /// A scalar or structural parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The control channel mask cannot realize the requested rotation.
    #[error("infeasible channel mask: {0}")]
    InfeasibleChannels(String),

    /// The sensitivity function has no defined slope at the origin.
    #[error("undefined linearization: {0}")]
    UndefinedSlope(String),

    /// A Stokes vector lies outside the closed unit (Bloch) ball.
    #[error(
        "Stokes vector violates the Bloch-ball normalization condition |s| <= 1 \
         (|s| = {radius:.6}); apply a normalization strategy before reconstruction"
    )]
    BlochBallViolation { radius: f64 },

    /// A time series is too short or constant, so the requested fit is undefined.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// Pulse synthesis exhausted its iteration budget above tolerance.
    #[error("gate synthesis failed: {0}")]
    SynthesisFailed(String),

    /// An internal numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
