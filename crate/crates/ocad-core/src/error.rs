//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, OcadError>;

/// Everything that can go wrong while building, checking or using a
/// cell average decomposition.
#[derive(Debug, Error)]
pub enum OcadError {
    /// A Newton iteration for quadrature nodes failed to converge.
    #[error("quadrature node iteration did not converge for {rule} rule with {points} points (last update {last_update:e})")]
    QuadratureNoConvergence {
        rule: &'static str,
        points: usize,
        last_update: f64,
    },

    /// An argument lies outside the documented domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested (space, degree, kind) combination has no constructor.
    #[error("unsupported combination: {0}")]
    Unsupported(String),

    /// Two decompositions cannot be combined (different spaces, ...).
    #[error("incompatible decompositions: {0}")]
    Incompatible(String),

    /// All wave speeds are zero so the time step is unbounded.
    #[error("all wave speeds vanish; the bound-preserving time step is unbounded")]
    UnboundedStep,

    /// The anisotropy parameter is undefined for vanishing speeds.
    #[error("degenerate anisotropy: a1/dx + a2/dy must be positive")]
    DegenerateAnisotropy,

    /// A symmetric eigen-solve failed or produced an impossible spectrum.
    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    /// The nonlinear moment system did not converge.
    #[error("nonlinear solve failed at theta = {theta}: {reason} (last residual {residual:e})")]
    NonlinearSolve {
        theta: f64,
        residual: f64,
        reason: String,
    },

    /// The converged stationary point has a negative weight or an
    /// out-of-cell node.
    #[error("infeasible stationary point at theta = {theta}: {reason}")]
    InfeasibleStationaryPoint { theta: f64, reason: String },

    /// The linear program could not be solved.
    #[error("linear program: {0}")]
    LinearProgram(String),

    /// A cell average left the invariant region before limiting.
    #[error("invariant region violated in cell {cell}: {detail}")]
    InvariantViolation { cell: usize, detail: String },

    /// A NaN or infinity appeared in the numerical solution.
    #[error("non-finite value in cell {cell} at t = {time}")]
    NonFinite { cell: usize, time: f64 },

    /// A constructor's self-check failed (a closed-form formula produced an
    /// invalid decomposition or certificate).
    #[error("self-check failed: {0}")]
    SelfCheck(String),

    /// Malformed decomposition file.
    #[error("decomposition file: {0}")]
    Format(String),

    /// JSON (de)serialisation failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// Filesystem failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
