//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by geometry, solver, and integration routines.
///
/// Variants split into two broad classes used by callers to choose exit
/// behavior: structural misuse (mismatched systems, malformed requests)
/// and numerical/physical failures (collision, divergence, domain
/// violations).
#[derive(Debug, Error)]
pub enum Error {
    /// Operands built over different mass systems or of different body counts.
    #[error("operands belong to different mass systems")]
    SystemMismatch,

    /// Vector length does not match the number of bodies.
    #[error("dimension mismatch: expected {expected} bodies, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Mass list empty, too short, non-finite, or not strictly positive.
    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    /// Non-finite coordinate data.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// Two bodies closer than the collision guard.
    #[error(
        "collision proximity: min pairwise distance {min_distance:.6e} at or below guard {guard:.6e}"
    )]
    CollisionProximity { min_distance: f64, guard: f64 },

    /// Exponent outside the supported range.
    #[error("invalid exponent alpha = {alpha}: {reason}")]
    InvalidAlpha { alpha: f64, reason: String },

    /// Conformal factor h + U is not positive where required.
    #[error("outside the Hill region: h + U = {conformal:.6e} <= 0")]
    OutsideHillRegion { conformal: f64 },

    /// Linearly dependent or otherwise degenerate input where independence
    /// is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Basis handed to a frame-dependent computation fails its Gram check.
    #[error("basis not orthonormal: max Gram deviation {max_deviation:.6e}")]
    NonOrthonormalBasis { max_deviation: f64 },

    /// Iterative solver ran out of iterations or backtracking steps.
    #[error("no convergence after {iterations} iterations; residual {residual:.6e}")]
    NonConvergence { iterations: usize, residual: f64 },

    /// An operation requiring a central configuration received one whose
    /// residual exceeds the stated tolerance.
    #[error("not a central configuration: residual {residual:.6e} exceeds {tol:.6e}")]
    NonCentral { residual: f64, tol: f64 },

    /// Adaptive integrator step size shrank below representable resolution.
    #[error("step size underflow at t = {t:.12e}")]
    StepUnderflow { t: f64 },

    /// Adaptive integrator exceeded its step budget.
    #[error("step budget exhausted at t = {t:.12e}")]
    MaxStepsExceeded { t: f64 },

    /// State stopped being finite during integration.
    #[error("non-finite state at t = {t:.12e}")]
    NonFiniteState { t: f64 },

    /// A sample where a velocity-dependent quantity needs a nonzero velocity.
    #[error("stationary sample at t = {t:.6e}: velocity norm {speed:.3e}")]
    StationarySample { t: f64, speed: f64 },

    /// dU/dt vanishes everywhere a rate-based fit needs it nonzero.
    #[error("dU/dt vanishes on the selected samples")]
    VanishingPotentialRate,

    /// Center of mass drifted away from the origin where a computation
    /// assumes it fixed.
    #[error("center of mass off origin: relative offset {offset:.6e} exceeds {tol:.6e}")]
    CenterOfMassViolation { offset: f64, tol: f64 },

    /// Operation undefined for the requested exponent.
    #[error("unsupported exponent alpha = {alpha}: {reason}")]
    UnsupportedExponent { alpha: f64, reason: String },

    /// Requested sample time outside the stored span or no dense data.
    #[error("sample time {t:.6e} not covered by the trajectory")]
    SampleOutOfRange { t: f64 },

    /// Malformed request that is not a numerical failure.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of numerical processes on valid inputs, false for
    /// structurally invalid requests. CLI layers map the former to exit 1
    /// and the latter to exit 2.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::SystemMismatch
                | Error::DimensionMismatch { .. }
                | Error::InvalidMasses(_)
                | Error::NonFinite(_)
                | Error::InvalidAlpha { .. }
                | Error::UnsupportedExponent { .. }
                | Error::InvalidInput(_)
        )
    }
}
