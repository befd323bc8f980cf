//! Centralized numerical tolerances and guard factors.
//!
//! Every hard-coded threshold in the crate lives here with its
//! justification, so tolerance relationships stay auditable in one place.

/// Collision guard as a fraction of the configuration diameter. Pairwise
/// distances at or below `COLLISION_GUARD_FACTOR * diameter` are treated as
/// collisions: the potential and its derivatives grow without bound near
/// coincident bodies, and 1e-9 of the overall scale is far below any
/// physically meaningful separation while still leaving ~6 digits of
/// headroom above f64 rounding on coordinate differences.
pub const COLLISION_GUARD_FACTOR: f64 = 1e-9;

/// Relative step for one-sided first derivatives of the potential,
/// `eps^(1/3)`: balances O(h^2) truncation against O(eps/h) rounding for
/// central differences of a smooth function evaluated to machine accuracy.
pub fn fd_gradient_step(scale: f64) -> f64 {
    f64::EPSILON.cbrt() * scale.max(1e-12)
}

/// Relative step for finite differences of an analytic gradient,
/// `eps^(1/4)`: the gradient itself carries O(eps) noise, and the second
/// difference underneath a Hessian check loses another power of h.
pub fn fd_hessian_step(scale: f64) -> f64 {
    f64::EPSILON.powf(0.25) * scale.max(1e-12)
}

/// Step for first derivatives of the metric inside the curvature oracle,
/// `eps^(1/3)` of the local coordinate scale (same balance as
/// [`fd_gradient_step`]).
pub const FD_METRIC_STEP_REL: f64 = 6.055454452393343e-6;

/// Step for differencing Christoffel symbols, which are themselves finite
/// differences with noise ~eps^(2/3): the optimal step for a central
/// difference of a function with absolute noise n is n^(1/3), giving
/// (eps^(2/3))^(1/3) ~= 3.4e-4.
pub const FD_CHRISTOFFEL_STEP_REL: f64 = 3.42e-4;

/// Gram-matrix deviation allowed in the output of real-metric
/// orthonormalization. Two Gram-Schmidt passes on independent input reach
/// rounding level; 1e-10 leaves margin for ill-conditioned spans.
pub const ORTHONORMAL_GRAM_TOL: f64 = 1e-10;

/// Relative norm below which a vector is considered linearly dependent on
/// the previously orthonormalized ones.
pub const ORTHONORMAL_RANK_TOL: f64 = 1e-10;

/// Gram deviation tolerated in a caller-supplied complex-orthonormal basis
/// before directional complex derivatives are evaluated against it.
pub const BASIS_GRAM_TOL: f64 = 1e-8;

/// Newton iteration budget for the central-configuration solver.
pub const NEWTON_MAX_ITERATIONS: usize = 200;

/// Backtracking halvings allowed per Newton step before the solve is
/// declared non-convergent.
pub const NEWTON_MAX_BACKTRACKS: usize = 30;

/// Infinity-norm bound on the gauge constraints (center of mass, moment
/// of inertia, rotation pin) at an accepted central-configuration
/// solution. Near machine precision: the constraints are linear or
/// quadratic and converge faster than the residual itself.
pub const NEWTON_CONSTRAINT_TOL: f64 = 1e-12;

/// Step for the five-point Laplacian used in the logarithmic conformal
/// identity check. Near eps^{1/4}, the optimum for second-derivative
/// central differences; the implementation removes the constant part of
/// the log before differencing, so roundoff stays below truncation.
pub const LOG_IDENTITY_FD_STEP: f64 = 1e-4;

/// Default relative tolerance of the adaptive integrator. Curvature and
/// monodromy comparisons at 1e-4..1e-6 need trajectories a few orders
/// tighter.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Default absolute tolerance of the adaptive integrator, two orders below
/// [`DEFAULT_RTOL`] so components passing through zero stay controlled.
pub const DEFAULT_ATOL: f64 = 1e-12;

/// Centrality residual below which an input is accepted where the
/// operation is only defined at a central configuration (rotating
/// solutions, monodromy). Converged solver output sits near 1e-13; 1e-7
/// rejects genuinely off-central input without punishing honest roundoff,
/// and is measured on the I = 1 scale.
pub const CENTRAL_INPUT_TOL: f64 = 1e-7;

/// Singular values of (M - I)^k below `SV_RANK_THRESHOLD_FACTOR * ||M||`
/// count as zero in monodromy rank tests. Defective eigenvalues scatter
/// under eigendecomposition but leave rank structure intact at this scale.
pub const SV_RANK_THRESHOLD_FACTOR: f64 = 1e-6;

/// Eigenvalues closer than this relative gap are treated as one cluster
/// when analyzing a monodromy spectrum. A defective eigenvalue of Jordan
/// size m scatters by ~(backward error)^(1/m) <= ~1e-3; distinct Floquet
/// multipliers in this problem family are separated by factors of e^(2pi x).
pub const CLUSTER_RELATIVE_GAP: f64 = 0.02;

/// Maximum mass-weighted center-of-mass offset, relative to the
/// configuration diameter, accepted by computations that assume the center
/// fixed at the origin. Centered initial data drifts by integrator noise
/// only (~1e-13 over tested spans).
pub const CENTER_OF_MASS_TOL: f64 = 1e-6;

/// |K| below `ZERO_CURVATURE_SEGMENT_FACTOR * max|K|` counts as zero when
/// searching a trajectory for a vanishing-curvature segment.
pub const ZERO_CURVATURE_SEGMENT_FACTOR: f64 = 1e-8;

/// Minimum consecutive samples for a vanishing-curvature segment: the
/// first-integral fit needs an interval, not an isolated zero crossing.
pub const ZERO_CURVATURE_MIN_DWELL: usize = 10;

/// Deviation of |eigenvalue| from 1 above which a monodromy verdict treats
/// a multiplier as off the unit circle.
pub const UNIT_CIRCLE_TOL: f64 = 1e-6;
