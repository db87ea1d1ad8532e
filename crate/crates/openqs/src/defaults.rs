//! Default tolerances, each with its origin.
//!
//! Everything here can be overridden per call; these are the values used when
//! a caller does not care.

/// Matrix exponential target accuracy (Padé-13 scaling-and-squaring holds
/// backward error below this for the norms occurring here).
pub const EXPM_TOL: f64 = 1e-12;

/// Tail-mass threshold on the highest retained Fock level. A state whose
/// edge occupation exceeds this is considered corrupted by truncation.
pub const TAIL_THRESHOLD: f64 = 1e-8;

/// Choi-matrix minimum-eigenvalue threshold for declaring a map completely
/// positive. Matches the accumulated integrator error budget of the cocycle
/// construction; the exact maps are CP, so only numerics can push the
/// spectrum below zero.
pub const CP_TOL: f64 = 1e-9;

/// Operator-norm (largest singular value) accuracy.
pub const NORM_TOL: f64 = 1e-10;

/// Step-halving acceptance tolerance of the fixed-step RK4 reference
/// integrator: halving the step must change the result by less than this.
pub const STEP_TOL: f64 = 1e-9;

/// Number of uniform sample points used to evaluate sup over `s ∈ [0, t]`
/// in interaction norms (piecewise-constant breakpoints are always added).
pub const SUP_GRID: usize = 64;
