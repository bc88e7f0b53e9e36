//! Numerical thresholds shared by geometry, flow, and audits.

/// A tetrahedron counts as degenerate once `Q ≤ 1e-12 · (Σ 1/r)²`.
pub const DEGENERATE_REL_Q: f64 = 1e-12;

/// Slack allowed on a cosine before `acos` clamps it into [−1, 1].
pub const ACOS_CLAMP: f64 = 1e-12;

/// Central-difference step, relative to the perturbed weight.
pub const FD_STEP: f64 = 1e-6;

/// Closed-form derivative vs central difference.
pub const DERIVATIVE_FIDELITY: f64 = 1e-6;

/// Analytic Schläfli row residual and Jacobian symmetry.
pub const SCHLAFLI: f64 = 1e-12;

/// Solid angle from dihedral sums vs an independent evaluation.
pub const GIRARD: f64 = 1e-10;

/// Cayley–Menger volume vs the `2 A A sin β / (3 ℓ)` identity.
pub const VOLUME_IDENTITY: f64 = 1e-9;

/// Dead band on the hypothesis side of an "if and only if" (relative).
pub const IFF_HYPOTHESIS: f64 = 1e-12;

/// Dead band on the conclusion side of an "if and only if" (absolute).
pub const IFF_CONCLUSION: f64 = 1e-9;

/// Jacobi sweeps stop once the off-diagonal norm is this fraction of the matrix norm.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-14;

/// Null eigenvalue magnitude relative to the spectral radius.
pub const NULL_EIGENVALUE: f64 = 1e-9;

/// Remaining eigenvalues must lie below `−1e-12 ·` spectral radius.
pub const NEGATIVE_EIGENVALUE: f64 = 1e-12;

/// Angle between the computed null vector and `r`.
pub const NULL_VECTOR_ANGLE: f64 = 1e-7;

/// Minor determinants vs their closed form.
pub const MINOR_DETERMINANT: f64 = 1e-8;

/// Per-sample slack on the maximum principle along a trace.
pub const MAX_PRINCIPLE_STEP: f64 = 1e-9;

/// Relative slack on the exponential growth bounds.
pub const GROWTH_BOUND: f64 = 1e-8;

/// Scale invariance of curvature and Ω.
pub const SCALE_INVARIANCE: f64 = 1e-12;

/// Distance of degenerate-limit angles from 2π and 0.
pub const DEGENERATE_LIMIT: f64 = 1e-3;
