//! Centralized tolerances.
//!
//! Every tolerance that influences a verdict lives here, with the value the
//! public invariants quote. Tests and the acceptance battery import these
//! constants instead of scattering literals.

/// Round-trip error allowed for Fourier analysis/synthesis on band-limited data.
pub const FFT_ROUNDTRIP: f64 = 1e-12;

/// Relative L2 residual allowed for the area Cauchy transform and for all
/// PDE-residual checks of generalized Hardy functions.
pub const PDE_RESIDUAL: f64 = 1e-6;

/// Boundary rows of the zero-Dirichlet Poisson solution must vanish to this.
pub const POISSON_BOUNDARY: f64 = 1e-12;

/// Interior relative defect allowed when re-applying the Laplacian to a
/// Poisson solution.
pub const POISSON_INTERIOR: f64 = 1e-6;

/// Successive-iterate sup-norm difference at which fixed-point iterations stop.
pub const FIXED_POINT_DIFF: f64 = 1e-10;

/// Iteration cap for the nonlinear factorization fixed point.
pub const FACTORIZE_MAX_ITER: usize = 200;

/// Iteration cap for the disk Dirichlet solver.
pub const DIRICHLET_MAX_ITER: usize = 100;

/// Max |Re s| on boundary rows for factorization outputs (where attainable;
/// the annulus inner circle may carry a reported constant instead).
pub const S_BOUNDARY_REAL: f64 = 1e-8;

/// Pointwise tolerance for defining identities like w = e^s * F.
pub const POINTWISE_IDENTITY: f64 = 1e-8;

/// Pointwise tolerance for algebraic round trips (J and its inverse).
pub const J_ROUNDTRIP: f64 = 1e-12;

/// Pointwise tolerance for the composition/J commutation diagram.
pub const DIAGRAM_COMMUTE: f64 = 1e-10;

/// Membership defect threshold for annulus boundary traces.
pub const MEMBERSHIP_DEFECT: f64 = 1e-12;

/// Agreement of the two closed forms of the boundary kernel.
pub const KERNEL_FORMS: f64 = 1e-12;

/// Accuracy of the kernel normalization integral.
pub const KERNEL_MASS: f64 = 1e-6;

/// Boundary-modulus reproduction for outer functions.
pub const OUTER_MODULUS: f64 = 1e-6;

/// Norm-preservation certificate threshold for isometry verdicts.
pub const ISOMETRY_NORM_DEV: f64 = 1e-8;

/// Default tolerance for `|phi*| = level` boundary level-set measurement.
pub const OMEGA_LEVEL: f64 = 1e-4;

/// Distance below which a winding target is considered too close to the
/// boundary image and skipped.
pub const WINDING_SKIP: f64 = 1e-3;

/// Boundary samples used for winding-number accumulation.
pub const WINDING_SAMPLES: usize = 4096;

/// Slack allowed when checking that a symbol's sampled image stays inside
/// the closed codomain.
pub const MAP_CODOMAIN_SLACK: f64 = 1e-10;

/// Max |phi(0)| for a disk symbol to count as centered.
pub const ISOMETRY_CENTER: f64 = 1e-10;

/// Max defect of |phi*| from 1 on the unit circle for inner-ness.
pub const ISOMETRY_BOUNDARY: f64 = 1e-8;

/// Max sup distance to the nearest member of an isometry family (rotations
/// or twisted inversions) for the annulus verdict.
pub const ISOMETRY_FAMILY_FIT: f64 = 1e-8;

/// Norm deviation a non-isometry witness input must exhibit for the
/// negative verdict to count as certified.
pub const ISOMETRY_FALSE_WITNESS: f64 = 1e-3;

/// Two-path agreement for evaluation-functional identities with analytic
/// inputs.
pub const ADJOINT_PATHS: f64 = 1e-10;

/// Two-path agreement when one path runs through the boundary-value solver.
pub const ADJOINT_PATHS_GEN: f64 = 1e-8;

/// Default grid sizes.
pub const DEFAULT_N_THETA: usize = 256;
pub const DEFAULT_N_R: usize = 129;
