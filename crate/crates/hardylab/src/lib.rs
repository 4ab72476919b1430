//! Numerical laboratory for Hardy spaces on the unit disk and the annulus.
//!
//! The crate computes in classical Hardy spaces `H^p` and in their generalized
//! counterparts defined by the conjugate Beltrami equation `dbar f = nu * conj(d f)`
//! and the related equation `dbar w = alpha * conj(w)`, builds composition
//! operators `C_phi : f -> f o phi`, and certifies their analytic properties
//! (norm bounds, isometry, invertibility, compactness behavior, factorizations)
//! at desk scale.
//!
//! Module map:
//! - [`grid`]: circle grids, Fourier analysis/synthesis, boundary `L^p` norms.
//! - [`radial`]: polar area grids, Chebyshev radial machinery, Wirtinger
//!   derivatives, a zero-Dirichlet Poisson solver and an area Cauchy transform.
//! - [`linalg`]: the small dense kernels (real LU, complex one-sided Jacobi SVD).
//! - [`hardy`]: Laurent series, the annulus splitting, membership tests, outer
//!   functions on the disk, special two-level outer constructions.
//! - [`surface`]: the lifted annulus surface, modulus-automorphic functions and
//!   their index, the boundary kernel, harmonic extensions and outer functions
//!   on the surface, boundary-modulus level-set measures.
//! - [`beltrami`]: nu/alpha fields, the pointwise isomorphism between the two
//!   generalized families, PDE residuals, factorizations, the disk Dirichlet
//!   solver.
//! - [`compose`]: composition symbols and every operator diagnostic.
//! - [`selftest`]: the self-test battery shared by the CLI and the
//!   integration tests.

pub mod beltrami;
pub mod compose;
pub mod selftest;
pub mod error;
pub mod grid;
pub mod hardy;
pub mod surface;
pub mod linalg;
pub mod radial;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
