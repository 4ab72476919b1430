//! Small dense linear-algebra kernels.
//!
//! The radial spectral solves need one dense real LU factorization per
//! Fourier mode (systems of size `n_r <= 129`), reused across fixed-point
//! iterations; the compactness diagnostics need singular values of strongly
//! graded complex matrices with high *relative* accuracy, which a one-sided
//! Jacobi iteration delivers (column scalings never mix magnitudes).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a dense real matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    /// Combined L (unit lower, below diagonal) and U (upper) factors.
    lu: Vec<f64>,
    /// Row permutation: `perm[k]` is the original row index used at step `k`.
    perm: Vec<usize>,
}

impl Lu {
    /// Factors `a` (row-major `n x n`). Errors on numerical singularity.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage must be n*n");
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Pivot search over the remaining column.
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem(format!(
                    "zero pivot at elimination step {k} of {n}"
                )));
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                for j in (k + 1)..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solves `A x = b` for a real right-hand side.
    #[must_use]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        // Forward substitution with unit lower factor.
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // Back substitution with the upper factor.
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A x = b` for a complex right-hand side via two real solves
    /// (the matrix is real, so real and imaginary parts decouple).
    #[must_use]
    pub fn solve_complex(&self, b: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = b.iter().map(|v| v.re).collect();
        let im: Vec<f64> = b.iter().map(|v| v.im).collect();
        let xr = self.solve(&re);
        let xi = self.solve(&im);
        xr.into_iter()
            .zip(xi)
            .map(|(r, i)| Complex64::new(r, i))
            .collect()
    }
}

/// Singular values of a dense complex `rows x cols` matrix (row-major),
/// descending, via one-sided Jacobi orthogonalization of the columns.
///
/// One-sided Jacobi applies exact plane rotations to column pairs until all
/// pairs are numerically orthogonal; the singular values are then the column
/// norms. Because rotations act on whole columns, heavy grading (columns with
/// wildly different norms) does not contaminate the small singular values —
/// the property the compactness diagnostics rely on.
#[must_use]
pub fn singular_values(a: &[Complex64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(a.len(), rows * cols, "matrix storage must be rows*cols");
    // Work on a column-major copy: each column is contiguous.
    let mut col: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j]).collect())
        .collect();

    let max_sweeps = 60;
    let tol = 1e-30; // on |<u,v>|^2 relative to |u|^2 |v|^2
    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                // Hermitian inner product <col_p, col_q> and squared norms.
                let mut hpq = Complex64::new(0.0, 0.0);
                let mut hpp = 0.0;
                let mut hqq = 0.0;
                for i in 0..rows {
                    let u = col[p][i];
                    let v = col[q][i];
                    hpq += u.conj() * v;
                    hpp += u.norm_sqr();
                    hqq += v.norm_sqr();
                }
                if hpp == 0.0 || hqq == 0.0 {
                    continue;
                }
                if hpq.norm_sqr() <= tol * hpp * hqq {
                    continue;
                }
                rotated = true;
                // Complex Jacobi rotation diagonalizing the 2x2 Gram block
                // [hpp, hpq; conj(hpq), hqq].
                let phase = hpq / hpq.norm();
                let tau = (hqq - hpp) / (2.0 * hpq.norm());
                let t = tau.signum_or_one() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let u = col[p][i];
                    let v = col[q][i];
                    col[p][i] = u * c - v * phase.conj() * s;
                    col[q][i] = u * phase * s + v * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = col
        .iter()
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}
