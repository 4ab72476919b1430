//! Sampled boundary circles and their Fourier representations.
//!
//! A circle of radius `rho` carries `N` equispaced samples at angles
//! `t_k = 2 pi k / N`. Its Fourier coefficients are indexed `n` in
//! `[-N/2, N/2 - 1]` and normalized so that `c_n = (1/2pi) int f(e^{it}) e^{-int} dt`;
//! the discrete transform computes these exactly for trigonometric polynomials
//! of degree below `N/2`. Every circle carries total measure 1 (`dt / 2pi`),
//! so the squared `L^2` norm of a trace is the plain mean of `|f|^2`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Complex samples on a circle at equispaced angles `t_k = 2 pi k / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    /// Radius of the carrying circle (positive).
    pub radius: f64,
    /// Sample values; the length is the angular resolution `N`.
    pub samples: Vec<Complex64>,
}

impl CircleGrid {
    /// Builds a grid, enforcing the structural invariants
    /// (positive radius, at least 8 samples, power-of-two length).
    pub fn new(radius: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        let n = samples.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "sample count must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { radius, samples })
    }

    /// Samples `f(t_k)` over the `n` equispaced angles.
    pub fn from_fn(radius: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..n)
            .map(|k| f(2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        Self::new(radius, samples)
    }

    /// Angular resolution `N`.
    #[must_use]
    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// The sample angles `t_k = 2 pi k / N`.
    #[must_use]
    pub fn angles(&self) -> Vec<f64> {
        let n = self.n_samples();
        (0..n)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / n as f64)
            .collect()
    }

    /// Mean of `|f|^p` over the circle — the p-th power of the `L^p(dt/2pi)` norm.
    #[must_use]
    pub fn mean_abs_pow(&self, p: f64) -> f64 {
        let n = self.n_samples() as f64;
        self.samples.iter().map(|v| v.norm().powf(p)).sum::<f64>() / n
    }

    /// Mean of the samples — the 0-th Fourier coefficient.
    #[must_use]
    pub fn mean(&self) -> Complex64 {
        let n = self.n_samples() as f64;
        self.samples.iter().sum::<Complex64>() / n
    }
}

/// Fourier coefficients of a circle trace, indexed `n in [-N/2, N/2 - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    /// Radius of the carrying circle.
    pub radius: f64,
    /// Coefficients in index order `-N/2, ..., -1, 0, 1, ..., N/2 - 1`.
    coeffs: Vec<Complex64>,
}

impl FourierCoeffs {
    /// Wraps centered-order coefficients (`len` must be a power of two >= 8).
    pub fn from_centered(radius: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = coeffs.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "coefficient count must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { radius, coeffs })
    }

    /// Number of stored coefficients `N`.
    #[must_use]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// True when no coefficients are stored (never, by construction).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest stored index, `-N/2`.
    #[must_use]
    pub fn min_index(&self) -> i64 {
        -(self.len() as i64) / 2
    }

    /// Largest stored index, `N/2 - 1`.
    #[must_use]
    pub fn max_index(&self) -> i64 {
        self.len() as i64 / 2 - 1
    }

    /// The coefficient at signed index `n` (zero outside the stored band).
    #[must_use]
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n < self.min_index() || n > self.max_index() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n - self.min_index()) as usize]
        }
    }

    /// Mutable access by signed index; panics outside the stored band.
    pub fn coeff_mut(&mut self, n: i64) -> &mut Complex64 {
        let min = self.min_index();
        &mut self.coeffs[(n - min) as usize]
    }

    /// Iterates `(signed index, coefficient)` in increasing index order.
    pub fn iter_indexed(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let min = self.min_index();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &c)| (min + j as i64, c))
    }

    /// Largest index with a coefficient above `threshold` in modulus, or
    /// `None` when all are below. Used by synthesis preconditions.
    #[must_use]
    pub fn max_active_index(&self, threshold: f64) -> Option<i64> {
        self.iter_indexed()
            .filter(|(_, c)| c.norm() > threshold)
            .map(|(n, _)| n.abs())
            .max()
    }

    /// Sum of `|c_n|^2` — the Parseval form of the squared `L^2` norm.
    #[must_use]
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Computes the Fourier coefficients of a sampled trace.
///
/// Exact (to roundoff) for trigonometric polynomials of degree `< N/2`.
#[must_use]
pub fn analyze(g: &CircleGrid) -> FourierCoeffs {
    let n = g.n_samples();
    let mut buf = g.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // The forward FFT yields sum_k f_k e^{-2pi i jk/N}; dividing by N gives the
    // coefficient normalization. Reorder from FFT layout to centered order.
    let scale = 1.0 / n as f64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (j, v) in buf.iter().enumerate() {
        let signed = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
        coeffs[(signed + n as i64 / 2) as usize] = v * scale;
    }
    FourierCoeffs {
        radius: g.radius,
        coeffs,
    }
}

/// Evaluates the trigonometric polynomial at `n_samples` equispaced angles.
///
/// Errors when a genuinely active coefficient (above a roundoff-level
/// fraction of the largest one) falls outside the representable index range
/// `[-n_samples/2, n_samples/2)`; roundoff-level stragglers are dropped.
pub fn synthesize(c: &FourierCoeffs, n_samples: usize) -> Result<CircleGrid> {
    if n_samples < 8 || !n_samples.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "sample count must be a power of two >= 8, got {n_samples}"
        )));
    }
    let half = n_samples as i64 / 2;
    let peak = c.iter_indexed().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let drop_tol = peak * 1e-13;
    let mut buf = vec![Complex64::new(0.0, 0.0); n_samples];
    for (n, v) in c.iter_indexed() {
        if n < -half || n >= half {
            if v.norm() > drop_tol {
                return Err(Error::InvalidInput(format!(
                    "coefficient at index {n} cannot be represented with {n_samples} samples"
                )));
            }
            continue;
        }
        if v.norm() == 0.0 {
            continue;
        }
        let j = if n >= 0 { n as usize } else { (n + n_samples as i64) as usize };
        buf[j] += v;
    }
    FftPlanner::new()
        .plan_fft_inverse(n_samples)
        .process(&mut buf);
    CircleGrid::new(c.radius, buf)
}

/// Boundary `L^p` norm of a single-circle trace: `(mean |f|^p)^{1/p}`.
pub fn boundary_norm_circle(t: &CircleGrid, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "p must lie in (1, infinity), got {p}"
        )));
    }
    Ok(t.mean_abs_pow(p).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!(
            (a - b).abs() <= tol,
            "{what}: {a} vs {b} differs by {:.3e} (tol {tol:.1e})",
            (a - b).abs()
        );
    }

    #[test]
    fn analyze_constant_is_delta_at_zero() {
        let g = CircleGrid::from_fn(1.0, 64, |_| c(1.0, 0.0)).unwrap();
        let coeffs = analyze(&g);
        for (n, v) in coeffs.iter_indexed() {
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!(
                (v - c(expect, 0.0)).norm() < 1e-14,
                "coefficient {n} should be {expect}, got {v}"
            );
        }
    }

    #[test]
    fn analyze_pure_mode_is_delta_at_one() {
        let g = CircleGrid::from_fn(1.0, 64, |t| Complex64::from_polar(1.0, t)).unwrap();
        let coeffs = analyze(&g);
        assert!((coeffs.coeff(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(coeffs.coeff(0).norm() < 1e-14);
        assert!(coeffs.coeff(-1).norm() < 1e-14);
    }

    #[test]
    fn synthesize_delta_at_minus_one_is_conjugate_mode() {
        let mut coeffs = FourierCoeffs::from_centered(1.0, vec![c(0.0, 0.0); 32]).unwrap();
        *coeffs.coeff_mut(-1) = c(1.0, 0.0);
        let g = synthesize(&coeffs, 32).unwrap();
        for (k, v) in g.samples.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
            assert!((v - Complex64::from_polar(1.0, -t)).norm() < 1e-13);
        }
    }

    #[test]
    fn round_trip_on_band_limited_data() {
        let g = CircleGrid::from_fn(1.0, 128, |t| {
            c(0.3, 0.0) + Complex64::from_polar(1.0, 3.0 * t) * c(0.2, 0.5)
                + Complex64::from_polar(1.0, -7.0 * t) * c(0.0, -1.1)
        })
        .unwrap();
        let back = synthesize(&analyze(&g), 128).unwrap();
        let err: f64 = g
            .samples
            .iter()
            .zip(&back.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < crate::tol::FFT_ROUNDTRIP, "round trip error {err:.3e}");
    }

    #[test]
    fn synthesize_rejects_aliasing() {
        let mut coeffs = FourierCoeffs::from_centered(1.0, vec![c(0.0, 0.0); 64]).unwrap();
        *coeffs.coeff_mut(20) = c(1.0, 0.0);
        assert!(synthesize(&coeffs, 32).is_err());
    }

    #[test]
    fn parseval_matches_quadrature_for_p2() {
        let g = CircleGrid::from_fn(1.0, 128, |t| {
            c(1.0, 0.0) + Complex64::from_polar(1.0, t)
        })
        .unwrap();
        let quad = boundary_norm_circle(&g, 2.0).unwrap();
        let parseval = analyze(&g).energy().sqrt();
        assert_close(quad, parseval, 1e-12, "p=2 norm");
        assert_close(quad, 2.0f64.sqrt(), 1e-12, "norm of 1 + z");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(CircleGrid::new(0.0, vec![c(0.0, 0.0); 8]).is_err());
        assert!(CircleGrid::new(1.0, vec![c(0.0, 0.0); 7]).is_err());
        assert!(CircleGrid::new(1.0, vec![c(0.0, 0.0); 12]).is_err());
    }
}
