//! The lifted annulus surface: the strip {(r, t) : r0 < r < 1, t real}
//! covering A via (r, t) -> r e^{it}, modulus-automorphic functions and
//! their index, the boundary kernel K, harmonic extensions, outer
//! functions, and the boundary-measure classification of isometry
//! candidates.
//!
//! In log coordinates x = ln r the strip has height q0 = -ln r0. The
//! kernel in its two algebraically identical forms is
//!
//!   K(r, t) = (1/q0) cos((pi/q0) ln(r/sqrt(r0)))
//!             / (cosh(pi t/q0) - sin((pi/q0) ln(r/sqrt(r0))))
//!           = (1/q0) (-sin(pi ln r/q0))
//!             / (cosh(pi t/q0) - cos(pi ln r/q0)),
//!
//! with peak value K(sqrt(r0), 0) = 1/q0 and total line mass
//! int K(r,.) + K(r0/r,.) dt = 2 exactly. Harmonic extension therefore
//! convolves boundary densities against the normalized kernel K/2, whose
//! mass int K/2 (r,.) dt = (ln r + q0)/q0 is precisely the harmonic
//! measure of the outer circle; densities equal to 1 on both lines then
//! extend to the constant 1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{analyze, synthesize, CircleGrid, FourierCoeffs};
use crate::hardy::LaurentSeries;
use crate::radial::PolarGrid;

/// Height q0 = -ln(r0) of the log-coordinate strip covering the annulus.
pub fn strip_height(r0: f64) -> Result<f64> {
    if !(r0 > 0.0 && r0 < 1.0) || !r0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "inner radius must satisfy 0 < r0 < 1, got {r0}"
        )));
    }
    Ok(-r0.ln())
}

fn check_kernel_args(r: f64, r0: f64) -> Result<f64> {
    let q0 = strip_height(r0)?;
    if !(r > r0 && r < 1.0) {
        return Err(Error::Domain(format!(
            "kernel radius must satisfy r0 < r < 1, got r = {r} at r0 = {r0}"
        )));
    }
    Ok(q0)
}

/// Boundary kernel on the lifted surface, printed form:
/// (1/q0) cos((pi/q0) ln(r/sqrt(r0)))
///   / (cosh(pi t/q0) - sin((pi/q0) ln(r/sqrt(r0)))).
pub fn sarason_k(r: f64, t: f64, r0: f64) -> Result<f64> {
    let q0 = check_kernel_args(r, r0)?;
    let u = (std::f64::consts::PI / q0) * (r / r0.sqrt()).ln();
    Ok((1.0 / q0) * u.cos() / ((std::f64::consts::PI * t / q0).cosh() - u.sin()))
}

/// The same kernel rewritten through the half-strip shift:
/// (1/q0) (-sin(pi ln r/q0)) / (cosh(pi t/q0) - cos(pi ln r/q0)).
pub fn sarason_k_rewritten(r: f64, t: f64, r0: f64) -> Result<f64> {
    let q0 = check_kernel_args(r, r0)?;
    let b = std::f64::consts::PI * r.ln() / q0;
    Ok((1.0 / q0) * (-b.sin()) / ((std::f64::consts::PI * t / q0).cosh() - b.cos()))
}

/// Normalized extension kernel K/2: the pair K/2(r, .) + K/2(r0/r, .)
/// carries total line mass 1, and each half carries the harmonic measure
/// of its boundary circle.
pub fn extension_kernel(r: f64, t: f64, r0: f64) -> Result<f64> {
    Ok(sarason_k(r, t, r0)? / 2.0)
}

/// 2 pi\-periodization of the extension kernel: the sum of translates
/// K/2(r, t + 2 pi k), truncated when a translate falls below 1e-16 of
/// the running total (the tail decays like e^{-pi |t| / q0}).
pub fn periodized_extension_kernel(r: f64, t: f64, r0: f64) -> Result<f64> {
    let mut total = extension_kernel(r, t, r0)?;
    for k in 1..=64 {
        let shift = 2.0 * std::f64::consts::PI * k as f64;
        let step = extension_kernel(r, t + shift, r0)? + extension_kernel(r, t - shift, r0)?;
        total += step;
        if step < 1e-16 * total.abs() {
            break;
        }
    }
    Ok(total)
}

/// Absolutely continuous boundary densities on the two lines of the
/// lifted surface: real 2 pi\-periodic sample arrays of equal length.
#[derive(Debug, Clone)]
pub struct BoundaryDensity {
    /// Samples on the outer line (r = 1).
    pub outer: Vec<f64>,
    /// Samples on the inner line (r = r0).
    pub inner: Vec<f64>,
}

impl BoundaryDensity {
    /// Validates equal lengths and finite values.
    pub fn new(outer: Vec<f64>, inner: Vec<f64>) -> Result<Self> {
        if outer.len() != inner.len() || outer.is_empty() {
            return Err(Error::InvalidInput(format!(
                "boundary density arrays must have equal positive length, got {} and {}",
                outer.len(),
                inner.len()
            )));
        }
        if outer.iter().chain(inner.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "boundary density contains non-finite samples".into(),
            ));
        }
        Ok(Self { outer, inner })
    }

    /// Samples per line.
    #[must_use]
    pub fn len(&self) -> usize {
        self.outer.len()
    }

    /// True when there are no samples (never, for validated data).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.outer.is_empty()
    }

    fn modes(&self) -> Result<(FourierCoeffs, FourierCoeffs)> {
        let to_grid = |v: &[f64]| {
            CircleGrid::new(
                1.0,
                v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            )
        };
        Ok((analyze(&to_grid(&self.outer)?), analyze(&to_grid(&self.inner)?)))
    }
}

/// Radial profile of the mode-a harmonic extension that is 1 on the outer
/// line and 0 on the inner line, in overflow-safe exponential form.
fn radial_outer_factor(a: f64, x: f64, q0: f64) -> f64 {
    if a == 0.0 {
        (x + q0) / q0
    } else {
        (a * x).exp() * (1.0 - (-2.0 * a * (x + q0)).exp()) / (1.0 - (-2.0 * a * q0).exp())
    }
}

/// Radial profile of the mode-a harmonic extension that is 0 on the outer
/// line and 1 on the inner line.
fn radial_inner_factor(a: f64, x: f64, q0: f64) -> f64 {
    if a == 0.0 {
        -x / q0
    } else {
        (-a * (x + q0)).exp() * (1.0 - (2.0 * a * x).exp()) / (1.0 - (-2.0 * a * q0).exp())
    }
}

/// Harmonic extension of boundary densities to the annulus grid.
///
/// Realizes the convolution of the densities against the periodized
/// normalized kernel, evaluated per angular Fourier mode (the mode
/// multipliers are the exact radial harmonics), which keeps full accuracy
/// arbitrarily close to the boundary rows. Returns real values in the
/// grid's row-major layout.
pub fn harmonic_ext_annulus(mu: &BoundaryDensity, grid: &PolarGrid) -> Result<Vec<f64>> {
    let Some(r0) = grid.domain.inner_radius() else {
        return Err(Error::InvalidInput(
            "harmonic extension by boundary kernel needs an annulus grid".into(),
        ));
    };
    if mu.len() != grid.n_theta {
        return Err(Error::InvalidInput(format!(
            "density length {} does not match grid n_theta {}",
            mu.len(),
            grid.n_theta
        )));
    }
    let q0 = strip_height(r0)?;
    let (mo, mi) = mu.modes()?;
    let mut out = vec![0.0; grid.len()];
    for (i, &r) in grid.radii.iter().enumerate() {
        let x = r.ln();
        let mut row = FourierCoeffs::from_centered(
            r,
            vec![Complex64::new(0.0, 0.0); grid.n_theta],
        )?;
        for (m, v) in mo.iter_indexed() {
            let a = m.unsigned_abs() as f64;
            *row.coeff_mut(m) = v * radial_outer_factor(a, x, q0)
                + mi.coeff(m) * radial_inner_factor(a, x, q0);
        }
        let values = synthesize(&row, grid.n_theta)?;
        for (j, v) in values.samples.iter().enumerate() {
            out[grid.idx(i, j)] = v.re;
        }
    }
    Ok(out)
}

/// A function sampled on the lifted surface over one or more 2 pi
/// periods, together with its unit multiplier and index.
#[derive(Debug, Clone)]
pub struct LiftedFunction {
    /// Inner radius of the underlying annulus.
    pub r0: f64,
    /// Number of 2 pi periods covered by the angular samples.
    pub periods: usize,
    /// Number of interior radii.
    pub n_r: usize,
    /// Angular samples per period.
    pub n_t: usize,
    /// Strictly interior radii, increasing.
    pub radii: Vec<f64>,
    /// Row-major values, rows indexed by radius, periods * n_t per row.
    pub values: Vec<Complex64>,
    /// Unit-modulus multiplier relating consecutive periods.
    pub multiplier: Complex64,
    /// Index in [0, 1) with multiplier = e^{2 pi i index}.
    pub index: f64,
}

impl LiftedFunction {
    /// Samples f(r, t) over `periods` periods and validates the
    /// modulus-automorphy |f(r, t + 2 pi)| = |f(r, t)| on overlapping
    /// samples (when more than one period is present) to 1e-10, as well
    /// as |multiplier| = 1.
    pub fn from_fn(
        r0: f64,
        periods: usize,
        n_r: usize,
        n_t: usize,
        multiplier: Complex64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 1.0) {
            return Err(Error::InvalidInput(format!(
                "inner radius must satisfy 0 < r0 < 1, got {r0}"
            )));
        }
        if periods == 0 || n_r == 0 || n_t == 0 {
            return Err(Error::InvalidInput(
                "lifted grid needs at least one period, radius, and angle".into(),
            ));
        }
        if (multiplier.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "multiplier must be unimodular, got modulus {}",
                multiplier.norm()
            )));
        }
        let radii: Vec<f64> = (0..n_r)
            .map(|i| r0 + (1.0 - r0) * (i + 1) as f64 / (n_r + 1) as f64)
            .collect();
        let mut values = Vec::with_capacity(n_r * periods * n_t);
        for &r in &radii {
            for j in 0..periods * n_t {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n_t as f64;
                values.push(f(r, t));
            }
        }
        let index = multiplier.arg().rem_euclid(2.0 * std::f64::consts::PI)
            / (2.0 * std::f64::consts::PI);
        let built = Self {
            r0,
            periods,
            n_r,
            n_t,
            radii,
            values,
            multiplier,
            index,
        };
        let defect = built.automorphy_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "samples are not modulus-automorphic: largest period-overlap modulus mismatch {defect:.3e}"
            )));
        }
        Ok(built)
    }

    /// Value at radius row i, angular sample j (j across all periods).
    #[must_use]
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.periods * self.n_t + j]
    }

    /// Largest modulus mismatch between samples one period apart
    /// (0 when only one period is stored).
    #[must_use]
    pub fn automorphy_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n_r {
            for j in 0..(self.periods - 1) * self.n_t {
                let a = self.value(i, j).norm();
                let b = self.value(i, j + self.n_t).norm();
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Lifts an analytic self-map of the annulus to the surface:
/// F(r, t) = phi(r e^{it}), multiplier 1, index exactly 0.
pub fn lift(
    phi: impl Fn(Complex64) -> Complex64,
    r0: f64,
    n_r: usize,
    n_t: usize,
) -> Result<LiftedFunction> {
    LiftedFunction::from_fn(r0, 2, n_r, n_t, Complex64::new(1.0, 0.0), |r, t| {
        phi(Complex64::from_polar(r, t))
    })
}

/// Index of a modulus-automorphic function from its boundary log-moduli:
/// frac((1/(2 pi q0)) (int ln|F(1,.)| - int ln|F(r0,.)|)), reduced to
/// [0, 1).
pub fn index_of(log_moduli: &BoundaryDensity, r0: f64) -> Result<f64> {
    let q0 = strip_height(r0)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let raw = (mean(&log_moduli.outer) - mean(&log_moduli.inner)) / q0;
    Ok(raw.rem_euclid(1.0))
}

/// Boundary log-moduli of the lift of an analytic self-map, sampled on
/// both boundary circles.
pub fn lift_boundary_log_moduli(
    phi: impl Fn(Complex64) -> Complex64,
    r0: f64,
    n: usize,
) -> Result<BoundaryDensity> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let sample = |radius: f64| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                phi(Complex64::from_polar(radius, t)).norm().ln()
            })
            .collect()
    };
    BoundaryDensity::new(sample(1.0), sample(r0))
}

/// An outer function on the lifted surface: F = e^{U + iV} with U the
/// harmonic extension of the prescribed log-moduli. Concretely
/// F(r, t) = exp(G(r e^{it}) + c (ln r + i t)) with G analytic on the
/// annulus and c the log-modulus slope; the multiplier is e^{2 pi i c}.
#[derive(Debug, Clone)]
pub struct AnnulusOuter {
    /// Single-valued analytic part G as a Laurent band.
    pub laurent: LaurentSeries,
    /// Coefficient of ln|z| in ln|F| (the monodromy of V over one period
    /// is 2 pi c).
    pub log_slope: f64,
    /// Sampled surface values with multiplier and index.
    pub lifted: LiftedFunction,
}

impl AnnulusOuter {
    /// Value on the strip at (r, t), t unrestricted.
    pub fn eval_strip(&self, r: f64, t: f64) -> Result<Complex64> {
        let z = Complex64::from_polar(r, t);
        let g = self.laurent.eval(z)?;
        let w = Complex64::new(r.ln(), t);
        Ok((g + self.log_slope * w).exp())
    }

    /// Log-modulus samples on a boundary circle (radius 1 or r0). The
    /// sample count must be a power of two; the full band (one past the
    /// data's half-spectrum) is synthesized on a finer grid and
    /// subsampled exactly.
    pub fn boundary_log_modulus(&self, radius: f64, n: usize) -> Result<Vec<f64>> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "sample count must be a power of two, got {n}"
            )));
        }
        let band = self
            .laurent
            .min_index()
            .unsigned_abs()
            .max(self.laurent.max_index().unsigned_abs()) as usize;
        let fine = (2 * band + 2).next_power_of_two().max(n);
        let stride = fine / n;
        let trace = self.laurent.trace_circle(radius, fine)?;
        Ok((0..n)
            .map(|j| trace.samples[j * stride].re + self.log_slope * radius.ln())
            .collect())
    }
}

/// Builds the outer function on the lifted surface with the prescribed
/// boundary log-moduli: U is the harmonic extension, V its conjugate
/// (single-valued up to the 2 pi c monodromy that becomes the
/// multiplier), and the boundary moduli are reproduced at the input
/// samples. The index is frac(c).
pub fn outer_annulus(log_moduli: &BoundaryDensity, r0: f64) -> Result<AnnulusOuter> {
    let q0 = strip_height(r0)?;
    let n = log_moduli.len();
    if !n.is_power_of_two() || n < 8 {
        return Err(Error::InvalidInput(format!(
            "log-modulus sample count must be a power of two >= 8, got {n}"
        )));
    }
    let (mo, mi) = log_moduli.modes()?;
    let half = (n / 2) as i64;

    // Mode 0 carries the affine-in-x part: U_0 = g0 + c x.
    let g0 = mo.coeff(0).re;
    let c = (mo.coeff(0).re - mi.coeff(0).re) / q0;

    // Modes +-a solve two-point boundary problems in the overflow-safe
    // ratio form; the e^{a x} part feeds the z^{+a} Laurent coefficient
    // and the e^{-a x} part feeds z^{-a}. The unpaired half-band bin of
    // the real data is a pure cosine, so it is split evenly into a proper
    // hermitian +-(n/2) pair, extending the band to [-n/2, n/2].
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    let offset = half; // Laurent index m stored at m + offset.
    coeffs[offset as usize] = Complex64::new(g0, 0.0);
    for a in 1..=half {
        let ea = (-(a as f64) * q0).exp();
        let denom = 1.0 - ea * ea;
        for m in [a, -a] {
            let (up, dn) = if a == half {
                (mo.coeff(-half) / 2.0, mi.coeff(-half) / 2.0)
            } else {
                (mo.coeff(m), mi.coeff(m))
            };
            let grow = (up - dn * ea) / denom; // coefficient of e^{|m| x}
            let decay = (dn - up * ea) * ea / denom; // coefficient of e^{-|m| x}
            if m > 0 {
                coeffs[(m + offset) as usize] += grow;
                coeffs[(-m + offset) as usize] += decay.conj();
            } else {
                coeffs[(m + offset) as usize] += decay;
                coeffs[(-m + offset) as usize] += grow.conj();
            }
        }
    }
    let laurent = LaurentSeries::annulus(r0, -half, coeffs)?;

    let multiplier = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * c);
    let series = laurent.clone();
    let lifted = LiftedFunction::from_fn(r0, 2, 17, n, multiplier, |r, t| {
        let z = Complex64::from_polar(r, t);
        let g = series
            .eval(z)
            .expect("lifted radii are strictly interior");
        (g + c * Complex64::new(r.ln(), t)).exp()
    })?;
    Ok(AnnulusOuter {
        laurent,
        log_slope: c,
        lifted,
    })
}

/// Boundary-angle measures of the sets where the symbol's boundary
/// modulus equals r0 and 1, split per boundary circle. All values are
/// normalized to [0, 1]; the tolerance records the modulus matching
/// window used.
#[derive(Debug, Clone, Copy)]
pub struct OmegaMeasures {
    /// Measure of {|phi*| = r0} on the inner circle.
    pub m_r0_on_inner: f64,
    /// Measure of {|phi*| = r0} on the outer circle.
    pub m_r0_on_outer: f64,
    /// Measure of {|phi*| = 1} on the inner circle.
    pub m_1_on_inner: f64,
    /// Measure of {|phi*| = 1} on the outer circle.
    pub m_1_on_outer: f64,
    /// Modulus matching window.
    pub tol: f64,
}

impl OmegaMeasures {
    /// m of the full level set at r0 (both circles), in [0, 2].
    #[must_use]
    pub fn m_r0(&self) -> f64 {
        self.m_r0_on_inner + self.m_r0_on_outer
    }

    /// m of the full level set at 1 (both circles), in [0, 2].
    #[must_use]
    pub fn m_1(&self) -> f64 {
        self.m_1_on_inner + self.m_1_on_outer
    }
}

/// Default modulus window separating exact symbols from intermediate
/// moduli.
pub const OMEGA_DEFAULT_TOL: f64 = 1e-4;

/// Number of boundary angles sampled per circle by `omega_measures`.
const OMEGA_SAMPLES: usize = 4096;

/// Radial offsets used to approach the boundary circles.
const OMEGA_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Extrapolates boundary moduli of the symbol on one circle: |phi| is
/// sampled at three radial offsets and Richardson-extrapolated in the
/// offset; the offsets must show convergence or the boundary data is
/// rejected as unreliable.
fn boundary_moduli(
    phi: &impl Fn(Complex64) -> Complex64,
    radius_of_eps: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let sample = |radius: f64| -> Vec<f64> {
        (0..OMEGA_SAMPLES)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / OMEGA_SAMPLES as f64;
                phi(Complex64::from_polar(radius, t)).norm()
            })
            .collect()
    };
    let v1 = sample(radius_of_eps(OMEGA_EPS[0]));
    let v2 = sample(radius_of_eps(OMEGA_EPS[1]));
    let v3 = sample(radius_of_eps(OMEGA_EPS[2]));
    let d12 = v1
        .iter()
        .zip(&v2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let d23 = v2
        .iter()
        .zip(&v3)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if d23 > 0.5 * d12 + 1e-13 {
        return Err(Error::AccuracyNotMet {
            what: "boundary moduli do not stabilize under radial refinement".into(),
            achieved: d23,
            required: 0.5 * d12,
        });
    }
    // The offsets shrink by 10x, so the linear-in-eps error cancels via
    // (10 v3 - v2) / 9.
    Ok(v2
        .iter()
        .zip(&v3)
        .map(|(b, c)| (10.0 * c - b) / 9.0)
        .collect())
}

/// Measures the boundary-angle sets where |phi*| matches r0 and 1 on each
/// circle of the annulus, approaching the boundary radially with a
/// convergence check.
pub fn omega_measures(
    phi: impl Fn(Complex64) -> Complex64,
    r0: f64,
    tol: f64,
) -> Result<OmegaMeasures> {
    strip_height(r0)?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "modulus window must be positive, got {tol}"
        )));
    }
    let outer = boundary_moduli(&phi, |eps| 1.0 - eps)?;
    let inner = boundary_moduli(&phi, |eps| r0 + eps)?;
    let fraction = |v: &[f64], level: f64| -> f64 {
        v.iter().filter(|&&m| (m - level).abs() <= tol).count() as f64 / v.len() as f64
    };
    Ok(OmegaMeasures {
        m_r0_on_inner: fraction(&inner, r0),
        m_r0_on_outer: fraction(&outer, r0),
        m_1_on_inner: fraction(&inner, 1.0),
        m_1_on_outer: fraction(&outer, 1.0),
        tol,
    })
}

/// The three boundary configurations an annulus isometry candidate can
/// show, plus the rejection bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryCase {
    /// Boundary circles map to themselves: |phi*| = 1 on T, r0 on T_{r0}.
    Case1,
    /// Boundary circles swap: |phi*| = r0 on T, 1 on T_{r0}.
    Case2,
    /// Each circle splits evenly between the two moduli.
    Case3,
    /// None of the three configurations.
    NotIsometryCandidate,
}

/// Classifies boundary measures into the three admissible configurations.
#[must_use]
pub fn classify_case(m: &OmegaMeasures, tol: f64) -> IsometryCase {
    let near = |value: f64, target: f64| (value - target).abs() <= tol;
    if near(m.m_1_on_outer, 1.0) && near(m.m_r0_on_inner, 1.0) {
        IsometryCase::Case1
    } else if near(m.m_r0_on_outer, 1.0) && near(m.m_1_on_inner, 1.0) {
        IsometryCase::Case2
    } else if near(m.m_r0_on_inner, 0.5) && near(m.m_r0_on_outer, 0.5) {
        IsometryCase::Case3
    } else {
        IsometryCase::NotIsometryCandidate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialOps;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn kernel_peak_and_symmetry() {
        for &r0 in &[0.3, 0.5, 0.7] {
            let q0 = strip_height(r0).unwrap();
            let peak = sarason_k(r0.sqrt(), 0.0, r0).unwrap();
            assert!(
                (peak - 1.0 / q0).abs() < 1e-15,
                "peak at the symmetric radius must be exactly 1/q0"
            );
            let mid = 0.5 * (r0 + 1.0);
            for &t in &[0.1, 0.7, 2.0] {
                let a = sarason_k(mid, t, r0).unwrap();
                let b = sarason_k(mid, -t, r0).unwrap();
                assert!((a - b).abs() < 1e-15, "kernel must be even in t");
                assert!(a > 0.0, "kernel must be positive on the strip");
            }
        }
    }

    #[test]
    fn kernel_forms_agree() {
        let r0 = 0.3;
        for i in 1..100 {
            let r = r0 + (1.0 - r0) * i as f64 / 100.0;
            for j in 0..100 {
                let t = -8.0 + 16.0 * j as f64 / 99.0;
                let a = sarason_k(r, t, r0).unwrap();
                let b = sarason_k_rewritten(r, t, r0).unwrap();
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "forms disagree at r = {r}, t = {t}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn kernel_rejects_radii_outside_strip() {
        assert!(sarason_k(0.2, 0.0, 0.3).is_err());
        assert!(sarason_k(1.0, 0.0, 0.3).is_err());
        assert!(sarason_k(0.3, 0.0, 0.3).is_err());
        assert!(sarason_k(0.5, 0.0, 1.5).is_err());
    }

    /// Trapezoid line quadrature of one kernel over [-T, T]; the tail
    /// decays like e^{-pi t / q0} and is bounded analytically.
    fn kernel_line_mass(kernel: impl Fn(f64) -> f64, q0: f64) -> f64 {
        let t_max = 12.0 * q0;
        let n = 200_000;
        let h = 2.0 * t_max / n as f64;
        let mut sum = 0.5 * (kernel(-t_max) + kernel(t_max));
        for i in 1..n {
            sum += kernel(-t_max + i as f64 * h);
        }
        sum * h
    }

    #[test]
    fn kernel_pair_mass_is_two_and_normalized_pair_is_one() {
        let r0 = 0.3;
        let q0 = strip_height(r0).unwrap();
        for &r in &[0.4, 0.55, 0.9] {
            let raw = kernel_line_mass(|t| sarason_k(r, t, r0).unwrap(), q0)
                + kernel_line_mass(|t| sarason_k(r0 / r, t, r0).unwrap(), q0);
            assert!(
                (raw - 2.0).abs() < 1e-8,
                "raw kernel pair mass at r = {r}: {raw}"
            );
            let normalized = kernel_line_mass(|t| extension_kernel(r, t, r0).unwrap(), q0)
                + kernel_line_mass(|t| extension_kernel(r0 / r, t, r0).unwrap(), q0);
            assert!(
                (normalized - 1.0).abs() < 1e-6,
                "normalized pair mass at r = {r}: {normalized}"
            );
        }
    }

    #[test]
    fn extension_kernel_mass_is_harmonic_measure() {
        // int K/2 (r, .) dt = (ln r + q0)/q0, the harmonic measure of the
        // outer circle at radius r.
        let r0 = 0.4;
        let q0 = strip_height(r0).unwrap();
        for &r in &[0.45, 0.6, 0.8, 0.95] {
            let mass = kernel_line_mass(|t| extension_kernel(r, t, r0).unwrap(), q0);
            let want = (r.ln() + q0) / q0;
            assert!(
                (mass - want).abs() < 1e-8,
                "mass at r = {r}: {mass} vs harmonic measure {want}"
            );
        }
    }

    #[test]
    fn periodized_kernel_matches_translate_sum() {
        let r0 = 0.5;
        let r = 0.7;
        for &t in &[0.0, 1.0, 3.0] {
            let direct: f64 = (-40..=40)
                .map(|k| extension_kernel(r, t + 2.0 * PI * k as f64, r0).unwrap())
                .sum();
            let fast = periodized_extension_kernel(r, t, r0).unwrap();
            assert!((fast - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_extension_reproduces_constants_and_log() {
        let r0 = 0.5;
        let grid = PolarGrid::annulus(r0, 17, 64).unwrap();
        let n = grid.n_theta;

        let zero = BoundaryDensity::new(vec![0.0; n], vec![0.0; n]).unwrap();
        let u = harmonic_ext_annulus(&zero, &grid).unwrap();
        assert!(u.iter().all(|&v| v.abs() < 1e-14));

        let one = BoundaryDensity::new(vec![1.0; n], vec![1.0; n]).unwrap();
        let u = harmonic_ext_annulus(&one, &grid).unwrap();
        for &v in &u {
            assert!((v - 1.0).abs() < 1e-12, "unit density must extend to 1, got {v}");
        }

        // Boundary data of ln|z|: 0 outer, ln r0 inner -> U = ln r.
        let logdata = BoundaryDensity::new(vec![0.0; n], vec![r0.ln(); n]).unwrap();
        let u = harmonic_ext_annulus(&logdata, &grid).unwrap();
        for (i, &r) in grid.radii.iter().enumerate() {
            for j in 0..n {
                let v = u[grid.idx(i, j)];
                assert!(
                    (v - r.ln()).abs() < 1e-12,
                    "log extension at r = {r}: {v} vs {}",
                    r.ln()
                );
            }
        }
    }

    #[test]
    fn harmonic_extension_matches_kernel_quadrature() {
        // Independent oracle: direct convolution against the periodized
        // normalized kernel at strictly interior radii.
        let r0 = 0.4;
        let grid = PolarGrid::annulus(r0, 17, 128).unwrap();
        let n = grid.n_theta;
        let mu = BoundaryDensity::new(
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    0.5 + 0.3 * t.cos() - 0.1 * (2.0 * t).sin()
                })
                .collect(),
            (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    -0.2 + 0.4 * (t + 1.0).sin()
                })
                .collect(),
        )
        .unwrap();
        let u = harmonic_ext_annulus(&mu, &grid).unwrap();
        let h = 2.0 * PI / n as f64;
        for &i in &[5, 8, 11] {
            let r = grid.radii[i];
            for &j in &[0, 17, 80] {
                let t = grid.theta(j);
                let mut conv = 0.0;
                for (k, (&muo, &mui)) in mu.outer.iter().zip(&mu.inner).enumerate() {
                    let s = 2.0 * PI * k as f64 / n as f64;
                    conv += periodized_extension_kernel(r, t - s, r0).unwrap() * muo * h;
                    conv += periodized_extension_kernel(r0 / r, t - s, r0).unwrap() * mui * h;
                }
                let got = u[grid.idx(i, j)];
                assert!(
                    (got - conv).abs() < 1e-6,
                    "extension vs quadrature at (r, t) = ({r}, {t}): {got} vs {conv}"
                );
            }
        }
    }

    #[test]
    fn harmonic_extension_has_small_laplacian_residual() {
        let r0 = 0.5;
        let grid = PolarGrid::annulus(r0, 25, 64).unwrap();
        let n = grid.n_theta;
        let mu = BoundaryDensity::new(
            (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect(),
            (0..n).map(|j| (4.0 * PI * j as f64 / n as f64).sin()).collect(),
        )
        .unwrap();
        let u = harmonic_ext_annulus(&mu, &grid).unwrap();
        let ops = RadialOps::new(grid.clone());
        let field: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        // Laplacian = 4 d dbar.
        let lap = ops.dbar(&ops.d(&field));
        let mut worst = 0.0f64;
        for i in 2..grid.n_r - 2 {
            for j in 0..n {
                worst = worst.max(lap[grid.idx(i, j)].norm());
            }
        }
        assert!(
            worst < 1e-5 / 4.0,
            "interior Laplacian residual too large: {worst:e}"
        );
    }

    #[test]
    fn lift_of_simple_maps() {
        let r0 = 0.5;
        let f = lift(|z| z, r0, 5, 32).unwrap();
        assert_eq!(f.index, 0.0);
        assert_eq!(f.multiplier, Complex64::new(1.0, 0.0));
        for (i, &r) in f.radii.iter().enumerate() {
            for j in 0..2 * 32 {
                let t = 2.0 * PI * j as f64 / 32.0;
                let want = Complex64::from_polar(r, t);
                assert!((f.value(i, j) - want).norm() < 1e-14);
            }
        }
        assert!(f.automorphy_defect() < 1e-13);

        let sq = lift(|z| z * z, r0, 5, 32).unwrap();
        assert_eq!(sq.index, 0.0);
        let c = lift(|_| Complex64::new(0.6, 0.1), r0, 3, 16).unwrap();
        assert_eq!(c.index, 0.0);
    }

    #[test]
    fn lifted_function_rejects_non_automorphic_samples() {
        let err = LiftedFunction::from_fn(0.5, 2, 4, 16, Complex64::new(1.0, 0.0), |_, t| {
            Complex64::new((t / 10.0).exp(), 0.0)
        });
        assert!(err.is_err(), "modulus growth across periods must be rejected");
    }

    #[test]
    fn index_of_monomial_lifts() {
        let r0 = 0.5;
        for k in 0..=3u32 {
            let mu = lift_boundary_log_moduli(|z| z.powu(k), r0, 256).unwrap();
            let idx = index_of(&mu, r0).unwrap();
            let dist = idx.min(1.0 - idx);
            assert!(
                dist < 1e-10,
                "lift of z^{k} must have index 0 mod 1, got {idx}"
            );
        }
        // Constant modulus: exactly zero.
        let mu = BoundaryDensity::new(vec![0.7; 64], vec![0.7; 64]).unwrap();
        assert_eq!(index_of(&mu, r0).unwrap(), 0.0);
    }

    #[test]
    fn index_is_additive_mod_one() {
        let r0 = 0.4;
        let n = 128;
        let data = |f: fn(f64) -> f64, g: fn(f64) -> f64| {
            BoundaryDensity::new(
                (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect(),
                (0..n).map(|j| g(2.0 * PI * j as f64 / n as f64)).collect(),
            )
            .unwrap()
        };
        let mu1 = data(|t| 0.3 * t.cos(), |t| 0.8 + 0.1 * t.sin());
        let mu2 = data(|t| -0.4 + 0.2 * (2.0 * t).cos(), |t| 0.05 * t.sin());
        let sum = BoundaryDensity::new(
            mu1.outer.iter().zip(&mu2.outer).map(|(a, b)| a + b).collect(),
            mu1.inner.iter().zip(&mu2.inner).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        let i1 = index_of(&mu1, r0).unwrap();
        let i2 = index_of(&mu2, r0).unwrap();
        let i12 = index_of(&sum, r0).unwrap();
        let diff = (i12 - i1 - i2).rem_euclid(1.0);
        let dist = diff.min(1.0 - diff);
        assert!(dist < 1e-12, "index must add mod 1: {i1} + {i2} vs {i12}");
    }

    #[test]
    fn outer_annulus_unimodular_and_identity_data() {
        let r0 = 0.5;
        let n = 64;
        // Moduli identically 1: a unimodular constant of index 0.
        let flat = BoundaryDensity::new(vec![0.0; n], vec![0.0; n]).unwrap();
        let f = outer_annulus(&flat, r0).unwrap();
        assert!(f.log_slope.abs() < 1e-13);
        assert!(f.lifted.index < 1e-12 || f.lifted.index > 1.0 - 1e-12);
        for v in &f.lifted.values {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }

        // Moduli of the lift of z: |F| = r, index 0, F/z unimodular.
        let zdata = BoundaryDensity::new(vec![0.0; n], vec![r0.ln(); n]).unwrap();
        let f = outer_annulus(&zdata, r0).unwrap();
        assert!((f.log_slope - 1.0).abs() < 1e-12);
        for (i, &r) in f.lifted.radii.iter().enumerate() {
            for j in 0..n {
                let v = f.lifted.value(i, j);
                assert!(
                    (v.norm() - r).abs() < 1e-10,
                    "|F| must equal r: {} vs {r}",
                    v.norm()
                );
                let t = 2.0 * PI * j as f64 / n as f64;
                let ratio = v / Complex64::from_polar(r, t);
                assert!((ratio.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn outer_annulus_reproduces_two_level_boundary_data() {
        // 1 on an outer-line arc, 1/2 everywhere else on the boundary.
        let r0 = 0.5;
        let n = 256;
        let half = 0.5f64.ln();
        let outer: Vec<f64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                if t < 1.2 { 0.0 } else { half }
            })
            .collect();
        let mu = BoundaryDensity::new(outer.clone(), vec![half; n]).unwrap();
        let f = outer_annulus(&mu, r0).unwrap();
        let got_outer = f.boundary_log_modulus(1.0, n).unwrap();
        let got_inner = f.boundary_log_modulus(r0, n).unwrap();
        for j in 0..n {
            assert!(
                (got_outer[j] - outer[j]).abs() < 1e-6,
                "outer log-modulus off at sample {j}: {} vs {}",
                got_outer[j],
                outer[j]
            );
            assert!((got_inner[j] - half).abs() < 1e-6);
        }
        // Zero-free on the sampled surface.
        let min_mod = f
            .lifted
            .values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        assert!(min_mod > 0.0);
    }

    #[test]
    fn omega_measures_for_exact_symbols() {
        let r0 = 0.5;
        let m = omega_measures(|z| z, r0, OMEGA_DEFAULT_TOL).unwrap();
        assert_eq!(m.m_1_on_outer, 1.0);
        assert_eq!(m.m_r0_on_inner, 1.0);
        assert_eq!(m.m_1_on_inner, 0.0);
        assert_eq!(m.m_r0_on_outer, 0.0);

        let m = omega_measures(|z| r0 / z, r0, OMEGA_DEFAULT_TOL).unwrap();
        assert_eq!(m.m_1_on_inner, 1.0);
        assert_eq!(m.m_r0_on_outer, 1.0);
        assert_eq!(m.m_1_on_outer, 0.0);
        assert_eq!(m.m_r0_on_inner, 0.0);

        let m = omega_measures(|_| Complex64::new(0.7, 0.0), r0, OMEGA_DEFAULT_TOL).unwrap();
        assert_eq!(m.m_r0(), 0.0);
        assert_eq!(m.m_1(), 0.0);
    }

    #[test]
    fn omega_level_identity_for_rotation() {
        // r0^p m(Omega_{phi, r0}) + m(Omega_{phi, 1}) = r0^p + 1 at p = 2.
        let r0 = 0.5;
        let p = 2.0;
        let rot = Complex64::from_polar(1.0, PI / 7.0);
        let m = omega_measures(|z| rot * z, r0, OMEGA_DEFAULT_TOL).unwrap();
        let lhs = r0.powf(p) * m.m_r0() + m.m_1();
        let rhs = r0.powf(p) + 1.0;
        assert!(
            (lhs - rhs).abs() < 1e-8,
            "level identity violated: {lhs} vs {rhs}"
        );
    }

    #[test]
    fn classification_of_builtin_symbols() {
        let r0 = 0.5;
        let id = omega_measures(|z| z, r0, OMEGA_DEFAULT_TOL).unwrap();
        assert_eq!(classify_case(&id, 1e-3), IsometryCase::Case1);
        let inv = omega_measures(|z| r0 / z, r0, OMEGA_DEFAULT_TOL).unwrap();
        assert_eq!(classify_case(&inv, 1e-3), IsometryCase::Case2);
        let constant =
            omega_measures(|_| Complex64::new(0.7, 0.0), r0, OMEGA_DEFAULT_TOL).unwrap();
        assert_eq!(
            classify_case(&constant, 1e-3),
            IsometryCase::NotIsometryCandidate
        );
        // Synthetic half-half measures land in the mixed case.
        let mixed = OmegaMeasures {
            m_r0_on_inner: 0.5,
            m_r0_on_outer: 0.5,
            m_1_on_inner: 0.5,
            m_1_on_outer: 0.5,
            tol: 1e-4,
        };
        assert_eq!(classify_case(&mixed, 1e-3), IsometryCase::Case3);
    }

    #[test]
    fn omega_measures_reject_unstable_boundaries() {
        // A non-analytic sampler whose modulus oscillates with the
        // approach radius cannot stabilize.
        let r0 = 0.5;
        let result = omega_measures(
            |z| Complex64::new((1000.0 * (1.0 - z.norm())).sin() + 2.0, 0.0),
            r0,
            OMEGA_DEFAULT_TOL,
        );
        assert!(result.is_err());
    }
}
