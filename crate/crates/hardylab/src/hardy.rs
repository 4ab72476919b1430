//! Classical Hardy spaces on the disk and the annulus.
//!
//! Functions are carried as finite Laurent bands a_n, n in [min, max]
//! (disk series have no negative indices). The annulus Hardy space
//! splits as a direct sum of a disk-type part (n >= 0) and an
//! outside-type part (n < 0), and a pair of boundary traces comes from
//! one H^p(A) function exactly when the coefficient ladder
//!
//!   hhat_inner(n) = r0^n * hhat_outer(n)
//!
//! holds for every n. Boundary norms put total measure 1 on every
//! circle (dt/2pi), and the annulus norm adds the two circle integrals
//! inside the p-th power, so ||1||_p^p = 2 and ||z||_p^p = 1 + r0^p.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{synthesize, analyze, CircleGrid, FourierCoeffs};
use crate::tol;

/// Finite Laurent band. `inner_radius = 0` marks a disk series (no
/// negative indices); positive values mark a series on the annulus
/// inner_radius < |z| < 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    inner_radius: f64,
    min_index: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentSeries {
    /// Disk series from Taylor coefficients a_0, a_1, ...
    pub fn disk(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("empty coefficient list".into()));
        }
        Ok(Self {
            inner_radius: 0.0,
            min_index: 0,
            coeffs,
        })
    }

    /// Annulus series with signed indices starting at `min_index`.
    pub fn annulus(r0: f64, min_index: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 1.0) || !r0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "annulus inner radius must satisfy 0 < r0 < 1, got {r0}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("empty coefficient list".into()));
        }
        Ok(Self {
            inner_radius: r0,
            min_index,
            coeffs,
        })
    }

    /// The monomial a * z^k on the given domain.
    pub fn monomial(inner_radius: f64, k: i64, a: Complex64) -> Result<Self> {
        if inner_radius == 0.0 {
            if k < 0 {
                return Err(Error::InvalidInput(format!(
                    "disk series cannot carry the negative index {k}"
                )));
            }
            let mut coeffs = vec![Complex64::new(0.0, 0.0); k as usize + 1];
            coeffs[k as usize] = a;
            Self::disk(coeffs)
        } else {
            Self::annulus(inner_radius, k, vec![a])
        }
    }

    /// Inner radius of the carrying domain (0 for the disk).
    #[must_use]
    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// True when the series lives on the disk.
    #[must_use]
    pub fn is_disk(&self) -> bool {
        self.inner_radius == 0.0
    }

    /// Smallest stored index.
    #[must_use]
    pub fn min_index(&self) -> i64 {
        self.min_index
    }

    /// Largest stored index.
    #[must_use]
    pub fn max_index(&self) -> i64 {
        self.min_index + self.coeffs.len() as i64 - 1
    }

    /// Coefficient at signed index n (zero outside the band).
    #[must_use]
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n < self.min_index || n > self.max_index() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n - self.min_index) as usize]
        }
    }

    /// Iterates `(signed index, coefficient)` over the stored band.
    pub fn iter_indexed(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let min = self.min_index;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &c)| (min + j as i64, c))
    }

    /// Ratio of the extreme-band coefficient size to the peak size — a
    /// heuristic resolution indicator (small means the band captured the
    /// function; 1 is typical for exact monomial data).
    #[must_use]
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.coeffs.first().map_or(0.0, |c| c.norm());
        let last = self.coeffs.last().map_or(0.0, |c| c.norm());
        first.max(last) / peak
    }

    /// Multiplies by z^shift (pure index shift).
    pub fn shift_index(&self, shift: i64) -> Result<Self> {
        let min = self.min_index + shift;
        if self.is_disk() && min < 0 {
            return Err(Error::InvalidInput(format!(
                "shift by {shift} pushes a disk series to negative indices"
            )));
        }
        Ok(Self {
            inner_radius: self.inner_radius,
            min_index: min,
            coeffs: self.coeffs.clone(),
        })
    }

    /// Evaluates the series in the open domain interior by Horner sums
    /// (the nonnegative part in z, the negative part in 1/z).
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r >= 1.0 || r <= self.inner_radius {
            return Err(Error::Domain(format!(
                "evaluation point |z| = {r:.6} outside the open domain ({}, 1)",
                self.inner_radius
            )));
        }
        Ok(self.eval_on_circle_closure(z))
    }

    /// Evaluates the series on the closed domain. Finite bands converge on
    /// the closure, so the only requirement is that `z` does not leave it
    /// (up to 1e-12 roundoff slack); composition diagnostics use this for
    /// image points that touch the boundary circles.
    pub fn eval_closed(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r > 1.0 + 1e-12 || r < self.inner_radius * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "evaluation point |z| = {r:.6} outside the closed domain [{}, 1]",
                self.inner_radius
            )));
        }
        Ok(self.eval_on_circle_closure(z))
    }

    /// Horner evaluation without the open-domain check; used for traces on
    /// the boundary circles where the finite band converges trivially.
    #[must_use]
    fn eval_on_circle_closure(&self, z: Complex64) -> Complex64 {
        let mut pos = Complex64::new(0.0, 0.0);
        for n in (0..=self.max_index().max(0)).rev() {
            pos = pos * z + self.coeff(n);
        }
        // Negative part: Horner in w = 1/z over a_{-1} w + a_{-2} w^2 + ...
        let mut neg = Complex64::new(0.0, 0.0);
        if self.min_index < 0 {
            let w = 1.0 / z;
            for n in self.min_index..0 {
                neg = neg * w + self.coeff(n);
            }
            neg *= w;
        }
        pos + neg
    }

    /// Samples the series on the circle of the given radius (coefficient
    /// scatter + inverse FFT; exact for the stored band).
    pub fn trace_circle(&self, radius: f64, n_samples: usize) -> Result<CircleGrid> {
        if !(radius > 0.0 && radius <= 1.0) || (self.inner_radius > 0.0 && radius < self.inner_radius)
        {
            return Err(Error::Domain(format!(
                "trace radius {radius} outside the closed domain [{}, 1]",
                self.inner_radius
            )));
        }
        let mut centered = vec![Complex64::new(0.0, 0.0); n_samples];
        let mut coeffs = FourierCoeffs::from_centered(radius, centered.drain(..).collect())?;
        for (n, a) in self.iter_indexed() {
            if a.norm() == 0.0 {
                continue;
            }
            if n < coeffs.min_index() || n > coeffs.max_index() {
                return Err(Error::InvalidInput(format!(
                    "series index {n} not representable with {n_samples} samples"
                )));
            }
            *coeffs.coeff_mut(n) = a * radius.powi(n as i32);
        }
        synthesize(&coeffs, n_samples)
    }
}

/// Free-function form of interior evaluation.
pub fn eval_interior(f: &LaurentSeries, z: Complex64) -> Result<Complex64> {
    f.eval(z)
}

/// A pair of boundary traces of one annulus function: outer circle at
/// radius 1, inner circle at radius r0, equal sample counts.
#[derive(Debug, Clone)]
pub struct AnnulusTrace {
    /// Trace on the unit circle.
    pub outer: CircleGrid,
    /// Trace on the inner circle.
    pub inner: CircleGrid,
}

impl AnnulusTrace {
    /// Validates radii (outer exactly 1, inner in (0,1)) and matching
    /// sample counts.
    pub fn new(outer: CircleGrid, inner: CircleGrid) -> Result<Self> {
        if (outer.radius - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "outer trace must sit on the unit circle, got radius {}",
                outer.radius
            )));
        }
        if !(inner.radius > 0.0 && inner.radius < 1.0) {
            return Err(Error::InvalidInput(format!(
                "inner trace radius must lie in (0,1), got {}",
                inner.radius
            )));
        }
        if outer.n_samples() != inner.n_samples() {
            return Err(Error::InvalidInput(format!(
                "trace sample counts differ: {} vs {}",
                outer.n_samples(),
                inner.n_samples()
            )));
        }
        Ok(Self { outer, inner })
    }

    /// Inner circle radius r0.
    #[must_use]
    pub fn r0(&self) -> f64 {
        self.inner.radius
    }
}

/// A boundary trace on either domain.
#[derive(Debug, Clone)]
pub enum BoundaryTrace {
    /// Trace on the unit circle.
    Disk(CircleGrid),
    /// Trace pair on the two annulus circles.
    Annulus(AnnulusTrace),
}

/// Zeroes the negative-index coefficients — the orthogonal projection of
/// L^2(T) onto the analytic boundary subspace.
#[must_use]
pub fn hardy_project_disk(c: &FourierCoeffs) -> FourierCoeffs {
    let mut projected = Vec::with_capacity(c.len());
    for (n, v) in c.iter_indexed() {
        projected.push(if n < 0 { Complex64::new(0.0, 0.0) } else { v });
    }
    FourierCoeffs::from_centered(c.radius, projected)
        .expect("projection preserves the validated length")
}

/// Splits an annulus series into its disk-type part (indices n >= 0) and
/// its outside-type part (n < 0, vanishing at infinity). The parts
/// recombine coefficientwise to the input.
pub fn annulus_split(f: &LaurentSeries) -> Result<(LaurentSeries, LaurentSeries)> {
    if f.is_disk() {
        return Err(Error::InvalidInput(
            "splitting requires an annulus series (inner radius > 0)".into(),
        ));
    }
    let max = f.max_index();
    let g_coeffs: Vec<Complex64> = (0..=max.max(0)).map(|n| f.coeff(n)).collect();
    let g = LaurentSeries::disk(g_coeffs)?;
    let h = if f.min_index() < 0 {
        let coeffs: Vec<Complex64> = (f.min_index()..0).map(|n| f.coeff(n)).collect();
        LaurentSeries::annulus(f.inner_radius(), f.min_index(), coeffs)?
    } else {
        LaurentSeries::annulus(f.inner_radius(), -1, vec![Complex64::new(0.0, 0.0)])?
    };
    Ok((g, h))
}

/// Checks whether a trace pair belongs to one annulus Hardy function by
/// comparing the coefficient ladders of the two circles.
///
/// For every mode the relation hhat_inner(n) = r0^n hhat_outer(n) is
/// tested in the direction that multiplies by r0^|n| <= 1 (so roundoff is
/// never amplified), and the largest mismatch is normalized by the overall
/// coefficient scale max(1, ||hhat_outer||_inf, ||hhat_inner||_inf).
/// Returns `(defect <= tol, defect)`.
#[must_use]
pub fn annulus_membership(t: &AnnulusTrace, tol: f64) -> (bool, f64) {
    let co = analyze(&t.outer);
    let ci = analyze(&t.inner);
    let r0 = t.r0();
    let scale = co
        .iter_indexed()
        .chain(ci.iter_indexed())
        .map(|(_, v)| v.norm())
        .fold(1.0, f64::max);
    let mut worst = 0.0f64;
    for (n, outer) in co.iter_indexed() {
        let inner = ci.coeff(n);
        let factor = r0.powi(n.unsigned_abs() as i32);
        let mismatch = if n >= 0 {
            // hhat_inner(n) - r0^n hhat_outer(n)
            (inner - factor * outer).norm()
        } else {
            // hhat_outer(n) - r0^{|n|} hhat_inner(n)
            (outer - factor * inner).norm()
        };
        worst = worst.max(mismatch);
    }
    let defect = worst / scale;
    (defect <= tol, defect)
}

/// Boundary L^p norm of a trace: `(mean |f|^p)^{1/p}` on the disk, and
/// `(mean_outer |f|^p + mean_inner |f|^p)^{1/p}` on the annulus (each
/// circle carries measure 1; the two integrals add inside the p-th power).
pub fn boundary_norm(t: &BoundaryTrace, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "p must lie in (1, infinity), got {p}"
        )));
    }
    match t {
        BoundaryTrace::Disk(g) => crate::grid::boundary_norm_circle(g, p),
        BoundaryTrace::Annulus(t) => {
            Ok((t.outer.mean_abs_pow(p) + t.inner.mean_abs_pow(p)).powf(1.0 / p))
        }
    }
}

/// A Hardy-class function: its Laurent band plus an optional cached
/// boundary trace (used where an exact trace is known independently of
/// the truncated series, e.g. for outer functions of two-level moduli).
#[derive(Debug, Clone)]
pub struct HardyFunction {
    /// Coefficient band.
    pub series: LaurentSeries,
    /// Exact boundary trace when one is known.
    pub cached_trace: Option<BoundaryTrace>,
}

impl HardyFunction {
    /// Wraps a series with no cached trace.
    #[must_use]
    pub fn from_series(series: LaurentSeries) -> Self {
        Self {
            series,
            cached_trace: None,
        }
    }

    /// Evaluates in the domain interior.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.series.eval(z)
    }

    /// Boundary trace: the cached one when present, otherwise sampled from
    /// the series.
    pub fn trace(&self, n_samples: usize) -> Result<BoundaryTrace> {
        if let Some(t) = &self.cached_trace {
            return Ok(t.clone());
        }
        if self.series.is_disk() {
            Ok(BoundaryTrace::Disk(self.series.trace_circle(1.0, n_samples)?))
        } else {
            let outer = self.series.trace_circle(1.0, n_samples)?;
            let inner = self
                .series
                .trace_circle(self.series.inner_radius(), n_samples)?;
            Ok(BoundaryTrace::Annulus(AnnulusTrace::new(outer, inner)?))
        }
    }
}

/// Finite union of circle arcs given by angle intervals, with exact
/// endpoint arithmetic for measures and Fourier coefficients.
#[derive(Debug, Clone)]
pub struct ArcSet {
    /// Half-open angle intervals [a, b) with 0 <= a < b <= 2 pi.
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    /// Validates and sorts the intervals (each within [0, 2 pi], positive
    /// length, pairwise disjoint).
    pub fn new(mut arcs: Vec<(f64, f64)>) -> Result<Self> {
        let two_pi = 2.0 * std::f64::consts::PI;
        if arcs.is_empty() {
            return Err(Error::InvalidInput("arc set needs at least one arc".into()));
        }
        for &(a, b) in &arcs {
            if !(a >= 0.0 && b <= two_pi + 1e-15 && a < b) {
                return Err(Error::InvalidInput(format!(
                    "arc [{a}, {b}) must satisfy 0 <= a < b <= 2 pi"
                )));
            }
        }
        arcs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite endpoints"));
        for w in arcs.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::InvalidInput(format!(
                    "arcs [{}, {}) and [{}, {}) overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { arcs })
    }

    /// Normalized measure (fraction of the circle), from exact endpoints.
    #[must_use]
    pub fn measure(&self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.arcs.iter().map(|&(a, b)| b - a).sum::<f64>() / two_pi
    }

    /// Membership of an angle (reduced mod 2 pi).
    #[must_use]
    pub fn contains(&self, theta: f64) -> bool {
        let two_pi = 2.0 * std::f64::consts::PI;
        let t = theta.rem_euclid(two_pi);
        self.arcs.iter().any(|&(a, b)| t >= a && t < b)
    }

    /// Exact Fourier coefficient of the indicator:
    /// (1/2pi) integral_B e^{-i m theta} d theta.
    #[must_use]
    pub fn indicator_coeff(&self, m: i64) -> Complex64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        if m == 0 {
            return Complex64::new(self.measure(), 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b) in &self.arcs {
            let ea = Complex64::from_polar(1.0, -(m as f64) * a);
            let eb = Complex64::from_polar(1.0, -(m as f64) * b);
            acc += (ea - eb) / Complex64::new(0.0, m as f64);
        }
        acc / two_pi
    }

    /// Distance from an angle to the nearest arc endpoint (on the circle).
    #[must_use]
    pub fn endpoint_distance(&self, theta: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let t = theta.rem_euclid(two_pi);
        let mut best = f64::INFINITY;
        for &(a, b) in &self.arcs {
            for e in [a, b] {
                let d = (t - e).rem_euclid(two_pi);
                best = best.min(d.min(two_pi - d));
            }
        }
        best
    }
}

/// Analytic completion coefficients h_m of a real boundary function with
/// Fourier coefficients c_m: h = c_0 + 2 sum_{m>0} c_m z^m, so that
/// Re h = data on T and Im of the mean vanishes.
fn herglotz_coeffs(c: &[Complex64], band: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); band];
    h[0] = Complex64::new(c[0].re, 0.0);
    for (m, hm) in h.iter_mut().enumerate().skip(1) {
        if m < c.len() {
            *hm = 2.0 * c[m];
        }
    }
    h
}

/// Taylor coefficients of exp(h) for a polynomial h, by the logarithmic
/// derivative recurrence n F_n = sum_{k=1..n} k h_k F_{n-k}.
fn exp_series(h: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut f = vec![Complex64::new(0.0, 0.0); len];
    f[0] = h[0].exp();
    for n in 1..len {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n.min(h.len() - 1) {
            acc += (k as f64) * h[k] * f[n - k];
        }
        f[n] = acc / n as f64;
    }
    f
}

/// Builds the zero-free disk function with prescribed boundary modulus:
/// F = exp(h) where h is the analytic completion of the sampled
/// log-modulus. The returned function carries a cached boundary trace
/// whose modulus is exactly exp(data) (the series is its truncation).
pub fn outer_disk(log_modulus: &CircleGrid) -> Result<HardyFunction> {
    let n = log_modulus.n_samples();
    let worst_im = log_modulus
        .samples
        .iter()
        .map(|v| v.im.abs())
        .fold(0.0, f64::max);
    if worst_im > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "log-modulus data must be real-valued; largest imaginary part {worst_im:.3e}"
        )));
    }
    let c: Vec<Complex64> = analyze(log_modulus)
        .iter_indexed()
        .filter(|&(m, _)| m >= 0)
        .map(|(_, v)| v)
        .collect();
    let band = n / 2;
    let h = herglotz_coeffs(&c, band);
    let series = LaurentSeries::disk(exp_series(&h, band))?;

    // Exact trace: modulus from the data itself, phase from the completion.
    let phase = completion_phase(&h, n)?;
    let samples: Vec<Complex64> = log_modulus
        .samples
        .iter()
        .zip(&phase)
        .map(|(lm, ph)| Complex64::from_polar(lm.re.exp(), *ph))
        .collect();
    let trace = CircleGrid::new(1.0, samples)?;
    Ok(HardyFunction {
        series,
        cached_trace: Some(BoundaryTrace::Disk(trace)),
    })
}

/// Least N >= 0 with r0^N * m < 1/2.
pub fn least_power_below_half(r0: f64, m: f64) -> Result<u32> {
    if !(r0 > 0.0 && r0 < 1.0) || !m.is_finite() || m <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "need 0 < r0 < 1 and m > 0, got r0 = {r0}, m = {m}"
        )));
    }
    let mut n = 0u32;
    let mut value = m;
    while value >= 0.5 {
        n += 1;
        value *= r0;
        if n > 10_000 {
            return Err(Error::ConvergenceFailure {
                iterations: n as usize,
                last_diff: value,
                history: vec![],
            });
        }
    }
    Ok(n)
}

/// Analytic completion coefficients of a two-level log-modulus (exact,
/// from the closed-form arc Fourier coefficients; no sampling).
fn two_level_completion(b0: &ArcSet, level_on: f64, level_off: f64, band: usize) -> Vec<Complex64> {
    let la = level_on.ln();
    let lb = level_off.ln();
    // log|g| = lb + (la - lb) * indicator.
    let mut c = vec![Complex64::new(0.0, 0.0); band];
    c[0] = Complex64::new(lb + (la - lb) * b0.measure(), 0.0);
    for (m, cm) in c.iter_mut().enumerate().skip(1) {
        *cm = (la - lb) * b0.indicator_coeff(m as i64);
    }
    herglotz_coeffs(&c, band)
}

/// Boundary samples of Im h for a nonnegative-index coefficient list h.
fn completion_phase(h: &[Complex64], n_samples: usize) -> Result<Vec<f64>> {
    let mut scatter =
        FourierCoeffs::from_centered(1.0, vec![Complex64::new(0.0, 0.0); n_samples])?;
    for (m, hm) in h.iter().enumerate() {
        if (m as i64) > scatter.max_index() {
            return Err(Error::InvalidInput(format!(
                "completion band {} not representable with {n_samples} samples",
                h.len()
            )));
        }
        *scatter.coeff_mut(m as i64) = *hm;
    }
    Ok(synthesize(&scatter, n_samples)?
        .samples
        .iter()
        .map(|v| v.im)
        .collect())
}

/// Disk outer function for a two-level boundary modulus (`level_on` on the
/// arc set, `level_off` elsewhere), built from exact arc Fourier
/// coefficients. The cached trace carries the exact two-level modulus; the
/// series is accurate in the interior to the band's truncation error.
pub fn outer_disk_two_level(
    b0: &ArcSet,
    level_on: f64,
    level_off: f64,
    band: usize,
) -> Result<HardyFunction> {
    if !(level_on > 0.0 && level_off > 0.0) || !level_on.is_finite() || !level_off.is_finite() {
        return Err(Error::InvalidInput(format!(
            "modulus levels must be positive and finite, got {level_on}, {level_off}"
        )));
    }
    if band < 2 {
        return Err(Error::InvalidInput(format!("band {band} too small")));
    }
    let h = two_level_completion(b0, level_on, level_off, band);
    let series = LaurentSeries::disk(exp_series(&h, band))?;
    let n_trace = (4 * band).next_power_of_two();
    let phase = completion_phase(&h, n_trace)?;
    let samples: Vec<Complex64> = (0..n_trace)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_trace as f64;
            let level = if b0.contains(theta) { level_on } else { level_off };
            Complex64::from_polar(level, phase[j])
        })
        .collect();
    Ok(HardyFunction {
        series,
        cached_trace: Some(BoundaryTrace::Disk(CircleGrid::new(1.0, samples)?)),
    })
}

/// Builds an annulus Hardy function whose boundary modulus is 1 on the
/// arc set and at most 1/2 + tolerance on the rest of the boundary.
///
/// Construction: take the disk outer function g for the two-level modulus
/// (1 on the arcs, 1/2 off them) from exact arc Fourier coefficients,
/// measure M = max |g| on the inner circle, pick the least N with
/// r0^N M < 1/2, and return F = z^N g restricted to the annulus. The
/// cached outer trace carries the exact two-level modulus.
pub fn annulus_two_level_outer(b0: &ArcSet, r0: f64) -> Result<HardyFunction> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidInput(format!(
            "annulus inner radius must satisfy 0 < r0 < 1, got {r0}"
        )));
    }
    let band = tol::DEFAULT_N_THETA / 2;
    let h = two_level_completion(b0, 1.0, 0.5, band);
    let g = LaurentSeries::disk(exp_series(&h, band))?;

    // Max modulus of g on the inner circle, sampled densely.
    let probe = g.trace_circle(r0, (4 * band).next_power_of_two())?;
    let m_inner = probe.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let n_shift = least_power_below_half(r0, m_inner)?;

    let series = g.shift_index(n_shift as i64)?;
    let series = LaurentSeries {
        inner_radius: r0,
        ..series
    };

    // Cached traces: outer with the exact two-level modulus, inner from
    // the (smooth, spectrally convergent) series; the sample count leaves
    // room for the shifted band.
    let n_trace = (2 * (band + n_shift as usize + 1))
        .next_power_of_two()
        .max(tol::DEFAULT_N_THETA);
    let phase = completion_phase(&h, n_trace)?;
    let outer_samples: Vec<Complex64> = (0..n_trace)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_trace as f64;
            let level = if b0.contains(theta) { 1.0 } else { 0.5 };
            Complex64::from_polar(level, phase[j] + n_shift as f64 * theta)
        })
        .collect();
    let outer = CircleGrid::new(1.0, outer_samples)?;
    let inner = series.trace_circle(r0, n_trace)?;
    Ok(HardyFunction {
        series,
        cached_trace: Some(BoundaryTrace::Annulus(AnnulusTrace::new(outer, inner)?)),
    })
}

/// Norm of the point-evaluation functional on the disk H^2:
/// (1 - |z|^2)^{-1/2}.
pub fn szego_eval_bound(z: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::Domain(format!(
            "evaluation bound needs |z| < 1, got |z| = {}",
            r2.sqrt()
        )));
    }
    Ok((1.0 - r2).powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent evaluation: plain power sums, no Horner.
    fn eval_oracle(f: &LaurentSeries, z: Complex64) -> Complex64 {
        f.iter_indexed()
            .map(|(n, a)| a * z.powi(n as i32))
            .sum()
    }

    #[test]
    fn eval_matches_simple_closed_forms() {
        let sq = LaurentSeries::monomial(0.0, 2, c(1.0, 0.0)).unwrap();
        assert!((sq.eval(c(0.5, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
        let inv = LaurentSeries::monomial(0.25, -1, c(1.0, 0.0)).unwrap();
        assert!((inv.eval(c(0.5, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_rejects_points_outside_open_domain() {
        let f = LaurentSeries::monomial(0.25, -1, c(1.0, 0.0)).unwrap();
        assert!(f.eval(c(0.25, 0.0)).is_err());
        assert!(f.eval(c(1.0, 0.0)).is_err());
        assert!(f.eval(c(0.1, 0.0)).is_err());
        let d = LaurentSeries::monomial(0.0, 3, c(1.0, 0.0)).unwrap();
        assert!(d.eval(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn eval_matches_power_sum_oracle() {
        let f = LaurentSeries::annulus(
            0.3,
            -3,
            vec![
                c(0.2, -0.1),
                c(0.0, 0.0),
                c(-1.0, 0.4),
                c(0.5, 0.5),
                c(1.0, 0.0),
                c(0.0, -0.7),
                c(0.25, 0.0),
            ],
        )
        .unwrap();
        for &(r, th) in &[(0.5, 0.3), (0.9, 2.0), (0.35, 4.4), (0.72, 5.9)] {
            let z = Complex64::from_polar(r, th);
            let got = f.eval(z).unwrap();
            let want = eval_oracle(&f, z);
            assert!(
                (got - want).norm() < 1e-13,
                "mismatch at {z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn projection_zeroes_negative_modes() {
        // e^{-it} + 1 + e^{it} -> 1 + e^{it}
        let g = CircleGrid::from_fn(1.0, 32, |t| {
            Complex64::from_polar(1.0, -t) + c(1.0, 0.0) + Complex64::from_polar(1.0, t)
        })
        .unwrap();
        let p = hardy_project_disk(&analyze(&g));
        assert!((p.coeff(-1)).norm() < 1e-14);
        assert!((p.coeff(0) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((p.coeff(1) - c(1.0, 0.0)).norm() < 1e-14);
        // Idempotence and Parseval contraction.
        let pp = hardy_project_disk(&p);
        for (n, v) in pp.iter_indexed() {
            assert!((v - p.coeff(n)).norm() < 1e-15);
        }
        assert!(p.energy() <= analyze(&g).energy() + 1e-15);
    }

    #[test]
    fn split_separates_signed_indices() {
        let f = LaurentSeries::annulus(0.5, -1, vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap(); // 1/z + z
        let (g, h) = annulus_split(&f).unwrap();
        assert!(g.is_disk());
        assert_eq!(g.coeff(1), c(1.0, 0.0));
        assert_eq!(g.coeff(0), c(0.0, 0.0));
        assert_eq!(h.coeff(-1), c(1.0, 0.0));
        assert!(h.max_index() < 0);
        // Recombination.
        for n in -3..=3 {
            assert_eq!(g.coeff(n) + h.coeff(n), f.coeff(n), "index {n}");
        }
    }

    proptest! {
        #[test]
        fn split_recombines_exactly(
            res in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7),
            min_index in -5i64..0,
        ) {
            let coeffs: Vec<Complex64> = res.iter().map(|&(a, b)| c(a, b)).collect();
            let f = LaurentSeries::annulus(0.4, min_index, coeffs).unwrap();
            let (g, h) = annulus_split(&f).unwrap();
            for n in (min_index - 2)..(f.max_index() + 3) {
                prop_assert_eq!(g.coeff(n) + h.coeff(n), f.coeff(n));
            }
            // Disjoint supports.
            prop_assert!(h.max_index() < 0);
            prop_assert!(g.min_index() >= 0);
        }
    }

    #[test]
    fn membership_accepts_laurent_monomials() {
        // The coefficient-ladder oracle: exact traces of z^k must pass at
        // every inner radius, every k in [-20, 20].
        for &r0 in &[0.3, 0.5, 0.7] {
            for k in -20i64..=20 {
                let f = LaurentSeries::monomial(r0, k, c(1.0, 0.0)).unwrap();
                let t = AnnulusTrace::new(
                    f.trace_circle(1.0, 256).unwrap(),
                    f.trace_circle(r0, 256).unwrap(),
                )
                .unwrap();
                let (ok, defect) = annulus_membership(&t, tol::MEMBERSHIP_DEFECT);
                assert!(
                    ok,
                    "z^{k} at r0 = {r0} rejected with defect {defect:.3e}"
                );
            }
        }
    }

    #[test]
    fn membership_accepts_mixed_series() {
        let f = LaurentSeries::annulus(0.5, -1, vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap(); // z + 1/z
        let t = AnnulusTrace::new(
            f.trace_circle(1.0, 128).unwrap(),
            f.trace_circle(0.5, 128).unwrap(),
        )
        .unwrap();
        let (ok, defect) = annulus_membership(&t, tol::MEMBERSHIP_DEFECT);
        assert!(ok, "z + 1/z rejected with defect {defect:.3e}");
    }

    #[test]
    fn membership_rejects_zeroed_inner_trace() {
        // Outer trace of z, inner trace 0: the ladder fails at n = 1 with
        // mismatch exactly r0.
        let r0 = 0.5;
        let outer = CircleGrid::from_fn(1.0, 64, |t| Complex64::from_polar(1.0, t)).unwrap();
        let inner = CircleGrid::from_fn(r0, 64, |_| c(0.0, 0.0)).unwrap();
        let t = AnnulusTrace::new(outer, inner).unwrap();
        let (ok, defect) = annulus_membership(&t, tol::MEMBERSHIP_DEFECT);
        assert!(!ok);
        assert!(
            (defect - r0).abs() < 1e-12,
            "constructed violation should have defect r0 = {r0}, got {defect}"
        );
    }

    #[test]
    fn boundary_norms_match_closed_forms() {
        // Constant on T.
        let g = CircleGrid::from_fn(1.0, 64, |_| c(-3.0, 4.0)).unwrap();
        let n = boundary_norm(&BoundaryTrace::Disk(g), 2.0).unwrap();
        assert!((n - 5.0).abs() < 1e-12);
        // 1 + z on T at p = 2: Parseval gives sqrt(2).
        let g = CircleGrid::from_fn(1.0, 64, |t| c(1.0, 0.0) + Complex64::from_polar(1.0, t))
            .unwrap();
        let n = boundary_norm(&BoundaryTrace::Disk(g), 2.0).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-12);
        // z on the annulus, r0 = 0.5, p = 2: (1 + 0.25)^{1/2}.
        let f = LaurentSeries::monomial(0.5, 1, c(1.0, 0.0)).unwrap();
        let t = AnnulusTrace::new(
            f.trace_circle(1.0, 64).unwrap(),
            f.trace_circle(0.5, 64).unwrap(),
        )
        .unwrap();
        let n = boundary_norm(&BoundaryTrace::Annulus(t), 2.0).unwrap();
        assert!((n - 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn boundary_norm_rejects_bad_exponents() {
        let g = CircleGrid::from_fn(1.0, 32, |_| c(1.0, 0.0)).unwrap();
        assert!(boundary_norm(&BoundaryTrace::Disk(g.clone()), 1.0).is_err());
        assert!(boundary_norm(&BoundaryTrace::Disk(g), f64::INFINITY).is_err());
    }

    #[test]
    fn outer_disk_constant_data() {
        let zero = CircleGrid::from_fn(1.0, 64, |_| c(0.0, 0.0)).unwrap();
        let f = outer_disk(&zero).unwrap();
        assert!((f.series.coeff(0) - c(1.0, 0.0)).norm() < 1e-14);
        for n in 1..32 {
            assert!(f.series.coeff(n).norm() < 1e-14);
        }
        let one = CircleGrid::from_fn(1.0, 64, |_| c(1.0, 0.0)).unwrap();
        let f = outer_disk(&one).unwrap();
        assert!((f.series.coeff(0) - c(std::f64::consts::E, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn outer_disk_smooth_modulus_is_reproduced_and_zero_free() {
        let data = CircleGrid::from_fn(1.0, 256, |t| c(0.3 * t.cos() - 0.2 * (2.0 * t).sin(), 0.0))
            .unwrap();
        let f = outer_disk(&data).unwrap();
        // Series trace modulus matches the prescription.
        let trace = f.series.trace_circle(1.0, 256).unwrap();
        for (j, v) in trace.samples.iter().enumerate() {
            let want = data.samples[j].re.exp();
            assert!(
                (v.norm() - want).abs() / want < 1e-8,
                "modulus mismatch at sample {j}: {} vs {want}",
                v.norm()
            );
        }
        // Zero-free on a test grid.
        for &r in &[0.1, 0.5, 0.9] {
            for j in 0..64 {
                let z = Complex64::from_polar(r, j as f64 * 0.1);
                assert!(f.eval(z).unwrap().norm() > 0.0);
            }
        }
    }

    /// Closed-form analytic completion of an arc indicator, by branch-safe
    /// incremental logarithms along the arc.
    fn arc_completion_oracle(arcs: &ArcSet, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b) in &arcs.arcs {
            // integral_a^b (e^{i p} + z)/(e^{i p} - z) dp
            //   = -(b - a) + (2/i) [continuous log of (e^{i p} - z)]_a^b.
            let segments = 512;
            let mut log_sum = Complex64::new(0.0, 0.0);
            let mut prev = Complex64::from_polar(1.0, a) - z;
            for s in 1..=segments {
                let phi = a + (b - a) * s as f64 / segments as f64;
                let cur = Complex64::from_polar(1.0, phi) - z;
                log_sum += (cur / prev).ln();
                prev = cur;
            }
            acc += Complex64::new(-(b - a), 0.0)
                + 2.0 * log_sum / Complex64::new(0.0, 1.0);
        }
        acc / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn outer_disk_two_level_matches_arc_oracle() {
        // |g| = 1 on an arc of measure 1/4, 1/2 elsewhere.
        let arcs = ArcSet::new(vec![(0.0, std::f64::consts::PI / 2.0)]).unwrap();

        // Sampled route: the arc is grid-aligned, so the coefficient mean
        // (hence |F(0)|) is exact; interior accuracy is limited to
        // O(1/n_samples) by aliasing of the slowly decaying step spectrum.
        let data = CircleGrid::from_fn(1.0, 1024, |t| {
            if arcs.contains(t) {
                c(0.0, 0.0)
            } else {
                c(0.5f64.ln(), 0.0)
            }
        })
        .unwrap();
        let f_sampled = outer_disk(&data).unwrap();
        let want0 = (0.75 * 0.5f64.ln()).exp();
        assert!(
            (f_sampled.series.coeff(0).norm() - want0).abs() < 1e-12,
            "|F(0)| = {} vs {want0}",
            f_sampled.series.coeff(0).norm()
        );

        // Exact-coefficient route vs. the closed-form completion
        // F = exp(ln(1/2) (1 - h_B)).
        let f = outer_disk_two_level(&arcs, 1.0, 0.5, 256).unwrap();
        assert!((f.series.coeff(0).norm() - want0).abs() < 1e-12);
        for &(r, th) in &[(0.3, 1.0), (0.6, 2.5), (0.8, 4.0), (0.5, 0.2)] {
            let z = Complex64::from_polar(r, th);
            let h_b = arc_completion_oracle(&arcs, z);
            let want = (0.5f64.ln() * (Complex64::new(1.0, 0.0) - h_b)).exp();
            let got = f.eval(z).unwrap();
            assert!(
                (got - want).norm() < 1e-6,
                "outer mismatch at {z}: {got} vs {want}"
            );
            let got_sampled = f_sampled.eval(z).unwrap();
            assert!(
                (got_sampled - want).norm() < 2e-3,
                "sampled outer mismatch at {z}: {got_sampled} vs {want}"
            );
        }
    }

    #[test]
    fn arc_set_exact_coefficients_match_quadrature() {
        let arcs = ArcSet::new(vec![(0.3, 1.1), (2.0, 2.9)]).unwrap();
        assert!((arcs.measure() - (0.8 + 0.9) / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let n = 1 << 16;
        for m in [0i64, 1, 2, 5, 11] {
            // Riemann-sum oracle at high resolution (first-order accurate;
            // the closed form is exact).
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                if arcs.contains(t) {
                    sum += Complex64::from_polar(1.0, -(m as f64) * t);
                }
            }
            let oracle = sum / n as f64;
            let exact = arcs.indicator_coeff(m);
            assert!(
                (exact - oracle).norm() < 1e-3,
                "indicator coefficient {m}: {exact} vs {oracle}"
            );
        }
    }

    #[test]
    fn arc_set_validates_intervals() {
        assert!(ArcSet::new(vec![]).is_err());
        assert!(ArcSet::new(vec![(1.0, 0.5)]).is_err());
        assert!(ArcSet::new(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(ArcSet::new(vec![(-0.1, 1.0)]).is_err());
    }

    #[test]
    fn least_power_scan_matches_direct_arithmetic() {
        // r0 = 0.5, M = 4: 0.5^3 * 4 = 0.5 (not < 1/2), 0.5^4 * 4 = 0.25.
        assert_eq!(least_power_below_half(0.5, 4.0).unwrap(), 4);
        assert_eq!(least_power_below_half(0.5, 0.4).unwrap(), 0);
        assert_eq!(least_power_below_half(0.9, 1.0).unwrap(), 7); // 0.9^7 = 0.478
        assert!(least_power_below_half(1.0, 2.0).is_err());
    }

    #[test]
    fn two_level_outer_satisfies_modulus_levels() {
        let arcs = ArcSet::new(vec![(0.5, 2.0)]).unwrap();
        let r0 = 0.5;
        let f = annulus_two_level_outer(&arcs, r0).unwrap();
        let Some(BoundaryTrace::Annulus(trace)) = &f.cached_trace else {
            panic!("two-level outer must cache an annulus trace");
        };
        // Outer circle: exactly the two levels.
        let n = trace.outer.n_samples();
        for (j, v) in trace.outer.samples.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let want = if arcs.contains(theta) { 1.0 } else { 0.5 };
            assert!(
                (v.norm() - want).abs() < 1e-6,
                "outer modulus at sample {j}: {} vs {want}",
                v.norm()
            );
        }
        // Inner circle: below 1/2 with the designed margin.
        for v in &trace.inner.samples {
            assert!(v.norm() <= 0.5 + 1e-6, "inner modulus {} above 1/2", v.norm());
        }
        // The shift makes it an annulus series.
        assert!(f.series.inner_radius() == r0);
        assert!(f.series.min_index() >= 0);
    }

    #[test]
    fn smooth_outer_restricted_to_annulus_passes_membership() {
        let data = CircleGrid::from_fn(1.0, 256, |t| c(0.2 * t.cos(), 0.0)).unwrap();
        let f = outer_disk(&data).unwrap();
        let series = f.series;
        let t = AnnulusTrace::new(
            series.trace_circle(1.0, 256).unwrap(),
            series.trace_circle(0.6, 256).unwrap(),
        )
        .unwrap();
        let (ok, defect) = annulus_membership(&t, tol::MEMBERSHIP_DEFECT);
        assert!(ok, "outer function restriction rejected, defect {defect:.3e}");
    }

    #[test]
    fn szego_bound_closed_form() {
        assert!((szego_eval_bound(c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        let want = (1.0f64 - 0.81).powf(-0.5);
        assert!((szego_eval_bound(c(0.9, 0.0)).unwrap() - want).abs() < 1e-12);
        assert!(szego_eval_bound(c(1.0, 0.0)).is_err());
        // Monotone in |z|.
        let mut prev = 0.0;
        for j in 0..9 {
            let b = szego_eval_bound(c(0.1 * j as f64, 0.0)).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn trace_circle_is_exact_for_monomials() {
        let f = LaurentSeries::monomial(0.5, -3, c(0.0, 2.0)).unwrap();
        let g = f.trace_circle(0.5, 64).unwrap();
        for (k, v) in g.samples.iter().enumerate() {
            let z = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / 64.0);
            let want = c(0.0, 2.0) * z.powi(-3);
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_index_multiplies_by_monomial() {
        let f = LaurentSeries::annulus(0.5, -1, vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let shifted = f.shift_index(3).unwrap();
        assert_eq!(shifted.coeff(2), c(1.0, 0.0));
        assert_eq!(shifted.coeff(3), c(2.0, 0.0));
        let d = LaurentSeries::disk(vec![c(1.0, 0.0)]).unwrap();
        assert!(d.shift_index(-1).is_err());
    }
}
