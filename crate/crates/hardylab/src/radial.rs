//! Polar spectral grids and the differential/integral operators on them.
//!
//! Fields live on a tensor grid: Chebyshev–Gauss–Lobatto nodes in the
//! log-radius t = ln r (so radial resolution concentrates near both circles)
//! crossed with a uniform angular grid. All operators work mode-by-mode
//! after an FFT in the angle:
//!
//!   f(r e^{i th}) = sum_m f_m(t) e^{i m th},   t = ln r.
//!
//! In these variables the Wirtinger derivatives shift the mode index,
//!
//!   (d f)_m    = (1/2) ( f_{m+1}'(r) + ((m+1)/r) f_{m+1} ),
//!   (dbar f)_m = (1/2) ( f_{m-1}'(r) - ((m-1)/r) f_{m-1} ),
//!
//! with f' the radial derivative, so solving `dbar s = g` reduces to one
//! first-order ODE per mode, (d/dt - m) s_m = 2 r g_{m+1}(t), and the
//! Laplacian (Delta = 4 d dbar) to one second-order ODE per mode,
//! u_m'' - m^2 u_m = e^{2t} f_m. Each mode's collocation matrix is LU
//! factored once and cached, so iterative solvers pay the factorization
//! cost only on their first sweep.
//!
//! Disk grids cannot reach r = 0; they stop at an inner radius r_lo = 1/n_r
//! and encode regularity at the origin through the inner boundary row
//! (a Robin condition for the Poisson solve, a decay estimate for the
//! Cauchy transform). Annulus grids span [r0, 1] and carry genuine boundary
//! rows on both circles.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::tol;

/// Which domain the polar grid discretizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Unit disk; the grid stops at an inner radius 1/n_r and regularity at
    /// the origin is imposed through the inner boundary rows.
    Disk,
    /// Annulus r0 < |z| < 1 with 0 < r0 < 1.
    Annulus {
        /// Inner radius.
        r0: f64,
    },
}

impl Domain {
    /// True for the annulus variant.
    #[must_use]
    pub fn is_annulus(&self) -> bool {
        matches!(self, Domain::Annulus { .. })
    }

    /// Inner radius of the annulus, if any.
    #[must_use]
    pub fn inner_radius(&self) -> Option<f64> {
        match self {
            Domain::Disk => None,
            Domain::Annulus { r0 } => Some(*r0),
        }
    }
}

/// Tensor grid in (log-radius, angle). Rows index radius (increasing, the
/// first row is the innermost circle, the last row is the unit circle),
/// columns index angle; fields are stored row-major with `i * n_theta + j`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    /// Domain the grid discretizes.
    pub domain: Domain,
    /// Number of radial nodes.
    pub n_r: usize,
    /// Number of angular samples (power of two).
    pub n_theta: usize,
    /// Log-radius nodes t = ln r, increasing; t[0] = ln r_lo, t[n_r-1] = 0.
    pub t: Vec<f64>,
    /// Radii exp(t) with both endpoints pinned exactly.
    pub radii: Vec<f64>,
}

fn validate_angular(n_theta: usize) -> Result<()> {
    if n_theta < 8 || !n_theta.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "angular sample count must be a power of two >= 8, got {n_theta}"
        )));
    }
    Ok(())
}

fn validate_radial(n_r: usize) -> Result<()> {
    if n_r < 8 {
        return Err(Error::InvalidInput(format!(
            "radial node count must be >= 8, got {n_r}"
        )));
    }
    Ok(())
}

/// Chebyshev–Gauss–Lobatto nodes on [a, b], returned increasing with both
/// endpoints exact.
#[must_use]
pub fn cgl_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    assert!(n >= 2, "need at least two nodes");
    let nm1 = (n - 1) as f64;
    let mut t: Vec<f64> = (0..n)
        .map(|j| {
            let x = (std::f64::consts::PI * j as f64 / nm1).cos();
            a + (b - a) * (1.0 - x) / 2.0
        })
        .collect();
    t[0] = a;
    t[n - 1] = b;
    t
}

/// Dense differentiation matrix (row-major n x n) acting on values at the
/// nodes produced by [`cgl_nodes`]: (D v)_i approximates v'(t_i).
#[must_use]
pub fn cgl_diff_matrix(n: usize, a: f64, b: f64) -> Vec<f64> {
    assert!(n >= 2, "need at least two nodes");
    let nm1 = (n - 1) as f64;
    let x: Vec<f64> = (0..n)
        .map(|j| (std::f64::consts::PI * j as f64 / nm1).cos())
        .collect();
    let c: Vec<f64> = (0..n)
        .map(|j| {
            let base = if j == 0 || j == n - 1 { 2.0 } else { 1.0 };
            if j % 2 == 0 {
                base
            } else {
                -base
            }
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (c[i] / c[j]) / (x[i] - x[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        // The diagonal makes every row annihilate constants exactly.
        d[i * n + i] = -row_sum;
    }
    // Nodes t = a + (b-a)(1-x)/2, so d/dt = -2/(b-a) d/dx.
    let scale = -2.0 / (b - a);
    for v in &mut d {
        *v *= scale;
    }
    d
}

impl PolarGrid {
    /// Disk grid with inner radius 1/n_r.
    pub fn disk(n_r: usize, n_theta: usize) -> Result<Self> {
        validate_radial(n_r)?;
        validate_angular(n_theta)?;
        let r_lo = 1.0 / n_r as f64;
        Ok(Self::build(Domain::Disk, r_lo, n_r, n_theta))
    }

    /// Annulus grid on [r0, 1].
    pub fn annulus(r0: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        validate_radial(n_r)?;
        validate_angular(n_theta)?;
        if !(r0 > 0.0 && r0 < 1.0) || !r0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "annulus inner radius must satisfy 0 < r0 < 1, got {r0}"
            )));
        }
        Ok(Self::build(Domain::Annulus { r0 }, r0, n_r, n_theta))
    }

    /// Disk grid at the default laboratory resolution.
    pub fn disk_default() -> Result<Self> {
        Self::disk(tol::DEFAULT_N_R, tol::DEFAULT_N_THETA)
    }

    /// Annulus grid at the default laboratory resolution.
    pub fn annulus_default(r0: f64) -> Result<Self> {
        Self::annulus(r0, tol::DEFAULT_N_R, tol::DEFAULT_N_THETA)
    }

    fn build(domain: Domain, r_lo: f64, n_r: usize, n_theta: usize) -> Self {
        let t = cgl_nodes(n_r, r_lo.ln(), 0.0);
        let mut radii: Vec<f64> = t.iter().map(|&ti| ti.exp()).collect();
        radii[0] = r_lo;
        radii[n_r - 1] = 1.0;
        Self {
            domain,
            n_r,
            n_theta,
            t,
            radii,
        }
    }

    /// Innermost grid radius (r0 for annuli, 1/n_r for disks).
    #[must_use]
    pub fn r_inner(&self) -> f64 {
        self.radii[0]
    }

    /// Number of grid points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    /// True when the grid is empty (never, for a validated grid).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angle of column j.
    #[must_use]
    pub fn theta(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n_theta as f64
    }

    /// Grid point z = r_i e^{i th_j}.
    #[must_use]
    pub fn z(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.radii[i], self.theta(j))
    }

    /// Flat index of (radius row i, angle column j).
    #[must_use]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    /// Samples a pointwise function of z over the grid.
    pub fn sample(&self, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_r {
            for j in 0..self.n_theta {
                out.push(f(self.z(i, j)));
            }
        }
        out
    }

    /// View of the outermost row (the unit circle).
    #[must_use]
    pub fn outer_row<'a>(&self, field: &'a [Complex64]) -> &'a [Complex64] {
        assert_eq!(field.len(), self.len(), "field shape mismatch");
        &field[(self.n_r - 1) * self.n_theta..]
    }

    /// View of the innermost row.
    #[must_use]
    pub fn inner_row<'a>(&self, field: &'a [Complex64]) -> &'a [Complex64] {
        assert_eq!(field.len(), self.len(), "field shape mismatch");
        &field[..self.n_theta]
    }
}

/// Mean of a row of samples (the trapezoid rule on a periodic grid).
#[must_use]
pub fn circle_mean(row: &[Complex64]) -> Complex64 {
    let sum: Complex64 = row.iter().sum();
    sum / row.len() as f64
}

/// Signed Fourier mode carried by FFT bin j of an n-point transform.
#[must_use]
pub fn bin_mode(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT bin carrying signed mode m, if m is representable.
#[must_use]
pub fn bin_of_mode(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m >= 0 && m < half {
        Some(m as usize)
    } else if m >= -half && m < 0 {
        Some((m + n as i64) as usize)
    } else {
        None
    }
}

/// Spectral operator workspace over a [`PolarGrid`].
///
/// Owns the angular FFT plans, the radial differentiation matrix, and
/// lazily-built LU caches for the per-mode collocation systems, so repeated
/// transforms inside fixed-point iterations reuse all factorizations.
pub struct RadialOps {
    grid: PolarGrid,
    /// d/dt collocation matrix, row-major n_r x n_r.
    diff: Vec<f64>,
    /// (d/dt)^2, cached for the Poisson solves.
    diff2: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    cauchy_lu: RefCell<HashMap<i64, Arc<Lu>>>,
    poisson_lu: RefCell<HashMap<i64, Arc<Lu>>>,
}

impl std::fmt::Debug for RadialOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialOps")
            .field("grid", &self.grid)
            .field("cached_cauchy_modes", &self.cauchy_lu.borrow().len())
            .field("cached_poisson_modes", &self.poisson_lu.borrow().len())
            .finish()
    }
}

impl RadialOps {
    /// Builds the operator workspace for a grid.
    #[must_use]
    pub fn new(grid: PolarGrid) -> Self {
        let n = grid.n_r;
        let a = grid.t[0];
        let diff = cgl_diff_matrix(n, a, 0.0);
        let mut diff2 = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let dik = diff[i * n + k];
                if dik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    diff2[i * n + j] += dik * diff[k * n + j];
                }
            }
        }
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(grid.n_theta);
        let fft_inv = planner.plan_fft_inverse(grid.n_theta);
        Self {
            grid,
            diff,
            diff2,
            fft_fwd,
            fft_inv,
            cauchy_lu: RefCell::new(HashMap::new()),
            poisson_lu: RefCell::new(HashMap::new()),
        }
    }

    /// The underlying grid.
    #[must_use]
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Angular transform: row-wise FFT scaled by 1/n_theta, so bin j of row i
    /// holds the coefficient of e^{i m th} with m = [`bin_mode`] (j).
    #[must_use]
    pub fn modes(&self, field: &[Complex64]) -> Vec<Complex64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        assert_eq!(field.len(), n_r * n_th, "field shape mismatch");
        let mut out = field.to_vec();
        let scale = 1.0 / n_th as f64;
        for row in out.chunks_mut(n_th) {
            self.fft_fwd.process(row);
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        out
    }

    /// Inverse of [`Self::modes`].
    #[must_use]
    pub fn values(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        assert_eq!(modes.len(), n_r * n_th, "mode array shape mismatch");
        let mut out = modes.to_vec();
        for row in out.chunks_mut(n_th) {
            self.fft_inv.process(row);
        }
        out
    }

    /// Applies the radial d/dt matrix to every angular bin of a mode array.
    fn apply_dt(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        let mut out = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        for i in 0..n_r {
            let out_row = &mut out[i * n_th..(i + 1) * n_th];
            for k in 0..n_r {
                let dik = self.diff[i * n_r + k];
                if dik == 0.0 {
                    continue;
                }
                let src = &modes[k * n_th..(k + 1) * n_th];
                for (o, s) in out_row.iter_mut().zip(src) {
                    *o += dik * s;
                }
            }
        }
        out
    }

    /// Wirtinger derivative d/dz of a grid field.
    #[must_use]
    pub fn d(&self, field: &[Complex64]) -> Vec<Complex64> {
        self.wirtinger(field, 1)
    }

    /// Conjugate Wirtinger derivative d/dzbar of a grid field.
    #[must_use]
    pub fn dbar(&self, field: &[Complex64]) -> Vec<Complex64> {
        self.wirtinger(field, -1)
    }

    /// shift = +1 computes d, shift = -1 computes dbar: output mode k reads
    /// source mode k + shift with radial factor (k + shift)/r carrying the
    /// sign (+ for d, - for dbar).
    fn wirtinger(&self, field: &[Complex64], shift: i64) -> Vec<Complex64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        let fh = self.modes(field);
        // Radial derivative df_m/dr = (1/r) df_m/dt.
        let mut fr = self.apply_dt(&fh);
        for i in 0..n_r {
            let inv_r = 1.0 / self.grid.radii[i];
            for v in &mut fr[i * n_th..(i + 1) * n_th] {
                *v *= inv_r;
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        for j in 0..n_th {
            let k = bin_mode(j, n_th);
            let Some(src) = bin_of_mode(k + shift, n_th) else {
                continue;
            };
            let km = (k + shift) as f64;
            let sign = shift as f64;
            for i in 0..n_r {
                let fri = fr[i * n_th + src];
                let fhi = fh[i * n_th + src];
                out[i * n_th + j] = 0.5 * (fri + sign * km / self.grid.radii[i] * fhi);
            }
        }
        self.values(&out)
    }

    fn cauchy_system(&self, m: i64) -> Arc<Lu> {
        if let Some(lu) = self.cauchy_lu.borrow().get(&m) {
            return Arc::clone(lu);
        }
        let n = self.grid.n_r;
        let mut a = self.diff.clone();
        for i in 0..n {
            a[i * n + i] -= m as f64;
        }
        let set_identity_row = |a: &mut [f64], row: usize| {
            for j in 0..n {
                a[row * n + j] = 0.0;
            }
            a[row * n + row] = 1.0;
        };
        if m >= 0 {
            // Pin the particular solution on the unit circle: s_m(1) = 0.
            set_identity_row(&mut a, n - 1);
        } else {
            // Negative modes: pin on the innermost circle. On the annulus the
            // value is 0; on the disk the right-hand side carries the decay
            // estimate for the omitted hole.
            set_identity_row(&mut a, 0);
        }
        let lu = Arc::new(
            Lu::factor(&a, n).expect("first-order mode system with a boundary row is nonsingular"),
        );
        self.cauchy_lu.borrow_mut().insert(m, Arc::clone(&lu));
        lu
    }

    /// Particular solution of `dbar s = g` over the grid.
    ///
    /// Mode by mode this is (d/dt - m) s_m = 2 r g_{m+1}. Each nonnegative
    /// mode is pinned to zero on the unit circle, so the result carries no
    /// analytic content there (callers add their own analytic completions);
    /// negative modes are pinned on the innermost circle — exactly zero for
    /// an annulus, and a small-hole decay estimate s_m(r_lo) =
    /// g_{m+1}(r_lo) r_lo / |m| for a disk grid.
    #[must_use]
    pub fn cauchy_transform(&self, g: &[Complex64]) -> Vec<Complex64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        let gh = self.modes(g);
        let mut sh = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n_r];
        for j in 0..n_th {
            let m = bin_mode(j, n_th);
            let Some(src) = bin_of_mode(m + 1, n_th) else {
                continue;
            };
            for i in 0..n_r {
                rhs[i] = 2.0 * self.grid.radii[i] * gh[i * n_th + src];
            }
            if m >= 0 {
                rhs[n_r - 1] = Complex64::new(0.0, 0.0);
            } else if self.grid.domain.is_annulus() {
                rhs[0] = Complex64::new(0.0, 0.0);
            } else {
                rhs[0] = gh[src] * self.grid.r_inner() / (-m) as f64;
            }
            let lu = self.cauchy_system(m);
            let sol = lu.solve_complex(&rhs);
            for i in 0..n_r {
                sh[i * n_th + j] = sol[i];
            }
        }
        self.values(&sh)
    }

    fn poisson_system(&self, m_abs: i64) -> Arc<Lu> {
        if let Some(lu) = self.poisson_lu.borrow().get(&m_abs) {
            return Arc::clone(lu);
        }
        let n = self.grid.n_r;
        let mut a = self.diff2.clone();
        let m2 = (m_abs * m_abs) as f64;
        for i in 0..n {
            a[i * n + i] -= m2;
        }
        // Outer circle: homogeneous Dirichlet row.
        for j in 0..n {
            a[(n - 1) * n + j] = 0.0;
        }
        a[(n - 1) * n + (n - 1)] = 1.0;
        if self.grid.domain.is_annulus() {
            for j in 0..n {
                a[j] = 0.0;
            }
            a[0] = 1.0;
        } else {
            // Disk: regularity at the origin. The regular homogeneous
            // solution grows like e^{|m| t}, so impose the Robin row
            // u'(t_min) - |m| u(t_min) = hole correction (in the RHS).
            for j in 0..n {
                a[j] = self.diff[j];
            }
            a[0] -= m_abs as f64;
        }
        let lu = Arc::new(
            Lu::factor(&a, n).expect("mode Laplacian with boundary rows is nonsingular"),
        );
        self.poisson_lu.borrow_mut().insert(m_abs, Arc::clone(&lu));
        lu
    }

    /// Solves `Laplacian u = rhs` with zero Dirichlet boundary data.
    ///
    /// On the annulus u vanishes on both circles. On the disk u vanishes on
    /// the unit circle and is regular at the origin; the small hole
    /// r < r_lo contributes the correction
    /// u'(t_min) - |m| u(t_min) = r_lo^2 f_m(r_lo) / (2 (1 + |m|)),
    /// exact whenever the mode-m part of the right-hand side keeps its
    /// leading r^{|m|} behavior inside the hole.
    #[must_use]
    pub fn poisson_dirichlet0(&self, rhs: &[f64]) -> Vec<f64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        assert_eq!(rhs.len(), n_r * n_th, "field shape mismatch");
        let complex: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fh = self.modes(&complex);
        let mut uh = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        let mut b = vec![Complex64::new(0.0, 0.0); n_r];
        for j in 0..n_th {
            let m = bin_mode(j, n_th);
            let m_abs = m.unsigned_abs() as i64;
            for i in 0..n_r {
                let r2 = self.grid.radii[i] * self.grid.radii[i];
                b[i] = r2 * fh[i * n_th + j];
            }
            b[n_r - 1] = Complex64::new(0.0, 0.0);
            if self.grid.domain.is_annulus() {
                b[0] = Complex64::new(0.0, 0.0);
            } else {
                let r_lo = self.grid.r_inner();
                b[0] = fh[j] * (r_lo * r_lo / (2.0 * (1.0 + m_abs as f64)));
            }
            let lu = self.poisson_system(m_abs);
            let sol = lu.solve_complex(&b);
            for i in 0..n_r {
                uh[i * n_th + j] = sol[i];
            }
        }
        self.values(&uh).into_iter().map(|v| v.re).collect()
    }

    /// Analytic completion on the disk: the unique analytic A with
    /// Re A = rho on the unit circle and Im A(0) = 0.
    #[must_use]
    pub fn herglotz_completion(&self, rho: &[f64]) -> Vec<Complex64> {
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        assert_eq!(rho.len(), n_th, "boundary data shape mismatch");
        let coeffs = self.boundary_modes(rho);
        let mut ah = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        for j in 0..n_th {
            let m = bin_mode(j, n_th);
            if m == 0 {
                let c = Complex64::new(coeffs[j].re, 0.0);
                for i in 0..n_r {
                    ah[i * n_th + j] = c;
                }
            } else if m > 0 {
                // A = c_0 + 2 sum_{m>0} c_m z^m; the radial factor is r^m.
                let c = 2.0 * coeffs[j];
                for i in 0..n_r {
                    ah[i * n_th + j] = c * (m as f64 * self.grid.t[i]).exp();
                }
            }
        }
        self.values(&ah)
    }

    /// Analytic matching on the annulus: an analytic A whose real trace
    /// equals rho_out on the unit circle exactly and rho_in on the inner
    /// circle up to an additive constant.
    ///
    /// A single-valued analytic function has equal circle means of its real
    /// part on both boundary circles, so the mean mismatch cannot be
    /// matched; it is returned as the defect `D` with
    /// Re A|inner = rho_in + D,  D = mean(rho_out) - mean(rho_in).
    /// All nonzero modes are matched exactly on both circles.
    #[must_use]
    pub fn laurent_real_match(&self, rho_out: &[f64], rho_in: &[f64]) -> (Vec<Complex64>, f64) {
        assert!(
            self.grid.domain.is_annulus(),
            "two-circle matching needs an annulus grid"
        );
        let (n_r, n_th) = (self.grid.n_r, self.grid.n_theta);
        assert_eq!(rho_out.len(), n_th, "boundary data shape mismatch");
        assert_eq!(rho_in.len(), n_th, "boundary data shape mismatch");
        let co = self.boundary_modes(rho_out);
        let ci = self.boundary_modes(rho_in);
        let defect = co[0].re - ci[0].re;
        let r0 = self.grid.r_inner();
        let mut ah = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        // Constant term: match the outer mean exactly.
        for i in 0..n_r {
            ah[i * n_th] = Complex64::new(co[0].re, 0.0);
        }
        for m in 1..(n_th as i64) / 2 {
            let jp = bin_of_mode(m, n_th).expect("positive mode in band");
            let jn = bin_of_mode(-m, n_th).expect("negative mode in band");
            // Solve a_m + conj(a_-m) = 2 co_m,
            //       a_m r0^m + conj(a_-m) r0^{-m} = 2 ci_m
            // in the overflow-safe ratio form: only r0^m and (r0/r)^m appear.
            let rm = r0.powi(m as i32);
            let scaled = 2.0 * (ci[jp as usize] - co[jp as usize] * rm) / (1.0 - rm * rm);
            let acm = scaled * rm; // conj(a_-m)
            let am = 2.0 * co[jp as usize] - acm;
            for i in 0..n_r {
                let t = self.grid.t[i];
                // a_m r^m
                ah[i * n_th + jp] = am * (m as f64 * t).exp();
                // a_-m r^{-m} = conj(scaled) (r0/r)^m, all factors <= 1.
                ah[i * n_th + jn] = scaled.conj() * ((r0.ln() - t) * m as f64).exp();
            }
        }
        (self.values(&ah), defect)
    }

    /// Fourier coefficients of a real circle of samples (bin layout).
    fn boundary_modes(&self, row: &[f64]) -> Vec<Complex64> {
        let n_th = self.grid.n_theta;
        let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_fwd.process(&mut buf);
        let scale = 1.0 / n_th as f64;
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }
}

/// Spectral interpolant of a grid field: Fourier in the angle, Chebyshev in
/// the log-radius, evaluated with Clenshaw recurrences. Lets diagnostics
/// evaluate a field at arbitrary points of the domain to spectral accuracy.
pub struct FieldInterpolant {
    n_r: usize,
    n_theta: usize,
    t_min: f64,
    r_min: f64,
    /// Chebyshev coefficients: row k (degree), column j (angular bin).
    cheb: Vec<Complex64>,
}

impl FieldInterpolant {
    /// Builds the interpolant of `field` over the grid of `ops`.
    #[must_use]
    pub fn new(ops: &RadialOps, field: &[Complex64]) -> Self {
        let grid = ops.grid();
        let (n_r, n_th) = (grid.n_r, grid.n_theta);
        let fh = ops.modes(field);
        // Chebyshev analysis per angular bin. Grid row i sits at
        // x_i = cos(pi i / (n_r-1)), so rows are already in CGL order.
        let nm1 = (n_r - 1) as f64;
        let mut cheb = vec![Complex64::new(0.0, 0.0); n_r * n_th];
        for k in 0..n_r {
            let gamma_k = if k == 0 || k == n_r - 1 { 2.0 } else { 1.0 };
            for i in 0..n_r {
                let w = if i == 0 || i == n_r - 1 { 0.5 } else { 1.0 };
                let c = w * (std::f64::consts::PI * (i * k) as f64 / nm1).cos();
                if c == 0.0 {
                    continue;
                }
                let factor = c * 2.0 / (nm1 * gamma_k);
                let src = &fh[i * n_th..(i + 1) * n_th];
                let dst = &mut cheb[k * n_th..(k + 1) * n_th];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += factor * s;
                }
            }
        }
        Self {
            n_r,
            n_theta: n_th,
            t_min: grid.t[0],
            r_min: grid.r_inner(),
            cheb,
        }
    }

    /// Evaluates the interpolant at z. Errors when |z| falls outside the
    /// radial span of the grid (beyond a tiny roundoff allowance).
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r > 1.0 + 1e-9 || r < self.r_min * (1.0 - 1e-9) {
            return Err(Error::Domain(format!(
                "evaluation point |z| = {r:.6e} outside grid radii [{:.6e}, 1]",
                self.r_min
            )));
        }
        let theta = z.arg();
        let t = r.min(1.0).max(self.r_min).ln();
        let x = (1.0 - 2.0 * (t - self.t_min) / (0.0 - self.t_min)).clamp(-1.0, 1.0);

        // Clenshaw in x for every angular bin, then the Fourier sum.
        let n_th = self.n_theta;
        let mut b1 = vec![Complex64::new(0.0, 0.0); n_th];
        let mut b2 = vec![Complex64::new(0.0, 0.0); n_th];
        for k in (1..self.n_r).rev() {
            let row = &self.cheb[k * n_th..(k + 1) * n_th];
            for j in 0..n_th {
                let next = row[j] + 2.0 * x * b1[j] - b2[j];
                b2[j] = b1[j];
                b1[j] = next;
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n_th {
            let radial = self.cheb[j] + x * b1[j] - b2[j];
            let m = bin_mode(j, n_th) as f64;
            acc += radial * Complex64::from_polar(1.0, m * theta);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(values: &[Complex64]) -> f64 {
        values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn cgl_nodes_pin_endpoints_and_increase() {
        let t = cgl_nodes(33, -1.7, 0.0);
        assert_eq!(t[0], -1.7);
        assert_eq!(t[32], 0.0);
        for w in t.windows(2) {
            assert!(w[1] > w[0], "nodes must increase");
        }
    }

    #[test]
    fn diff_matrix_differentiates_smooth_function() {
        let n = 33;
        let (a, b) = (-1.2, 0.0);
        let t = cgl_nodes(n, a, b);
        let d = cgl_diff_matrix(n, a, b);
        let f: Vec<f64> = t.iter().map(|&x| (2.0 * x).exp()).collect();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += d[i * n + j] * f[j];
            }
            let exact = 2.0 * (2.0 * t[i]).exp();
            assert!(
                (acc - exact).abs() < 1e-10,
                "derivative of exp(2t) at node {i}: {acc} vs {exact}"
            );
        }
    }

    #[test]
    fn modes_values_round_trip() {
        let grid = PolarGrid::annulus(0.4, 17, 32).unwrap();
        let ops = RadialOps::new(grid);
        let f = ops.grid().sample(|z| z * z + 0.3 * z.conj() + 1.5);
        let back = ops.values(&ops.modes(&f));
        assert!(max_diff(&f, &back) < 1e-13);
    }

    #[test]
    fn wirtinger_derivatives_on_monomial_product() {
        // f = z^2 conj(z): d f = 2 z conj(z), dbar f = z^2.
        let grid = PolarGrid::disk(49, 64).unwrap();
        let ops = RadialOps::new(grid);
        let f = ops.grid().sample(|z| z * z * z.conj());
        let d_exact = ops.grid().sample(|z| 2.0 * z * z.conj());
        let dbar_exact = ops.grid().sample(|z| z * z);
        assert!(
            max_diff(&ops.d(&f), &d_exact) < 1e-10,
            "d error {}",
            max_diff(&ops.d(&f), &d_exact)
        );
        assert!(
            max_diff(&ops.dbar(&f), &dbar_exact) < 1e-10,
            "dbar error {}",
            max_diff(&ops.dbar(&f), &dbar_exact)
        );
    }

    #[test]
    fn cauchy_transform_inverts_dbar_on_disk() {
        let grid = PolarGrid::disk(49, 64).unwrap();
        let ops = RadialOps::new(grid);
        let g = ops
            .grid()
            .sample(|z| 0.3 * z.conj() + 0.1 * z * z * z.conj());
        let s = ops.cauchy_transform(&g);
        let res = max_diff(&ops.dbar(&s), &g);
        assert!(res < 1e-10, "disk dbar residual {res:e}");
    }

    #[test]
    fn cauchy_transform_inverts_dbar_on_annulus() {
        let grid = PolarGrid::annulus(0.5, 41, 64).unwrap();
        let ops = RadialOps::new(grid);
        let g = ops
            .grid()
            .sample(|z| 0.25 * z.conj() + 0.1 * z.conj() / z);
        let s = ops.cauchy_transform(&g);
        let res = max_diff(&ops.dbar(&s), &g);
        assert!(res < 1e-10, "annulus dbar residual {res:e}");
    }

    #[test]
    fn poisson_reproduces_radial_quadratic_on_disk() {
        // Laplacian(|z|^2 - 1) = 4 with zero outer trace.
        let grid = PolarGrid::disk(49, 32).unwrap();
        let ops = RadialOps::new(grid);
        let rhs = vec![4.0; ops.grid().len()];
        let u = ops.poisson_dirichlet0(&rhs);
        let mut worst = 0.0f64;
        for i in 0..ops.grid().n_r {
            for j in 0..ops.grid().n_theta {
                let r = ops.grid().radii[i];
                let err = (u[ops.grid().idx(i, j)] - (r * r - 1.0)).abs();
                worst = worst.max(err);
            }
        }
        assert!(worst < 1e-11, "disk poisson error {worst:e}");
    }

    #[test]
    fn poisson_matches_closed_form_on_annulus() {
        // Laplacian u = 4, u(r0)=u(1)=0:
        // u = r^2 - 1 + (1 - r0^2) ln r / ln r0.
        let r0 = 0.3;
        let grid = PolarGrid::annulus(r0, 49, 32).unwrap();
        let ops = RadialOps::new(grid);
        let rhs = vec![4.0; ops.grid().len()];
        let u = ops.poisson_dirichlet0(&rhs);
        let mut worst = 0.0f64;
        for i in 0..ops.grid().n_r {
            let r = ops.grid().radii[i];
            let exact = r * r - 1.0 + (1.0 - r0 * r0) * r.ln() / r0.ln();
            for j in 0..ops.grid().n_theta {
                worst = worst.max((u[ops.grid().idx(i, j)] - exact).abs());
            }
        }
        assert!(worst < 1e-11, "annulus poisson error {worst:e}");
    }

    #[test]
    fn poisson_handles_nonradial_mode_on_disk() {
        // u = Re(z)(1 - |z|^2) has Laplacian -8 Re(z) and zero outer trace.
        let grid = PolarGrid::disk(49, 32).unwrap();
        let ops = RadialOps::new(grid);
        let rhs: Vec<f64> = {
            let mut v = Vec::with_capacity(ops.grid().len());
            for i in 0..ops.grid().n_r {
                for j in 0..ops.grid().n_theta {
                    v.push(-8.0 * ops.grid().z(i, j).re);
                }
            }
            v
        };
        let u = ops.poisson_dirichlet0(&rhs);
        let mut worst = 0.0f64;
        for i in 0..ops.grid().n_r {
            for j in 0..ops.grid().n_theta {
                let z = ops.grid().z(i, j);
                let exact = z.re * (1.0 - z.norm_sqr());
                worst = worst.max((u[ops.grid().idx(i, j)] - exact).abs());
            }
        }
        assert!(worst < 1e-9, "disk mode-one poisson error {worst:e}");
    }

    #[test]
    fn herglotz_completion_reproduces_z_from_cos_trace() {
        // Re z = cos(th) on the unit circle, Im at 0 vanishes -> A = z.
        let grid = PolarGrid::disk(33, 32).unwrap();
        let ops = RadialOps::new(grid);
        let rho: Vec<f64> = (0..32).map(|j| ops.grid().theta(j).cos()).collect();
        let a = ops.herglotz_completion(&rho);
        let exact = ops.grid().sample(|z| z);
        assert!(max_diff(&a, &exact) < 1e-12);
    }

    #[test]
    fn herglotz_completion_is_analytic() {
        let grid = PolarGrid::disk(33, 64).unwrap();
        let ops = RadialOps::new(grid);
        let rho: Vec<f64> = (0..64)
            .map(|j| {
                let th = ops.grid().theta(j);
                0.7 + th.cos() + 0.5 * (2.0 * th).sin() - 0.2 * (3.0 * th).cos()
            })
            .collect();
        let a = ops.herglotz_completion(&rho);
        // Boundary real trace matches.
        let outer = ops.grid().outer_row(&a);
        for (j, v) in outer.iter().enumerate() {
            assert!((v.re - rho[j]).abs() < 1e-12, "trace mismatch at column {j}");
        }
        // Analyticity.
        assert!(max_abs(&ops.dbar(&a)) < 1e-9);
    }

    #[test]
    fn laurent_real_match_hits_both_circles_up_to_mean_defect() {
        let grid = PolarGrid::annulus(0.5, 41, 64).unwrap();
        let ops = RadialOps::new(grid);
        let rho_out: Vec<f64> = (0..64)
            .map(|j| {
                let th = ops.grid().theta(j);
                th.cos() - 0.4 * (3.0 * th).sin()
            })
            .collect();
        let rho_in: Vec<f64> = (0..64)
            .map(|j| {
                let th = ops.grid().theta(j);
                0.7 + 0.3 * th.sin()
            })
            .collect();
        let (a, defect) = ops.laurent_real_match(&rho_out, &rho_in);
        assert!((defect - (0.0 - 0.7)).abs() < 1e-12, "defect {defect}");
        let outer = ops.grid().outer_row(&a);
        for (j, v) in outer.iter().enumerate() {
            assert!((v.re - rho_out[j]).abs() < 1e-11, "outer mismatch at {j}");
        }
        let inner = ops.grid().inner_row(&a);
        for (j, v) in inner.iter().enumerate() {
            assert!(
                (v.re - (rho_in[j] + defect)).abs() < 1e-11,
                "inner mismatch at {j}"
            );
        }
        assert!(max_abs(&ops.dbar(&a)) < 1e-9, "matched field not analytic");
    }

    #[test]
    fn laurent_real_match_stays_finite_at_high_modes() {
        // Thin inner radius and content at high angular modes: the ratio
        // form must not overflow where r0^{-m} would.
        let grid = PolarGrid::annulus(0.3, 33, 1024).unwrap();
        let ops = RadialOps::new(grid);
        let rho_out: Vec<f64> = (0..1024)
            .map(|j| (500.0 * ops.grid().theta(j)).cos())
            .collect();
        let rho_in = vec![0.0; 1024];
        let (a, _) = ops.laurent_real_match(&rho_out, &rho_in);
        assert!(a.iter().all(|v| v.is_finite()), "matched field overflowed");
        let outer = ops.grid().outer_row(&a);
        for (j, v) in outer.iter().enumerate() {
            assert!((v.re - rho_out[j]).abs() < 1e-9, "outer mismatch at {j}");
        }
    }

    #[test]
    fn interpolant_evaluates_off_grid_points() {
        let grid = PolarGrid::annulus(0.4, 33, 64).unwrap();
        let ops = RadialOps::new(grid);
        let f = ops.grid().sample(|z| z * z + 0.3 * z.conj() + 1.0 / z);
        let interp = FieldInterpolant::new(&ops, &f);
        for &(r, th) in &[(0.73, 1.234), (0.41, 4.0), (0.999, 0.1), (0.55, 2.9)] {
            let z = Complex64::from_polar(r, th);
            let exact = z * z + 0.3 * z.conj() + 1.0 / z;
            let got = interp.eval(z).unwrap();
            assert!(
                (got - exact).norm() < 1e-10,
                "interpolation error at r={r}, th={th}: {:e}",
                (got - exact).norm()
            );
        }
        // On-grid nodes reproduce exactly (up to roundoff).
        let z00 = ops.grid().z(5, 7);
        let exact = z00 * z00 + 0.3 * z00.conj() + 1.0 / z00;
        assert!((interp.eval(z00).unwrap() - exact).norm() < 1e-11);
    }

    #[test]
    fn interpolant_rejects_points_outside_radial_span() {
        let grid = PolarGrid::annulus(0.4, 17, 32).unwrap();
        let ops = RadialOps::new(grid);
        let f = ops.grid().sample(|z| z);
        let interp = FieldInterpolant::new(&ops, &f);
        assert!(interp.eval(Complex64::new(1.2, 0.0)).is_err());
        assert!(interp.eval(Complex64::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn grid_constructors_validate_inputs() {
        assert!(PolarGrid::disk(4, 32).is_err());
        assert!(PolarGrid::disk(33, 48).is_err());
        assert!(PolarGrid::annulus(0.0, 33, 32).is_err());
        assert!(PolarGrid::annulus(1.0, 33, 32).is_err());
        assert!(PolarGrid::annulus(-0.3, 33, 32).is_err());
    }

    #[test]
    fn cached_solves_are_deterministic() {
        let grid = PolarGrid::disk(33, 32).unwrap();
        let ops = RadialOps::new(grid);
        let g = ops.grid().sample(|z| z.conj() * 0.4);
        let s1 = ops.cauchy_transform(&g);
        let s2 = ops.cauchy_transform(&g);
        assert_eq!(s1, s2);
    }
}
