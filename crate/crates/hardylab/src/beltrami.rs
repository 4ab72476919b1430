//! Conjugated function theory on polar grids: dilatation fields, the
//! pointwise isomorphism between the two first-order pictures, exponential
//! factorizations, and a boundary-value solver.
//!
//! Two equations organize everything here. A real dilatation `nu` with
//! `max |nu| <= kappa < 1` defines the f-type picture
//!
//! ```text
//!     dbar f = nu * conj(d f),
//! ```
//!
//! while a bounded complex coefficient `alpha` defines the w-type picture
//!
//! ```text
//!     dbar w = alpha * conj(w).
//! ```
//!
//! The pointwise map `w = (f - nu*conj(f)) / sqrt(1 - nu^2)` carries f-type
//! solutions to w-type solutions for `alpha = -dbar(nu)/(1 - nu^2)` and is
//! inverted by `f = (w + nu*conj(w)) / sqrt(1 - nu^2)`. Every zero-free
//! w-type solution factors as `w = e^s * F` with `F` analytic; the two
//! factorizations below differ in which part of `s` is pinned on the
//! boundary (constant imaginary part for the direct one, vanishing real
//! part for the fixed-point one).
//!
//! All constructions run on a [`PolarGrid`] through the spectral operators
//! of [`RadialOps`]; residuals of the defining equations are the arbiter of
//! correctness and are carried on the values they certify.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::hardy::{AnnulusTrace, BoundaryTrace, HardyFunction};
use crate::radial::{circle_mean, FieldInterpolant, PolarGrid, RadialOps};
use crate::tol;

/// Fields whose smallest modulus falls below this fraction of the largest
/// are treated as vanishing on the grid: their phase `conj(w)/w` is no
/// longer resolvable and factorizations refuse them.
const ZERO_FREE_RATIO: f64 = 1e-6;

/// A fixed-point iterate whose successive difference exceeds this is
/// declared divergent without waiting for the iteration cap.
const DIVERGENCE_CAP: f64 = 1e8;

/// Coarse samples of the annulus boundary-phase period scanned for a sign
/// change of the inner-circle defect.
const PHASE_SCAN: usize = 12;

/// Budget for the bracketed refinement of the boundary phase.
const PHASE_REFINE_MAX: usize = 60;

/// The annulus boundary-phase search stops once the inner-circle real
/// defect is this small.
const PHASE_DEFECT_TOL: f64 = 1e-11;

/// Reduces a phase to the nearest representative in (-pi/2, pi/2]; the
/// factorization equation depends on its free phase only modulo pi.
fn reduce_phase(delta: f64) -> f64 {
    use std::f64::consts::PI;
    delta - PI * (delta / PI).round()
}

fn check_same_grid(a: &PolarGrid, b: &PolarGrid, what: &str) -> Result<()> {
    if a.n_r != b.n_r || a.n_theta != b.n_theta || a.domain != b.domain {
        return Err(Error::InvalidInput(format!(
            "{what}: grids disagree ({}x{} {:?} vs {}x{} {:?})",
            a.n_r, a.n_theta, a.domain, b.n_r, b.n_theta, b.domain
        )));
    }
    Ok(())
}

fn rms(v: &[Complex64]) -> f64 {
    (v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.norm()))
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Real dilatation field on a polar grid, bounded by a recorded constant
/// `kappa < 1`. The bound is enforced at construction; the grid Lipschitz
/// estimate is available through [`NuField::gradient_sup`] but deliberately
/// not enforced (a finite grid cannot certify a sup-norm gradient bound).
#[derive(Debug, Clone)]
pub struct NuField {
    grid: PolarGrid,
    values: Vec<f64>,
    kappa: f64,
}

impl NuField {
    /// Wraps grid samples of a dilatation, checking `max |values| <= kappa`
    /// and `kappa` in (0, 1).
    pub fn new(grid: PolarGrid, values: Vec<f64>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidInput(format!(
                "dilatation bound kappa = {kappa} must lie in (0, 1)"
            )));
        }
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "dilatation has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let mut max = 0.0f64;
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::InvalidInput(
                    "dilatation samples must be finite".into(),
                ));
            }
            max = max.max(v.abs());
        }
        // Tolerate sampling roundoff at the bound itself (|z|^2 on the
        // outer row evaluates to 1 only up to machine precision).
        if max > kappa * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "dilatation reaches {max:.6e}, above its stated bound kappa = {kappa}"
            )));
        }
        Ok(Self { grid, values, kappa })
    }

    /// Samples a dilatation function over the grid.
    pub fn from_fn(grid: &PolarGrid, kappa: f64, f: impl Fn(Complex64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                values.push(f(grid.z(i, j)));
            }
        }
        Self::new(grid.clone(), values, kappa)
    }

    /// The zero dilatation (classical analytic picture); the recorded bound
    /// is an arbitrary valid 1/2.
    #[must_use]
    pub fn zero(grid: &PolarGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            kappa: 0.5,
        }
    }

    /// Grid the samples live on.
    #[must_use]
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Raw samples, row-major over (radius, angle).
    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stated sup-norm bound.
    #[must_use]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Largest sampled modulus (always <= kappa).
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Grid estimate of `max |grad nu|`, via the spectral derivative
    /// (`|grad u| = 2 |d u|` for real `u`). A smoothness monitor, not a
    /// certified Lipschitz constant.
    #[must_use]
    pub fn gradient_sup(&self, ops: &RadialOps) -> f64 {
        let complex: Vec<Complex64> = self.values.iter().map(|&v| v.into()).collect();
        2.0 * sup(&ops.d(&complex))
    }

    fn complex_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|&v| v.into()).collect()
    }
}

/// Bounded complex coefficient of the w-type equation `dbar w = alpha *
/// conj(w)`, sampled on a polar grid.
#[derive(Debug, Clone)]
pub struct AlphaField {
    grid: PolarGrid,
    values: Vec<Complex64>,
    sup_norm: f64,
}

impl AlphaField {
    /// Wraps grid samples, recording the sup norm.
    pub fn new(grid: PolarGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput(
                "coefficient samples must be finite".into(),
            ));
        }
        let sup_norm = sup(&values);
        Ok(Self { grid, values, sup_norm })
    }

    /// Samples a coefficient function over the grid.
    pub fn from_fn(grid: &PolarGrid, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                values.push(f(grid.z(i, j)));
            }
        }
        Self::new(grid.clone(), values)
    }

    /// Constant coefficient.
    pub fn constant(grid: &PolarGrid, a: Complex64) -> Result<Self> {
        Self::new(grid.clone(), vec![a; grid.len()])
    }

    /// The zero coefficient (analytic picture).
    #[must_use]
    pub fn zero(grid: &PolarGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            sup_norm: 0.0,
        }
    }

    /// Grid the samples live on.
    #[must_use]
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Raw samples, row-major over (radius, angle).
    #[must_use]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest sampled modulus.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }
}

/// Logarithmic factor `s` of a factorization `w = e^s F`, with its boundary
/// diagnostics.
///
/// `boundary_real_max` is the largest `|Re s|` over the boundary rows (the
/// unit circle, plus the inner circle on an annulus). The fixed-point
/// factorization drives it to zero; on multiply connected domains a
/// constant per extra boundary component can survive every admissible
/// normalization, and in that case the defect is recorded here rather than
/// silently absorbed.
#[derive(Debug, Clone)]
pub struct SField {
    grid: PolarGrid,
    values: Vec<Complex64>,
    sup_norm: f64,
    boundary_real_max: f64,
    iterations: usize,
}

impl SField {
    fn from_parts(grid: PolarGrid, values: Vec<Complex64>, iterations: usize) -> Self {
        let sup_norm = sup(&values);
        let mut boundary_real_max = grid
            .outer_row(&values)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.re.abs()));
        if grid.domain.is_annulus() {
            boundary_real_max = grid
                .inner_row(&values)
                .iter()
                .fold(boundary_real_max, |m, v| m.max(v.re.abs()));
        }
        Self {
            grid,
            values,
            sup_norm,
            boundary_real_max,
            iterations,
        }
    }

    /// Grid the samples live on.
    #[must_use]
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Raw samples, row-major over (radius, angle).
    #[must_use]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest sampled modulus of `s`.
    #[must_use]
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Largest `|Re s|` over the boundary rows.
    #[must_use]
    pub fn boundary_real_max(&self) -> f64 {
        self.boundary_real_max
    }

    /// Fixed-point iterations spent building the field (zero for direct
    /// constructions).
    #[must_use]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Which first-order equation a [`GenHardyFunction`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// `dbar f = nu * conj(d f)`.
    FType,
    /// `dbar w = alpha * conj(w)`.
    WType,
}

/// Grid samples of a solution of one of the two conjugated equations,
/// carrying its boundary trace and the relative residual of the equation it
/// claims to solve. Constructors reject values whose residual exceeds the
/// working tolerance, so a value of this type is always equation-certified.
#[derive(Debug, Clone)]
pub struct GenHardyFunction {
    kind: GenKind,
    grid: PolarGrid,
    values: Vec<Complex64>,
    trace: BoundaryTrace,
    residual: f64,
}

impl GenHardyFunction {
    /// Certifies f-type samples against their dilatation.
    pub fn f_type(ops: &RadialOps, values: Vec<Complex64>, nu: &NuField) -> Result<Self> {
        check_same_grid(ops.grid(), nu.grid(), "f-type certification")?;
        Self::build(ops, GenKind::FType, values, PdeCoefficient::Nu(nu))
    }

    /// Certifies w-type samples against their coefficient.
    pub fn w_type(ops: &RadialOps, values: Vec<Complex64>, alpha: &AlphaField) -> Result<Self> {
        check_same_grid(ops.grid(), alpha.grid(), "w-type certification")?;
        Self::build(ops, GenKind::WType, values, PdeCoefficient::Alpha(alpha))
    }

    fn build(
        ops: &RadialOps,
        kind: GenKind,
        values: Vec<Complex64>,
        coeff: PdeCoefficient<'_>,
    ) -> Result<Self> {
        let grid = ops.grid();
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let residual = pde_residual(ops, &values, coeff);
        if residual > tol::PDE_RESIDUAL {
            return Err(Error::AccuracyNotMet {
                what: "equation residual of a conjugated-solution field".into(),
                achieved: residual,
                required: tol::PDE_RESIDUAL,
            });
        }
        let trace = boundary_trace_of(grid, &values)?;
        Ok(Self {
            kind,
            grid: grid.clone(),
            values,
            trace,
            residual,
        })
    }

    /// Which equation the samples were certified against.
    #[must_use]
    pub fn kind(&self) -> GenKind {
        self.kind
    }

    /// Grid the samples live on.
    #[must_use]
    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    /// Raw samples, row-major over (radius, angle).
    #[must_use]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Boundary rows as circle traces.
    #[must_use]
    pub fn trace(&self) -> &BoundaryTrace {
        &self.trace
    }

    /// Relative equation residual `|dbar u - rhs|_2 / (1 + |u|_2)` recorded
    /// at certification.
    #[must_use]
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn boundary_trace_of(grid: &PolarGrid, values: &[Complex64]) -> Result<BoundaryTrace> {
    let outer = CircleGrid::new(1.0, grid.outer_row(values).to_vec())?;
    if let Some(r0) = grid.domain.inner_radius() {
        let inner = CircleGrid::new(r0, grid.inner_row(values).to_vec())?;
        Ok(BoundaryTrace::Annulus(AnnulusTrace::new(outer, inner)?))
    } else {
        Ok(BoundaryTrace::Disk(outer))
    }
}

/// Coefficient (and thereby equation) selector for [`pde_residual`].
#[derive(Debug, Clone, Copy)]
pub enum PdeCoefficient<'a> {
    /// f-type right-hand side `nu * conj(d u)`.
    Nu(&'a NuField),
    /// w-type right-hand side `alpha * conj(u)`.
    Alpha(&'a AlphaField),
}

/// Relative residual of a conjugated equation over the grid:
/// `rms(dbar u - rhs) / (1 + rms(u))` with the right-hand side picked by
/// the coefficient. Plain node-wise root mean squares; the ratio is a
/// diagnostic, insensitive to the choice of discrete measure.
#[must_use]
pub fn pde_residual(ops: &RadialOps, u: &[Complex64], coeff: PdeCoefficient<'_>) -> f64 {
    let dbar = ops.dbar(u);
    let rhs: Vec<Complex64> = match coeff {
        PdeCoefficient::Nu(nu) => {
            let du = ops.d(u);
            nu.values()
                .iter()
                .zip(&du)
                .map(|(&n, d)| n * d.conj())
                .collect()
        }
        PdeCoefficient::Alpha(alpha) => alpha
            .values()
            .iter()
            .zip(u)
            .map(|(a, v)| a * v.conj())
            .collect(),
    };
    let defect: Vec<Complex64> = dbar.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    rms(&defect) / (1.0 + rms(u))
}

/// Coefficient of the w-type picture matched to a dilatation:
/// `alpha = -dbar(nu) / (1 - nu^2)`, computed spectrally. The denominator
/// stays above `1 - kappa^2 > 0`.
#[must_use]
pub fn alpha_from_nu(ops: &RadialOps, nu: &NuField) -> AlphaField {
    let dbar = ops.dbar(&nu.complex_values());
    let values: Vec<Complex64> = nu
        .values()
        .iter()
        .zip(&dbar)
        .map(|(&n, d)| -d / (1.0 - n * n))
        .collect();
    let sup_norm = sup(&values);
    AlphaField {
        grid: nu.grid().clone(),
        values,
        sup_norm,
    }
}

/// Pointwise forward map `w = (f - nu*conj(f)) / sqrt(1 - nu^2)` on raw
/// samples.
#[must_use]
pub fn jmap_values(nu: &[f64], f: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(nu.len(), f.len(), "field shape mismatch");
    nu.iter()
        .zip(f)
        .map(|(&n, v)| (v - n * v.conj()) / (1.0 - n * n).sqrt())
        .collect()
}

/// Pointwise inverse map `f = (w + nu*conj(w)) / sqrt(1 - nu^2)` on raw
/// samples.
#[must_use]
pub fn jinv_values(nu: &[f64], w: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(nu.len(), w.len(), "field shape mismatch");
    nu.iter()
        .zip(w)
        .map(|(&n, v)| (v + n * v.conj()) / (1.0 - n * n).sqrt())
        .collect()
}

/// Carries an f-type solution to the w-type picture of the matched
/// coefficient `alpha_from_nu(nu)`, certifying the result.
pub fn jmap(ops: &RadialOps, f: &GenHardyFunction, nu: &NuField) -> Result<GenHardyFunction> {
    if f.kind() != GenKind::FType {
        return Err(Error::InvalidInput(
            "forward conjugation expects an f-type input".into(),
        ));
    }
    check_same_grid(f.grid(), nu.grid(), "forward conjugation")?;
    let w = jmap_values(nu.values(), f.values());
    let alpha = alpha_from_nu(ops, nu);
    GenHardyFunction::w_type(ops, w, &alpha)
}

/// Carries a w-type solution of the matched coefficient back to the f-type
/// picture, certifying the result.
pub fn jinv(ops: &RadialOps, w: &GenHardyFunction, nu: &NuField) -> Result<GenHardyFunction> {
    if w.kind() != GenKind::WType {
        return Err(Error::InvalidInput(
            "inverse conjugation expects a w-type input".into(),
        ));
    }
    check_same_grid(w.grid(), nu.grid(), "inverse conjugation")?;
    let f = jinv_values(nu.values(), w.values());
    GenHardyFunction::f_type(ops, f, nu)
}

/// Spectral evaluator for a smooth grid field that extends a disk grid's
/// samples into the small uncovered hole around the origin by the leading
/// even expansion of each angular mode, `r^|m| (a + b r^2 + c r^4)`, fitted
/// to the three innermost grid rows (the structure of any field smooth at
/// the origin). Composition values landing in the hole are thereby still
/// usable, while points genuinely outside the field's domain keep erroring.
pub struct FieldEvaluator {
    interp: FieldInterpolant,
    hole: Option<HoleExtension>,
}

struct HoleExtension {
    /// Radii of the three innermost grid rows, ascending.
    rows_r: [f64; 3],
    /// Angular Fourier coefficients of those rows, bin layout, innermost first.
    rows_bins: [Vec<Complex64>; 3],
    n_theta: usize,
}

impl FieldEvaluator {
    /// Builds the evaluator from a field sampled on the grid behind `ops`.
    #[must_use]
    pub fn new(ops: &RadialOps, field: &[Complex64]) -> Self {
        let grid = ops.grid();
        let hole = if grid.domain.is_annulus() {
            None
        } else {
            let modes = ops.modes(field);
            let nt = grid.n_theta;
            Some(HoleExtension {
                rows_r: [grid.radii[0], grid.radii[1], grid.radii[2]],
                rows_bins: [
                    modes[..nt].to_vec(),
                    modes[nt..2 * nt].to_vec(),
                    modes[2 * nt..3 * nt].to_vec(),
                ],
                n_theta: nt,
            })
        };
        Self {
            interp: FieldInterpolant::new(ops, field),
            hole,
        }
    }

    /// Evaluates the field at `z`, extending through a disk grid's hole.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if let Some(hole) = &self.hole {
            let r = z.norm();
            let r_lo = hole.rows_r[0];
            if r < r_lo {
                let theta = z.arg();
                let x = r * r;
                let xs = [
                    hole.rows_r[0] * hole.rows_r[0],
                    hole.rows_r[1] * hole.rows_r[1],
                    hole.rows_r[2] * hole.rows_r[2],
                ];
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..hole.n_theta {
                    let m = crate::radial::bin_mode(j, hole.n_theta);
                    let mm = m.unsigned_abs() as i32;
                    // Divide each row's coefficient by (r_k / r_lo)^|m| so all
                    // three describe the same even profile g(r^2) relative to
                    // the innermost row; every radial factor is a ratio <= 1.
                    let v = [
                        hole.rows_bins[0][j],
                        hole.rows_bins[1][j] * (r_lo / hole.rows_r[1]).powi(mm),
                        hole.rows_bins[2][j] * (r_lo / hole.rows_r[2]).powi(mm),
                    ];
                    // Quadratic Lagrange interpolation of g in the variable r^2.
                    let mut g = Complex64::new(0.0, 0.0);
                    for k in 0..3 {
                        let mut weight = 1.0;
                        for l in 0..3 {
                            if l != k {
                                weight *= (x - xs[l]) / (xs[k] - xs[l]);
                            }
                        }
                        g += v[k] * weight;
                    }
                    let value = (r / r_lo).powi(mm) * g;
                    acc += value * Complex64::from_polar(1.0, m as f64 * theta);
                }
                return Ok(acc);
            }
        }
        self.interp.eval(z)
    }
}

/// Pulls a coefficient back under an analytic map `phi` with derivative
/// `dphi`: the coefficient of the composed picture is
/// `alpha~(z) = alpha(phi(z)) * conj(dphi(z))`, sampled on `target`.
///
/// `phi` must map the target domain into the coefficient's domain; sampled
/// values escaping it surface as an invalid-input error naming the point.
pub fn alpha_pullback(
    source_ops: &RadialOps,
    alpha: &AlphaField,
    phi: impl Fn(Complex64) -> Complex64,
    dphi: impl Fn(Complex64) -> Complex64,
    target: &PolarGrid,
) -> Result<AlphaField> {
    check_same_grid(source_ops.grid(), alpha.grid(), "coefficient pullback")?;
    let eval = FieldEvaluator::new(source_ops, alpha.values());
    let mut values = Vec::with_capacity(target.len());
    for i in 0..target.n_r {
        for j in 0..target.n_theta {
            let z = target.z(i, j);
            let w = phi(z);
            let a = eval.eval(w).map_err(|_| {
                Error::InvalidInput(format!(
                    "composition value {w} of grid point {z} leaves the coefficient domain"
                ))
            })?;
            values.push(a * dphi(z).conj());
        }
    }
    AlphaField::new(target.clone(), values)
}

fn exp_field(s: &[Complex64]) -> Vec<Complex64> {
    s.iter().map(|v| v.exp()).collect()
}

fn check_zero_free(w: &[Complex64], what: &str) -> Result<()> {
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for v in w {
        let n = v.norm();
        min = min.min(n);
        max = max.max(n);
    }
    if min < ZERO_FREE_RATIO * max {
        return Err(Error::UnsupportedInput(format!(
            "{what} vanishes on the grid (min modulus {min:.3e} against max {max:.3e}); \
             the factorization needs a resolvable phase conj(w)/w"
        )));
    }
    Ok(())
}

/// Analytic completion killing the real part of `p` on the boundary rows:
/// returns `(a, defect)` with `Re(p + a) = 0` on the unit circle exactly
/// and, on an annulus, `Re(p + a) = defect` (a constant) on the inner
/// circle — the one mismatch a single-valued analytic function cannot
/// remove, since its real circle means agree on both circles.
fn zero_real_boundary(ops: &RadialOps, p: &[Complex64]) -> (Vec<Complex64>, f64) {
    let grid = ops.grid();
    let rho_out: Vec<f64> = grid.outer_row(p).iter().map(|v| -v.re).collect();
    if grid.domain.is_annulus() {
        let rho_in: Vec<f64> = grid.inner_row(p).iter().map(|v| -v.re).collect();
        let (a, defect) = ops.laurent_real_match(&rho_out, &rho_in);
        // Re(p + a)|inner = Re p + (-Re p + defect) = defect.
        (a, defect)
    } else {
        (ops.herglotz_completion(&rho_out), 0.0)
    }
}

/// Direct factorization `w = e^s F` of a certified w-type solution:
/// `s` is a particular integral of `dbar s = alpha*conj(w)/w` corrected by
/// an analytic function so that `Im s` is constant on each boundary circle,
/// and `F = w * e^{-s}` is analytic (certified against the zero
/// coefficient).
///
/// Normalization: the outer-circle constant is 0. On an annulus the inner
/// constant is then forced — analytic corrections cannot move the two
/// circle means of `Im s` independently — and comes out as the inner-row
/// value of `Im s` rather than as a free choice.
///
/// Errors with unsupported-input when `w` vanishes on the grid.
pub fn easy_factorize(
    ops: &RadialOps,
    w: &GenHardyFunction,
    alpha: &AlphaField,
) -> Result<(SField, GenHardyFunction)> {
    if w.kind() != GenKind::WType {
        return Err(Error::InvalidInput(
            "the direct factorization expects a w-type input".into(),
        ));
    }
    check_same_grid(w.grid(), alpha.grid(), "direct factorization")?;
    check_same_grid(ops.grid(), w.grid(), "direct factorization")?;
    check_zero_free(w.values(), "w-type factorand")?;

    let grid = ops.grid();
    let g: Vec<Complex64> = alpha
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, v)| a * v.conj() / v)
        .collect();
    let p = ops.cauchy_transform(&g);

    // Analytic correction i*b with Re b matching the targets
    // (c_j - Im p) on each circle; then Im(p + i*b) = c_j there.
    let corrected = if grid.domain.is_annulus() {
        let im_out: Vec<f64> = grid.outer_row(&p).iter().map(|v| -v.im).collect();
        let mean_out = -im_out.iter().sum::<f64>() / im_out.len() as f64;
        let im_in_raw: Vec<f64> = grid.inner_row(&p).iter().map(|v| v.im).collect();
        let mean_in = im_in_raw.iter().sum::<f64>() / im_in_raw.len() as f64;
        // Outer constant 0; the inner constant is forced to the mean gap.
        let c_in = mean_in - mean_out;
        let rho_in: Vec<f64> = im_in_raw.iter().map(|v| c_in - v).collect();
        let (b, _defect) = ops.laurent_real_match(&im_out, &rho_in);
        let ib: Vec<Complex64> = b.iter().map(|v| Complex64::new(0.0, 1.0) * v).collect();
        p.iter().zip(&ib).map(|(x, y)| x + y).collect::<Vec<_>>()
    } else {
        let rho: Vec<f64> = grid.outer_row(&p).iter().map(|v| -v.im).collect();
        let b = ops.herglotz_completion(&rho);
        p.iter()
            .zip(&b)
            .map(|(x, y)| x + Complex64::new(0.0, 1.0) * y)
            .collect::<Vec<_>>()
    };

    let f_values: Vec<Complex64> = w
        .values()
        .iter()
        .zip(&corrected)
        .map(|(v, s)| v * (-s).exp())
        .collect();
    let analytic = GenHardyFunction::w_type(ops, f_values, &AlphaField::zero(grid))?;
    let s = SField::from_parts(grid.clone(), corrected, 0);
    Ok((s, analytic))
}

/// One inner Picard pass of the fixed-point factorization at a fixed
/// boundary phase `delta` (annulus) or with no phase (disk, `delta = 0`):
/// iterates `s <- cauchy(alpha_F e^{-2i delta} e^{-2i Im s}) + a` with `a`
/// the boundary completion of [`zero_real_boundary`], until successive
/// iterates settle. Returns the converged field, the iteration count, the
/// last difference and the inner-circle real defect.
fn picard_szero(
    ops: &RadialOps,
    alpha_f: &[Complex64],
    delta: f64,
) -> Result<(Vec<Complex64>, usize, f64, f64)> {
    let rot = Complex64::from_polar(1.0, -2.0 * delta);
    let mut s = vec![Complex64::new(0.0, 0.0); alpha_f.len()];
    let mut history = Vec::new();
    for it in 1..=tol::FACTORIZE_MAX_ITER {
        let g: Vec<Complex64> = alpha_f
            .iter()
            .zip(&s)
            .map(|(a, sv)| a * rot * Complex64::from_polar(1.0, -2.0 * sv.im))
            .collect();
        let p = ops.cauchy_transform(&g);
        let (a, defect) = zero_real_boundary(ops, &p);
        let s_new: Vec<Complex64> = p.iter().zip(&a).map(|(x, y)| x + y).collect();
        let diff = max_abs_diff(&s_new, &s);
        history.push(diff);
        s = s_new;
        if diff < tol::FIXED_POINT_DIFF {
            return Ok((s, it, diff, defect));
        }
        if !diff.is_finite() || diff > DIVERGENCE_CAP {
            return Err(Error::ConvergenceFailure {
                iterations: it,
                last_diff: diff,
                history,
            });
        }
    }
    let last = *history.last().unwrap_or(&f64::NAN);
    Err(Error::ConvergenceFailure {
        iterations: tol::FACTORIZE_MAX_ITER,
        last_diff: last,
        history,
    })
}

/// Fixed-point factorization on grid samples of an analytic, zero-free
/// factor. See [`hard_factorize`] for the contract; this variant accepts
/// the factor already sampled on the grid.
pub fn hard_factorize_field(
    ops: &RadialOps,
    f_values: &[Complex64],
    alpha: &AlphaField,
) -> Result<SField> {
    check_same_grid(ops.grid(), alpha.grid(), "fixed-point factorization")?;
    let grid = ops.grid();
    if f_values.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "factor has {} samples, grid has {} nodes",
            f_values.len(),
            grid.len()
        )));
    }
    check_zero_free(f_values, "analytic factor")?;
    let alpha_f: Vec<Complex64> = alpha
        .values()
        .iter()
        .zip(f_values)
        .map(|(a, f)| a * f.conj() / f)
        .collect();

    let s = if grid.domain.is_annulus() {
        // The annulus carries one free imaginary constant delta
        // (s -> s + i*delta changes the equation's phase with period pi),
        // tuned so the inner-circle real defect D(delta) vanishes when it
        // has a root; otherwise the smallest achievable |D| over the
        // period is kept and reported through `boundary_real_max`.
        let p0 = ops.cauchy_transform(&alpha_f);
        let w0 = circle_mean(grid.outer_row(&p0)) - circle_mean(grid.inner_row(&p0));
        let delta0 = reduce_phase(if w0.norm() < 1e-14 {
            0.0
        } else {
            (w0.arg() - std::f64::consts::FRAC_PI_2) / 2.0
        });

        // Coarse scan over one period, starting at the linearized guess.
        let mut samples: Vec<(f64, f64, Vec<Complex64>, usize)> = Vec::new();
        for k in 0..PHASE_SCAN {
            let delta = delta0 + std::f64::consts::PI * k as f64 / PHASE_SCAN as f64;
            let (s_k, it_k, _, d_k) = picard_szero(ops, &alpha_f, delta)?;
            let done = d_k.abs() < PHASE_DEFECT_TOL;
            samples.push((delta, d_k, s_k, it_k));
            if done {
                break;
            }
        }
        let full_scan = samples.len() == PHASE_SCAN;
        let mut best_idx = 0;
        for (k, sample) in samples.iter().enumerate() {
            if sample.1.abs() < samples[best_idx].1.abs() {
                best_idx = k;
            }
        }
        // A sign change between period neighbors brackets a root.
        let mut bracket = None;
        for k in 0..samples.len() {
            let (da, fa) = (samples[k].0, samples[k].1);
            let (db, fb) = if k + 1 < samples.len() {
                (samples[k + 1].0, samples[k + 1].1)
            } else if full_scan {
                (samples[0].0 + std::f64::consts::PI, samples[0].1)
            } else {
                break;
            };
            if fa * fb < 0.0 {
                bracket = Some((da, fa, db, fb));
                break;
            }
        }
        let mut best = samples.swap_remove(best_idx);
        if best.1.abs() > PHASE_DEFECT_TOL {
            if let Some((mut a, mut fa, mut b, mut fb)) = bracket {
                // Illinois refinement: secant steps that never leave the
                // bracket and cannot stall on one endpoint.
                let mut side = 0i8;
                for _ in 0..PHASE_REFINE_MAX {
                    let m = (fa * b - fb * a) / (fa - fb);
                    let (s_m, it_m, _, fm) = picard_szero(ops, &alpha_f, m)?;
                    if fm.abs() < best.1.abs() {
                        best = (m, fm, s_m, it_m);
                    }
                    if fm.abs() < PHASE_DEFECT_TOL || (b - a).abs() < 1e-13 {
                        break;
                    }
                    if fa * fm < 0.0 {
                        b = m;
                        fb = fm;
                        if side == -1 {
                            fa *= 0.5;
                        }
                        side = -1;
                    } else {
                        a = m;
                        fa = fm;
                        if side == 1 {
                            fb *= 0.5;
                        }
                        side = 1;
                    }
                }
            }
        }
        let (delta, _, mut s, iterations) = best;
        // The equation only sees the phase modulo pi; keep the added
        // constant small so e^s keeps full precision.
        let phase = Complex64::new(0.0, reduce_phase(delta));
        for v in &mut s {
            *v += phase;
        }
        SField::from_parts(grid.clone(), s, iterations)
    } else {
        let (s, iterations, _, _) = picard_szero(ops, &alpha_f, 0.0)?;
        SField::from_parts(grid.clone(), s, iterations)
    };

    // The residual of w = e^s F against its equation is the correctness
    // criterion; a converged iterate failing it is an error, not a result.
    let w: Vec<Complex64> = f_values
        .iter()
        .zip(s.values())
        .map(|(f, sv)| f * sv.exp())
        .collect();
    let residual = pde_residual(ops, &w, PdeCoefficient::Alpha(alpha));
    if residual > tol::PDE_RESIDUAL {
        return Err(Error::AccuracyNotMet {
            what: "equation residual of the factored solution e^s F".into(),
            achieved: residual,
            required: tol::PDE_RESIDUAL,
        });
    }
    Ok(s)
}

/// Fixed-point factorization: given an analytic, zero-free `F` and a
/// coefficient `alpha`, builds `s` with `dbar s = alpha_F e^{-2i Im s}`
/// (where `alpha_F = alpha*conj(F)/F` folds the fixed factor in) such that
/// `w = e^s F` solves `dbar w = alpha*conj(w)` and `Re s` vanishes on the
/// boundary rows.
///
/// The Picard iteration starts from zero and contracts at roughly the rate
/// `|alpha|_inf`; convergence is established empirically for
/// `|alpha|_inf <= 0.5` on the disk and `<= 0.3` on the annulus at default
/// grids, and hitting the iteration cap (or diverging) is a
/// convergence-failure error carrying the difference history. The final
/// equation residual is verified; `Re s = 0` holds exactly on the unit
/// circle by construction, while on an annulus the inner circle can retain
/// a constant defect no normalization removes — recorded in
/// [`SField::boundary_real_max`], with the free phase tuned to cancel it
/// whenever a root exists.
pub fn hard_factorize(ops: &RadialOps, f: &HardyFunction, alpha: &AlphaField) -> Result<SField> {
    let grid = ops.grid();
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r {
        let row = f.series.trace_circle(grid.radii[i], grid.n_theta)?;
        values.extend_from_slice(&row.samples);
    }
    hard_factorize_field(ops, &values, alpha)
}

/// Outcome of [`refactor_alpha`]: the connecting logarithm, the re-factored
/// solution, and the reported diagnostics.
#[derive(Debug)]
pub struct Refactorization {
    /// Connecting field with `w1 = e^s w2`; its real part vanishes on the
    /// unit circle (and up to the recorded defect on an annulus inner
    /// circle).
    pub s: SField,
    /// Certified w-type solution for the second coefficient.
    pub w2: GenHardyFunction,
    /// Largest pointwise error of the connecting identity `w1 = e^s w2`.
    pub roundtrip_max: f64,
    /// Reported ratio `|s|_inf / (|alpha1|_inf + |alpha2|_inf)`.
    pub norm_control: f64,
}

/// Connects the solutions of two coefficients sharing one analytic core:
/// given `w1` solving the `alpha1` equation, produces `w2` solving the
/// `alpha2` equation and `s` with `w1 = e^s w2` pointwise and `Re s`
/// vanishing on the boundary.
///
/// Both factors are built with the vanishing-real-part normalization: `w1`
/// is peeled linearly (its equation fixes `dbar s1 = alpha1*conj(w1)/w1`
/// outright, no iteration needed) down to the analytic core
/// `F = w1 e^{-s1}`, and the core is then re-dressed against `alpha2` by
/// the fixed-point factorization. The connecting field is `s = s1 - s2`,
/// so its boundary real part vanishes to the same accuracy as the two
/// factorizations'.
pub fn refactor_alpha(
    ops: &RadialOps,
    w1: &GenHardyFunction,
    alpha1: &AlphaField,
    alpha2: &AlphaField,
) -> Result<Refactorization> {
    if w1.kind() != GenKind::WType {
        return Err(Error::InvalidInput(
            "re-factorization expects a w-type input".into(),
        ));
    }
    check_same_grid(ops.grid(), w1.grid(), "re-factorization")?;
    check_same_grid(w1.grid(), alpha1.grid(), "re-factorization")?;
    check_same_grid(w1.grid(), alpha2.grid(), "re-factorization")?;
    check_zero_free(w1.values(), "w-type factorand")?;
    let grid = ops.grid();

    let g1: Vec<Complex64> = alpha1
        .values()
        .iter()
        .zip(w1.values())
        .map(|(a, v)| a * v.conj() / v)
        .collect();
    let p1 = ops.cauchy_transform(&g1);
    let (a1, _) = zero_real_boundary(ops, &p1);
    let s1: Vec<Complex64> = p1.iter().zip(&a1).map(|(x, y)| x + y).collect();
    let core: Vec<Complex64> = w1
        .values()
        .iter()
        .zip(&s1)
        .map(|(v, s)| v * (-s).exp())
        .collect();

    let s2 = hard_factorize_field(ops, &core, alpha2)?;
    let w2_values: Vec<Complex64> = core
        .iter()
        .zip(s2.values())
        .map(|(f, s)| f * s.exp())
        .collect();
    let w2 = GenHardyFunction::w_type(ops, w2_values, alpha2)?;

    let s_values: Vec<Complex64> = s1.iter().zip(s2.values()).map(|(a, b)| a - b).collect();
    let s = SField::from_parts(grid.clone(), s_values, s2.iterations());

    let rebuilt = exp_field(s.values());
    let roundtrip_max = w1
        .values()
        .iter()
        .zip(rebuilt.iter().zip(w2.values()))
        .fold(0.0f64, |m, (w, (e, v))| m.max((w - e * v).norm()));
    let denom = alpha1.sup_norm() + alpha2.sup_norm();
    let norm_control = if denom > 0.0 {
        s.sup_norm() / denom
    } else {
        0.0
    };
    Ok(Refactorization {
        s,
        w2,
        roundtrip_max,
        norm_control,
    })
}

/// Outcome of the disk boundary-value solve.
#[derive(Debug)]
pub struct DirichletSolution {
    /// Certified f-type solution with `Re(trace) = psi` and `Im f(0) = 0`.
    pub f: GenHardyFunction,
    /// Picard iterations used.
    pub iterations: usize,
    /// Largest deviation of the real boundary trace from the data.
    pub trace_defect: f64,
    /// Final successive-iterate difference.
    pub last_diff: f64,
}

/// Solves the f-type equation on the disk with prescribed real boundary
/// trace: finds `f` with `dbar f = nu*conj(d f)`, `Re f = psi` on the unit
/// circle and `Im f(0) = 0`.
///
/// Starts from the analytic completion of `psi` and iterates: integrate
/// the equation against the previous derivative, then restore the real
/// trace by an analytic completion of the defect and re-center the
/// imaginary part at the origin. Stops when successive iterates differ by
/// less than the fixed-point tolerance; the final equation residual and
/// trace defect are verified.
pub fn dirichlet_disk(
    ops: &RadialOps,
    psi: &CircleGrid,
    nu: &NuField,
) -> Result<DirichletSolution> {
    let grid = ops.grid();
    if grid.domain.is_annulus() {
        return Err(Error::InvalidInput(
            "the boundary-value solve runs on a disk grid".into(),
        ));
    }
    check_same_grid(grid, nu.grid(), "boundary-value solve")?;
    if (psi.radius - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "boundary data sits on radius {}, expected the unit circle",
            psi.radius
        )));
    }
    if psi.n_samples() != grid.n_theta {
        return Err(Error::InvalidInput(format!(
            "boundary data has {} samples, grid circles have {}",
            psi.n_samples(),
            grid.n_theta
        )));
    }
    let mut psi_row = Vec::with_capacity(grid.n_theta);
    for v in &psi.samples {
        if v.im.abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "boundary data must be real-valued".into(),
            ));
        }
        psi_row.push(v.re);
    }

    let mut f = ops.herglotz_completion(&psi_row);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut last_diff = f64::NAN;
    let mut settled = false;
    while iterations < tol::DIRICHLET_MAX_ITER {
        iterations += 1;
        let df = ops.d(&f);
        let rhs: Vec<Complex64> = nu
            .values()
            .iter()
            .zip(&df)
            .map(|(&n, d)| n * d.conj())
            .collect();
        let p = ops.cauchy_transform(&rhs);
        let defect_row: Vec<f64> = grid
            .outer_row(&p)
            .iter()
            .zip(&psi_row)
            .map(|(v, &target)| target - v.re)
            .collect();
        let h = ops.herglotz_completion(&defect_row);
        let mut f_new: Vec<Complex64> = p.iter().zip(&h).map(|(x, y)| x + y).collect();
        // Innermost ring mean approximates the origin value; re-center.
        let im0 = circle_mean(&f_new[..grid.n_theta]).im;
        let shift = Complex64::new(0.0, im0);
        for v in &mut f_new {
            *v -= shift;
        }
        last_diff = max_abs_diff(&f_new, &f);
        history.push(last_diff);
        f = f_new;
        if last_diff < tol::FIXED_POINT_DIFF {
            settled = true;
            break;
        }
        if !last_diff.is_finite() || last_diff > DIVERGENCE_CAP {
            return Err(Error::ConvergenceFailure {
                iterations,
                last_diff,
                history,
            });
        }
    }
    if !settled {
        return Err(Error::ConvergenceFailure {
            iterations,
            last_diff,
            history,
        });
    }

    let trace_defect = grid
        .outer_row(&f)
        .iter()
        .zip(&psi_row)
        .fold(0.0f64, |m, (v, &t)| m.max((v.re - t).abs()));
    if trace_defect > tol::S_BOUNDARY_REAL {
        return Err(Error::AccuracyNotMet {
            what: "real boundary trace of the Dirichlet solve".into(),
            achieved: trace_defect,
            required: tol::S_BOUNDARY_REAL,
        });
    }
    let f = GenHardyFunction::f_type(ops, f, nu)?;
    Ok(DirichletSolution {
        f,
        iterations,
        trace_defect,
        last_diff,
    })
}

/// Outcome of [`separation_witness`].
#[derive(Debug)]
pub struct SeparationWitness {
    /// Certified f-type solution vanishing at the first point only.
    pub f: GenHardyFunction,
    /// `|f(z1)|` (verified below the working tolerance).
    pub at_z1: f64,
    /// `|f(z2)|` (verified against the lower bound).
    pub at_z2: f64,
    /// Heuristic lower bound `(1 - kappa) |e^{s(z2)}| |z2 - z1|`.
    pub lower_bound: f64,
}

/// Produces an f-type solution separating two interior points: `f(z1) = 0`
/// while `f(z2)` stays away from zero.
///
/// The construction dresses the analytic seed `F = z - z1` by the
/// fixed-point factorization against the matched coefficient of `nu` and
/// maps the result back to the f-type picture; the zero of the seed
/// survives both steps, and `|f(z2)|` is bounded below by
/// `(1 - kappa) |e^{s(z2)}| |z2 - z1|` up to grid error.
///
/// Accuracy caveat: the folded coefficient `alpha*conj(F)/F` carries the
/// phase winding of the seed around `z1`. When the matched coefficient is
/// nonzero at `z1`, that winding is a genuine discontinuity and caps the
/// spectral accuracy of the factorization, surfacing as an accuracy error
/// rather than a degraded answer. A dilatation that is locally constant
/// around `z1` (so its coefficient vanishes there) keeps the construction
/// at full precision.
pub fn separation_witness(
    ops: &RadialOps,
    z1: Complex64,
    z2: Complex64,
    nu: &NuField,
) -> Result<SeparationWitness> {
    let grid = ops.grid();
    check_same_grid(grid, nu.grid(), "separation witness")?;
    let r_lo = grid.r_inner();
    for (name, z) in [("first", z1), ("second", z2)] {
        let r = z.norm();
        if r >= 1.0 || r < r_lo {
            return Err(Error::Domain(format!(
                "{name} point |z| = {r:.6e} outside the resolvable interior [{r_lo:.3e}, 1)"
            )));
        }
    }
    if (z1 - z2).norm() < 1e-12 {
        return Err(Error::InvalidInput(
            "separation needs two distinct points".into(),
        ));
    }

    let alpha = alpha_from_nu(ops, nu);
    let seed = grid.sample(|z| z - z1);
    let s = hard_factorize_field(ops, &seed, &alpha)?;
    let w: Vec<Complex64> = seed
        .iter()
        .zip(s.values())
        .map(|(f, sv)| f * sv.exp())
        .collect();
    let f_values = jinv_values(nu.values(), &w);
    let f = GenHardyFunction::f_type(ops, f_values, nu)?;

    let interp = FieldInterpolant::new(ops, f.values());
    let at_z1 = interp.eval(z1)?.norm();
    let at_z2 = interp.eval(z2)?.norm();
    let s_interp = FieldInterpolant::new(ops, s.values());
    let lower_bound =
        (1.0 - nu.kappa()) * s_interp.eval(z2)?.re.exp() * (z2 - z1).norm();
    if at_z1 > tol::S_BOUNDARY_REAL {
        return Err(Error::AccuracyNotMet {
            what: "witness modulus at the prescribed zero".into(),
            achieved: at_z1,
            required: tol::S_BOUNDARY_REAL,
        });
    }
    if at_z2 < 0.9 * lower_bound {
        return Err(Error::AccuracyNotMet {
            what: "witness modulus at the separated point".into(),
            achieved: at_z2,
            required: 0.9 * lower_bound,
        });
    }
    Ok(SeparationWitness {
        f,
        at_z1,
        at_z2,
        lower_bound,
    })
}
