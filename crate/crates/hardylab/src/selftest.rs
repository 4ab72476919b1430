//! Certification battery for the library's numerical guarantees.
//!
//! Thirteen independent criteria re-derive the advertised behavior from
//! scratch: isometric composition on disk and annulus, norm bounds for
//! Moebius symbols, Laurent membership, boundary kernels, lift indices,
//! exponential factorization, the conjugation diagram, singular-value
//! decay, evaluation functionals, level-set mass, the dilatation solver,
//! and winding counts, each against a stated tolerance. [`run_all`]
//! executes them in order with wall-clock timing and never
//! short-circuits, so a full report always comes back; [`render`] turns
//! each [`CriterionResult`] into one `PASS`/`FAIL` line.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::beltrami::{
    dirichlet_disk, hard_factorize_field, jinv_values, jmap_values, pde_residual, refactor_alpha,
    AlphaField, FieldEvaluator, GenHardyFunction, NuField, PdeCoefficient, SField,
};
use crate::compose::{
    compact_proxy, compose_trace, eval_functional_norm, invertibility_check,
    isometry_check_annulus, level_mass_defect, matrix_truncate, norm_bound_disk, norm_estimate,
    random_disk_polynomial, random_moebius, seeded_rng, AnalyticSelfMap, ConjugationContext,
    NormContext,
};
use crate::grid::CircleGrid;
use crate::hardy::{annulus_membership, boundary_norm, BoundaryTrace, HardyFunction, LaurentSeries};
use crate::radial::{Domain, PolarGrid, RadialOps};
use crate::surface::{
    extension_kernel, index_of, lift_boundary_log_moduli, sarason_k, sarason_k_rewritten,
    strip_height,
};
use crate::tol;

/// Outcome of one criterion: its display name, the pass/fail flag, a
/// one-line detail carrying the measured extremes, and the wall-clock
/// seconds it took.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    /// Stable kebab-case criterion name.
    pub name: &'static str,
    /// Whether every gate inside the criterion held.
    pub passed: bool,
    /// Measured certificates on success, the first violated gate on failure.
    pub detail: String,
    /// Wall-clock runtime of this criterion alone.
    pub seconds: f64,
}

/// A criterion returns its certificate summary, or the first failed gate.
type Outcome = Result<String, String>;

/// Name/function table of the battery, in execution order.
const BATTERY: &[(&str, fn() -> Outcome)] = &[
    ("squaring-preserves-disk-norms", squaring_preserves_disk_norms),
    ("annulus-isometry-families", annulus_isometry_families),
    ("moebius-norm-bounds", moebius_norm_bounds),
    ("laurent-monomial-membership", laurent_monomial_membership),
    ("boundary-kernel-forms-and-mass", boundary_kernel_forms_and_mass),
    ("lift-index-integrality", lift_index_integrality),
    ("factorization-suite", factorization_suite),
    ("conjugation-diagram-commutes", conjugation_diagram_commutes),
    (
        "singular-value-decay-and-transport",
        singular_value_decay_and_transport,
    ),
    ("evaluation-functional-blowup", evaluation_functional_blowup),
    ("boundary-level-mass-identity", boundary_level_mass_identity),
    ("dilatation-dirichlet-solver", dilatation_dirichlet_solver),
    ("winding-count-patterns", winding_count_patterns),
];

/// Criterion names in battery order, without running anything.
#[must_use]
pub fn names() -> Vec<&'static str> {
    BATTERY.iter().map(|&(name, _)| name).collect()
}

/// Runs the complete battery in order, timing each criterion. A failing
/// criterion does not stop the rest.
#[must_use]
pub fn run_all() -> Vec<CriterionResult> {
    BATTERY
        .iter()
        .map(|&(name, check)| {
            let started = Instant::now();
            let outcome = check();
            let seconds = started.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(detail) => (true, detail),
                Err(detail) => (false, detail),
            };
            CriterionResult {
                name,
                passed,
                detail,
                seconds,
            }
        })
        .collect()
}

/// True when every criterion in the slice passed.
#[must_use]
pub fn all_passed(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// One display line per criterion: `PASS name (1.23s): detail`.
#[must_use]
pub fn render(result: &CriterionResult) -> String {
    format!(
        "{} {} ({:.2}s): {}",
        if result.passed { "PASS" } else { "FAIL" },
        result.name,
        result.seconds,
        result.detail
    )
}

fn step<T>(what: &str, r: crate::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn require(ok: bool, why: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why)
    }
}

fn disk_ops(n_r: usize, n_theta: usize) -> Result<RadialOps, String> {
    Ok(RadialOps::new(step("disk grid", PolarGrid::disk(n_r, n_theta))?))
}

fn annulus_ops(r0: f64, n_r: usize, n_theta: usize) -> Result<RadialOps, String> {
    Ok(RadialOps::new(step(
        "annulus grid",
        PolarGrid::annulus(r0, n_r, n_theta),
    )?))
}

fn sup_abs(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

// ---------------------------------------------------------------------------
// Criterion 1: composition with z^2 preserves disk norms.
// ---------------------------------------------------------------------------

fn squaring_preserves_disk_norms() -> Outcome {
    let started = Instant::now();
    let phi = step("squaring map", AnalyticSelfMap::monomial(2))?;
    let n = 1024;
    let mut rng = seeded_rng(0x4c31);
    let mut worst = 0.0f64;
    for &p in &[2.0, 4.0] {
        for _ in 0..20 {
            let f = HardyFunction::from_series(random_disk_polynomial(&mut rng, 32));
            let base = step("sample norm", boundary_norm(&step("sample trace", f.trace(n))?, p))?;
            let composed = step(
                "composed norm",
                boundary_norm(&step("composed trace", compose_trace(&f, &phi, n))?, p),
            )?;
            worst = worst.max((composed - base).abs() / base);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    require(
        worst < tol::ISOMETRY_NORM_DEV,
        format!(
            "norm deviation {worst:.2e} reaches the gate {:.0e}",
            tol::ISOMETRY_NORM_DEV
        ),
    )?;
    require(
        elapsed < 5.0,
        format!("runtime {elapsed:.2}s exceeds the 5 s budget"),
    )?;
    Ok(format!(
        "max relative norm deviation {worst:.2e} over 40 degree-32 samples at p in {{2, 4}}, {elapsed:.2}s"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 2: the two isometry families on the annulus, and a rejection.
// ---------------------------------------------------------------------------

fn annulus_isometry_families() -> Outcome {
    let r0 = 0.5;
    let domain = Domain::Annulus { r0 };
    let rotation = step(
        "rotation symbol",
        AnalyticSelfMap::rotation(domain, Complex64::from_polar(1.0, PI / 7.0)),
    )?;
    let inversion = step(
        "inversion symbol",
        AnalyticSelfMap::inversion(r0, Complex64::from_polar(1.0, 1.0)),
    )?;
    let constant = step(
        "constant symbol",
        AnalyticSelfMap::constant(domain, domain, Complex64::new(r0.sqrt(), 0.0)),
    )?;
    let mut max_dev = 0.0f64;
    let mut witness = f64::INFINITY;
    for &p in &[2.0, 4.0] {
        for (label, map, code) in [("rotation", &rotation, 1.0), ("inversion", &inversion, 2.0)] {
            let report = step(label, isometry_check_annulus(map, p, 20, 0x4c32))?;
            require(
                report.verdict("isometry") == Some(true),
                format!("{label} not certified an isometry at p = {p}"),
            )?;
            require(
                report.certificate("case-code") == Some(code),
                format!("{label} classified with case code {:?}", report.certificate("case-code")),
            )?;
            let dev = report
                .certificate("max-norm-deviation")
                .unwrap_or(f64::INFINITY);
            require(
                dev < tol::ISOMETRY_NORM_DEV,
                format!("{label} norm deviation {dev:.2e} at p = {p}"),
            )?;
            max_dev = max_dev.max(dev);
        }
        let report = step("constant", isometry_check_annulus(&constant, p, 20, 0x4c32))?;
        require(
            report.verdict("isometry") == Some(false),
            format!("constant symbol slipped through at p = {p}"),
        )?;
        let dev = report.certificate("max-norm-deviation").unwrap_or(0.0);
        require(
            dev > 0.05,
            format!("constant witness deviation {dev:.3} is below 0.05"),
        )?;
        witness = witness.min(dev);
    }
    Ok(format!(
        "rotation and inversion certified at p in {{2, 4}} with norm deviation <= {max_dev:.2e}; constant sqrt(r0) rejected with witness >= {witness:.3}"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 3: Moebius symbols respect the closed-form norm bound.
// ---------------------------------------------------------------------------

fn moebius_norm_bounds() -> Outcome {
    let mut rng = seeded_rng(0x4c33);
    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..50u64 {
        let phi = step("random symbol", random_moebius(&mut rng, 0.8))?;
        for &p in &[2.0, 4.0] {
            let bound = step("norm bound", norm_bound_disk(&phi, p))?;
            let estimate = step(
                "norm estimate",
                norm_estimate(&phi, p, NormContext::Analytic, 6, 0x4c33 + trial),
            )?;
            worst_excess = worst_excess.max(estimate - bound);
        }
    }
    require(
        worst_excess <= 1e-6,
        format!("an estimate exceeds its bound by {worst_excess:.2e}"),
    )?;
    Ok(format!(
        "50 seeded symbols at p in {{2, 4}}: max(estimate - bound) = {worst_excess:.2e} (gate 1e-6)"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 4: Laurent monomials pass the two-circle membership test.
// ---------------------------------------------------------------------------

fn laurent_monomial_membership() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for &r0 in &[0.3, 0.5, 0.7] {
        for k in -20i64..=20 {
            let series = step(
                "monomial",
                LaurentSeries::monomial(r0, k, Complex64::new(1.0, 0.0)),
            )?;
            let trace = step("trace", HardyFunction::from_series(series).trace(64))?;
            let pair = match trace {
                BoundaryTrace::Annulus(pair) => pair,
                BoundaryTrace::Disk(_) => {
                    return Err("monomial trace came back on a single circle".into())
                }
            };
            let (ok, defect) = annulus_membership(&pair, tol::MEMBERSHIP_DEFECT);
            require(
                ok && defect < tol::MEMBERSHIP_DEFECT,
                format!("z^{k} at r0 = {r0} rejected with defect {defect:.2e}"),
            )?;
            worst = worst.max(defect);
            count += 1;
        }
    }
    Ok(format!(
        "{count} monomial traces accepted; max membership defect {worst:.2e} (gate {:.0e})",
        tol::MEMBERSHIP_DEFECT
    ))
}

// ---------------------------------------------------------------------------
// Criterion 5: boundary kernel forms agree and carry unit line mass.
// ---------------------------------------------------------------------------

fn boundary_kernel_forms_and_mass() -> Outcome {
    let r0 = 0.3;
    let q0 = step("strip height", strip_height(r0))?;
    let mut worst_forms = 0.0f64;
    for i in 0..100 {
        let r = r0 + (1.0 - r0) * (i as f64 + 0.5) / 100.0;
        for j in 0..100 {
            let t = -6.0 + 12.0 * j as f64 / 99.0;
            let a = step("kernel form", sarason_k(r, t, r0))?;
            let b = step("kernel form", sarason_k_rewritten(r, t, r0))?;
            worst_forms = worst_forms.max((a - b).abs());
        }
    }
    require(
        worst_forms < tol::KERNEL_FORMS,
        format!("kernel forms disagree by {worst_forms:.2e}"),
    )?;
    let mut worst_mass = 0.0f64;
    for &r in &[0.4, 0.55, 0.9] {
        let t_max = 12.0 * q0;
        let n = 200_000usize;
        let h = 2.0 * t_max / n as f64;
        let mut total = 0.0;
        for j in 0..=n {
            let t = -t_max + j as f64 * h;
            let weight = if j == 0 || j == n { 0.5 } else { 1.0 };
            let pair = step("kernel mass", extension_kernel(r, t, r0))?
                + step("kernel mass", extension_kernel(r0 / r, t, r0))?;
            total += weight * pair * h;
        }
        worst_mass = worst_mass.max((total - 1.0).abs());
    }
    require(
        worst_mass < tol::KERNEL_MASS,
        format!("kernel pair mass misses 1 by {worst_mass:.2e}"),
    )?;
    let center = step("center value", sarason_k(r0.sqrt(), 0.0, r0))?;
    let center_err = (center - 1.0 / q0).abs();
    require(
        center_err < 1e-14,
        format!("center value misses 1/q0 by {center_err:.2e}"),
    )?;
    Ok(format!(
        "forms agree to {worst_forms:.2e} on a 100x100 grid; pair mass off by {worst_mass:.2e}; center value off by {center_err:.1e}"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 6: lifted monomials have integer index.
// ---------------------------------------------------------------------------

fn lift_index_integrality() -> Outcome {
    let r0 = 0.5;
    let mut worst = 0.0f64;
    for k in 0u32..=3 {
        let density = step(
            "boundary data",
            lift_boundary_log_moduli(|z: Complex64| z.powu(k), r0, 4096),
        )?;
        let frac = step("index", index_of(&density, r0))?;
        let defect = frac.min(1.0 - frac);
        require(
            defect < 1e-10,
            format!("lift of z^{k} has fractional index defect {defect:.2e}"),
        )?;
        worst = worst.max(defect);
    }
    Ok(format!(
        "lifts of z^k for k in 0..=3: max distance of the index from an integer {worst:.2e} (gate 1e-10)"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 7: exponential factorization on disk and annulus.
// ---------------------------------------------------------------------------

fn certify_factorization(
    ops: &RadialOps,
    seed: &[Complex64],
    label: &str,
    alpha: &AlphaField,
) -> Result<(SField, f64), String> {
    let s = step(label, hard_factorize_field(ops, seed, alpha))?;
    require(
        s.iterations() <= tol::FACTORIZE_MAX_ITER,
        format!(
            "{label}: {} iterations exceed the cap {}",
            s.iterations(),
            tol::FACTORIZE_MAX_ITER
        ),
    )?;
    require(
        s.boundary_real_max() < tol::S_BOUNDARY_REAL,
        format!(
            "{label}: boundary real part reaches {:.2e}",
            s.boundary_real_max()
        ),
    )?;
    require(
        s.sup_norm() <= 4.0 * alpha.sup_norm(),
        format!(
            "{label}: exponent sup {:.3} above four times the coefficient sup {:.3}",
            s.sup_norm(),
            alpha.sup_norm()
        ),
    )?;
    let w: Vec<Complex64> = seed
        .iter()
        .zip(s.values())
        .map(|(f, sv)| f * sv.exp())
        .collect();
    let residual = pde_residual(ops, &w, PdeCoefficient::Alpha(alpha));
    require(
        residual < tol::PDE_RESIDUAL,
        format!("{label}: equation residual {residual:.2e}"),
    )?;
    Ok((s, residual))
}

fn factorization_suite() -> Outcome {
    let ops = disk_ops(65, 128)?;
    let grid = ops.grid();
    let seed = grid.sample(|z| 1.0 + z / 2.0);
    let alpha_const = step(
        "constant coefficient",
        AlphaField::constant(grid, Complex64::new(0.3, 0.0)),
    )?;
    let alpha_quad = step(
        "quadratic coefficient",
        AlphaField::from_fn(grid, |z| 0.3 * z * z),
    )?;
    let (s_const, res_const) = certify_factorization(&ops, &seed, "disk constant", &alpha_const)?;
    let (_, res_quad) = certify_factorization(&ops, &seed, "disk quadratic", &alpha_quad)?;

    let w1: Vec<Complex64> = seed
        .iter()
        .zip(s_const.values())
        .map(|(f, sv)| f * sv.exp())
        .collect();
    let w1 = step("w-type dressing", GenHardyFunction::w_type(&ops, w1, &alpha_const))?;
    let refactor = step(
        "re-dressing",
        refactor_alpha(&ops, &w1, &alpha_const, &alpha_quad),
    )?;
    require(
        refactor.roundtrip_max < tol::POINTWISE_IDENTITY,
        format!(
            "re-dressing round trip off by {:.2e}",
            refactor.roundtrip_max
        ),
    )?;

    // Annulus: a coefficient manufactured from a field with vanishing
    // boundary real part, so the boundary clause is attainable and must
    // then be attained.
    let aops = annulus_ops(0.5, 81, 128)?;
    let agrid = aops.grid();
    let shape = |z: Complex64| {
        let r = z.norm();
        let bump = (1.0 - r) * (r - 0.5) * 8.0;
        Complex64::new(bump * z.arg().cos(), 0.4 * r * (2.0 * z.arg()).sin())
    };
    let base = agrid.sample(shape);
    let aseed = agrid.sample(|z| 1.0 + z / 2.0);
    let dbar_base = aops.dbar(&base);
    let scale = 0.28 / sup_abs(&dbar_base);
    let target: Vec<Complex64> = base.iter().map(|v| v * scale).collect();
    let alpha_values: Vec<Complex64> = dbar_base
        .iter()
        .zip(&target)
        .zip(&aseed)
        .map(|((d, t), f)| d * scale * Complex64::from_polar(1.0, 2.0 * t.im) * f / f.conj())
        .collect();
    let alpha_ann = step("annulus coefficient", AlphaField::new(agrid.clone(), alpha_values))?;
    require(
        alpha_ann.sup_norm() <= 0.3,
        format!("annulus coefficient sup {:.3} above 0.3", alpha_ann.sup_norm()),
    )?;
    let (s_ann, res_ann) = certify_factorization(&aops, &aseed, "annulus", &alpha_ann)?;

    // A flat coefficient on the annulus keeps a constant real defect on the
    // inner circle that no admissible phase removes; record the observable.
    let alpha_flat = step(
        "flat annulus coefficient",
        AlphaField::constant(agrid, Complex64::new(0.3, 0.0)),
    )?;
    let s_flat = step(
        "flat annulus factorization",
        hard_factorize_field(&aops, &aseed, &alpha_flat),
    )?;
    let obstruction = s_flat.boundary_real_max();
    Ok(format!(
        "residuals: disk {res_const:.1e}/{res_quad:.1e}, annulus {res_ann:.1e} with boundary defect {:.1e}; re-dressing round trip {:.1e}; flat annulus coefficient keeps an inner defect of {obstruction:.2e}",
        s_ann.boundary_real_max(),
        refactor.roundtrip_max
    ))
}

// ---------------------------------------------------------------------------
// Criterion 8: the conjugation map commutes with composition.
// ---------------------------------------------------------------------------

fn conjugation_diagram_commutes() -> Outcome {
    let cod_ops = disk_ops(65, 128)?;
    let src_ops = disk_ops(65, 128)?;
    let mut rng = seeded_rng(0x4c38);
    let mut worst_round = 0.0f64;
    let mut worst_diagram = 0.0f64;
    for _case in 0..10 {
        let c: [f64; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let raw = move |z: Complex64| c[0] + c[1] * z.re + c[2] * z.im + c[3] * z.norm_sqr();
        let cod_grid = cod_ops.grid();
        let mut sup_raw = 0.0f64;
        for i in 0..cod_grid.n_r {
            for j in 0..cod_grid.n_theta {
                sup_raw = sup_raw.max(raw(cod_grid.z(i, j)).abs());
            }
        }
        let scale = 0.29 / sup_raw.max(1e-9);
        let nu_fn = move |z: Complex64| raw(z) * scale;
        let nu = step("dilatation field", NuField::from_fn(cod_grid, 0.3, nu_fn))?;
        let fser = random_disk_polynomial(&mut rng, 6);
        let mut f_vals = Vec::with_capacity(cod_grid.len());
        for i in 0..cod_grid.n_r {
            for j in 0..cod_grid.n_theta {
                f_vals.push(step("sample", fser.eval_closed(cod_grid.z(i, j)))?);
            }
        }
        let w_vals = jmap_values(nu.values(), &f_vals);
        let back = jinv_values(nu.values(), &w_vals);
        for (a, b) in back.iter().zip(&f_vals) {
            worst_round = worst_round.max((a - b).norm());
        }

        let phi = step("symbol", random_moebius(&mut rng, 0.5))?;
        let src_grid = src_ops.grid();
        let mut images = Vec::with_capacity(src_grid.len());
        let mut nu_phi = Vec::with_capacity(src_grid.len());
        let mut f_phi = Vec::with_capacity(src_grid.len());
        for i in 0..src_grid.n_r {
            for j in 0..src_grid.n_theta {
                let w = step("symbol value", phi.eval(src_grid.z(i, j)))?;
                images.push(w);
                nu_phi.push(nu_fn(w));
                f_phi.push(step("composed sample", fser.eval_closed(w))?);
            }
        }
        let left = jmap_values(&nu_phi, &f_phi);
        let transported = FieldEvaluator::new(&cod_ops, &w_vals);
        for (w, lv) in images.iter().zip(&left) {
            let rv = step("transported value", transported.eval(*w))?;
            worst_diagram = worst_diagram.max((lv - rv).norm());
        }
    }
    require(
        worst_round < tol::J_ROUNDTRIP,
        format!(
            "round trip {worst_round:.2e} over the gate {:.0e}",
            tol::J_ROUNDTRIP
        ),
    )?;
    require(
        worst_diagram < tol::DIAGRAM_COMMUTE,
        format!(
            "diagram defect {worst_diagram:.2e} over the gate {:.0e}",
            tol::DIAGRAM_COMMUTE
        ),
    )?;
    Ok(format!(
        "10 seeded cases at kappa = 0.3: round trip <= {worst_round:.2e}, transport diagram defect <= {worst_diagram:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 9: singular-value decay and the transported spectrum.
// ---------------------------------------------------------------------------

fn singular_value_decay_and_transport() -> Outcome {
    let half_series = step(
        "contraction series",
        LaurentSeries::disk(vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)]),
    )?;
    let half = step(
        "contraction map",
        AnalyticSelfMap::general(Domain::Disk, Domain::Disk, half_series),
    )?;
    let squaring = step("squaring map", AnalyticSelfMap::monomial(2))?;

    let sigma = step("contraction matrix", matrix_truncate(&half, 64))?.singular_values();
    let mut worst_half = 0.0f64;
    for (n, s) in sigma.iter().enumerate() {
        worst_half = worst_half.max((s - 0.5f64.powi(n as i32)).abs());
    }
    require(
        worst_half < 1e-10,
        format!("contraction spectrum misses 2^-n by {worst_half:.2e}"),
    )?;

    let sigma_sq = step("squaring matrix", matrix_truncate(&squaring, 64))?.singular_values();
    let floor16 = sigma_sq.iter().take(16).fold(f64::INFINITY, |m, s| m.min(*s));
    require(
        floor16 >= 0.999,
        format!("a leading squaring singular value dips to {floor16}"),
    )?;

    let ops = disk_ops(65, 128)?;
    let alpha = step(
        "coefficient",
        AlphaField::constant(ops.grid(), Complex64::new(0.3, 0.0)),
    )?;
    let mut transported = Vec::new();
    for (label, map) in [("squaring", &squaring), ("contraction", &half)] {
        let proxy = step(
            label,
            compact_proxy(map, 32, Some(ConjugationContext { ops: &ops, alpha: &alpha })),
        )?;
        require(
            proxy.report.verdict("transported-spectrum-within-envelope") == Some(true),
            format!("{label}: transported spectrum escapes the envelope"),
        )?;
        let conj = proxy
            .conjugated
            .as_ref()
            .ok_or_else(|| format!("{label}: transported spectrum missing"))?;
        transported.push(format!(
            "{label} distortion {:.4} within e^{:.3}",
            conj.distortion_max, conj.s_sup
        ));
    }
    Ok(format!(
        "contraction spectrum matches 2^-n to {worst_half:.2e}; squaring keeps its leading 16 values >= {floor16:.6}; {} and {}",
        transported[0], transported[1]
    ))
}

// ---------------------------------------------------------------------------
// Criterion 10: evaluation-functional norms blow up like the kernel says.
// ---------------------------------------------------------------------------

fn evaluation_functional_blowup() -> Outcome {
    let mut worst = 0.0f64;
    for &r in &[0.0, 0.5, 0.9] {
        let value = step(
            "kernel norm",
            eval_functional_norm(Complex64::new(r, 0.0), 2.0, None, 256),
        )?;
        let target = 1.0 / (1.0 - r * r).sqrt();
        let err = (value - target).abs();
        require(
            err < 1e-3,
            format!("at |z| = {r} the functional norm {value:.6} misses {target:.6}"),
        )?;
        worst = worst.max(err);
    }
    let mut previous = 0.0f64;
    let mut last = 0.0f64;
    for j in 1..=8 {
        let r = 1.0 - 0.5f64.powi(j);
        let value = step(
            "sweep",
            eval_functional_norm(Complex64::new(r, 0.0), 2.0, None, 256),
        )?;
        require(
            value > previous,
            format!("sweep not strictly increasing at j = {j}"),
        )?;
        previous = value;
        last = value;
    }
    Ok(format!(
        "functional norms match (1 - |z|^2)^(-1/2) within {worst:.1e} at M = 256; the approach sweep climbs strictly to {last:.2}"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 11: level-set masses of boundary-preserving symbols.
// ---------------------------------------------------------------------------

fn boundary_level_mass_identity() -> Outcome {
    let r0 = 0.5;
    let domain = Domain::Annulus { r0 };
    let mut maps: Vec<(&str, AnalyticSelfMap)> = Vec::new();
    maps.push((
        "identity",
        step("identity", AnalyticSelfMap::identity(domain))?,
    ));
    maps.push((
        "rotation pi/7",
        step(
            "rotation",
            AnalyticSelfMap::rotation(domain, Complex64::from_polar(1.0, PI / 7.0)),
        )?,
    ));
    maps.push((
        "rotation 1",
        step(
            "rotation",
            AnalyticSelfMap::rotation(domain, Complex64::from_polar(1.0, 1.0)),
        )?,
    ));
    maps.push((
        "inversion 0",
        step("inversion", AnalyticSelfMap::inversion(r0, Complex64::new(1.0, 0.0)))?,
    ));
    maps.push((
        "inversion 1",
        step(
            "inversion",
            AnalyticSelfMap::inversion(r0, Complex64::from_polar(1.0, 1.0)),
        )?,
    ));
    let mut worst = 0.0f64;
    for (label, map) in &maps {
        let defect = step(label, level_mass_defect(map, 2.0))?;
        require(
            defect < tol::POINTWISE_IDENTITY,
            format!("{label}: level-mass defect {defect:.2e}"),
        )?;
        worst = worst.max(defect);
    }
    Ok(format!(
        "5 boundary-preserving symbols at p = 2: max level-mass defect {worst:.2e} (gate {:.0e})",
        tol::POINTWISE_IDENTITY
    ))
}

// ---------------------------------------------------------------------------
// Criterion 12: the dilatation boundary-value solver.
// ---------------------------------------------------------------------------

fn dilatation_dirichlet_solver() -> Outcome {
    let ops = disk_ops(65, 128)?;
    let grid = ops.grid();
    let psi = step(
        "boundary data",
        CircleGrid::from_fn(1.0, grid.n_theta, |t| Complex64::new(t.cos(), 0.0)),
    )?;
    let flat = step("flat solve", dirichlet_disk(&ops, &psi, &NuField::zero(grid)))?;
    let mut dev = 0.0f64;
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            dev = dev.max((flat.f.values()[i * grid.n_theta + j] - grid.z(i, j)).norm());
        }
    }
    require(
        dev < 1e-10,
        format!("zero-dilatation solve misses z by {dev:.2e}"),
    )?;
    let nu = step("field", NuField::from_fn(grid, 0.2, |z| 0.2 * z.norm_sqr()))?;
    let sol = step("dilatation solve", dirichlet_disk(&ops, &psi, &nu))?;
    require(
        sol.iterations <= tol::DIRICHLET_MAX_ITER,
        format!(
            "{} iterations exceed the cap {}",
            sol.iterations,
            tol::DIRICHLET_MAX_ITER
        ),
    )?;
    let residual = sol.f.residual();
    require(
        residual < tol::PDE_RESIDUAL,
        format!("equation residual {residual:.2e}"),
    )?;
    require(
        sol.trace_defect < 1e-8,
        format!("boundary trace defect {:.2e}", sol.trace_defect),
    )?;
    Ok(format!(
        "cosine data recovers z to {dev:.2e}; radial dilatation solve: residual {residual:.2e}, trace defect {:.2e}, {} iterations",
        sol.trace_defect, sol.iterations
    ))
}

// ---------------------------------------------------------------------------
// Criterion 13: winding counts separate the symbol classes.
// ---------------------------------------------------------------------------

fn winding_count_patterns() -> Outcome {
    let r0 = 0.5;
    let invertibles = [
        (
            "disk rotation",
            step(
                "disk rotation",
                AnalyticSelfMap::rotation(Domain::Disk, Complex64::from_polar(1.0, PI / 7.0)),
            )?,
        ),
        (
            "annulus rotation",
            step(
                "annulus rotation",
                AnalyticSelfMap::rotation(
                    Domain::Annulus { r0 },
                    Complex64::from_polar(1.0, PI / 7.0),
                ),
            )?,
        ),
        (
            "annulus inversion",
            step(
                "annulus inversion",
                AnalyticSelfMap::inversion(r0, Complex64::from_polar(1.0, 1.0)),
            )?,
        ),
    ];
    for (label, map) in &invertibles {
        let report = step(label, invertibility_check(map))?;
        require(
            report.verdict("invertible") == Some(true),
            format!("{label} not certified invertible"),
        )?;
        require(
            report.certificate("max-preimage-count") == Some(1.0)
                && report.certificate("min-preimage-count") == Some(1.0),
            format!("{label}: preimage counts stray from one"),
        )?;
    }
    let squaring = step("squaring", AnalyticSelfMap::monomial(2))?;
    let doubled = step("squaring windings", invertibility_check(&squaring))?;
    require(
        doubled.certificate("max-preimage-count") == Some(2.0),
        "squaring: no doubled preimage count detected".to_string(),
    )?;
    let half_series = step(
        "contraction series",
        LaurentSeries::disk(vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)]),
    )?;
    let half = step(
        "contraction map",
        AnalyticSelfMap::general(Domain::Disk, Domain::Disk, half_series),
    )?;
    let missed = step("contraction windings", invertibility_check(&half))?;
    require(
        missed.certificate("min-preimage-count") == Some(0.0),
        "contraction: no missed target detected".to_string(),
    )?;
    Ok(
        "rotations and the inversion are certified invertible; squaring shows a doubled count; the strict contraction misses targets"
            .to_string(),
    )
}
