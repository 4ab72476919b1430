//! Scenario configuration: a strict TOML dialect describing a domain, a
//! composition symbol, optional equation coefficients, and the list of
//! diagnostics to run against them.
//!
//! Parsing is total: a file either resolves to a full `ScenarioConfig` or
//! is rejected with a message carrying the position reported by the TOML
//! front end. Unknown keys are errors everywhere, so a misspelled
//! tolerance cannot silently fall back to a default. Numeric fields
//! accept exact literal forms besides plain numbers: rationals such as
//! `"3/4"` and rational multiples of pi such as `"pi/7"` or `"-2pi/3"`.
//! Complex entries take a plain number, a `[re, im]` pair, or a polar
//! string `"modulus @ argument"`, so a rotation written as `"1 @ pi/7"`
//! gets unit modulus to the last bit of `from_polar`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use hardylab::tol;

/// A rejected configuration: a parse failure with the TOML position, or a
/// post-parse validation failure naming the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parses an exact real literal: a plain decimal (`"0.25"`, `"-3"`), a
/// rational (`"3/4"`), or a rational multiple of pi (`"pi"`, `"-pi/2"`,
/// `"2pi/3"`, `"0.5pi"`). Whitespace is ignored.
pub fn parse_real(text: &str) -> Result<f64, ConfigError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |what: &str| ConfigError(format!("cannot read {what} in the literal {text:?}"));
    let (sign, body) = match compact.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, compact.strip_prefix('+').unwrap_or(&compact)),
    };
    if body.is_empty() {
        return Err(bad("a number"));
    }
    let (num_text, den_text) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let numerator = match num_text.strip_suffix("pi") {
        Some("") => PI,
        Some(coeff) => coeff.parse::<f64>().map_err(|_| bad("the pi multiple"))? * PI,
        None => num_text.parse::<f64>().map_err(|_| bad("the numerator"))?,
    };
    let denominator = match den_text {
        Some(d) => {
            let v = d.parse::<f64>().map_err(|_| bad("the denominator"))?;
            if v == 0.0 {
                return Err(ConfigError(format!("division by zero in the literal {text:?}")));
            }
            v
        }
        None => 1.0,
    };
    let value = sign * numerator / denominator;
    if !value.is_finite() {
        return Err(ConfigError(format!("the literal {text:?} is not finite")));
    }
    Ok(value)
}

/// A real number resolved from a plain value or an exact literal string.
/// Serializes as the resolved number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealSpec(pub f64);

impl Serialize for RealSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for RealSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RealSpec;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or an exact literal such as \"3/4\" or \"pi/7\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<RealSpec, E> {
                Ok(RealSpec(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RealSpec, E> {
                Ok(RealSpec(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RealSpec, E> {
                Ok(RealSpec(v as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<RealSpec, E> {
                parse_real(s).map(RealSpec).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// A complex number resolved from a plain value (real axis), a `[re, im]`
/// pair of real literals, or a polar string `"modulus @ argument"`.
/// Serializes as the resolved `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSpec {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexSpec> for Complex64 {
    fn from(c: ComplexSpec) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl Serialize for ComplexSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut pair = serializer.serialize_tuple(2)?;
        pair.serialize_element(&self.re)?;
        pair.serialize_element(&self.im)?;
        pair.end()
    }
}

impl<'de> Deserialize<'de> for ComplexSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ComplexSpec;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, a [re, im] pair, or a polar string \"modulus @ argument\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ComplexSpec, E> {
                Ok(ComplexSpec { re: v, im: 0.0 })
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ComplexSpec, E> {
                Ok(ComplexSpec { re: v as f64, im: 0.0 })
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ComplexSpec, E> {
                Ok(ComplexSpec { re: v as f64, im: 0.0 })
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<ComplexSpec, E> {
                if let Some((modulus, argument)) = s.split_once('@') {
                    let m = parse_real(modulus).map_err(E::custom)?;
                    let a = parse_real(argument).map_err(E::custom)?;
                    let z = Complex64::from_polar(m, a);
                    Ok(ComplexSpec { re: z.re, im: z.im })
                } else {
                    let v = parse_real(s).map_err(E::custom)?;
                    Ok(ComplexSpec { re: v, im: 0.0 })
                }
            }
            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<ComplexSpec, A::Error> {
                let pair = "a [re, im] pair";
                let re: RealSpec = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &pair))?;
                let im: RealSpec = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &pair))?;
                if seq.next_element::<RealSpec>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &pair));
                }
                Ok(ComplexSpec { re: re.0, im: im.0 })
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Where the scenario lives: the unit disk, or the annulus with the given
/// inner radius (`domain = "disk"` or `domain = { annulus = 0.5 }`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainSpec {
    Disk,
    Annulus(f64),
}

/// The composition symbol. Builtins carry their parameters; `series`
/// takes raw Laurent coefficients starting at `min_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    /// The identity map.
    Identity,
    /// `z -> lambda z` with `lambda = exp(i angle)`.
    Rotation { angle: RealSpec },
    /// `z -> mu r0 / z` on the annulus, with `mu = exp(i angle)`.
    Inversion { angle: RealSpec },
    /// `z -> z^degree` on the disk.
    Monomial { degree: u32 },
    /// `z -> (a - z) / (1 - conj(a) z)` on the disk.
    Moebius { a: ComplexSpec },
    /// The constant map `z -> value`.
    Constant { value: ComplexSpec },
    /// A Laurent polynomial `sum_k c_k z^k`, `k` starting at `min_index`.
    Series {
        coefficients: Vec<ComplexSpec>,
        #[serde(default)]
        min_index: i64,
    },
}

/// A real dilatation field for the f-type equation, bounded by `kappa`.
/// The bound is checked at parse time (`kappa < 1`) and again against the
/// sampled field when the grid is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DilatationSpec {
    /// `nu(z) = value`.
    Constant { kappa: f64, value: RealSpec },
    /// `nu(z) = c0 + cx Re z + cy Im z`.
    Affine {
        kappa: f64,
        c0: RealSpec,
        cx: RealSpec,
        cy: RealSpec,
    },
    /// `nu(z) = amplitude |z|^power`.
    Radial {
        kappa: f64,
        amplitude: RealSpec,
        power: u32,
    },
}

impl DilatationSpec {
    /// The declared sup-norm budget.
    #[must_use]
    pub fn kappa(&self) -> f64 {
        match *self {
            Self::Constant { kappa, .. } | Self::Affine { kappa, .. } | Self::Radial { kappa, .. } => kappa,
        }
    }

    /// The field value at a point.
    #[must_use]
    pub fn eval(&self, z: Complex64) -> f64 {
        match *self {
            Self::Constant { value, .. } => value.0,
            Self::Affine { c0, cx, cy, .. } => c0.0 + cx.0 * z.re + cy.0 * z.im,
            Self::Radial { amplitude, power, .. } => amplitude.0 * z.norm().powi(power as i32),
        }
    }
}

/// A complex coefficient field for the w-type equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `alpha(z) = value`.
    Constant { value: ComplexSpec },
    /// `alpha(z) = c0 + c1 z`.
    Affine { c0: ComplexSpec, c1: ComplexSpec },
    /// `alpha(z) = amplitude |z|^power`.
    Radial { amplitude: ComplexSpec, power: u32 },
}

impl CoefficientSpec {
    /// The field value at a point.
    #[must_use]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            Self::Constant { value } => value.into(),
            Self::Affine { c0, c1 } => Complex64::from(c0) + Complex64::from(c1) * z,
            Self::Radial { amplitude, power } => {
                Complex64::from(amplitude) * z.norm().powi(power as i32)
            }
        }
    }
}

/// Grid resolution for the solvers: radial rows and angular samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_n_r")]
    pub n_r: usize,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_r: default_n_r(),
            n_theta: default_n_theta(),
        }
    }
}

fn default_n_r() -> usize {
    tol::DEFAULT_N_R
}

fn default_n_theta() -> usize {
    tol::DEFAULT_N_THETA
}

/// The accept/reject windows applied by the scenario runner itself.
/// Tolerances internal to a diagnostic are recorded in its report entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Slack allowed on `estimate <= bound` in the norm-bound diagnostic.
    #[serde(default = "default_norm_excess")]
    pub norm_excess: f64,
    /// Membership window for the two-circle trace diagnostic.
    #[serde(default = "default_membership_defect")]
    pub membership_defect: f64,
    /// Defect window for the boundary level-mass identity.
    #[serde(default = "default_level_mass")]
    pub level_mass: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            norm_excess: default_norm_excess(),
            membership_defect: default_membership_defect(),
            level_mass: default_level_mass(),
        }
    }
}

fn default_norm_excess() -> f64 {
    1e-6
}

fn default_membership_defect() -> f64 {
    tol::MEMBERSHIP_DEFECT
}

fn default_level_mass() -> f64 {
    tol::POINTWISE_IDENTITY
}

/// One runnable diagnostic. The runner executes them in declared order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    /// Norm preservation over random test functions.
    Isometry,
    /// Closed-form norm bound against an empirical estimate (disk).
    NormBound,
    /// Two-circle membership of the symbol's boundary trace (annulus).
    Membership,
    /// Preimage counting over boundary targets.
    Invertibility,
    /// Singular spectrum of the truncated composition matrix.
    Compactness,
    /// Boundary level-mass identity (annulus).
    LevelMass,
    /// Boundary level-set measures and case classification (annulus).
    Omega,
    /// Exponent factorization for the configured coefficient field.
    Factorization,
    /// Conjugated Dirichlet solve with data `cos t` on the circle (disk).
    Dirichlet,
    /// Two-path evaluation identity through the boundary trace.
    Adjoint,
    /// Point-evaluation norms, including a boundary-approach sweep (disk).
    EvalNorm,
}

impl DiagnosticKind {
    /// The kebab-case name used in configs, reports, and file names.
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Self::Isometry => "isometry",
            Self::NormBound => "norm-bound",
            Self::Membership => "membership",
            Self::Invertibility => "invertibility",
            Self::Compactness => "compactness",
            Self::LevelMass => "level-mass",
            Self::Omega => "omega",
            Self::Factorization => "factorization",
            Self::Dirichlet => "dirichlet",
            Self::Adjoint => "adjoint",
            Self::EvalNorm => "eval-norm",
        }
    }
}

/// A fully resolved scenario: domain, symbol, optional coefficient
/// fields, exponent, resolution, tolerances, seed, and the diagnostics to
/// run. The same config and seed reproduce the same report bytes except
/// for timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: DomainSpec,
    pub symbol: SymbolSpec,
    /// Integrability exponent of the norms under test.
    pub p: f64,
    /// Seed for every randomized diagnostic; each draws independently
    /// from it, so single diagnostics re-run reproducibly.
    pub seed: u64,
    /// Diagnostics to execute, in this order.
    pub diagnostics: Vec<DiagnosticKind>,
    /// Dilatation of the f-type equation, when a diagnostic wants one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilatation: Option<DilatationSpec>,
    /// Coefficient of the w-type equation, when a diagnostic wants one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<CoefficientSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    /// Matrix truncation size for the compactness diagnostic.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Basis size for the point-evaluation norm diagnostic.
    #[serde(default = "default_basis")]
    pub basis: usize,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
}

fn default_truncation() -> usize {
    64
}

fn default_basis() -> usize {
    256
}

impl ScenarioConfig {
    /// Parses and validates a TOML scenario. Parse failures carry the
    /// position reported by the TOML front end; validation failures name
    /// the offending key.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Structural checks beyond what deserialization can express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError(msg));
        if !self.p.is_finite() || self.p < 1.0 {
            return fail(format!("p = {} must be finite and >= 1", self.p));
        }
        if let DomainSpec::Annulus(r0) = self.domain {
            if !(r0 > 0.0 && r0 < 1.0) {
                return fail(format!("domain.annulus = {r0} must lie strictly between 0 and 1"));
            }
        }
        if self.grid.n_r < 8 {
            return fail(format!("grid.n_r = {} must be at least 8", self.grid.n_r));
        }
        if self.grid.n_theta < 8 || !self.grid.n_theta.is_power_of_two() {
            return fail(format!(
                "grid.n_theta = {} must be a power of two, at least 8",
                self.grid.n_theta
            ));
        }
        if self.truncation < 8 {
            return fail(format!("truncation = {} must be at least 8", self.truncation));
        }
        if self.basis < 2 {
            return fail(format!("basis = {} must be at least 2", self.basis));
        }
        for (name, value) in [
            ("tolerances.norm_excess", self.tolerances.norm_excess),
            ("tolerances.membership_defect", self.tolerances.membership_defect),
            ("tolerances.level_mass", self.tolerances.level_mass),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return fail(format!("{name} = {value} must be a positive finite number"));
            }
        }
        if let Some(d) = &self.dilatation {
            let kappa = d.kappa();
            if !kappa.is_finite() || !(0.0..1.0).contains(&kappa) {
                return fail(format!("dilatation kappa = {kappa} must lie in [0, 1)"));
            }
        }
        match (&self.symbol, self.domain) {
            (SymbolSpec::Inversion { .. }, DomainSpec::Disk) => {
                return fail("an inversion symbol needs an annulus domain".into());
            }
            (SymbolSpec::Moebius { .. }, DomainSpec::Annulus(_)) => {
                return fail("a Moebius symbol needs the disk domain".into());
            }
            (SymbolSpec::Monomial { .. }, DomainSpec::Annulus(_)) => {
                return fail("a monomial symbol needs the disk domain".into());
            }
            (SymbolSpec::Monomial { degree: 0 }, _) => {
                return fail("symbol.monomial.degree must be at least 1; use constant for degree 0".into());
            }
            (SymbolSpec::Series { coefficients, .. }, _) if coefficients.is_empty() => {
                return fail("symbol.series.coefficients must not be empty".into());
            }
            (SymbolSpec::Series { min_index, .. }, DomainSpec::Disk) if *min_index < 0 => {
                return fail(format!(
                    "symbol.series.min_index = {min_index} needs an annulus domain"
                ));
            }
            _ => {}
        }
        for &kind in &self.diagnostics {
            let need = |domain: DomainSpec, what: &str| -> Result<(), ConfigError> {
                if std::mem::discriminant(&self.domain) == std::mem::discriminant(&domain) {
                    Ok(())
                } else {
                    Err(ConfigError(format!("the {} diagnostic needs {what}", kind.name())))
                }
            };
            match kind {
                DiagnosticKind::NormBound | DiagnosticKind::Dirichlet | DiagnosticKind::EvalNorm => {
                    need(DomainSpec::Disk, "the disk domain")?;
                }
                DiagnosticKind::Membership | DiagnosticKind::LevelMass | DiagnosticKind::Omega => {
                    need(DomainSpec::Annulus(0.5), "an annulus domain")?;
                }
                DiagnosticKind::Factorization => {
                    if self.coefficient.is_none() {
                        return fail("the factorization diagnostic needs a [coefficient] table".into());
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
