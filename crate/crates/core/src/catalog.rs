//! Analytic maps from the bidisk to the closed disk.
//!
//! Every function evaluates at plain points and at approach points
//! `tau + u`. Near a torus point the formulas are rewritten in the offset `u`
//! so that removable `0/0` singularities at the boundary do not cost digits.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design;
use crate::geometry::{ApproachPoint, BoundaryPoint, Point2};
use crate::measure::{MeasureError, MeasureSpec, Weight};
use crate::poly::BiPoly;

type C64 = Complex64;

/// Allowed excess of `|φ|` over 1 in the sampled Schur check.
pub const SCHUR_TOL: f64 = 1e-9;
/// Size of the quasi-random Schur sample.
pub const SCHUR_SAMPLES: usize = 10_000;
/// Default truncation of the infinite product `phi4`.
pub const PHI4_DEFAULT_TERMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point ({0}, {1}) is not in the open bidisk")]
    NotInterior(C64, C64),
    #[error("denominator vanishes at ({0}, {1})")]
    Pole(C64, C64),
    #[error("non-finite value at ({0}, {1})")]
    NonFinite(C64, C64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown builtin {0:?} (expected phi1, phi2, phi3 or phi4)")]
    UnknownBuiltin(String),
    #[error("bad parameter {name}: {reason}")]
    BadParam { name: String, reason: String },
    #[error("not a Schur function: |value| = {modulus} at ({z1}, {z2})")]
    NotSchur { modulus: f64, z1: C64, z2: C64 },
    #[error("denominator vanishes (or nearly) at sampled point ({0}, {1})")]
    PoleInSample(C64, C64),
    #[error("descriptor must name exactly one of builtin, rational, recipe")]
    BadDescriptor,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The evaluation behind an [`AnalyticFunction`].
pub trait Evaluator: Send + Sync + fmt::Debug {
    fn eval(&self, z: &Point2) -> Result<C64, EvalError>;

    fn eval_near(&self, p: &ApproachPoint) -> Result<C64, EvalError> {
        self.eval(&p.point())
    }

    /// Value prescribed on the diagonal `z1 = z2 = z`, if the formula needs one.
    fn diagonal_value(&self, _z: C64) -> Option<C64> {
        None
    }

    /// Imaginary part of the logarithm used at `z`, for branch continuity checks.
    fn log_branch(&self, _z: &Point2) -> Option<f64> {
        None
    }
}

fn check_interior(z: &Point2) -> Result<(), EvalError> {
    if z.is_interior() {
        Ok(())
    } else {
        Err(EvalError::NotInterior(z.z1, z.z2))
    }
}

fn finite(v: C64, z: &Point2) -> Result<C64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(z.z1, z.z2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Phi1, Builtin::Phi2, Builtin::Phi3, Builtin::Phi4];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Phi1 => "phi1",
            Builtin::Phi2 => "phi2",
            Builtin::Phi3 => "phi3",
            Builtin::Phi4 => "phi4",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Builtin::Phi1 => "rational, C point at (1,1) with Dφ[h] = 2 h2",
            Builtin::Phi2 => "logarithmic, B+ point but not C point at (1,1)",
            Builtin::Phi3 => "rational, B point but not B+ point at (1,1)",
            Builtin::Phi4 => "infinite product (truncated at N), no B point at (1,1)",
        }
    }
}

impl FromStr for Builtin {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| CatalogError::UnknownBuiltin(s.to_string()))
    }
}

/// JSON coefficient grid: rows by degree in `z1`, entries `[re, im]` by degree in `z2`.
pub type CoeffGrid = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalJson {
    pub numer: CoeffGrid,
    pub denom: CoeffGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeJson {
    pub measure: MeasureSpec,
}

/// `{"builtin": "phi2"}`, `{"rational": {...}}` or `{"recipe": {"measure": {...}}}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<RationalJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<RecipeJson>,
}

impl FunctionDescriptor {
    pub fn builtin(b: Builtin) -> Self {
        Self {
            builtin: Some(b.name().to_string()),
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<AnalyticFunction, CatalogError> {
        match (&self.builtin, &self.rational, &self.recipe) {
            (Some(name), None, None) => builtin(name.parse()?, &self.params),
            (None, Some(r), None) => {
                rational(grid_to_poly(&r.numer), grid_to_poly(&r.denom))
            }
            (None, None, Some(r)) => from_measure_recipe(&r.measure),
            _ => Err(CatalogError::BadDescriptor),
        }
    }
}

fn grid_to_poly(g: &CoeffGrid) -> BiPoly {
    BiPoly::new(
        g.iter()
            .map(|row| row.iter().map(|c| C64::new(c[0], c[1])).collect())
            .collect(),
    )
}

fn poly_to_grid(p: &BiPoly) -> CoeffGrid {
    p.coeffs()
        .iter()
        .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

/// An evaluable analytic map from the bidisk to the closed disk, with metadata.
#[derive(Clone)]
pub struct AnalyticFunction {
    name: String,
    is_rational: bool,
    params: BTreeMap<String, f64>,
    descriptor: FunctionDescriptor,
    inner: Arc<dyn Evaluator>,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("name", &self.name)
            .field("is_rational", &self.is_rational)
            .field("params", &self.params)
            .finish()
    }
}

impl AnalyticFunction {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_rational(&self) -> bool {
        self.is_rational
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn descriptor(&self) -> &FunctionDescriptor {
        &self.descriptor
    }

    pub fn eval(&self, z: &Point2) -> Result<C64, EvalError> {
        check_interior(z)?;
        self.inner.eval(z)
    }

    pub fn eval_near(&self, p: &ApproachPoint) -> Result<C64, EvalError> {
        let z = p.point();
        if p.gap().is_none() {
            return Err(EvalError::NotInterior(z.z1, z.z2));
        }
        self.inner.eval_near(p)
    }

    pub fn diagonal_override(&self, z: C64) -> Option<C64> {
        self.inner.diagonal_value(z)
    }

    pub fn log_branch(&self, z: &Point2) -> Option<f64> {
        self.inner.log_branch(z)
    }

    /// The constant function `ω`.
    pub fn constant(omega: C64) -> Result<Self, CatalogError> {
        let f = rational(BiPoly::constant(omega), BiPoly::constant(C64::new(1.0, 0.0)))?;
        Ok(f.renamed("constant"))
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Largest `|φ|` on the quasi-random interior sample, with its location.
    pub fn schur_sample(&self, n: usize, seed: u64) -> Result<(f64, Point2), EvalError> {
        let mut worst = (0.0, Point2::real(0.0, 0.0));
        for z in design::bidisk_points(n, seed) {
            let m = self.eval(&z)?.norm();
            if !(m <= worst.0) {
                worst = (m, z);
            }
        }
        Ok(worst)
    }
}

/// The four example functions.
pub fn builtin(which: Builtin, params: &BTreeMap<String, f64>) -> Result<AnalyticFunction, CatalogError> {
    let allowed: &[&str] = if which == Builtin::Phi4 { &["N"] } else { &[] };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CatalogError::BadParam {
            name: k.clone(),
            reason: format!("not a parameter of {}", which.name()),
        });
    }
    let mut descriptor = FunctionDescriptor::builtin(which);
    let (inner, is_rational, params): (Arc<dyn Evaluator>, bool, BTreeMap<String, f64>) = match which {
        Builtin::Phi1 => (Arc::new(Rational2::new(phi1_numer(), phi1_denom())), true, BTreeMap::new()),
        Builtin::Phi2 => (Arc::new(Phi2), false, BTreeMap::new()),
        Builtin::Phi3 => (Arc::new(Rational2::new(phi3_numer(), phi3_denom())), true, BTreeMap::new()),
        Builtin::Phi4 => {
            let n = params.get("N").copied().unwrap_or(PHI4_DEFAULT_TERMS as f64);
            if !(n >= 1.0 && n.fract() == 0.0 && n <= 1000.0) {
                return Err(CatalogError::BadParam {
                    name: "N".into(),
                    reason: format!("truncation must be an integer in [1, 1000], got {n}"),
                });
            }
            let mut p = BTreeMap::new();
            p.insert("N".to_string(), n);
            descriptor.params = p.clone();
            (Arc::new(Phi4 { terms: n as usize }), true, p)
        }
    };
    Ok(AnalyticFunction {
        name: which.name().to_string(),
        is_rational,
        params,
        descriptor,
        inner,
    })
}

pub fn phi1_numer() -> BiPoly {
    // -4 z1 z2² + z2² + 3 z1 z2 - z1 + z2
    BiPoly::from_real(&[&[0.0, 1.0, 1.0], &[-1.0, 3.0, -4.0]])
}

pub fn phi1_denom() -> BiPoly {
    // z2² - z1 z2 - z1 - 3 z2 + 4
    BiPoly::from_real(&[&[4.0, -3.0, 1.0], &[-1.0, -1.0]])
}

pub fn phi3_numer() -> BiPoly {
    // 3 z1 z2 - 2 z1 - z2
    BiPoly::from_real(&[&[0.0, -1.0], &[-2.0, 3.0]])
}

pub fn phi3_denom() -> BiPoly {
    // 3 - z1 - 2 z2
    BiPoly::from_real(&[&[3.0, -2.0], &[-1.0]])
}

/// Rational function from coefficient grids, accepted only if it passes
/// the sampled Schur and pole checks.
pub fn rational(numer: BiPoly, denom: BiPoly) -> Result<AnalyticFunction, CatalogError> {
    rational_with_seed(numer, denom, design::DEFAULT_SEED)
}

pub fn rational_with_seed(numer: BiPoly, denom: BiPoly, seed: u64) -> Result<AnalyticFunction, CatalogError> {
    let r = Rational2::new(numer, denom);
    let scale = r.denom.l1_norm();
    for z in design::bidisk_points(SCHUR_SAMPLES, seed) {
        let d = r.denom.eval(z.z1, z.z2);
        if d.norm() <= 1e-12 * scale {
            return Err(CatalogError::PoleInSample(z.z1, z.z2));
        }
        let v = r.numer.eval(z.z1, z.z2) / d;
        if !(v.norm() <= 1.0 + SCHUR_TOL) {
            return Err(CatalogError::NotSchur {
                modulus: v.norm(),
                z1: z.z1,
                z2: z.z2,
            });
        }
    }
    let descriptor = FunctionDescriptor {
        rational: Some(RationalJson {
            numer: poly_to_grid(&r.numer),
            denom: poly_to_grid(&r.denom),
        }),
        ..FunctionDescriptor::default()
    };
    Ok(AnalyticFunction {
        name: "rational".into(),
        is_rational: true,
        params: BTreeMap::new(),
        descriptor,
        inner: Arc::new(r),
    })
}

/// A random rational Schur function with a C point at a random torus point.
///
/// The base is `phi1` or the rational function built from atoms at both
/// endpoints of `[-1, 1]` (both have a C point at `(1, 1)`). It is rotated to
/// the chosen point, composed with a disk automorphism and multiplied by
/// one-variable Blaschke factors, all of which preserve the C point.
pub fn random_c_point_rational(rng: &mut impl rand::Rng) -> Result<(AnalyticFunction, BoundaryPoint), CatalogError> {
    let one = BiPoly::constant(C64::new(1.0, 0.0));
    let z1 = BiPoly::monomial(C64::new(1.0, 0.0), 1, 0);
    let z2 = BiPoly::monomial(C64::new(1.0, 0.0), 0, 1);
    let (mut numer, mut denom) = if rng.gen_bool(0.5) {
        (phi1_numer(), phi1_denom())
    } else {
        let (wp, wm) = (rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0));
        let base = one.add(&z1).mul(&one.add(&z2));
        let plus = one.sub(&z2).mul(&one.add(&z1)).scale(C64::new(2.0 * wp, 0.0));
        let minus = one.sub(&z1).mul(&one.add(&z2)).scale(C64::new(2.0 * wm, 0.0));
        (base.sub(&plus).sub(&minus), base.add(&plus).add(&minus))
    };
    let tau = BoundaryPoint::from_angles(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
    numer = numer.scale_vars(tau.tau1().conj(), tau.tau2().conj());
    denom = denom.scale_vars(tau.tau1().conj(), tau.tau2().conj());
    let a = C64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(-PI..PI));
    let rot = C64::from_polar(1.0, rng.gen_range(-PI..PI));
    (numer, denom) = (
        numer.sub(&denom.scale(a)).scale(rot),
        denom.sub(&numer.scale(a.conj())),
    );
    for var in 0..2 {
        if rng.gen_bool(0.5) {
            let b = C64::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(-PI..PI));
            let z = if var == 0 { &z1 } else { &z2 };
            numer = numer.mul(&z.sub(&BiPoly::constant(b)));
            denom = denom.mul(&one.sub(&z.scale(b.conj())));
        }
    }
    Ok((rational(numer, denom)?.renamed("random-c-point"), tau))
}

/// `φ = (1 - ψ)/(1 + ψ)` with `ψ(z) = 4 ∫ [(1-t)(1+z1)/(1-z1) + (1+t)(1+z2)/(1-z2)]^{-1} dμ(t)`.
pub fn from_measure_recipe(mu: &MeasureSpec) -> Result<AnalyticFunction, CatalogError> {
    let recipe = Recipe { mu: mu.clone() };
    // the construction must produce finite values; probe once at the origin
    recipe.eval(&Point2::real(0.0, 0.0))?;
    Ok(AnalyticFunction {
        name: "recipe".into(),
        is_rational: mu.is_atomic(),
        params: BTreeMap::new(),
        descriptor: FunctionDescriptor {
            recipe: Some(RecipeJson { measure: mu.clone() }),
            ..FunctionDescriptor::default()
        },
        inner: Arc::new(recipe),
    })
}

/// Quotient of bivariate polynomials.
#[derive(Debug)]
pub struct Rational2 {
    numer: BiPoly,
    denom: BiPoly,
    shifted: RwLock<Option<(BoundaryPoint, BiPoly, BiPoly)>>,
}

impl Rational2 {
    pub fn new(numer: BiPoly, denom: BiPoly) -> Self {
        Self {
            numer,
            denom,
            shifted: RwLock::new(None),
        }
    }

    pub fn numer(&self) -> &BiPoly {
        &self.numer
    }

    pub fn denom(&self) -> &BiPoly {
        &self.denom
    }

    fn shifted_to(&self, base: &BoundaryPoint) -> (BiPoly, BiPoly) {
        if let Ok(guard) = self.shifted.read() {
            if let Some((b, n, d)) = guard.as_ref() {
                if b == base {
                    return (n.clone(), d.clone());
                }
            }
        }
        let n = snap_constant(self.numer.taylor_shift(base.tau1(), base.tau2()), &self.numer);
        let d = snap_constant(self.denom.taylor_shift(base.tau1(), base.tau2()), &self.denom);
        if let Ok(mut guard) = self.shifted.write() {
            *guard = Some((*base, n.clone(), d.clone()));
        }
        (n, d)
    }
}

/// A constant term at the rounding level of the shift is an exact zero.
fn snap_constant(p: BiPoly, original: &BiPoly) -> BiPoly {
    let c00 = p.coeff(0, 0);
    let (d1, d2) = original.degrees();
    let floor = 16.0 * f64::EPSILON * original.l1_norm() * ((d1 + d2 + 1) as f64);
    if c00 != C64::new(0.0, 0.0) && c00.norm() <= floor {
        p.sub(&BiPoly::constant(c00))
    } else {
        p
    }
}

impl Evaluator for Rational2 {
    fn eval(&self, z: &Point2) -> Result<C64, EvalError> {
        let d = self.denom.eval(z.z1, z.z2);
        if d == C64::new(0.0, 0.0) {
            return Err(EvalError::Pole(z.z1, z.z2));
        }
        finite(self.numer.eval(z.z1, z.z2) / d, z)
    }

    fn eval_near(&self, p: &ApproachPoint) -> Result<C64, EvalError> {
        let (n, d) = self.shifted_to(&p.base);
        let [u1, u2] = p.offset;
        let den = d.eval(u1, u2);
        let z = p.point();
        if den == C64::new(0.0, 0.0) {
            return Err(EvalError::Pole(z.z1, z.z2));
        }
        finite(n.eval(u1, u2) / den, &z)
    }
}

/// `log(1 + x) / x`, accurate for small `x`.
fn log1p_over_x(x: C64) -> C64 {
    if x.norm() < 1e-3 {
        // alternating series, 7 terms are enough below 1e-3
        let mut sum = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        for k in 1..=7 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += p * (sign / k as f64);
            p *= x;
        }
        sum
    } else {
        (C64::new(1.0, 0.0) + x).ln() / x
    }
}

/// The logarithmic example. Writing `a = (1+z1)/(1-z1)`, `b = (1+z2)/(1-z2)`,
/// `φ = (1 - ψ)/(1 + ψ)` with `ψ = 4 log(b/a)/(b - a)`, which is the closed form
/// with the removable diagonal singularity made explicit.
#[derive(Debug, Clone, Copy)]
pub struct Phi2;

impl Phi2 {
    /// `ψ` from `a`, `b - a` and `log(b) - log(a)` branch data.
    fn psi(a: C64, b_minus_a: C64) -> C64 {
        let x = b_minus_a / a;
        log1p_over_x(x) * 4.0 / a
    }

    fn cayley(psi: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        (one - psi) / (one + psi)
    }
}

impl Evaluator for Phi2 {
    fn eval(&self, z: &Point2) -> Result<C64, EvalError> {
        let one = C64::new(1.0, 0.0);
        let (w1, w2) = (one - z.z1, one - z.z2);
        let a = (one + z.z1) / w1;
        let b_minus_a = (z.z2 - z.z1) * 2.0 / (w1 * w2);
        finite(Self::cayley(Self::psi(a, b_minus_a)), z)
    }

    fn eval_near(&self, p: &ApproachPoint) -> Result<C64, EvalError> {
        if !p.base.is_chi() {
            return self.eval(&p.point());
        }
        let [u1, u2] = p.offset;
        let two = C64::new(2.0, 0.0);
        let a = -(two + u1) / u1;
        let b_minus_a = (u2 - u1) * 2.0 / (u1 * u2);
        finite(Self::cayley(Self::psi(a, b_minus_a)), &p.point())
    }

    fn diagonal_value(&self, z: C64) -> Option<C64> {
        Some((z * 5.0 - 3.0) / (C64::new(5.0, 0.0) - z * 3.0))
    }

    fn log_branch(&self, z: &Point2) -> Option<f64> {
        let one = C64::new(1.0, 0.0);
        let a = (one + z.z1) / (one - z.z1);
        let b = (one + z.z2) / (one - z.z2);
        Some((b.ln() - a.ln()).im)
    }
}

/// `N`-term partial product of `∏ (2(1-2^-n) - z1 - z2) / (2 - (1-2^-n)(z1+z2))`.
#[derive(Debug, Clone, Copy)]
pub struct Phi4 {
    pub terms: usize,
}

impl Evaluator for Phi4 {
    fn eval(&self, z: &Point2) -> Result<C64, EvalError> {
        let s = z.z1 + z.z2;
        let mut prod = C64::new(1.0, 0.0);
        for n in 1..=self.terms {
            let a = 1.0 - 0.5f64.powi(n as i32);
            prod *= (C64::new(2.0 * a, 0.0) - s) / (C64::new(2.0, 0.0) - s * a);
        }
        finite(prod, z)
    }

    fn eval_near(&self, p: &ApproachPoint) -> Result<C64, EvalError> {
        if !p.base.is_chi() {
            return self.eval(&p.point());
        }
        let s = p.offset[0] + p.offset[1];
        let mut prod = C64::new(1.0, 0.0);
        for n in 1..=self.terms {
            let e = 0.5f64.powi(n as i32 - 1);
            let a = 1.0 - 0.5f64.powi(n as i32);
            prod *= (-s - e) / (C64::new(e, 0.0) - s * a);
        }
        finite(prod, &p.point())
    }
}

/// Cayley transform of the measure integral `ψ`.
#[derive(Debug, Clone)]
pub struct Recipe {
    mu: MeasureSpec,
}

impl Recipe {
    fn eval_parts(&self, a: C64, b_minus_a: C64, z: &Point2) -> Result<C64, EvalError> {
        // (1-t) a + (1+t) b = (2a + (b - a)) + t (b - a)
        let alpha = a * 2.0 + b_minus_a;
        let integral = self.mu.reciprocal_linear(alpha, b_minus_a, Weight::One)?;
        let psi = integral * 4.0;
        let one = C64::new(1.0, 0.0);
        finite((one - psi) / (one + psi), z)
    }
}

impl Evaluator for Recipe {
    fn eval(&self, z: &Point2) -> Result<C64, EvalError> {
        let one = C64::new(1.0, 0.0);
        let (w1, w2) = (one - z.z1, one - z.z2);
        let a = (one + z.z1) / w1;
        let b_minus_a = (z.z2 - z.z1) * 2.0 / (w1 * w2);
        self.eval_parts(a, b_minus_a, z)
    }

    fn eval_near(&self, p: &ApproachPoint) -> Result<C64, EvalError> {
        if !p.base.is_chi() {
            return self.eval(&p.point());
        }
        let [u1, u2] = p.offset;
        let two = C64::new(2.0, 0.0);
        let a = -(two + u1) / u1;
        let b_minus_a = (u2 - u1) * 2.0 / (u1 * u2);
        self.eval_parts(a, b_minus_a, &p.point())
    }
}
