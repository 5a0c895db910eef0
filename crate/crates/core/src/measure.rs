//! Positive measures on [-1, 1]: finitely many atoms plus an optional
//! polynomial density.
//!
//! Every transform in this crate reduces to integrals of the form
//! `∫ m(t) / (alpha + beta t) dμ(t)` with `m(t) = 1` or `m(t) = 1 - t²`,
//! which [`MeasureSpec::reciprocal_linear`] evaluates.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::GaussLegendre;

type C64 = Complex64;

pub const DEFAULT_QUADRATURE_ORDER: usize = 200;

/// Poles closer to the support than this many node spacings are handled by
/// singularity subtraction instead of the fixed rule.
const NEAR_CUT_SPACINGS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("atom at t = {t} with weight {w}: locations must lie in [-1, 1] and weights be positive")]
    InvalidAtom { t: f64, w: f64 },
    #[error("density is negative ({value}) at t = {t}")]
    NegativeDensity { t: f64, value: f64 },
    #[error("density coefficients must be finite and non-empty")]
    InvalidDensity,
    #[error("quadrature order must be at least 1")]
    InvalidOrder,
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("integrand pole {0} lies on the support [-1, 1]")]
    PoleOnSupport(C64),
    #[error("unknown density kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Constant,
    Poly,
}

/// Polynomial density `sum_k coeffs[k] t^k` on [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub kind: DensityKind,
    pub coeffs: Vec<f64>,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
}

fn default_order() -> usize {
    DEFAULT_QUADRATURE_ORDER
}

impl Density {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: DensityKind::Constant,
            coeffs: vec![c],
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn poly(coeffs: Vec<f64>) -> Self {
        Self {
            kind: DensityKind::Poly,
            coeffs,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// Weight multiplying the measure inside the integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    /// `1 - t²`, the weight of the Cauchy transform part.
    OneMinusSquare,
}

impl Weight {
    fn eval(self, t: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::OneMinusSquare => 1.0 - t * t,
        }
    }

    fn coeffs(self) -> &'static [f64] {
        match self {
            Weight::One => &[1.0],
            Weight::OneMinusSquare => &[1.0, 0.0, -1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasureJson {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<Density>,
}

/// A positive measure on [-1, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct MeasureSpec {
    atoms: Vec<Atom>,
    density: Option<Density>,
    rule: Option<Arc<GaussLegendre>>,
}

impl PartialEq for MeasureSpec {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.density == other.density
    }
}

impl TryFrom<MeasureJson> for MeasureSpec {
    type Error = MeasureError;

    fn try_from(j: MeasureJson) -> Result<Self, Self::Error> {
        MeasureSpec::new(j.atoms, j.density)
    }
}

impl From<MeasureSpec> for MeasureJson {
    fn from(m: MeasureSpec) -> Self {
        MeasureJson {
            atoms: m.atoms,
            density: m.density,
        }
    }
}

impl MeasureSpec {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>) -> Result<Self, MeasureError> {
        for a in &atoms {
            if !(a.t.is_finite() && (-1.0..=1.0).contains(&a.t) && a.w.is_finite() && a.w > 0.0) {
                return Err(MeasureError::InvalidAtom { t: a.t, w: a.w });
            }
        }
        let rule = match &density {
            Some(d) => {
                if d.coeffs.is_empty() || d.coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(MeasureError::InvalidDensity);
                }
                if d.kind == DensityKind::Constant && d.coeffs.len() != 1 {
                    return Err(MeasureError::InvalidDensity);
                }
                if d.quadrature_order == 0 {
                    return Err(MeasureError::InvalidOrder);
                }
                check_nonnegative(d)?;
                Some(Arc::new(GaussLegendre::new(d.quadrature_order)))
            }
            None => None,
        };
        let m = Self {
            atoms,
            density,
            rule,
        };
        if m.moment(0) <= 0.0 {
            return Err(MeasureError::ZeroMass);
        }
        Ok(m)
    }

    /// Lebesgue measure `dt` on [-1, 1].
    pub fn lebesgue() -> Self {
        Self::new(Vec::new(), Some(Density::constant(1.0))).expect("Lebesgue measure is valid")
    }

    /// Point mass `w δ_t`.
    pub fn point_mass(t: f64, w: f64) -> Result<Self, MeasureError> {
        Self::new(vec![Atom { t, w }], None)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Purely atomic measures give rational transforms.
    pub fn is_atomic(&self) -> bool {
        self.density.is_none()
    }

    /// `∫ t^k dμ(t)`.
    pub fn moment(&self, k: u32) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.w * a.t.powi(k as i32)).sum();
        let dens = match (&self.density, &self.rule) {
            (Some(d), Some(rule)) => rule.integrate(|t| d.eval(t) * t.powi(k as i32)),
            _ => 0.0,
        };
        atoms + dens
    }

    /// The reflected measure `t -> -t`.
    pub fn reflected(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { t: -a.t, w: a.w })
            .collect();
        let density = self.density.as_ref().map(|d| Density {
            kind: d.kind,
            coeffs: d
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
                .collect(),
            quadrature_order: d.quadrature_order,
        });
        Self {
            atoms,
            density,
            rule: self.rule.clone(),
        }
    }

    /// `∫ m(t) / (alpha + beta t) dμ(t)`.
    pub fn reciprocal_linear(&self, alpha: C64, beta: C64, weight: Weight) -> Result<C64, MeasureError> {
        let mut sum = C64::new(0.0, 0.0);
        for a in &self.atoms {
            let den = alpha + beta * a.t;
            let m = weight.eval(a.t);
            if m == 0.0 {
                continue;
            }
            if den == C64::new(0.0, 0.0) {
                return Err(MeasureError::PoleOnSupport(C64::new(a.t, 0.0)));
            }
            sum += a.w * m / den;
        }
        if let (Some(d), Some(rule)) = (&self.density, &self.rule) {
            sum += density_reciprocal_linear(d, rule, alpha, beta, weight)?;
        }
        Ok(sum)
    }
}

fn check_nonnegative(d: &Density) -> Result<(), MeasureError> {
    const SAMPLES: usize = 2001;
    let scale = d.coeffs.iter().map(|c| c.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    for i in 0..SAMPLES {
        let t = -1.0 + 2.0 * i as f64 / (SAMPLES - 1) as f64;
        let v = d.eval(t);
        if v < -1e-12 * scale {
            return Err(MeasureError::NegativeDensity { t, value: v });
        }
    }
    Ok(())
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sup-norm distance from a complex point to the segment [-1, 1].
pub fn dist_to_segment(p: C64) -> f64 {
    let x = p.re.clamp(-1.0, 1.0);
    (p - C64::new(x, 0.0)).norm()
}

/// `∫_{-1}^{1} dt / (t - p)` for `p` off the segment.
pub(crate) fn log_kernel(p: C64) -> C64 {
    (C64::new(1.0, 0.0) - p).ln() - (C64::new(-1.0, 0.0) - p).ln()
}

fn density_reciprocal_linear(
    d: &Density,
    rule: &GaussLegendre,
    alpha: C64,
    beta: C64,
    weight: Weight,
) -> Result<C64, MeasureError> {
    let coeffs = poly_mul(&d.coeffs, weight.coeffs());
    let eval = |t: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c);
    if beta == C64::new(0.0, 0.0) {
        let mass = rule.integrate(eval);
        return Ok(mass / alpha);
    }
    let pole = -alpha / beta;
    let dist = dist_to_segment(pole);
    if dist == 0.0 {
        return Err(MeasureError::PoleOnSupport(pole));
    }
    if dist >= NEAR_CUT_SPACINGS * rule.max_spacing() || !pole.is_finite() {
        return Ok(rule.integrate(|t| C64::new(eval(t), 0.0) / (alpha + beta * t)));
    }
    // p(t) = (t - pole) r(t) + p(pole); the quotient r is a polynomial and
    // integrates exactly, the remainder carries the logarithmic kernel.
    let n = coeffs.len();
    let mut quotient = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut acc = C64::new(0.0, 0.0);
    for k in (0..n).rev() {
        acc = acc * pole + coeffs[k];
        if k > 0 {
            quotient[k - 1] = acc;
        }
    }
    let remainder = acc;
    let poly_integral: C64 = quotient
        .iter()
        .enumerate()
        .filter(|(k, _)| k % 2 == 0)
        .map(|(k, &c)| c * (2.0 / (k as f64 + 1.0)))
        .sum();
    Ok((poly_integral + remainder * log_kernel(pole)) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lebesgue_moments() {
        let m = MeasureSpec::lebesgue();
        assert_relative_eq!(m.moment(0), 2.0, epsilon = 1e-14);
        assert!(m.moment(1).abs() < 1e-15);
        assert_relative_eq!(m.moment(2), 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn atom_moments() {
        for t0 in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let m = MeasureSpec::point_mass(t0, 1.0).unwrap();
            assert_eq!(m.moment(0), 1.0);
            assert_eq!(m.moment(1), t0);
        }
        let m = MeasureSpec::new(
            vec![Atom { t: -1.0, w: 1.0 }, Atom { t: 1.0, w: 1.0 }],
            None,
        )
        .unwrap();
        assert_eq!(m.moment(0), 2.0);
        assert_eq!(m.moment(1), 0.0);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            MeasureSpec::point_mass(1.5, 1.0),
            Err(MeasureError::InvalidAtom { .. })
        ));
        assert!(MeasureSpec::point_mass(0.0, 0.0).is_err());
        assert!(MeasureSpec::point_mass(0.0, -1.0).is_err());
        assert_eq!(MeasureSpec::new(vec![], None), Err(MeasureError::ZeroMass));
        assert!(matches!(
            MeasureSpec::new(vec![], Some(Density::poly(vec![0.0, 1.0]))),
            Err(MeasureError::NegativeDensity { .. })
        ));
        assert!(MeasureSpec::new(vec![], Some(Density::poly(vec![1.0, 1.0]))).is_ok());
    }

    #[test]
    fn json_schema() {
        let json = r#"{"atoms": [{"t": 0.0, "w": 1.0}],
                       "density": {"kind": "constant", "coeffs": [1.0], "quadrature_order": 200}}"#;
        let m: MeasureSpec = serde_json::from_str(json).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_relative_eq!(m.moment(0), 3.0, epsilon = 1e-14);
        let back: MeasureSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"atoms": [{"t": 2.0, "w": 1.0}]}"#;
        assert!(serde_json::from_str::<MeasureSpec>(bad).is_err());
        let bad_kind = r#"{"density": {"kind": "spline", "coeffs": [1.0]}}"#;
        assert!(serde_json::from_str::<MeasureSpec>(bad_kind).is_err());
    }

    // closed form of ∫_{-1}^{1} dt / (alpha + beta t)
    fn lebesgue_kernel(alpha: C64, beta: C64) -> C64 {
        ((alpha + beta).ln() - (alpha - beta).ln()) / beta
    }

    #[test]
    fn kernel_far_and_near_agree_with_closed_form() {
        let m = MeasureSpec::lebesgue();
        for (alpha, beta) in [
            (c(3.0, 1.0), c(1.0, 0.0)),
            (c(0.3, 0.5), c(1.0, 0.0)),
            (c(-0.2, 1e-6), c(1.0, 0.0)),
            (c(0.5, -1e-9), c(1.0, 0.0)),
            (c(2.0, 1.0), c(0.5, -0.3)),
        ] {
            let got = m.reciprocal_linear(alpha, beta, Weight::One).unwrap();
            let want = lebesgue_kernel(alpha, beta);
            assert!((got - want).norm() < 1e-12 * want.norm().max(1.0), "{alpha} {beta}: {got} vs {want}");
        }
    }

    #[test]
    fn weighted_kernel_near_cut() {
        // ∫ (1 - t²)/(t - ζ) dt = (1 - ζ²) log((ζ-1)/(ζ+1)) - 2ζ
        let m = MeasureSpec::lebesgue();
        for zeta in [c(0.3, 1e-8), c(-0.9, -1e-5), c(1.0, 1e-3), c(0.1, 2.0)] {
            let got = m.reciprocal_linear(-zeta, c(1.0, 0.0), Weight::OneMinusSquare).unwrap();
            let one = c(1.0, 0.0);
            let want = (one - zeta * zeta) * ((zeta - one) / (zeta + one)).ln() - zeta * 2.0;
            assert!((got - want).norm() < 1e-12, "{zeta}: {got} vs {want}");
        }
    }

    #[test]
    fn pole_on_support_is_an_error() {
        let m = MeasureSpec::lebesgue();
        assert!(m.reciprocal_linear(c(-0.5, 0.0), c(1.0, 0.0), Weight::One).is_err());
        let a = MeasureSpec::point_mass(0.5, 1.0).unwrap();
        assert!(a.reciprocal_linear(c(-0.5, 0.0), c(1.0, 0.0), Weight::One).is_err());
    }

    #[test]
    fn reflection_flips_odd_moments() {
        let m = MeasureSpec::new(
            vec![Atom { t: 0.25, w: 2.0 }],
            Some(Density::poly(vec![1.0, 0.5])),
        )
        .unwrap();
        let r = m.reflected();
        assert_relative_eq!(r.moment(0), m.moment(0), epsilon = 1e-14);
        assert_relative_eq!(r.moment(1), -m.moment(1), epsilon = 1e-14);
        assert_relative_eq!(r.moment(2), m.moment(2), epsilon = 1e-14);
    }
}
