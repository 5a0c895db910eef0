//! Homogeneous Pick functions of degree one on the product of upper
//! half-planes, their slope functions, and the measures that represent them.
//!
//! A positive measure `μ` on [-1, 1] gives
//!
//! * the slope function `η(w) = -4 ∫ dμ(t) / ((1 - t) + (1 + t) w)`,
//! * the homogeneous function `f(z1, z2) = 4 ∫ z1 z2 / ((1 + t) z1 + (1 - t) z2) dμ(t)`,
//! * its resolved form `f = A z1 + B z2 + (z2 - z1) g((z1 + z2)/(z2 - z1))` with
//!   `A = μ0 - μ1`, `B = μ0 + μ1` and `g(ζ) = ∫ (1 - t²)/(t - ζ) dμ(t)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{MeasureError, MeasureSpec, Weight};

type C64 = Complex64;

/// Default tolerance of [`linearity_test`].
pub const LINEARITY_TOL: f64 = 1e-6;
/// Points with `|z1 - z2| < DIAGONAL_TUBE * |z1|` use the diagonal limit of the resolved form.
pub const DIAGONAL_TUBE: f64 = 1e-8;
/// `|Im w|` below this routes the two-branch slope formula through the seam.
pub const SEAM_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PickError {
    #[error("w = {0} lies on the cut (-inf, 0]")]
    OnCut(C64),
    #[error("({0}, {1}) is not in the product of upper half-planes")]
    NotInDomain(C64, C64),
    #[error("zeta = {0} lies on [-1, 1]")]
    OnSegment(C64),
    #[error("no admissible rotation for w = {0}")]
    NoAdmissibleRotation(C64),
    #[error("sampled function failed at ({0}, {1}): {2}")]
    Sample(C64, C64, String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

fn in_upper_pair(z1: C64, z2: C64) -> Result<(), PickError> {
    if z1.im > 0.0 && z2.im > 0.0 {
        Ok(())
    } else {
        Err(PickError::NotInDomain(z1, z2))
    }
}

/// A sampled map `(z1, z2) -> f(z1, z2)` on the product of upper half-planes.
pub type SampledPick = Arc<dyn Fn(C64, C64) -> Result<C64, PickError> + Send + Sync>;
/// A sampled slope function `w -> η(w)`.
pub type SampledSlope = Arc<dyn Fn(C64) -> Result<C64, PickError> + Send + Sync>;

/// How the slope function is obtained.
#[derive(Clone)]
pub enum SlopeSource {
    Measure(MeasureSpec),
    /// Read off a homogeneous Pick function by rotation.
    Pick(Box<HomogeneousPick>),
    Sampled(SampledSlope),
}

/// A function `η` on `C \ (-inf, 0]` with `η` and `-w η(w)` both Pick.
#[derive(Clone)]
pub struct SlopeFunction {
    source: SlopeSource,
}

impl fmt::Debug for SlopeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            SlopeSource::Measure(m) => format!("measure {m:?}"),
            SlopeSource::Pick(_) => "pick".to_string(),
            SlopeSource::Sampled(_) => "sampled".to_string(),
        };
        f.debug_struct("SlopeFunction").field("source", &kind).finish()
    }
}

impl SlopeFunction {
    pub fn sampled(f: SampledSlope) -> Self {
        Self {
            source: SlopeSource::Sampled(f),
        }
    }

    pub fn source(&self) -> &SlopeSource {
        &self.source
    }

    pub fn eval(&self, w: C64) -> Result<C64, PickError> {
        if w.im == 0.0 && w.re <= 0.0 || !w.is_finite() {
            return Err(PickError::OnCut(w));
        }
        match &self.source {
            SlopeSource::Measure(mu) => {
                let one = C64::new(1.0, 0.0);
                Ok(mu.reciprocal_linear(one + w, w - one, Weight::One)? * -4.0)
            }
            SlopeSource::Pick(hp) => {
                if w.im < 0.0 {
                    Ok(rotation_eta(hp, w.conj(), None)?.0.conj())
                } else {
                    Ok(rotation_eta(hp, w, None)?.0)
                }
            }
            SlopeSource::Sampled(f) => f(w),
        }
    }

    /// Evaluation through a chosen rotation `s` (only for slopes read off a Pick function).
    pub fn eval_with_rotation(&self, w: C64, s: f64) -> Result<C64, PickError> {
        match &self.source {
            SlopeSource::Pick(hp) => Ok(rotation_eta(hp, w, Some(s))?.0),
            _ => self.eval(w),
        }
    }
}

/// `η(w) = -4 ∫ dμ(t) / ((1 - t) + (1 + t) w)`.
pub fn eta_from_measure(mu: &MeasureSpec) -> SlopeFunction {
    SlopeFunction {
        source: SlopeSource::Measure(mu.clone()),
    }
}

/// Admissible open interval of rotations `s` for which `(-e^{-is}/w, -e^{-is})`
/// lies in the product of upper half-planes.
pub fn rotation_interval(w: C64) -> Result<(f64, f64), PickError> {
    use std::f64::consts::PI;
    if w == C64::new(0.0, 0.0) || !w.is_finite() {
        return Err(PickError::OnCut(w));
    }
    let a = w.arg();
    let lo = (-a).max(0.0);
    let hi = (PI - a).min(PI);
    if hi - lo <= 1e-12 {
        return Err(PickError::NoAdmissibleRotation(w));
    }
    Ok((lo, hi))
}

/// Default rotation inside the admissible interval.
pub fn default_rotation(w: C64) -> Result<f64, PickError> {
    let (lo, hi) = rotation_interval(w)?;
    Ok(lo + 0.25 * (hi - lo))
}

fn rotation_eta(hp: &HomogeneousPick, w: C64, s: Option<f64>) -> Result<(C64, f64), PickError> {
    let s = match s {
        Some(s) => s,
        None => default_rotation(w)?,
    };
    let e = C64::from_polar(1.0, -s);
    let z2 = -e;
    let z1 = -e / w;
    let v = hp.eval(z1, z2)?;
    Ok((C64::from_polar(1.0, s) * v, s))
}

/// The slope function of a homogeneous Pick function, `η(w) = e^{is} f(-e^{-is}/w, -e^{-is})`.
pub fn f_to_eta(hp: &HomogeneousPick) -> SlopeFunction {
    SlopeFunction {
        source: SlopeSource::Pick(Box::new(hp.clone())),
    }
}

/// `|η_s1(w) - η_s2(w)|` for two rotations at 1/4 and 3/4 of the admissible interval.
pub fn rotation_discrepancy(hp: &HomogeneousPick, w: C64) -> Result<f64, PickError> {
    let (lo, hi) = rotation_interval(w)?;
    let a = rotation_eta(hp, w, Some(lo + 0.25 * (hi - lo)))?.0;
    let b = rotation_eta(hp, w, Some(lo + 0.75 * (hi - lo)))?.0;
    Ok((a - b).norm())
}

/// Which coordinate the slope ratio puts in the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `Dφ(τ)[h] = -ω k2 η(k2 / k1)` with `k_i = conj(τ_i) h_i`.
    Standard,
    /// `Dφ(τ)[h] = -ω k1 η(k1 / k2)`.
    Swapped,
}

impl Convention {
    /// The ratio at which `η` is evaluated for the rotated direction `(k1, k2)`.
    pub fn ratio(self, k1: C64, k2: C64) -> C64 {
        match self {
            Convention::Standard => k2 / k1,
            Convention::Swapped => k1 / k2,
        }
    }

    /// The coordinate multiplying `η`.
    pub fn prefactor(self, k1: C64, k2: C64) -> C64 {
        match self {
            Convention::Standard => k2,
            Convention::Swapped => k1,
        }
    }

    /// Derivative predicted by a slope function for the rotated direction `(k1, k2)`.
    pub fn derivative(self, eta: &SlopeFunction, omega: C64, k1: C64, k2: C64) -> Result<C64, PickError> {
        Ok(-omega * self.prefactor(k1, k2) * eta.eval(self.ratio(k1, k2))?)
    }
}

/// The representation behind a [`HomogeneousPick`].
#[derive(Clone)]
pub enum PickRepr {
    Measure(MeasureSpec),
    /// `λ1 z1 + λ2 z2`.
    Linear(C64, C64),
    /// `-z2 η(z2/z1)`, with the conjugate branch below the real axis.
    Slope(SlopeFunction),
    Sampled(SampledPick),
}

/// A homogeneous Pick function of degree one together with the linear
/// coefficients `A`, `B` of its resolved form.
#[derive(Clone)]
pub struct HomogeneousPick {
    a: f64,
    b: f64,
    repr: PickRepr,
}

impl fmt::Debug for HomogeneousPick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            PickRepr::Measure(_) => "measure",
            PickRepr::Linear(..) => "linear",
            PickRepr::Slope(_) => "slope",
            PickRepr::Sampled(_) => "sampled",
        };
        f.debug_struct("HomogeneousPick")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("repr", &kind)
            .finish()
    }
}

/// Richardson-accelerated real part of `½ f(is - 1, is + 1)`, which tends to `μ1`
/// with error `O(1/s²)`.
fn estimate_first_moment(f: &dyn Fn(C64, C64) -> Result<C64, PickError>) -> Result<f64, PickError> {
    let scales = [16.0, 32.0, 64.0, 128.0];
    let mut row: Vec<f64> = Vec::with_capacity(scales.len());
    for s in scales {
        let v = f(C64::new(-1.0, s), C64::new(1.0, s))?;
        row.push(0.5 * v.re);
    }
    // eliminate s^-2, s^-4, s^-6
    let mut level = 1;
    while row.len() > 1 {
        let factor = 4f64.powi(level);
        row = row
            .windows(2)
            .map(|p| p[1] + (p[1] - p[0]) / (factor - 1.0))
            .collect();
        level += 1;
    }
    Ok(row[0])
}

impl HomogeneousPick {
    fn from_repr_estimated(repr: PickRepr) -> Result<Self, PickError> {
        let mut hp = Self { a: 0.0, b: 0.0, repr };
        let i = C64::new(0.0, 1.0);
        let mu0 = (hp.eval(i, i)? / (i * 2.0)).re;
        let mu1 = estimate_first_moment(&|z1, z2| hp.eval(z1, z2))?;
        hp.a = mu0 - mu1;
        hp.b = mu0 + mu1;
        Ok(hp)
    }

    pub fn linear(l1: C64, l2: C64) -> Self {
        Self {
            a: l1.re,
            b: l2.re,
            repr: PickRepr::Linear(l1, l2),
        }
    }

    /// Wraps a sampled function; `A` and `B` are estimated from its values.
    pub fn sampled(f: SampledPick) -> Result<Self, PickError> {
        Self::from_repr_estimated(PickRepr::Sampled(f))
    }

    /// `A = μ0 - μ1`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `B = μ0 + μ1`.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn repr(&self) -> &PickRepr {
        &self.repr
    }

    pub fn measure(&self) -> Option<&MeasureSpec> {
        match &self.repr {
            PickRepr::Measure(m) => Some(m),
            _ => None,
        }
    }

    /// Evaluation by the defining representation.
    pub fn eval(&self, z1: C64, z2: C64) -> Result<C64, PickError> {
        in_upper_pair(z1, z2)?;
        match &self.repr {
            PickRepr::Measure(mu) => {
                let integral = mu.reciprocal_linear(z1 + z2, z1 - z2, Weight::One)?;
                Ok(z1 * z2 * integral * 4.0)
            }
            PickRepr::Linear(l1, l2) => Ok(l1 * z1 + l2 * z2),
            PickRepr::Slope(eta) => slope_branch_eval(eta, z1, z2),
            PickRepr::Sampled(f) => f(z1, z2),
        }
    }

    /// `g(ζ)` of the resolved form, for `ζ` off [-1, 1].
    pub fn g(&self, zeta: C64) -> Result<C64, PickError> {
        if zeta.im == 0.0 && zeta.re.abs() <= 1.0 {
            return Err(PickError::OnSegment(zeta));
        }
        match &self.repr {
            PickRepr::Measure(mu) => Ok(mu.reciprocal_linear(-zeta, C64::new(1.0, 0.0), Weight::OneMinusSquare)?),
            PickRepr::Linear(..) => Ok(C64::new(0.0, 0.0)),
            _ => {
                // ½ f(ζ - 1, ζ + 1) = μ0 ζ + μ1 + g(ζ), and g(conj ζ) = conj g(ζ)
                let upper = zeta.im > 0.0;
                let z = if upper { zeta } else { zeta.conj() };
                if z.im == 0.0 {
                    return Err(PickError::NotInDomain(z - 1.0, z + 1.0));
                }
                let half = self.eval(z - 1.0, z + 1.0)? * 0.5;
                let mu0 = 0.5 * (self.a + self.b);
                let mu1 = 0.5 * (self.b - self.a);
                let g = half - z * mu0 - mu1;
                Ok(if upper { g } else { g.conj() })
            }
        }
    }

    /// Evaluation through the resolved form.
    pub fn resolved_eval(&self, z1: C64, z2: C64) -> Result<C64, PickError> {
        in_upper_pair(z1, z2)?;
        let d = z2 - z1;
        if d.norm() < DIAGONAL_TUBE * z1.norm() {
            return Ok(z1 * (self.a + self.b));
        }
        let zeta = (z1 + z2) / d;
        Ok(z1 * self.a + z2 * self.b + d * self.g(zeta)?)
    }
}

/// `f(z1, z2) = 4 ∫ z1 z2 / ((1 + t) z1 + (1 - t) z2) dμ(t)` in resolved form.
pub fn f_from_measure(mu: &MeasureSpec) -> HomogeneousPick {
    let (m0, m1) = (mu.moment(0), mu.moment(1));
    HomogeneousPick {
        a: m0 - m1,
        b: m0 + m1,
        repr: PickRepr::Measure(mu.clone()),
    }
}

/// `g(ζ) = ∫ (1 - t²)/(t - ζ) dμ(t)`.
pub fn cauchy_g(mu: &MeasureSpec) -> impl Fn(C64) -> Result<C64, PickError> + '_ {
    move |zeta| {
        if zeta.im == 0.0 && zeta.re.abs() <= 1.0 {
            return Err(PickError::OnSegment(zeta));
        }
        Ok(mu.reciprocal_linear(-zeta, C64::new(1.0, 0.0), Weight::OneMinusSquare)?)
    }
}

/// `i`-th moment `∫ t^k dμ`.
pub fn moments(mu: &MeasureSpec, k: u32) -> f64 {
    mu.moment(k)
}

fn slope_branch_eval(eta: &SlopeFunction, z1: C64, z2: C64) -> Result<C64, PickError> {
    let w = z2 / z1;
    if w.im.abs() < SEAM_TOL * w.norm() {
        // positive-ratio seam: both branches meet here
        return Ok(-z2 * eta.eval(C64::new(w.re, 0.0))?);
    }
    if w.im > 0.0 {
        Ok(-z2 * eta.eval(w)?)
    } else {
        Ok(-z2 * eta.eval(w.conj())?.conj())
    }
}

/// `f(z1, z2) = -z2 η(z2/z1)`, with `η(conj w)` conjugated when `z2/z1` is below the axis.
pub fn eta_to_f(eta: &SlopeFunction) -> Result<HomogeneousPick, PickError> {
    if let SlopeSource::Measure(mu) = eta.source() {
        // the formula above turns the slope of μ into the function of the reflected measure
        let refl = mu.reflected();
        let (m0, m1) = (refl.moment(0), refl.moment(1));
        return Ok(HomogeneousPick {
            a: m0 - m1,
            b: m0 + m1,
            repr: PickRepr::Slope(eta.clone()),
        });
    }
    HomogeneousPick::from_repr_estimated(PickRepr::Slope(eta.clone()))
}

/// Outcome of [`g_bound_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GBound {
    pub bounded: bool,
    pub bound_estimate: f64,
    pub witness: C64,
    /// `(distance to [-1, 1], sup |g|)` for each shell, nearest last.
    pub shells: Vec<(f64, f64)>,
    pub far_sup: f64,
}

/// Growth factor between successive shell sups above which `g` is reported unbounded.
pub const SHELL_GROWTH_LIMIT: f64 = 1.5;

fn stadium(d: f64, hints: &[f64]) -> Vec<C64> {
    use std::f64::consts::PI;
    let n = 401;
    let mut pts: Vec<C64> = (0..n)
        .map(|k| C64::new(-1.0 + 2.0 * k as f64 / (n - 1) as f64, d))
        .collect();
    pts.extend(hints.iter().map(|&x| C64::new(x, d)));
    for k in 1..16 {
        let th = PI / 2.0 * k as f64 / 16.0;
        pts.push(C64::new(1.0, 0.0) + C64::from_polar(d, th));
        pts.push(C64::new(-1.0, 0.0) + C64::from_polar(d, PI - th));
    }
    pts.push(C64::new(1.0 + d, 0.0));
    pts.push(C64::new(-1.0 - d, 0.0));
    pts
}

/// Samples `|g|` on shells at distances `10^-1 ... 10^-8` from [-1, 1] and on `|ζ| = 10^3`.
pub fn g_bound_probe(hp: &HomogeneousPick) -> Result<GBound, PickError> {
    use std::f64::consts::PI;
    let mut hints: Vec<f64> = hp
        .measure()
        .map(|m| m.atoms().iter().map(|a| a.t).collect())
        .unwrap_or_default();
    hints.sort_by(f64::total_cmp);
    hints.dedup();
    let mut shells = Vec::new();
    let mut best = (0.0f64, C64::new(0.0, 0.0));
    for k in 1..=8 {
        let d = 10f64.powi(-k);
        let mut sup = 0.0f64;
        for z in stadium(d, &hints) {
            let v = hp.g(z)?.norm();
            if v > sup {
                sup = v;
            }
            if v > best.0 {
                best = (v, z);
            }
        }
        shells.push((d, sup));
    }
    let mut far_sup = 0.0f64;
    for k in 0..64 {
        let z = C64::from_polar(1e3, PI * (k as f64 + 0.5) / 64.0);
        far_sup = far_sup.max(hp.g(z)?.norm());
    }
    let bounded = shells.windows(2).all(|p| {
        if p[0].1 == 0.0 {
            p[1].1 == 0.0
        } else {
            p[1].1 / p[0].1 < SHELL_GROWTH_LIMIT
        }
    });
    Ok(GBound {
        bounded,
        bound_estimate: best.0.max(far_sup),
        witness: best.1,
        shells,
        far_sup,
    })
}

/// Outcome of [`linearity_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Linearity {
    pub is_linear: bool,
    pub lambda: (C64, C64),
    pub residual: f64,
}

/// The fixed 64-point design: arguments `kπ/9`, `k = 1..8`, in each coordinate,
/// unit modulus in `z1` and moduli cycling through 0.5, 1, 2 in `z2`.
pub fn linearity_design() -> Vec<(C64, C64)> {
    use std::f64::consts::PI;
    let moduli = [0.5, 1.0, 2.0];
    let mut out = Vec::with_capacity(64);
    for i in 1..=8 {
        for j in 1..=8 {
            let idx = out.len();
            let z1 = C64::from_polar(1.0, i as f64 * PI / 9.0);
            let z2 = C64::from_polar(moduli[idx % 3], j as f64 * PI / 9.0);
            out.push((z1, z2));
        }
    }
    out
}

/// Complex least-squares fit of `values ≈ λ1 x1 + λ2 x2`.
pub fn fit_linear(points: &[(C64, C64)], values: &[C64]) -> (C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, zero, 0.0, zero, zero);
    for (&(x1, x2), &v) in points.iter().zip(values) {
        s11 += x1.norm_sqr();
        s22 += x2.norm_sqr();
        s12 += x1.conj() * x2;
        r1 += x1.conj() * v;
        r2 += x2.conj() * v;
    }
    // [s11 s12; conj(s12) s22] λ = [r1; r2]
    let det = s11 * s22 - s12.norm_sqr();
    if det.abs() <= 1e-300 {
        return (zero, zero);
    }
    let l1 = (r1 * s22 - s12 * r2) / det;
    let l2 = (r2 * s11 - s12.conj() * r1) / det;
    (l1, l2)
}

/// Fits `f ≈ λ1 z1 + λ2 z2` on [`linearity_design`]; linear when the relative
/// residual `max |f - λ·z| / max |f|` is below `tol`.
pub fn linearity_test(hp: &HomogeneousPick, tol: f64) -> Result<Linearity, PickError> {
    let design = linearity_design();
    let values = design
        .iter()
        .map(|&(z1, z2)| hp.eval(z1, z2))
        .collect::<Result<Vec<_>, _>>()?;
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let zero = C64::new(0.0, 0.0);
    if scale == 0.0 {
        return Ok(Linearity {
            is_linear: true,
            lambda: (zero, zero),
            residual: 0.0,
        });
    }
    let lambda = fit_linear(&design, &values);
    let residual = design
        .iter()
        .zip(&values)
        .map(|(&(z1, z2), v)| (v - lambda.0 * z1 - lambda.1 * z2).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(Linearity {
        is_linear: residual < tol,
        lambda,
        residual,
    })
}

/// Smallest imaginary part of `η(w)` and of `-w η(w)` over `points`.
pub fn pick_pair_margin(eta: &SlopeFunction, points: &[C64]) -> Result<f64, PickError> {
    let mut worst = f64::INFINITY;
    for &w in points {
        let e = eta.eval(w)?;
        worst = worst.min(e.im).min((-w * e).im);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, Density};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn atom(t: f64) -> MeasureSpec {
        MeasureSpec::point_mass(t, 1.0).unwrap()
    }

    #[test]
    fn moment_examples() {
        let leb = MeasureSpec::lebesgue();
        assert_relative_eq!(moments(&leb, 0), 2.0, epsilon = 1e-14);
        assert!(moments(&leb, 1).abs() < 1e-15);
        assert_eq!(moments(&atom(0.3), 0), 1.0);
        assert_eq!(moments(&atom(0.3), 1), 0.3);
        let two = MeasureSpec::new(vec![Atom { t: -1.0, w: 1.0 }, Atom { t: 1.0, w: 1.0 }], None).unwrap();
        assert_eq!((moments(&two, 0), moments(&two, 1)), (2.0, 0.0));
    }

    #[test]
    fn slope_examples() {
        let e0 = eta_from_measure(&atom(0.0));
        for w in [c(1.0, 0.0), c(0.3, 2.0), c(-3.0, 0.1)] {
            assert!((e0.eval(w).unwrap() - c(-4.0, 0.0) / (c(1.0, 0.0) + w)).norm() < 1e-14);
        }
        assert_relative_eq!(e0.eval(c(1.0, 0.0)).unwrap().re, -2.0);
        let e1 = eta_from_measure(&atom(1.0));
        for w in [c(2.0, 0.0), c(-1.0, 0.5)] {
            assert!((e1.eval(w).unwrap() + c(2.0, 0.0) / w).norm() < 1e-14);
        }
        assert!(matches!(e1.eval(c(-0.5, 0.0)), Err(PickError::OnCut(_))));
        assert!(matches!(e1.eval(c(0.0, 0.0)), Err(PickError::OnCut(_))));
    }

    #[test]
    fn lebesgue_slope_matches_antiderivative() {
        let eta = eta_from_measure(&MeasureSpec::lebesgue());
        assert_relative_eq!(eta.eval(c(1.0, 0.0)).unwrap().re, -4.0, epsilon = 1e-13);
        for w in crate::design::half_plane_points(20, 4) {
            let one = c(1.0, 0.0);
            // (1/(w-1)) [ln((1+w) + t(w-1))] from t = -1 to 1
            let antiderivative = ((c(2.0, 0.0) * w).ln() - c(2.0, 0.0).ln()) / (w - one) * -4.0;
            let closed = -(w.ln()) * 4.0 / (w - one);
            assert!((antiderivative - closed).norm() < 1e-12 * closed.norm().max(1.0));
            assert!((eta.eval(w).unwrap() - antiderivative).norm() < 1e-10, "{w}");
        }
    }

    #[test]
    fn homogeneous_examples() {
        let f1 = f_from_measure(&atom(1.0));
        let (z1, z2) = (c(0.3, 1.0), c(-2.0, 0.4));
        assert!((f1.eval(z1, z2).unwrap() - z2 * 2.0).norm() < 1e-14);
        assert_eq!((f1.a(), f1.b()), (0.0, 2.0));
        let leb = f_from_measure(&MeasureSpec::lebesgue());
        let closed = -(z1 * z2 * 4.0) / (z2 - z1) * (z1 / z2).ln();
        assert!((leb.eval(z1, z2).unwrap() - closed).norm() < 1e-12);
        let z = c(0.4, 0.7);
        assert!((leb.eval(z, z).unwrap() - z * 4.0).norm() < 1e-13);
        assert!(matches!(leb.eval(c(1.0, -0.1), z), Err(PickError::NotInDomain(..))));
    }

    #[test]
    fn cauchy_examples() {
        let leb = MeasureSpec::lebesgue();
        let g = cauchy_g(&leb);
        for zeta in [c(0.0, 0.5), c(0.9, 0.01), c(-3.0, -1.0), c(2.0, 0.0)] {
            let one = c(1.0, 0.0);
            let want = (one - zeta * zeta) * ((zeta - one) / (zeta + one)).ln() - zeta * 2.0;
            assert!((g(zeta).unwrap() - want).norm() < 1e-12, "{zeta}");
        }
        let mu = atom(0.4);
        let g = cauchy_g(&mu);
        let zeta = c(0.1, 0.2);
        assert!((g(zeta).unwrap() - c(1.0 - 0.16, 0.0) / (c(0.4, 0.0) - zeta)).norm() < 1e-14);
        let ends = MeasureSpec::new(vec![Atom { t: -1.0, w: 0.5 }, Atom { t: 1.0, w: 2.0 }], None).unwrap();
        assert_eq!(cauchy_g(&ends)(c(0.2, 0.3)).unwrap(), c(0.0, 0.0));
        assert!(matches!(cauchy_g(&leb)(c(0.5, 0.0)), Err(PickError::OnSegment(_))));
    }

    #[test]
    fn resolved_form_examples() {
        let leb = f_from_measure(&MeasureSpec::lebesgue());
        for (z1, z2) in crate::design::half_plane_pairs(200, 8) {
            let a = leb.eval(z1, z2).unwrap();
            let b = leb.resolved_eval(z1, z2).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm(), "{z1} {z2}");
        }
        let d1 = f_from_measure(&atom(1.0));
        let (z1, z2) = (c(1.0, 2.0), c(-0.5, 0.1));
        assert!((d1.resolved_eval(z1, z2).unwrap() - z2 * 2.0).norm() < 1e-14);
        let mix = f_from_measure(
            &MeasureSpec::new(vec![Atom { t: 0.2, w: 0.7 }], Some(Density::poly(vec![1.0, 0.5]))).unwrap(),
        );
        let i = c(0.0, 1.0);
        assert_eq!(mix.resolved_eval(i, i).unwrap(), i * (mix.a() + mix.b()));
        assert_relative_eq!(mix.a() + mix.b(), 2.0 * 2.7, epsilon = 1e-12);
    }

    #[test]
    fn slope_to_function_examples() {
        let f = eta_to_f(&eta_from_measure(&atom(1.0))).unwrap();
        let (z1, z2) = (c(0.2, 1.5), c(1.0, 0.3));
        assert!((f.eval(z1, z2).unwrap() - z1 * 2.0).norm() < 1e-13);
        assert!((f.eval(z2, z1).unwrap() - z2 * 2.0).norm() < 1e-13);
        let f0 = eta_to_f(&eta_from_measure(&atom(0.0))).unwrap();
        let want = z1 * z2 * 4.0 / (z1 + z2);
        assert!((f0.eval(z1, z2).unwrap() - want).norm() < 1e-13);
        assert!((f_from_measure(&atom(0.0)).eval(z1, z2).unwrap() - want).norm() < 1e-13);
        // seam
        let leb = eta_to_f(&eta_from_measure(&MeasureSpec::lebesgue())).unwrap();
        let z = c(0.3, 0.8);
        let on = leb.eval(z, z * 2.0).unwrap();
        let above = leb.eval(z, z * c(2.0, 1e-9)).unwrap();
        let below = leb.eval(z, z * c(2.0, -1e-9)).unwrap();
        assert!((on - above).norm() < 1e-8 && (on - below).norm() < 1e-8);
        let seam_exact = leb.eval(z, z * c(2.0, 1e-14)).unwrap();
        assert!((on - seam_exact).norm() < 1e-12);
    }

    #[test]
    fn reading_the_slope_off_a_function() {
        let f = HomogeneousPick::linear(c(0.0, 0.0), c(2.0, 0.0));
        let eta = f_to_eta(&f);
        for w in [c(0.5, 0.5), c(3.0, 0.0), c(-2.0, 0.1), c(0.2, -1.0)] {
            assert!((eta.eval(w).unwrap() - c(-2.0, 0.0)).norm() < 1e-14);
        }
        let leb = f_from_measure(&MeasureSpec::lebesgue());
        let eta = f_to_eta(&leb);
        let w = c(0.0, 1.0);
        let a = eta.eval_with_rotation(w, 0.01).unwrap();
        let b = eta.eval_with_rotation(w, 0.02).unwrap();
        assert!((a - b).norm() < 1e-10);
        assert!(rotation_discrepancy(&leb, c(1.5, 0.7)).unwrap() < 1e-10);
        assert!(matches!(rotation_interval(c(-1.0, 0.0)), Err(PickError::NoAdmissibleRotation(_))));
        assert!(matches!(eta.eval(c(-1.0, 0.0)), Err(PickError::OnCut(_))));
    }

    #[test]
    fn slope_roundtrip() {
        let mu = MeasureSpec::new(vec![Atom { t: 0.5, w: 1.0 }], Some(Density::constant(0.3))).unwrap();
        let eta = eta_from_measure(&mu);
        let back = f_to_eta(&eta_to_f(&eta).unwrap());
        for w in crate::design::half_plane_points(50, 2) {
            let (a, b) = (eta.eval(w).unwrap(), back.eval(w).unwrap());
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0), "{w}");
        }
    }

    #[test]
    fn g_probe_examples() {
        let leb = g_bound_probe(&f_from_measure(&MeasureSpec::lebesgue())).unwrap();
        assert!(leb.bounded, "{leb:?}");
        assert!(leb.bound_estimate.is_finite() && leb.bound_estimate < 10.0);
        let d0 = g_bound_probe(&f_from_measure(&atom(0.0))).unwrap();
        assert!(!d0.bounded);
        assert!(d0.witness.re.abs() < 1e-12);
        let d1 = g_bound_probe(&f_from_measure(&atom(1.0))).unwrap();
        assert!(d1.bounded);
        assert_eq!(d1.bound_estimate, 0.0);
    }

    #[test]
    fn linearity_examples() {
        let d1 = linearity_test(&f_from_measure(&atom(1.0)), LINEARITY_TOL).unwrap();
        assert!(d1.is_linear && d1.residual < 1e-12);
        assert!(d1.lambda.0.norm() < 1e-12 && (d1.lambda.1 - c(2.0, 0.0)).norm() < 1e-12);
        let leb = linearity_test(&f_from_measure(&MeasureSpec::lebesgue()), LINEARITY_TOL).unwrap();
        assert!(!leb.is_linear && leb.residual > 1e-3);
        let zero = linearity_test(&HomogeneousPick::linear(c(0.0, 0.0), c(0.0, 0.0)), LINEARITY_TOL).unwrap();
        assert!(zero.is_linear);
        assert_eq!(zero.lambda, (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn design_is_in_domain() {
        let d = linearity_design();
        assert_eq!(d.len(), 64);
        assert!(d.iter().all(|(a, b)| a.im > 0.0 && b.im > 0.0));
    }

    #[test]
    fn sampled_function_recovers_moments() {
        let mu = MeasureSpec::new(vec![Atom { t: 0.6, w: 0.5 }], Some(Density::poly(vec![1.0, 0.3]))).unwrap();
        let exact = f_from_measure(&mu);
        let inner = exact.clone();
        let sampled = HomogeneousPick::sampled(Arc::new(move |z1, z2| inner.eval(z1, z2))).unwrap();
        assert_relative_eq!(sampled.a(), exact.a(), epsilon = 1e-9);
        assert_relative_eq!(sampled.b(), exact.b(), epsilon = 1e-9);
        for zeta in [c(0.2, 0.3), c(-2.0, 1.0), c(0.5, -0.4)] {
            assert!((sampled.g(zeta).unwrap() - exact.g(zeta).unwrap()).norm() < 1e-8);
        }
    }
}
