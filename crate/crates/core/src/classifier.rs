//! Julia quotients, directional derivatives and the B / B+ / C classification
//! of torus points.
//!
//! Every estimate is computed on a geometric approach schedule in offset form
//! (see [`ApproachPoint`]) and every decision keeps its evidence. Sweeps over
//! directions may run in parallel; results are collected in input order and
//! folded sequentially, so reports are bit-identical across runs.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{AnalyticFunction, EvalError};
use crate::geometry::{
    cone_grid, radial_direction, ApproachPoint, BoundaryPoint, Direction, DirectionLattice, GeometryError,
    NontangentialCone, Point2, Schedule,
};
use crate::pick::{default_rotation, fit_linear, Convention, HomogeneousPick, PickError, SlopeFunction};
use crate::richardson::{extrapolate, extrapolate_noisy, VALUE_NOISE};

type C64 = Complex64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Pick(#[from] PickError),
    #[error("direction ({0}, {1}) leaves the bidisk at every level of the schedule")]
    NoUsableLevels(C64, C64),
    #[error("logarithm branch jumps by {jump:.3} between consecutive points near ({z1}, {z2})")]
    BranchFault { z1: C64, z2: C64, jump: f64 },
    #[error(
        "slope routes disagree at w = {w}: derivative route {direct}, homogeneous route {via_pick} (tolerance {tolerance:e})"
    )]
    ConventionFault {
        w: C64,
        direct: C64,
        via_pick: C64,
        tolerance: f64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl ClassifyError {
    /// Faults of the computation itself, as opposed to bad input.
    pub fn is_numerical_fault(&self) -> bool {
        matches!(
            self,
            ClassifyError::BranchFault { .. }
                | ClassifyError::ConventionFault { .. }
                | ClassifyError::Eval(EvalError::Pole(..) | EvalError::NonFinite(..))
        )
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub schedule: Schedule,
    pub richardson_levels: usize,
    /// Apertures of the cones over which Julia-quotient sups are reported.
    pub apertures: Vec<f64>,
    pub lattice: DirectionLattice,
    /// Allowed `| |ω| - 1 |` (and error of the extrapolated `ω`).
    pub omega_tol: f64,
    /// Allowed max/min ratio of the radial Julia quotient over the last quarter of the schedule.
    pub b_stability: f64,
    /// Radial quotients above this get a warning.
    pub large_quotient: f64,
    /// Ceiling for `|Dφ[h]| / |h|` along the near-tangential escalation family.
    pub bplus_ceiling: f64,
    pub escalation_eps: Vec<f64>,
    /// Tolerance on the linearity residual of the derivative.
    pub c_tol: f64,
    pub convention: Convention,
    /// Ratios at which the slope function is recovered once a B point is found.
    pub slope_ratios: Vec<C64>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            richardson_levels: 4,
            apertures: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            lattice: DirectionLattice::default(),
            omega_tol: 1e-6,
            b_stability: 1.5,
            large_quotient: 1e3,
            bplus_ceiling: 1e3,
            escalation_eps: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            c_tol: 1e-4,
            convention: Convention::Standard,
            slope_ratios: vec![
                C64::new(0.25, 0.0),
                C64::new(0.5, 0.0),
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(4.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(-1.0, 1.0),
                C64::new(1.0, -1.0),
            ],
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        self.schedule.validate()?;
        let bad = |m: &str| Err(ClassifyError::InvalidConfig(m.to_string()));
        if self.apertures.is_empty() || self.apertures.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return bad("apertures must be positive");
        }
        if self.apertures.windows(2).any(|w| w[1] <= w[0]) {
            return bad("apertures must be strictly increasing");
        }
        let positive = [
            self.omega_tol,
            self.large_quotient,
            self.bplus_ceiling,
            self.c_tol,
        ];
        if positive.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return bad("thresholds must be positive");
        }
        if !(self.b_stability > 1.0) {
            return bad("stability ratio must exceed 1");
        }
        if self.escalation_eps.iter().any(|&e| !(e > 0.0)) || self.escalation_eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("escalation parameters must be positive and decreasing");
        }
        if self.lattice.ratios.is_empty() || self.lattice.ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return bad("lattice ratios must lie in (0, 1]");
        }
        Ok(())
    }
}

/// `(1 - |φ(z)|) / (1 - |z|)` with the sup norm.
pub fn julia_quotient(phi: &AnalyticFunction, z: &Point2) -> Result<f64, ClassifyError> {
    z.require_interior()?;
    let v = phi.eval(z)?;
    Ok((1.0 - v.norm()) / (1.0 - z.sup_norm()))
}

/// Julia quotient at an approach point, with the boundary gap taken from the offset form.
pub fn julia_quotient_near(phi: &AnalyticFunction, p: &ApproachPoint) -> Result<f64, ClassifyError> {
    let z = p.point();
    let gap = p.gap().ok_or(GeometryError::NotInterior(z.z1, z.z2))?;
    let v = phi.eval_near(p)?;
    Ok((1.0 - v.norm()) / gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JuliaSample {
    pub z: Point2,
    pub quotient: f64,
    pub aperture: f64,
    pub t: f64,
    pub direction_index: usize,
}

/// Evaluations of `φ(τ + t h)` on the longest run of usable schedule levels
/// ending at the deepest usable level.
fn eval_path(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    h: &Direction,
    ts: &[f64],
) -> Result<Vec<(ApproachPoint, C64)>, ClassifyError> {
    let usable: Vec<bool> = ts
        .iter()
        .map(|&t| ApproachPoint::new(*tau, t, *h).gap().is_some())
        .collect();
    let Some(last) = usable.iter().rposition(|&u| u) else {
        return Err(ClassifyError::NoUsableLevels(h.h1, h.h2));
    };
    let first = usable[..=last]
        .iter()
        .rposition(|&u| !u)
        .map_or(0, |i| i + 1);
    let mut out = Vec::with_capacity(last + 1 - first);
    let mut prev_branch: Option<f64> = None;
    for &t in &ts[first..=last] {
        let p = ApproachPoint::new(*tau, t, *h);
        let v = phi.eval_near(&p)?;
        if let Some(b) = phi.log_branch(&p.point()) {
            if let Some(pb) = prev_branch {
                if (b - pb).abs() > PI {
                    let z = p.point();
                    return Err(ClassifyError::BranchFault {
                        z1: z.z1,
                        z2: z.z2,
                        jump: (b - pb).abs(),
                    });
                }
            }
            prev_branch = Some(b);
        }
        out.push((p, v));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaEstimate {
    pub omega: C64,
    /// Successive radial differences decay monotonically and end below `1e-9`.
    pub converged: bool,
    pub extrapolation_error: f64,
    pub values: Vec<C64>,
    pub differences: Vec<f64>,
}

/// Threshold on the last radial difference for [`OmegaEstimate::converged`].
pub const OMEGA_STEP_TOL: f64 = 1e-9;

/// Radial limit `lim φ((1 - t) τ)`.
pub fn estimate_omega(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    ts: &[f64],
    ratio: f64,
    levels: usize,
) -> Result<OmegaEstimate, ClassifyError> {
    let path = eval_path(phi, tau, &radial_direction(tau), ts)?;
    let values: Vec<C64> = path.iter().map(|(_, v)| *v).collect();
    let differences: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    // differences at the rounding level may jitter
    let slack = VALUE_NOISE * values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let monotone = differences.windows(2).all(|d| d[1] <= d[0] + slack);
    let converged = monotone && differences.last().is_some_and(|&d| d < OMEGA_STEP_TOL);
    let (omega, extrapolation_error) = match extrapolate(&values, ratio, levels) {
        Some(e) => (e.value, e.error),
        None => (values[0], f64::INFINITY),
    };
    Ok(OmegaEstimate {
        omega,
        converged,
        extrapolation_error,
        values,
        differences,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApertureGamma {
    pub aperture: f64,
    pub gamma: f64,
    /// Sup of the quotient at each schedule level, in schedule order.
    pub level_sups: Vec<f64>,
    pub samples: usize,
}

/// Sup of the Julia quotient over the cone of each aperture.
pub fn nt_gamma(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    apertures: &[f64],
    ts: &[f64],
    directions: &[Direction],
) -> Result<Vec<ApertureGamma>, ClassifyError> {
    let widest = apertures.iter().copied().fold(0.0, f64::max);
    let radius = ts.first().copied().unwrap_or(1.0).clamp(f64::MIN_POSITIVE, 1.0);
    let cone = NontangentialCone::new(*tau, widest, radius.max(ts[0]))?;
    let grid = cone_grid(&cone, ts, directions)?;
    let quotients = par_map(&grid, |g| julia_quotient_near(phi, &g.approach));
    let quotients = quotients.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(apertures.len());
    for &m in apertures {
        let mut level_sups = vec![f64::NEG_INFINITY; ts.len()];
        let mut samples = 0;
        for (g, &q) in grid.iter().zip(&quotients) {
            if g.aperture <= m * (1.0 + crate::geometry::APERTURE_SLACK) {
                let k = ts.iter().position(|&t| t == g.t()).expect("grid t comes from the schedule");
                level_sups[k] = level_sups[k].max(q);
                samples += 1;
            }
        }
        if samples == 0 {
            return Err(GeometryError::EmptyCone { aperture: m }.into());
        }
        let gamma = level_sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(ApertureGamma {
            aperture: m,
            gamma,
            level_sups: level_sups.into_iter().map(|s| if s.is_finite() { s } else { f64::NAN }).collect(),
            samples,
        });
    }
    Ok(out)
}

/// Every qualifying cone sample for the widest aperture, in (t, direction) order.
pub fn sweep(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    apertures: &[f64],
    ts: &[f64],
    directions: &[Direction],
) -> Result<Vec<JuliaSample>, ClassifyError> {
    let widest = apertures.iter().copied().fold(0.0, f64::max);
    let radius = ts.first().copied().unwrap_or(1.0).min(1.0);
    let cone = NontangentialCone::new(*tau, widest, radius)?;
    let grid = cone_grid(&cone, ts, directions)?;
    par_map(&grid, |g| {
        Ok(JuliaSample {
            z: g.point(),
            quotient: julia_quotient_near(phi, &g.approach)?,
            aperture: g.aperture,
            t: g.t(),
            direction_index: g.direction_index,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeSample {
    pub h: Direction,
    pub value: C64,
    pub extrapolation_error: f64,
    /// Number of schedule levels at which `τ + t h` was interior.
    pub levels_used: usize,
}

/// `lim (φ(τ + t h) - ω)/t` by Richardson extrapolation on the schedule.
pub fn directional_derivative(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    h: &Direction,
    ts: &[f64],
    ratio: f64,
    levels: usize,
) -> Result<DerivativeSample, ClassifyError> {
    let path = eval_path(phi, tau, h, ts)?;
    if path.len() < 2 {
        return Err(ClassifyError::NoUsableLevels(h.h1, h.h2));
    }
    let quotients: Vec<C64> = path.iter().map(|(p, v)| (v - omega) / p.t).collect();
    let noise: Vec<f64> = path
        .iter()
        .map(|(p, v)| VALUE_NOISE * (v.norm() + omega.norm()) / p.t)
        .collect();
    let e = extrapolate_noisy(&quotients, &noise, ratio, levels).expect("at least two levels");
    Ok(DerivativeSample {
        h: *h,
        value: e.value,
        extrapolation_error: e.error,
        levels_used: path.len(),
    })
}

fn derivatives(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    dirs: &[Direction],
    ts: &[f64],
    ratio: f64,
    levels: usize,
) -> Result<Vec<DerivativeSample>, ClassifyError> {
    par_map(dirs, |h| directional_derivative(phi, tau, omega, h, ts, ratio, levels))
        .into_iter()
        .collect()
}

/// Near-tangential directions `(-ε + 2i, -ε - i)`, rotated to `τ`.
pub fn escalation_direction(tau: &BoundaryPoint, eps: f64) -> Direction {
    Direction::rotated_to(tau, C64::new(-eps, 2.0), C64::new(-eps, -1.0))
}

/// Directions probed by [`bplus_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFamily {
    pub bulk: Vec<Direction>,
    pub escalation: Vec<(f64, Direction)>,
}

impl DirectionFamily {
    pub fn standard(tau: &BoundaryPoint, lattice: &DirectionLattice, eps: &[f64]) -> Self {
        Self {
            bulk: lattice.directions(tau),
            escalation: eps.iter().map(|&e| (e, escalation_direction(tau, e))).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Bounded,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscalationSample {
    pub eps: f64,
    pub sample: DerivativeSample,
    /// `|Dφ[h]| / |h|`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BplusProbe {
    pub alpha_estimate: f64,
    pub diverging: bool,
    pub trend: Trend,
    pub worst_direction: Direction,
    pub bulk: Vec<DerivativeSample>,
    pub escalation: Vec<EscalationSample>,
}

fn ratio_of(s: &DerivativeSample) -> f64 {
    s.value.norm() / s.h.norm()
}

/// Growth test on the escalation ratios: the last three steps must each at
/// least double and the last value must clear `10 * ceiling`.
pub fn escalation_trend(ratios: &[f64], ceiling: f64) -> Trend {
    if ratios.len() < 2 {
        return Trend::Bounded;
    }
    let steps = ratios.len().saturating_sub(1).min(3);
    let tail = &ratios[ratios.len() - steps - 1..];
    let growing = tail.windows(2).all(|w| w[1] >= 2.0 * w[0]);
    let last = *ratios.last().expect("non-empty");
    if growing && last > 10.0 * ceiling {
        Trend::Diverging
    } else if growing && last >= ceiling / 10.0 {
        Trend::Inconclusive
    } else {
        Trend::Bounded
    }
}

/// Bound `|Dφ(τ)[h]| <= α |h|` over a direction family.
#[allow(clippy::too_many_arguments)]
pub fn bplus_probe(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    family: &DirectionFamily,
    ts: &[f64],
    ratio: f64,
    levels: usize,
    ceiling: f64,
) -> Result<BplusProbe, ClassifyError> {
    let bulk = derivatives(phi, tau, omega, &family.bulk, ts, ratio, levels)?;
    let esc_dirs: Vec<Direction> = family.escalation.iter().map(|(_, h)| *h).collect();
    let esc = derivatives(phi, tau, omega, &esc_dirs, ts, ratio, levels)?;
    let escalation: Vec<EscalationSample> = family
        .escalation
        .iter()
        .zip(esc)
        .map(|(&(eps, _), sample)| EscalationSample {
            eps,
            ratio: ratio_of(&sample),
            sample,
        })
        .collect();
    let mut alpha = 0.0;
    let mut worst = family.bulk.first().copied().unwrap_or(radial_direction(tau));
    for s in &bulk {
        let r = ratio_of(s);
        if r > alpha {
            alpha = r;
            worst = s.h;
        }
    }
    let ratios: Vec<f64> = escalation.iter().map(|e| e.ratio).collect();
    let trend = escalation_trend(&ratios, ceiling);
    if trend == Trend::Diverging {
        if let Some(e) = escalation.last() {
            worst = e.sample.h;
        }
    }
    Ok(BplusProbe {
        alpha_estimate: alpha,
        diverging: trend == Trend::Diverging,
        trend,
        worst_direction: worst,
        bulk,
        escalation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CProbe {
    pub lambda: (C64, C64),
    /// `max |D(h) - λ·h| / |h|` over the design.
    pub beta_residual: f64,
    pub samples: Vec<DerivativeSample>,
}

/// Linear fit `D(h) ≈ λ1 h1 + λ2 h2` of derivative samples.
pub fn fit_derivative(samples: &[DerivativeSample]) -> ((C64, C64), f64) {
    let pts: Vec<(C64, C64)> = samples.iter().map(|s| (s.h.h1, s.h.h2)).collect();
    let vals: Vec<C64> = samples.iter().map(|s| s.value).collect();
    let lambda = fit_linear(&pts, &vals);
    let residual = samples
        .iter()
        .map(|s| (s.value - lambda.0 * s.h.h1 - lambda.1 * s.h.h2).norm() / s.h.norm())
        .fold(0.0, f64::max);
    (lambda, residual)
}

/// Linearity of the directional derivative over a design of directions.
pub fn c_probe(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    design: &[Direction],
    ts: &[f64],
    ratio: f64,
    levels: usize,
) -> Result<CProbe, ClassifyError> {
    let samples = derivatives(phi, tau, omega, design, ts, ratio, levels)?;
    let (lambda, beta_residual) = fit_derivative(&samples);
    Ok(CProbe {
        lambda,
        beta_residual,
        samples,
    })
}

/// Derivative in the direction `h`, computed on the unit-norm multiple of `h`.
fn scaled_derivative(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    h: Direction,
    ts: &[f64],
    ratio: f64,
    levels: usize,
) -> Result<(C64, f64), ClassifyError> {
    let n = h.norm();
    let s = directional_derivative(phi, tau, omega, &h.normalized(), ts, ratio, levels)?;
    Ok((s.value * n, s.extrapolation_error * n))
}

/// The homogeneous function `f(z1, z2) = Dφ(τ)[(iτ1 z1, iτ2 z2)] / (iω)` read off the derivative.
pub fn derivative_pick(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    schedule: &Schedule,
    levels: usize,
) -> Result<HomogeneousPick, ClassifyError> {
    let (phi, tau, ts, ratio) = (phi.clone(), *tau, schedule.values(), schedule.ratio);
    let i = C64::new(0.0, 1.0);
    let f = move |z1: C64, z2: C64| -> Result<C64, PickError> {
        let h = Direction::new(i * tau.tau1() * z1, i * tau.tau2() * z2);
        scaled_derivative(&phi, &tau, omega, h, &ts, ratio, levels)
            .map(|(d, _)| d / (i * omega))
            .map_err(|e| PickError::Sample(z1, z2, e.to_string()))
    };
    Ok(HomogeneousPick::sampled(Arc::new(f))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeSample {
    pub w: C64,
    /// `η(w)` from the derivative in a direction of ratio `w`.
    pub direct: C64,
    pub direct_error: f64,
    /// `η(w)` from the homogeneous function read off the derivative, by rotation.
    pub via_pick: C64,
    pub via_pick_error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct SlopeRecovery {
    pub convention: Convention,
    pub samples: Vec<SlopeSample>,
    phi: AnalyticFunction,
    tau: BoundaryPoint,
    omega: C64,
    schedule: Schedule,
    levels: usize,
}

impl SlopeRecovery {
    /// The recovered slope as a sampled function, evaluated through derivatives on demand.
    pub fn slope_function(&self) -> SlopeFunction {
        let r = self.clone();
        SlopeFunction::sampled(Arc::new(move |w| {
            slope_direct(&r.phi, &r.tau, r.omega, w, r.convention, &r.schedule, r.levels)
                .map(|(v, _)| v)
                .map_err(|e| PickError::Sample(w, w, e.to_string()))
        }))
    }
}

/// Inward rotated direction `(k1, k2)` with the convention's ratio equal to `w`.
fn direction_for_ratio(w: C64, convention: Convention) -> (C64, C64) {
    let c = C64::from_polar(1.0 / w.norm().max(1.0), PI - w.arg() / 2.0);
    match convention {
        Convention::Standard => (c, c * w),
        Convention::Swapped => (c * w, c),
    }
}

fn slope_direct(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    w: C64,
    convention: Convention,
    schedule: &Schedule,
    levels: usize,
) -> Result<(C64, f64), ClassifyError> {
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(PickError::OnCut(w).into());
    }
    let (k1, k2) = direction_for_ratio(w, convention);
    let h = Direction::rotated_to(tau, k1, k2);
    let s = directional_derivative(phi, tau, omega, &h, &schedule.values(), schedule.ratio, levels)?;
    let pre = -omega * convention.prefactor(k1, k2);
    Ok((s.value / pre, s.extrapolation_error / pre.norm()))
}

fn slope_via_pick(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    w: C64,
    schedule: &Schedule,
    levels: usize,
) -> Result<(C64, f64), ClassifyError> {
    let s = default_rotation(w)?;
    let i = C64::new(0.0, 1.0);
    let e = C64::from_polar(1.0, -s);
    let (z1, z2) = (-e / w, -e);
    let h = Direction::new(i * tau.tau1() * z1, i * tau.tau2() * z2);
    let (d, err) = scaled_derivative(phi, tau, omega, h, &schedule.values(), schedule.ratio, levels)?;
    Ok((C64::from_polar(1.0, s) * d / (i * omega), err))
}

/// Slope values at the requested ratios by two independent routes: inverting
/// the slope formula on a direction of ratio `w`, and reading the homogeneous
/// function off the derivative and rotating. Disagreement beyond ten times the
/// combined extrapolation error is a convention fault.
pub fn recover_slope(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    omega: C64,
    ratios: &[C64],
    convention: Convention,
    schedule: &Schedule,
    levels: usize,
) -> Result<SlopeRecovery, ClassifyError> {
    let mut samples = Vec::with_capacity(ratios.len());
    for &w in ratios {
        let (direct, de) = slope_direct(phi, tau, omega, w, convention, schedule, levels)?;
        let (via_pick, pe) = slope_via_pick(phi, tau, omega, w, schedule, levels)?;
        let tolerance = 10.0 * (de + pe) + 1e-12 * direct.norm().max(1.0);
        if !((direct - via_pick).norm() <= tolerance) {
            return Err(ClassifyError::ConventionFault {
                w,
                direct,
                via_pick,
                tolerance,
            });
        }
        samples.push(SlopeSample {
            w,
            direct,
            direct_error: de,
            via_pick,
            via_pick_error: pe,
            tolerance,
        });
    }
    Ok(SlopeRecovery {
        convention,
        samples,
        phi: phi.clone(),
        tau: *tau,
        omega,
        schedule: *schedule,
        levels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "none")]
    None,
    B,
    Bplus,
    C,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::None => "none",
            Verdict::B => "B",
            Verdict::Bplus => "Bplus",
            Verdict::C => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateOutcome {
    Pass,
    Inconclusive,
    Fail,
    Skipped,
}

/// Threshold test with a tenfold band on either side reported as inconclusive.
pub fn gate_below(value: f64, threshold: f64) -> GateOutcome {
    if value < threshold / 10.0 {
        GateOutcome::Pass
    } else if value > threshold * 10.0 || value.is_nan() {
        GateOutcome::Fail
    } else {
        GateOutcome::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateRecord {
    pub gate: Verdict,
    pub outcome: GateOutcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscalationDiagnostic {
    /// Schedule levels (1-based) spanned by the run of growth.
    pub first_level: usize,
    pub last_level: usize,
    pub mean_growth: f64,
    pub peak_quotient: f64,
}

/// Longest run of at least five consecutive radial quotients growing by at
/// least 90% of the schedule ratio per level.
pub fn escalation_run(quotients: &[f64], ratio: f64) -> Option<EscalationDiagnostic> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0;
    for k in 1..=quotients.len() {
        let grows = k < quotients.len() && quotients[k - 1] > 0.0 && quotients[k] >= 0.9 * ratio * quotients[k - 1];
        if !grows {
            if k - 1 - start >= 4 && best.is_none_or(|(a, b)| k - 1 - start > b - a) {
                best = Some((start, k - 1));
            }
            start = k;
        }
    }
    best.map(|(a, b)| {
        let growth = (quotients[b] / quotients[a]).powf(1.0 / (b - a) as f64);
        EscalationDiagnostic {
            first_level: a + 1,
            last_level: b + 1,
            mean_growth: growth,
            peak_quotient: quotients[a..=b].iter().copied().fold(0.0, f64::max),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reprobe {
    pub lambda: (C64, C64),
    pub beta_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSummary {
    pub name: String,
    pub is_rational: bool,
    pub descriptor: crate::catalog::FunctionDescriptor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub radial: Vec<JuliaSample>,
    pub omega_values: Vec<C64>,
    pub derivatives: Vec<DerivativeSample>,
    pub escalation: Vec<EscalationSample>,
    pub slope: Vec<SlopeSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub schema: u32,
    pub function: FunctionSummary,
    pub tau: BoundaryPoint,
    pub config: ClassifierConfig,
    pub verdict: Verdict,
    pub omega: C64,
    pub omega_converged: bool,
    pub omega_extrapolation_error: f64,
    pub radial_tail_sup: f64,
    pub gamma_by_aperture: Vec<ApertureGamma>,
    pub alpha_estimate: Option<f64>,
    pub escalation_trend: Option<Trend>,
    pub lambda: Option<(C64, C64)>,
    pub beta_residual: Option<f64>,
    pub gates: Vec<GateRecord>,
    pub c_reprobe: Option<Reprobe>,
    pub escalation: Option<EscalationDiagnostic>,
    pub warnings: Vec<String>,
    pub samples: Evidence,
}

impl ClassificationReport {
    pub fn gate(&self, v: Verdict) -> Option<&GateRecord> {
        self.gates.iter().find(|g| g.gate == v)
    }
}

fn worst(a: GateOutcome, b: GateOutcome) -> GateOutcome {
    a.max(b)
}

/// B gate: unimodular radial limit and a settled radial Julia quotient.
fn b_gate(
    omega: &OmegaEstimate,
    radial_quotients: &[f64],
    config: &ClassifierConfig,
) -> (GateOutcome, String, f64) {
    let drift = (omega.omega.norm() - 1.0).abs().max(omega.extrapolation_error);
    let omega_outcome = gate_below(drift, config.omega_tol);
    let n = radial_quotients.len();
    let tail = &radial_quotients[n - (n / 4).max(4).min(n)..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if max == 0.0 && min == 0.0 {
        1.0
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    };
    let b = config.b_stability;
    let stable = if spread < b {
        GateOutcome::Pass
    } else if spread > 1.0 + 10.0 * (b - 1.0) * 2.0 || !spread.is_finite() {
        GateOutcome::Fail
    } else {
        GateOutcome::Inconclusive
    };
    let detail = format!(
        "|omega| - 1 = {:.3e} (extrapolation error {:.3e}); radial quotient over the last {} levels in [{:.6e}, {:.6e}], spread {:.4}",
        omega.omega.norm() - 1.0,
        omega.extrapolation_error,
        tail.len(),
        min,
        max,
        spread
    );
    (worst(omega_outcome, stable), detail, max)
}

/// Runs the B, B+ and C gates in order; each later gate only runs when the
/// earlier ones pass.
pub fn classify(
    phi: &AnalyticFunction,
    tau: &BoundaryPoint,
    config: &ClassifierConfig,
) -> Result<ClassificationReport, ClassifyError> {
    config.validate()?;
    let ts = config.schedule.values();
    let ratio = config.schedule.ratio;
    let levels = config.richardson_levels;
    let mut warnings = Vec::new();
    let mut gates = Vec::new();

    let omega = estimate_omega(phi, tau, &ts, ratio, levels)?;
    if !omega.converged {
        warnings.push(
            "radial values do not settle monotonically below 1e-9; omega is taken from the extrapolated tail".to_string(),
        );
    }
    let radial_dir = radial_direction(tau);
    let radial: Vec<JuliaSample> = ts
        .iter()
        .filter_map(|&t| {
            let p = ApproachPoint::new(*tau, t, radial_dir);
            p.gap().map(|_| p)
        })
        .map(|p| {
            Ok(JuliaSample {
                z: p.point(),
                quotient: julia_quotient_near(phi, &p)?,
                aperture: p.aperture().unwrap_or(f64::NAN),
                t: p.t,
                direction_index: 0,
            })
        })
        .collect::<Result<_, ClassifyError>>()?;
    let quotients: Vec<f64> = radial.iter().map(|s| s.quotient).collect();
    let escalation = escalation_run(&quotients, ratio);
    if let Some(e) = &escalation {
        warnings.push(format!(
            "radial Julia quotient grows geometrically (x{:.3} per level) over levels {}..{}, peaking at {:.6e}",
            e.mean_growth, e.first_level, e.last_level, e.peak_quotient
        ));
    }

    let gamma_by_aperture = nt_gamma(phi, tau, &config.apertures, &gamma_band(&ts), &config.lattice.directions(tau))?;

    let (b_outcome, b_detail, tail_sup) = b_gate(&omega, &quotients, config);
    if tail_sup > config.large_quotient {
        warnings.push(format!(
            "radial Julia quotient {:.6e} exceeds {:.0e}",
            tail_sup, config.large_quotient
        ));
    }
    gates.push(GateRecord {
        gate: Verdict::B,
        outcome: b_outcome,
        detail: b_detail,
    });

    let mut verdict = Verdict::None;
    let mut alpha_estimate = None;
    let mut escalation_trend_out = None;
    let mut lambda = None;
    let mut beta_residual = None;
    let mut c_reprobe = None;
    let mut derivative_samples = Vec::new();
    let mut escalation_samples = Vec::new();
    let mut slope = Vec::new();
    let w = omega.omega;

    if b_outcome == GateOutcome::Pass {
        verdict = Verdict::B;
        let recovery = recover_slope(phi, tau, w, &config.slope_ratios, config.convention, &config.schedule, levels)?;
        slope = recovery.samples;

        let family = DirectionFamily::standard(tau, &config.lattice, &config.escalation_eps);
        let probe = bplus_probe(phi, tau, w, &family, &ts, ratio, levels, config.bplus_ceiling)?;
        alpha_estimate = Some(probe.alpha_estimate);
        escalation_trend_out = Some(probe.trend);
        let last = probe.escalation.last().map_or(0.0, |e| e.ratio);
        let bplus_outcome = match probe.trend {
            Trend::Bounded => GateOutcome::Pass,
            Trend::Diverging => GateOutcome::Fail,
            Trend::Inconclusive => GateOutcome::Inconclusive,
        };
        gates.push(GateRecord {
            gate: Verdict::Bplus,
            outcome: bplus_outcome,
            detail: format!(
                "alpha = {:.6e} over {} directions; escalation |D|/|h| = {:?} (last {:.6e}, ceiling {:.0e})",
                probe.alpha_estimate,
                probe.bulk.len(),
                probe.escalation.iter().map(|e| e.ratio).collect::<Vec<_>>(),
                last,
                config.bplus_ceiling
            ),
        });
        escalation_samples = probe.escalation.clone();

        if bplus_outcome == GateOutcome::Pass {
            verdict = Verdict::Bplus;
            let (lam, resid) = fit_derivative(&probe.bulk);
            lambda = Some(lam);
            beta_residual = Some(resid);
            let c_outcome = gate_below(resid, config.c_tol);
            gates.push(GateRecord {
                gate: Verdict::C,
                outcome: c_outcome,
                detail: format!(
                    "lambda = ({}, {}), beta residual {:.3e} (tolerance {:.0e})",
                    lam.0, lam.1, resid, config.c_tol
                ),
            });
            if c_outcome == GateOutcome::Pass {
                verdict = Verdict::C;
            }
            if phi.is_rational() {
                let dense = DirectionLattice {
                    ratios: config.lattice.ratios.clone(),
                    arg_steps: config.lattice.arg_steps + 2,
                };
                let re = c_probe(phi, tau, w, &dense.directions(tau), &ts, ratio, 2 * levels)?;
                let tolerance = config.c_tol / 10.0;
                let passed = re.beta_residual < tolerance;
                if passed != (verdict == Verdict::C) {
                    warnings.push(format!(
                        "rational function: tightened C re-probe {} (residual {:.3e}, tolerance {:.0e}) but the C gate was {:?}",
                        if passed { "passes" } else { "fails" },
                        re.beta_residual,
                        tolerance,
                        c_outcome
                    ));
                }
                c_reprobe = Some(Reprobe {
                    lambda: re.lambda,
                    beta_residual: re.beta_residual,
                    tolerance,
                    passed,
                });
            }
        } else {
            gates.push(GateRecord {
                gate: Verdict::C,
                outcome: GateOutcome::Skipped,
                detail: "B+ gate not passed".into(),
            });
        }
        derivative_samples = probe.bulk;
    } else {
        for g in [Verdict::Bplus, Verdict::C] {
            gates.push(GateRecord {
                gate: g,
                outcome: GateOutcome::Skipped,
                detail: "B gate not passed; no finite certificate found".into(),
            });
        }
    }
    for g in &gates {
        if g.outcome == GateOutcome::Inconclusive {
            warnings.push(format!("inconclusive at gate {}", g.gate.as_str()));
        }
    }

    Ok(ClassificationReport {
        schema: SCHEMA_VERSION,
        function: FunctionSummary {
            name: phi.name().to_string(),
            is_rational: phi.is_rational(),
            descriptor: phi.descriptor().clone(),
        },
        tau: *tau,
        config: config.clone(),
        verdict,
        omega: w,
        omega_converged: omega.converged,
        omega_extrapolation_error: omega.extrapolation_error,
        radial_tail_sup: tail_sup,
        gamma_by_aperture,
        alpha_estimate,
        escalation_trend: escalation_trend_out,
        lambda,
        beta_residual,
        gates,
        c_reprobe,
        escalation,
        warnings,
        samples: Evidence {
            radial,
            omega_values: omega.values,
            derivatives: derivative_samples,
            escalation: escalation_samples,
            slope,
        },
    })
}

/// Levels used for cone sups: the third quarter of the schedule, deep enough
/// to be near the apex and shallow enough that `1 - |φ|` keeps its digits.
pub fn gamma_band(ts: &[f64]) -> Vec<f64> {
    let n = ts.len();
    if n < 4 {
        return ts.to_vec();
    }
    ts[n / 2..(3 * n).div_ceil(4)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, Builtin};
    use std::collections::BTreeMap;

    fn get(b: Builtin) -> AnalyticFunction {
        builtin(b, &BTreeMap::new()).unwrap()
    }

    fn phi4(n: usize) -> AnalyticFunction {
        let mut p = BTreeMap::new();
        p.insert("N".to_string(), n as f64);
        builtin(Builtin::Phi4, &p).unwrap()
    }

    fn chi() -> BoundaryPoint {
        BoundaryPoint::chi()
    }

    #[test]
    fn julia_quotient_examples() {
        let q = julia_quotient(&get(Builtin::Phi1), &Point2::real(0.9, 0.9)).unwrap();
        assert!((q - 1.9).abs() < 1e-12);
        for r in [0.1, 0.5, 0.9] {
            let q = julia_quotient(&get(Builtin::Phi3), &Point2::real(r, r)).unwrap();
            assert!((q - 1.0).abs() < 1e-12);
        }
        let f = phi4(20);
        for n in 1..=20 {
            let r = 1.0 - 0.5f64.powi(n);
            assert_eq!(julia_quotient(&f, &Point2::real(r, r)).unwrap(), 2f64.powi(n));
        }
        assert!(julia_quotient(&f, &Point2::real(1.0, 0.0)).is_err());
    }

    #[test]
    fn omega_examples() {
        let ts = Schedule::default().values();
        let e = estimate_omega(&get(Builtin::Phi1), &chi(), &ts, 2.0, 4).unwrap();
        assert!(e.converged && (e.omega - C64::new(1.0, 0.0)).norm() < 1e-12);
        let e = estimate_omega(&get(Builtin::Phi3), &chi(), &ts, 2.0, 4).unwrap();
        assert!(e.converged && (e.omega + C64::new(1.0, 0.0)).norm() < 1e-12);
        let e = estimate_omega(&phi4(20), &chi(), &ts, 2.0, 4).unwrap();
        assert!(!e.converged);
    }

    #[test]
    fn derivative_examples() {
        let ts = Schedule::default().values();
        let h = Direction::real(-1.0, -1.0);
        let one = C64::new(1.0, 0.0);
        let d = directional_derivative(&get(Builtin::Phi1), &chi(), one, &h, &ts, 2.0, 4).unwrap();
        assert!((d.value - C64::new(-2.0, 0.0)).norm() < 1e-9, "{d:?}");
        let d = directional_derivative(&get(Builtin::Phi3), &chi(), -one, &h, &ts, 2.0, 4).unwrap();
        assert!((d.value - one).norm() < 1e-9, "{d:?}");
        let d = directional_derivative(&get(Builtin::Phi2), &chi(), one, &h, &ts, 2.0, 4).unwrap();
        assert!((d.value - C64::new(-4.0, 0.0)).norm() < 1e-9, "{d:?}");
    }

    #[test]
    fn outward_direction_has_no_levels() {
        let ts = Schedule::default().values();
        let r = directional_derivative(
            &get(Builtin::Phi1),
            &chi(),
            C64::new(1.0, 0.0),
            &Direction::real(1.0, -1.0),
            &ts,
            2.0,
            4,
        );
        assert!(matches!(r, Err(ClassifyError::NoUsableLevels(..))));
    }

    #[test]
    fn escalation_trend_rules() {
        assert_eq!(escalation_trend(&[10.0, 100.0, 1e3, 1e4, 1e5], 1e3), Trend::Diverging);
        assert_eq!(escalation_trend(&[1.0, 10.0, 100.0, 1e3], 1e3), Trend::Inconclusive);
        assert_eq!(escalation_trend(&[4.0, 4.2, 4.3, 4.3], 1e3), Trend::Bounded);
        assert_eq!(escalation_trend(&[1e6, 1e6, 1e6], 1e3), Trend::Bounded);
    }

    #[test]
    fn gate_bands() {
        assert_eq!(gate_below(1e-6, 1e-4), GateOutcome::Pass);
        assert_eq!(gate_below(5e-5, 1e-4), GateOutcome::Inconclusive);
        assert_eq!(gate_below(0.1, 1e-4), GateOutcome::Fail);
        assert_eq!(gate_below(f64::NAN, 1e-4), GateOutcome::Fail);
    }

    #[test]
    fn escalation_run_finds_doubling() {
        let q: Vec<f64> = (1..=20).map(|k| 2f64.powi(k)).chain([3e6, 3e6, 3e6]).collect();
        let e = escalation_run(&q, 2.0).unwrap();
        assert_eq!(e.first_level, 1);
        assert!(e.last_level >= 20);
        assert!(escalation_run(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 2.0).is_none());
    }

    #[test]
    fn constant_unimodular_function_is_c() {
        let w = C64::from_polar(1.0, 0.7);
        let f = AnalyticFunction::constant(w).unwrap();
        let lattice = DirectionLattice {
            ratios: vec![1.0, 0.5],
            arg_steps: 2,
        };
        let ts = Schedule::default().values();
        let p = c_probe(&f, &chi(), w, &lattice.directions(&chi()), &ts, 2.0, 4).unwrap();
        assert_eq!(p.lambda, (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        assert_eq!(p.beta_residual, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = ClassifierConfig::default();
        assert!(c.validate().is_ok());
        c.apertures = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        let c = ClassifierConfig {
            c_tol: 0.0,
            ..ClassifierConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn gamma_band_is_the_third_quarter() {
        let ts = Schedule::default().values();
        let band = gamma_band(&ts);
        assert_eq!(band.len(), 10);
        assert_eq!(band[0], ts[20]);
    }
}
