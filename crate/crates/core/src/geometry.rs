//! Sup-norm geometry of the bidisk.
//!
//! Distances are measured with the supremum norm throughout. Approach
//! points near a torus point are carried as `base + offset` so that the
//! gaps `1 - |z_i|` can be formed without cancellation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Torus membership tolerance for [`BoundaryPoint`].
pub const TORUS_TOL: f64 = 1e-12;

/// Grid points with `|z_i| >= 1 - GRID_FLOOR` are rejected.
pub const GRID_FLOOR: f64 = 1e-14;

/// Relative slack in cone membership, so that the radial path (aperture exactly 1)
/// is not lost to the last bit of rounding.
pub const APERTURE_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point ({0}, {1}) is not in the open bidisk")]
    NotInterior(C64, C64),
    #[error("({0}, {1}) is not on the torus (|tau_i| must be 1 within {TORUS_TOL:e})")]
    NotOnTorus(C64, C64),
    #[error("direction ({0}, {1}) does not point into the bidisk at the apex")]
    NotInward(C64, C64),
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("invalid cone: {0}")]
    BadCone(String),
    #[error("no grid point of the cone with aperture {aperture} qualifies")]
    EmptyCone { aperture: f64 },
}

/// A point of `C^2`; most operations require it to lie in the open bidisk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub z1: C64,
    pub z2: C64,
}

impl Point2 {
    pub fn new(z1: C64, z2: C64) -> Self {
        Self { z1, z2 }
    }

    pub fn real(x1: f64, x2: f64) -> Self {
        Self::new(C64::new(x1, 0.0), C64::new(x2, 0.0))
    }

    pub fn is_interior(&self) -> bool {
        self.z1.norm() < 1.0 && self.z2.norm() < 1.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.z1.norm().max(self.z2.norm())
    }

    pub fn require_interior(&self) -> Result<(), GeometryError> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(GeometryError::NotInterior(self.z1, self.z2))
        }
    }
}

/// A point of the distinguished boundary `T^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[C64; 2]", into = "[C64; 2]")]
pub struct BoundaryPoint {
    tau1: C64,
    tau2: C64,
}

impl BoundaryPoint {
    pub fn new(tau1: C64, tau2: C64) -> Result<Self, GeometryError> {
        if (tau1.norm() - 1.0).abs() > TORUS_TOL || (tau2.norm() - 1.0).abs() > TORUS_TOL {
            return Err(GeometryError::NotOnTorus(tau1, tau2));
        }
        Ok(Self { tau1, tau2 })
    }

    /// The point `(e^{i a1}, e^{i a2})`.
    pub fn from_angles(a1: f64, a2: f64) -> Self {
        Self {
            tau1: C64::from_polar(1.0, a1),
            tau2: C64::from_polar(1.0, a2),
        }
    }

    /// The point `(1, 1)`.
    pub fn chi() -> Self {
        Self {
            tau1: C64::new(1.0, 0.0),
            tau2: C64::new(1.0, 0.0),
        }
    }

    pub fn tau1(&self) -> C64 {
        self.tau1
    }

    pub fn tau2(&self) -> C64 {
        self.tau2
    }

    pub fn is_chi(&self) -> bool {
        self.tau1 == C64::new(1.0, 0.0) && self.tau2 == C64::new(1.0, 0.0)
    }

    pub fn as_point(&self) -> Point2 {
        Point2::new(self.tau1, self.tau2)
    }
}

impl TryFrom<[C64; 2]> for BoundaryPoint {
    type Error = GeometryError;

    fn try_from(v: [C64; 2]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1])
    }
}

impl From<BoundaryPoint> for [C64; 2] {
    fn from(b: BoundaryPoint) -> Self {
        [b.tau1, b.tau2]
    }
}

/// A direction `h` in `C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub h1: C64,
    pub h2: C64,
}

impl Direction {
    pub fn new(h1: C64, h2: C64) -> Self {
        Self { h1, h2 }
    }

    pub fn real(a: f64, b: f64) -> Self {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0))
    }

    /// Sup norm `max(|h1|, |h2|)`.
    pub fn norm(&self) -> f64 {
        self.h1.norm().max(self.h2.norm())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self::new(self.h1 * c, self.h2 * c)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.h1 / n, self.h2 / n)
    }

    /// First-order inwardness at `tau`: `Re(conj(tau_i) h_i) < 0` for both coordinates.
    pub fn is_inward_at(&self, tau: &BoundaryPoint) -> bool {
        (tau.tau1.conj() * self.h1).re < 0.0 && (tau.tau2.conj() * self.h2).re < 0.0
    }

    /// Checks that `tau + t h` is interior for every `t` of a fixed small schedule.
    pub fn is_inward_on_schedule(&self, tau: &BoundaryPoint, ts: &[f64]) -> bool {
        ts.iter()
            .all(|&t| ApproachPoint::new(*tau, t, *self).gap().is_some())
    }

    /// The direction at `tau` whose coordinates, rotated back to `(1,1)`, are `(g1, g2)`.
    pub fn rotated_to(tau: &BoundaryPoint, g1: C64, g2: C64) -> Self {
        Self::new(tau.tau1 * g1, tau.tau2 * g2)
    }
}

/// A point `base + t h` near a torus point, kept in offset form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachPoint {
    pub base: BoundaryPoint,
    pub t: f64,
    pub offset: [C64; 2],
}

impl ApproachPoint {
    pub fn new(base: BoundaryPoint, t: f64, h: Direction) -> Self {
        Self {
            base,
            t,
            offset: [h.h1 * t, h.h2 * t],
        }
    }

    pub fn point(&self) -> Point2 {
        Point2::new(self.base.tau1 + self.offset[0], self.base.tau2 + self.offset[1])
    }

    /// `1 - |tau_i + u_i|` for both coordinates, computed from the offset.
    pub fn coordinate_gaps(&self) -> [f64; 2] {
        let gap = |tau: C64, u: C64| {
            // 1 - |tau + u|^2 = -(2 Re(conj(tau) u) + |u|^2)
            let one_minus_sq = -(2.0 * (tau.conj() * u).re + u.norm_sqr());
            one_minus_sq / (1.0 + (tau + u).norm())
        };
        [
            gap(self.base.tau1, self.offset[0]),
            gap(self.base.tau2, self.offset[1]),
        ]
    }

    /// Sup-norm distance to the topological boundary, or `None` when the
    /// point is not interior (or closer to the boundary than the grid floor).
    pub fn gap(&self) -> Option<f64> {
        let [g1, g2] = self.coordinate_gaps();
        let g = g1.min(g2);
        if g > GRID_FLOOR && g.is_finite() {
            Some(g)
        } else {
            None
        }
    }

    /// Sup-norm distance to the base point.
    pub fn dist_to_base(&self) -> f64 {
        self.offset[0].norm().max(self.offset[1].norm())
    }

    /// Pointwise aperture computed from the offset form.
    pub fn aperture(&self) -> Option<f64> {
        self.gap().map(|g| self.dist_to_base() / g)
    }
}

/// `min(1 - |z1|, 1 - |z2|)`.
pub fn dist_point_to_boundary(z: &Point2) -> Result<f64, GeometryError> {
    z.require_interior()?;
    Ok((1.0 - z.z1.norm()).min(1.0 - z.z2.norm()))
}

/// Pointwise ratio `dist(z, tau) / dist(z, boundary)`.
pub fn aperture_of(z: &Point2, tau: &BoundaryPoint) -> Result<f64, GeometryError> {
    let d = dist_point_to_boundary(z)?;
    let num = (z.z1 - tau.tau1).norm().max((z.z2 - tau.tau2).norm());
    Ok(num / d)
}

/// Cone `{ z : dist(z, apex) <= aperture * dist(z, boundary), dist(z, apex) <= radius }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NontangentialCone {
    pub apex: BoundaryPoint,
    pub aperture: f64,
    pub radius: f64,
}

impl NontangentialCone {
    pub fn new(apex: BoundaryPoint, aperture: f64, radius: f64) -> Result<Self, GeometryError> {
        if !(aperture.is_finite() && aperture > 0.0) {
            return Err(GeometryError::BadCone(format!("aperture {aperture} must be positive")));
        }
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(GeometryError::BadCone(format!("radius {radius} must lie in (0, 1]")));
        }
        Ok(Self {
            apex,
            aperture,
            radius,
        })
    }

    pub fn contains(&self, z: &Point2) -> bool {
        match aperture_of(z, &self.apex) {
            Ok(a) => a <= self.aperture * (1.0 + APERTURE_SLACK) && self.dist_to_apex(z) <= self.radius,
            Err(_) => false,
        }
    }

    fn dist_to_apex(&self, z: &Point2) -> f64 {
        (z.z1 - self.apex.tau1)
            .norm()
            .max((z.z2 - self.apex.tau2).norm())
    }
}

/// A geometric approach schedule `t_k = radius * ratio^{-k}`, `k = 1..=depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub radius: f64,
    pub ratio: f64,
    pub depth: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            radius: 1.0,
            ratio: 2.0,
            depth: 40,
        }
    }
}

impl Schedule {
    pub fn new(radius: f64, ratio: f64, depth: usize) -> Result<Self, GeometryError> {
        let s = Self {
            radius,
            ratio,
            depth,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(GeometryError::BadSchedule(format!(
                "radius {} must lie in (0, 1]",
                self.radius
            )));
        }
        if !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(GeometryError::BadSchedule(format!(
                "ratio {} must exceed 1",
                self.ratio
            )));
        }
        if self.depth == 0 {
            return Err(GeometryError::BadSchedule("depth must be positive".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        (1..=self.depth)
            .map(|k| self.radius * self.ratio.powi(-(k as i32)))
            .collect()
    }
}

fn check_schedule(ts: &[f64], radius: f64) -> Result<(), GeometryError> {
    if ts.is_empty() {
        return Err(GeometryError::BadSchedule("empty t schedule".into()));
    }
    if ts.iter().any(|&t| !(t > 0.0 && t <= radius)) {
        return Err(GeometryError::BadSchedule(format!(
            "schedule values must lie in (0, {radius}]"
        )));
    }
    if ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GeometryError::BadSchedule(
            "schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// A qualifying sample of a cone grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub approach: ApproachPoint,
    pub direction_index: usize,
    pub aperture: f64,
}

impl GridPoint {
    pub fn point(&self) -> Point2 {
        self.approach.point()
    }

    pub fn t(&self) -> f64 {
        self.approach.t
    }
}

/// All points `apex + t h` of the schedule/direction product that are interior
/// and lie in the cone. Rows are ordered by schedule index, then direction index.
pub fn cone_grid(
    cone: &NontangentialCone,
    t_schedule: &[f64],
    directions: &[Direction],
) -> Result<Vec<GridPoint>, GeometryError> {
    check_schedule(t_schedule, cone.radius)?;
    if let Some(h) = directions.iter().find(|h| !h.is_inward_at(&cone.apex)) {
        return Err(GeometryError::NotInward(h.h1, h.h2));
    }
    let mut out = Vec::new();
    for &t in t_schedule {
        for (idx, h) in directions.iter().enumerate() {
            let ap = ApproachPoint::new(cone.apex, t, *h);
            if ap.gap().is_none() || ap.dist_to_base() > cone.radius {
                continue;
            }
            if !ap.point().is_interior() {
                continue;
            }
            let Some(aperture) = ap.aperture() else { continue };
            if aperture <= cone.aperture * (1.0 + APERTURE_SLACK) {
                out.push(GridPoint {
                    approach: ap,
                    direction_index: idx,
                    aperture,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(GeometryError::EmptyCone {
            aperture: cone.aperture,
        });
    }
    Ok(out)
}

/// Lattice of unit sup-norm inward directions at a torus point.
///
/// In rotated coordinates (apex moved to `(1,1)`) the dominant coordinate is
/// `e^{i(pi + a)}`, the other `rho e^{i(pi + b)}`, with `a, b` ranging over
/// `k * (pi/2) / arg_steps` for `|k| < arg_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionLattice {
    pub ratios: Vec<f64>,
    pub arg_steps: usize,
}

impl Default for DirectionLattice {
    fn default() -> Self {
        Self {
            ratios: vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125],
            arg_steps: 4,
        }
    }
}

impl DirectionLattice {
    pub fn directions(&self, tau: &BoundaryPoint) -> Vec<Direction> {
        let n = self.arg_steps.max(1) as i64;
        let args: Vec<f64> = (-(n - 1)..n)
            .map(|k| PI + k as f64 * (PI / 2.0) / n as f64)
            .collect();
        let mut out: Vec<Direction> = Vec::new();
        for dominant in 0..2 {
            for &rho in &self.ratios {
                if dominant == 1 && rho == 1.0 {
                    continue;
                }
                for &a in &args {
                    for &b in &args {
                        let big = C64::from_polar(1.0, a);
                        let small = C64::from_polar(rho, b);
                        let (g1, g2) = if dominant == 0 { (big, small) } else { (small, big) };
                        out.push(Direction::rotated_to(tau, g1, g2));
                    }
                }
            }
        }
        // radial direction first so the aperture-1 cone always has a sample
        let radial = Direction::rotated_to(tau, C64::new(-1.0, 0.0), C64::new(-1.0, 0.0));
        out.retain(|d| (d.h1 - radial.h1).norm() > 1e-15 || (d.h2 - radial.h2).norm() > 1e-15);
        out.insert(0, radial);
        out
    }
}

/// The radial direction `-tau`.
pub fn radial_direction(tau: &BoundaryPoint) -> Direction {
    Direction::new(-tau.tau1, -tau.tau2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist_point_to_boundary(&Point2::real(0.0, 0.0)).unwrap(), 1.0);
        assert_relative_eq!(
            dist_point_to_boundary(&Point2::real(0.9, 0.95)).unwrap(),
            0.05,
            epsilon = 1e-15
        );
        let z = Point2::new(c(0.5, 0.0), c(0.0, 0.5));
        assert_eq!(dist_point_to_boundary(&z).unwrap(), 0.5);
    }

    #[test]
    fn distance_rejects_exterior() {
        assert!(dist_point_to_boundary(&Point2::real(1.0, 0.0)).is_err());
        assert!(dist_point_to_boundary(&Point2::new(c(0.0, 0.0), c(0.8, 0.8))).is_err());
    }

    #[test]
    fn aperture_examples() {
        let chi = BoundaryPoint::chi();
        for r in [0.1, 0.5, 0.75, 0.999] {
            assert_relative_eq!(aperture_of(&Point2::real(r, r), &chi).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(
            aperture_of(&Point2::real(0.9, 0.95), &chi).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(aperture_of(&Point2::real(0.0, 0.0), &chi).unwrap(), 1.0);
    }

    #[test]
    fn gaps_are_coordinatewise() {
        // only the smaller coordinate gap counts
        let z = Point2::new(c(0.2, 0.0), c(0.0, -0.7));
        assert_relative_eq!(dist_point_to_boundary(&z).unwrap(), 0.3, epsilon = 1e-15);
        let z = Point2::new(c(0.0, 0.6), c(0.1, 0.0));
        assert_relative_eq!(dist_point_to_boundary(&z).unwrap(), 0.4, epsilon = 1e-15);
        let z = Point2::new(c(0.3, 0.4), c(0.4, -0.3));
        assert_relative_eq!(
            dist_point_to_boundary(&z).unwrap() + z.sup_norm(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn torus_membership() {
        assert!(BoundaryPoint::new(c(1.0, 0.0), c(0.0, 1.0)).is_ok());
        assert!(BoundaryPoint::new(c(1.0, 1e-5), c(1.0, 0.0)).is_err());
        assert!(BoundaryPoint::new(c(0.5, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn offset_gaps_match_direct_gaps() {
        let tau = BoundaryPoint::from_angles(0.7, -2.1);
        let h = Direction::rotated_to(&tau, c(-1.0, 0.3), c(-0.4, -0.2));
        let ap = ApproachPoint::new(tau, 0.01, h);
        let z = ap.point();
        let [g1, g2] = ap.coordinate_gaps();
        assert_relative_eq!(g1, 1.0 - z.z1.norm(), epsilon = 1e-14);
        assert_relative_eq!(g2, 1.0 - z.z2.norm(), epsilon = 1e-14);
    }

    #[test]
    fn offset_gap_is_accurate_deep() {
        let ap = ApproachPoint::new(BoundaryPoint::chi(), 2f64.powi(-40), Direction::real(-1.0, -0.5));
        let [g1, g2] = ap.coordinate_gaps();
        assert_eq!(g1, 2f64.powi(-40));
        assert_eq!(g2, 2f64.powi(-41));
    }

    #[test]
    fn cone_grid_radial_points() {
        let cone = NontangentialCone::new(BoundaryPoint::chi(), 2.0, 1.0).unwrap();
        let g = cone_grid(&cone, &[0.5, 0.25], &[Direction::real(-1.0, -1.0)]).unwrap();
        let pts: Vec<Point2> = g.iter().map(|p| p.point()).collect();
        assert_eq!(pts, vec![Point2::real(0.5, 0.5), Point2::real(0.75, 0.75)]);
        assert!(g.iter().all(|p| p.aperture == 1.0));
    }

    #[test]
    fn cone_grid_membership_follows_aperture() {
        let h = [Direction::real(-1.0, -0.5)];
        let narrow = NontangentialCone::new(BoundaryPoint::chi(), 1.5, 1.0).unwrap();
        assert_eq!(
            cone_grid(&narrow, &[0.1], &h),
            Err(GeometryError::EmptyCone { aperture: 1.5 })
        );
        let wide = NontangentialCone::new(BoundaryPoint::chi(), 3.0, 1.0).unwrap();
        let g = cone_grid(&wide, &[0.1], &h).unwrap();
        assert_eq!(g.len(), 1);
        assert_relative_eq!(g[0].point().z1.re, 0.9, epsilon = 1e-15);
        assert_relative_eq!(g[0].point().z2.re, 0.95, epsilon = 1e-15);
        assert_relative_eq!(g[0].aperture, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cone_grid_rejects_bad_inputs() {
        let cone = NontangentialCone::new(BoundaryPoint::chi(), 2.0, 0.5).unwrap();
        let h = [Direction::real(-1.0, -1.0)];
        assert!(cone_grid(&cone, &[0.25, 0.5], &h).is_err());
        assert!(cone_grid(&cone, &[0.75], &h).is_err());
        assert!(matches!(
            cone_grid(&cone, &[0.25], &[Direction::real(1.0, -1.0)]),
            Err(GeometryError::NotInward(..))
        ));
    }

    #[test]
    fn lattice_is_inward_and_unit() {
        let tau = BoundaryPoint::from_angles(1.0, 2.0);
        let dirs = DirectionLattice::default().directions(&tau);
        assert!(dirs.len() > 100);
        for d in &dirs {
            assert!(d.is_inward_at(&tau));
            assert_relative_eq!(d.norm(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(dirs[0], radial_direction(&tau));
    }

    #[test]
    fn schedule_is_dyadic() {
        let s = Schedule::new(1.0, 2.0, 10).unwrap();
        let v = s.values();
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[9], 2f64.powi(-10));
        assert!(Schedule::new(1.0, 1.0, 10).is_err());
    }
}
