//! Reproducible quasi-random sample designs.
//!
//! Points come from a Halton sequence shifted modulo 1 by a vector drawn
//! from a seeded ChaCha generator, so a given seed always yields the same
//! design.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point2;

type C64 = Complex64;

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const SEED_ENV: &str = "BIDISK_JULIA_SEED";

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Seed from `BIDISK_JULIA_SEED`, falling back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// `n` points of the shifted Halton sequence in `[0,1)^dim`.
pub fn halton(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            (0..dim)
                .map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect()
        })
        .collect()
}

/// Area-uniform points of the open bidisk.
pub fn bidisk_points(n: usize, seed: u64) -> Vec<Point2> {
    halton(n, 4, seed)
        .into_iter()
        .map(|u| {
            let z1 = C64::from_polar(u[0].sqrt(), 2.0 * PI * u[1]);
            let z2 = C64::from_polar(u[2].sqrt(), 2.0 * PI * u[3]);
            Point2::new(z1, z2)
        })
        .collect()
}

fn half_plane_point(u_mod: f64, u_arg: f64) -> C64 {
    // arguments kept a hair away from the real axis, moduli log-uniform in [e^-3, e^3]
    let arg = PI * (1e-3 + (1.0 - 2e-3) * u_arg);
    C64::from_polar((6.0 * (u_mod - 0.5)).exp(), arg)
}

/// Points of the upper half-plane.
pub fn half_plane_points(n: usize, seed: u64) -> Vec<C64> {
    halton(n, 2, seed)
        .into_iter()
        .map(|u| half_plane_point(u[0], u[1]))
        .collect()
}

/// Points of the product of two upper half-planes.
pub fn half_plane_pairs(n: usize, seed: u64) -> Vec<(C64, C64)> {
    halton(n, 4, seed)
        .into_iter()
        .map(|u| (half_plane_point(u[0], u[1]), half_plane_point(u[2], u[3])))
        .collect()
}

/// Seeded generator for the random tests and constructions.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn designs_are_reproducible_and_in_domain() {
        let a = bidisk_points(500, 7);
        assert_eq!(a, bidisk_points(500, 7));
        assert_ne!(a, bidisk_points(500, 8));
        assert!(a.iter().all(|p| p.is_interior()));
        assert!(half_plane_pairs(500, 1).iter().all(|(a, b)| a.im > 0.0 && b.im > 0.0));
    }
}
