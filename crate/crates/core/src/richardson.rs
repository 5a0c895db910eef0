//! Richardson extrapolation of sequences sampled on a geometric schedule.
//!
//! Values `v_k = v(t_k)` with `t_k = t_0 r^{-k}` and a regular expansion
//! `v(t) = v(0) + c_1 t + c_2 t^2 + ...` are combined in a Neville tableau.
//! Every entry of the tableau up to the requested number of levels is a
//! candidate and the one with the smallest error bound wins, so allowing more
//! levels never makes the reported error larger.
//!
//! The bound of an entry is its distance to both parents, plus its propagated
//! rounding noise, plus any excess of later entries at the same level over
//! their own noise. The last term rejects plateaus that the sequence later
//! leaves (exact zeros of a function met by the schedule, for example).

use num_complex::Complex64;
use serde::Serialize;

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: C64,
    pub error: f64,
    /// Tableau row (index into the input) and elimination level of the winner.
    pub row: usize,
    pub level: usize,
}

/// Relative rounding noise assumed for sampled values.
pub const VALUE_NOISE: f64 = 64.0 * f64::EPSILON;

/// Best tableau entry using at most `max_levels` eliminations, with noise
/// `VALUE_NOISE * |v_k|` on each value.
///
/// Returns `None` for fewer than two values. With `max_levels == 0` the raw
/// sequence is used and the error is the last successive difference.
pub fn extrapolate(values: &[C64], ratio: f64, max_levels: usize) -> Option<Extrapolation> {
    let noise: Vec<f64> = values.iter().map(|v| VALUE_NOISE * v.norm()).collect();
    extrapolate_noisy(values, &noise, ratio, max_levels)
}

/// [`extrapolate`] with explicit absolute noise per value.
pub fn extrapolate_noisy(values: &[C64], noise: &[f64], ratio: f64, max_levels: usize) -> Option<Extrapolation> {
    assert_eq!(values.len(), noise.len());
    let n = values.len();
    if n < 2 {
        return None;
    }
    if max_levels == 0 {
        return Some(Extrapolation {
            value: values[n - 1],
            error: (values[n - 1] - values[n - 2]).norm(),
            row: n - 1,
            level: 0,
        });
    }
    // tableau[i][j], noise[i][j], parent distance[i][j]
    let mut tab: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut tnoise: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut parent: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let width = i.min(max_levels) + 1;
        let mut row = vec![values[i]];
        let mut rn = vec![noise[i]];
        let mut rp = vec![0.0];
        for j in 1..width {
            let factor = ratio.powi(j as i32) - 1.0;
            let (a, b) = (row[j - 1], tab[i - 1][j - 1]);
            let r = a + (a - b) / factor;
            row.push(r);
            rn.push(rn[j - 1] + (rn[j - 1] + tnoise[i - 1][j - 1]) / factor);
            rp.push((r - a).norm().max((r - b).norm()));
        }
        tab.push(row);
        tnoise.push(rn);
        parent.push(rp);
    }
    let mut best: Option<Extrapolation> = None;
    for j in 1..=max_levels.min(n - 1) {
        // excess[i] = max over later rows i' > i of (|R(i',j) - R(i,j)| - noise(i',j))^+
        for i in j..n {
            let r = tab[i][j];
            let mut excess: f64 = 0.0;
            for k in i + 1..n {
                excess = excess.max((tab[k][j] - r).norm() - tnoise[k][j]);
            }
            let err = parent[i][j] + tnoise[i][j] + excess;
            if err.is_finite() && best.is_none_or(|b| err < b.error) {
                best = Some(Extrapolation {
                    value: r,
                    error: err,
                    row: i,
                    level: j,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schedule(n: usize) -> Vec<f64> {
        (1..=n).map(|k| 0.5f64.powi(k as i32)).collect()
    }

    #[test]
    fn polynomial_sequences_are_exact() {
        let ts = schedule(8);
        let vals: Vec<C64> = ts
            .iter()
            .map(|&t| C64::new(3.0 - 2.0 * t + 5.0 * t * t - t * t * t, t))
            .collect();
        let e = extrapolate(&vals, 2.0, 4).unwrap();
        assert!((e.value - C64::new(3.0, 0.0)).norm() < 1e-13, "{e:?}");
        assert!(e.level >= 3);
    }

    #[test]
    fn analytic_difference_quotient() {
        // (exp(t) - 1)/t -> 1
        let ts = schedule(20);
        let vals: Vec<C64> = ts.iter().map(|&t| C64::new(t.exp_m1() / t, 0.0)).collect();
        let e = extrapolate(&vals, 2.0, 4).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-13);
        assert!(e.error < 1e-12);
    }

    #[test]
    fn zero_levels_uses_the_raw_tail() {
        let vals = [C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.25, 0.0)];
        let e = extrapolate(&vals, 2.0, 0).unwrap();
        assert_eq!(e.value, C64::new(0.25, 0.0));
        assert_eq!(e.error, 0.25);
        assert!(extrapolate(&vals[..1], 2.0, 4).is_none());
    }

    #[test]
    fn plateau_that_is_later_left_is_rejected() {
        let vals: Vec<C64> = (0..30)
            .map(|k| if k < 15 { C64::new(0.0, 0.0) } else { C64::new(1.0 + 0.5f64.powi(k), 0.0) })
            .collect();
        let e = extrapolate(&vals, 2.0, 4).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn noisy_difference_quotients_stop_before_the_noise() {
        // (exp(t) - 1)/t with the numerator rounded, as happens for (f(t) - f(0))/t
        let ts = schedule(45);
        let vals: Vec<C64> = ts.iter().map(|&t| C64::new(((1.0 + t.exp_m1()) - 1.0) / t, 0.0)).collect();
        let noise: Vec<f64> = ts.iter().map(|&t| 4.0 * f64::EPSILON / t).collect();
        let e = extrapolate_noisy(&vals, &noise, 2.0, 4).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-10, "{e:?}");
        assert!((e.value.re - 1.0).abs() <= e.error);
    }

    proptest! {
        #[test]
        fn more_levels_never_increase_the_error(
            c in proptest::collection::vec(-5.0f64..5.0, 1..6),
            n in 4usize..25,
            levels in 1usize..6,
        ) {
            let ts = schedule(n);
            let vals: Vec<C64> = ts
                .iter()
                .map(|&t| C64::new(c.iter().rev().fold(0.0, |a, &x| a * t + x) + (3.0 * t).sin(), 0.0))
                .collect();
            let a = extrapolate(&vals, 2.0, levels).unwrap();
            let b = extrapolate(&vals, 2.0, 2 * levels).unwrap();
            prop_assert!(b.error <= a.error);
        }
    }
}
