//! Quadrature helpers shared by the k-space and x-space integrals.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Default number of quasi-momentum cells on `(-π, π)`.
pub const DEFAULT_K_POINTS: usize = 1 << 16;

/// Pairwise (tree) summation. The result only depends on the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Midpoints of `n` equal cells covering `(-π, π)`.
///
/// For even `n` the grid never hits `0` or `±π`.
pub fn k_midpoints(n: usize) -> impl Iterator<Item = f64> + Clone {
    let width = 2.0 * PI / n as f64;
    (0..n).map(move |i| -PI + (i as f64 + 0.5) * width)
}

/// Integrates `f` over `[lo, hi]` with the substitution
/// `x = lo + (hi - lo)(1 - cos φ)/2` and an `n`-node midpoint rule in `φ`.
///
/// The Jacobian vanishes like `sqrt` at both ends, which absorbs
/// inverse-square-root endpoint singularities.
pub fn cosine_midpoint<F: FnMut(f64) -> f64>(lo: f64, hi: f64, n: usize, mut f: F) -> f64 {
    if hi <= lo || n == 0 {
        return 0.0;
    }
    let half = 0.5 * (hi - lo);
    let step = PI / n as f64;
    let terms: alloc::vec::Vec<f64> = (0..n)
        .map(|i| {
            let phi = (i as f64 + 0.5) * step;
            let x = lo + half * (1.0 - phi.cos());
            f(x) * half * phi.sin() * step
        })
        .collect();
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn midpoints_avoid_singular_k() {
        for k in k_midpoints(1 << 10) {
            assert!(k.abs() > 1e-4 && (PI - k.abs()) > 1e-4);
        }
    }

    #[test]
    fn cosine_rule_handles_inverse_sqrt_ends() {
        // ∫_0^1 dx / sqrt(x(1-x)) = π
        let v = cosine_midpoint(0.0, 1.0, 64, |x| 1.0 / (x * (1.0 - x)).sqrt());
        assert!((v - PI).abs() < 1e-12, "{v}");
        // ∫_{-1}^{2} x dx / sqrt((x+1)(2-x)) = π/2
        let v = cosine_midpoint(-1.0, 2.0, 64, |x| x / ((x + 1.0) * (2.0 - x)).sqrt());
        assert!((v - PI / 2.0).abs() < 1e-12, "{v}");
        // regular ends converge at second order
        let v = cosine_midpoint(-1.0, 2.0, 4096, |x| x * x);
        assert!((v - 3.0).abs() < 1e-6, "{v}");
    }
}
