//! Torus grids, Poisson kernels and small sampling helpers.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// `n` equispaced angles `2 pi i / n`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Unit-circle point at angle `theta`.
#[inline]
pub fn unimodular(theta: f64) -> C64 {
    C64::new(theta.cos(), theta.sin())
}

/// Absolute angle between two points of the circle, in `[0, pi]`.
#[inline]
pub fn angular_distance(a: C64, b: C64) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Normalize a nonzero complex number onto the unit circle.
#[inline]
pub fn to_circle(z: C64) -> C64 {
    z / z.norm()
}

/// Angle of `z` wrapped into `[0, 2 pi)`.
pub fn angle_0_2pi(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// One-variable Poisson kernel `(1 - |z|^2) / |zeta - z|^2`.
#[inline]
pub fn poisson_kernel(z: C64, zeta: C64) -> f64 {
    (1.0 - z.norm_sqr()) / (zeta - z).norm_sqr()
}

/// Product Poisson kernel on the polydisk.
pub fn poisson_kernel_md(z: &[C64], zeta: &[C64]) -> f64 {
    z.iter().zip(zeta).map(|(a, b)| poisson_kernel(*a, *b)).product()
}

/// Cauchy (Szego) kernel of the polydisk, `prod 1 / (1 - conj(w_j) z_j)`.
pub fn cauchy_kernel(w: &[C64], z: &[C64]) -> C64 {
    w.iter()
        .zip(z)
        .map(|(a, b)| (C64::new(1.0, 0.0) - a.conj() * b).inv())
        .product()
}

/// Periodic grading `theta(t) = t - c sin(t - center)` that concentrates
/// trapezoid nodes around `center` by a factor `1 / (1 - c)` while keeping the
/// rule periodic. Returns `(nodes, weights)` with weights summing to one.
pub fn graded_rule(n: usize, center: f64, refinement: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(refinement >= 1.0);
    let c = 1.0 - 1.0 / refinement;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let t = center + TAU * i as f64 / n as f64;
        nodes.push(t - c * (t - center).sin());
        weights.push((1.0 - c * (t - center).cos()) / n as f64);
    }
    (nodes, weights)
}

/// Uniform rule on `n` nodes for the normalized measure `d theta / 2 pi`.
pub fn uniform_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    (uniform_angles(n), vec![1.0 / n as f64; n])
}

/// Periodic rule whose node density is the mixture
/// `share + sum_k (1 - share) / K * P_k`, with `P_k` the Poisson kernel of a
/// point at distance `width_k` inside the circle in direction `center_k`.
/// Nodes are the equispaced quantiles of the mixture, so the rule is the
/// trapezoid rule after a smooth periodic change of variables. `bumps` holds
/// `(center, width)` pairs; weights are for `d theta / 2 pi` and sum to one.
pub fn cauchy_mixture_rule(n: usize, bumps: &[(f64, f64)], share: f64) -> (Vec<f64>, Vec<f64>) {
    if bumps.is_empty() {
        return uniform_rule(n);
    }
    let mu = (1.0 - share) / bumps.len() as f64;
    // 2 pi * density
    let dens = |t: f64| -> f64 {
        let mut d = share;
        for &(c, w) in bumps {
            let r = 1.0 - w;
            let s = (0.5 * (t - c)).sin();
            d += mu * w * (2.0 - w) / (w * w + 4.0 * r * s * s);
        }
        d
    };
    // 2 pi * cumulative distribution, continuous and increasing on R
    let cdf = |t: f64| -> f64 {
        let mut g = share * t;
        for &(c, w) in bumps {
            let r = 1.0 - w;
            let x = t - c;
            let s = (0.5 * x).sin();
            let den = w + 2.0 * r * s * s; // 1 - r cos x without cancellation
            g += mu * (x + 2.0 * (r * x.sin()).atan2(den));
        }
        g
    };
    let g0 = cdf(0.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut lo = 0.0;
    for i in 0..n {
        let target = g0 + TAU * i as f64 / n as f64;
        let (mut a, mut b) = (lo, TAU);
        let mut t = a + (target - cdf(a)) / dens(a).max(1e-300);
        for _ in 0..200 {
            if !(t > a && t < b) {
                t = 0.5 * (a + b);
            }
            let f = cdf(t) - target;
            if f > 0.0 {
                b = t;
            } else {
                a = t;
            }
            if f.abs() < 1e-15 * TAU || b - a < 1e-16 {
                break;
            }
            t -= f / dens(t);
        }
        nodes.push(t);
        weights.push(1.0 / (n as f64 * dens(t)));
        lo = t;
    }
    (nodes, weights)
}

/// Seeded points uniformly distributed in the polydisk `(radius D)^d`.
pub fn random_interior_points(seed: u64, count: usize, d: usize, radius: f64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    C64::from_polar(r, rng.gen_range(-PI..PI))
                })
                .collect()
        })
        .collect()
}

/// Seeded unimodular parameters.
pub fn random_unimodular(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| unimodular(rng.gen_range(0.0..TAU))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_kernel_integrates_to_one() {
        let z = C64::new(0.6, -0.3);
        let n = 512;
        let s: f64 = uniform_angles(n).iter().map(|&t| poisson_kernel(z, unimodular(t))).sum();
        assert!((s / n as f64 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn graded_rule_keeps_periodic_accuracy() {
        let (nodes, weights) = graded_rule(256, 0.0, 8.0);
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // spacing near the center shrinks by the refinement factor
        let h0 = nodes[1] - nodes[0];
        assert!((h0 * 256.0 / TAU - 1.0 / 8.0).abs() < 1e-3);
        let z = C64::new(0.5, 0.2);
        let s: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * poisson_kernel(z, unimodular(t)))
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_mixture_rule_resolves_narrow_bumps() {
        let bumps = [(0.3, 1e-5), (3.5, 1e-3)];
        let (nodes, weights) = cauchy_mixture_rule(1024, &bumps, 0.5);
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]) && nodes[1023] < TAU);
        // integrate a Poisson kernel peaked inside the narrow bump
        for &(c, w) in &bumps {
            let z = C64::from_polar(1.0 - 2.0 * w, c + 0.5 * w);
            let s: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&t, &q)| q * poisson_kernel(z, unimodular(t)))
                .sum();
            assert!((s - 1.0).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn random_points_are_reproducible_and_inside() {
        let a = random_interior_points(3, 20, 2, 0.7);
        let b = random_interior_points(3, 20, 2, 0.7);
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|z| z.norm() < 0.7));
    }
}
