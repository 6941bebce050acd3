//! Univariate complex polynomial roots.
//!
//! Coefficients are stored in ascending order, `c[0] + c[1] z + ... + c[n] z^n`.
//! Roots come from Aberth-Ehrlich simultaneous iteration followed by a few
//! Newton polishing steps, which is plenty for the small degrees (at most a
//! few dozen) that slices of rational inner functions produce.

use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

const MAX_ITER: usize = 800;

/// Value and derivative by Horner's rule.
pub fn horner(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Upper bound on `|p(z)|` rounding error scale: `sum |c_k| |z|^k`.
pub fn magnitude_scale(c: &[C64], z: C64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Drop leading (highest-degree) coefficients that are negligible relative to
/// the largest one. Returns the effective degree, or `None` for the zero
/// polynomial.
pub fn effective_degree(c: &[C64], rel_tol: f64) -> Option<usize> {
    let max = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    (0..c.len()).rev().find(|&k| c[k].norm() > rel_tol * max)
}

/// All roots of the polynomial, counted with multiplicity.
///
/// Leading coefficients below `1e-14` of the largest coefficient are treated
/// as zero (the corresponding roots are at infinity and are not returned).
/// Returns `None` when the iteration fails to reach a small backward error.
pub fn roots(c: &[C64]) -> Option<Vec<C64>> {
    let deg = match effective_degree(c, 1e-14) {
        None => return Some(Vec::new()),
        Some(d) => d,
    };
    let c = &c[..=deg];
    // factor out roots at the origin
    let low = c.iter().position(|a| *a != C64::new(0.0, 0.0)).unwrap_or(0);
    let mut out = vec![C64::new(0.0, 0.0); low];
    let c = &c[low..];
    let n = c.len() - 1;
    match n {
        0 => return Some(out),
        1 => {
            out.push(-c[0] / c[1]);
            return Some(out);
        }
        2 => {
            out.extend(quadratic(c[0], c[1], c[2]));
            return Some(out);
        }
        _ => {}
    }
    let found = aberth(c)?;
    out.extend(found);
    Some(out)
}

fn quadratic(c0: C64, c1: C64, c2: C64) -> [C64; 2] {
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    // pick the sign that avoids cancellation
    let q = if (c1.conj() * disc).re >= 0.0 {
        -0.5 * (c1 + disc)
    } else {
        -0.5 * (c1 - disc)
    };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0); 2];
    }
    let mut r = [q / c2, c0 / q];
    for z in r.iter_mut() {
        *z = newton_polish(&[c0, c1, c2], *z, 2);
    }
    r
}

fn aberth(c: &[C64]) -> Option<Vec<C64>> {
    let n = c.len() - 1;
    let lead = c[n].norm();
    let radius = (c[0].norm() / lead).powf(1.0 / n as f64).max(1e-300);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, TAU * k as f64 / n as f64 + 0.4))
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let (p, dp) = horner(c, z[k]);
            if p.norm() <= 4.0 * f64::EPSILON * magnitude_scale(c, z[k]) {
                converged[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                // nudge off a critical point
                let bump = C64::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += bump;
                all = false;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 1e-15 * (1.0 + z[k].norm()) {
                converged[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    for zk in z.iter_mut() {
        *zk = newton_polish(c, *zk, 3);
    }
    let ok = z.iter().all(|&zk| {
        let (p, _) = horner(c, zk);
        zk.re.is_finite() && zk.im.is_finite() && p.norm() <= 1e-9 * magnitude_scale(c, zk)
    });
    ok.then_some(z)
}

/// Newton steps that are only accepted when they reduce `|p|`.
pub fn newton_polish(c: &[C64], mut z: C64, steps: usize) -> C64 {
    let (mut p, mut dp) = horner(c, z);
    for _ in 0..steps {
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, dpc) = horner(c, cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
            dp = dpc;
        } else {
            break;
        }
    }
    z
}

/// Coefficients of the `k`-th derivative.
pub fn derivative(c: &[C64], k: usize) -> Vec<C64> {
    let mut d = c.to_vec();
    for _ in 0..k {
        if d.len() <= 1 {
            return vec![C64::new(0.0, 0.0)];
        }
        d = d.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
    }
    d
}

/// Refine a root of multiplicity `m` by Newton on the `(m-1)`-th derivative,
/// where it is simple.
pub fn polish_multiple(c: &[C64], z: C64, m: usize) -> C64 {
    if m <= 1 {
        return newton_polish(c, z, 3);
    }
    newton_polish(&derivative(c, m - 1), z, 6)
}

/// Group roots closer than `tol` and replace each cluster by its centroid.
/// Multiple roots come back from the iteration as tight clusters whose mean is
/// far more accurate than any individual member.
pub fn cluster_roots(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut sum = roots[i];
        let mut count = 1;
        for j in i + 1..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() < tol {
                used[j] = true;
                sum += roots[j];
                count += 1;
            }
        }
        out.push((sum / count as f64, count));
    }
    out
}
