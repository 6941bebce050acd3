//! Clark measures in three variables: the general builder for functions with
//! no singularities on the closed polydisk, and closed forms for the tridisk
//! family `phi_s = (s z1 z2 z3 - z1 z2 - z1 z3 - z2 z3) / (s - z1 - z2 - z3)`.

use crate::blaschke;
use crate::error::{Error, Result};
use crate::levelset::assign;
use crate::quadrature::{graded_rule, poisson_kernel_md, to_circle, unimodular, uniform_angles, uniform_rule};
use crate::rif::Rif;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

/// A sheet `zeta3 = g(zeta1, zeta2)` of the level set sampled on the uniform
/// `grid_n x grid_n` grid (row-major, `zeta1` slowest).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperBranch {
    pub alpha: C64,
    pub grid_n: usize,
    pub values: Vec<C64>,
    pub weights: Vec<f64>,
}

impl HyperBranch {
    pub fn theta(&self) -> Vec<f64> {
        uniform_angles(self.grid_n)
    }

    pub fn max_residual(&self, rif: &Rif) -> f64 {
        let th = self.theta();
        let n = self.grid_n;
        (0..n * n)
            .map(|k| rif.level_residual(self.alpha, &[unimodular(th[k / n]), unimodular(th[k % n]), self.values[k]]))
            .fold(0.0, f64::max)
    }
}

const CERT_GRID: usize = 32;

/// Continue the roots along consecutive base points, starting from `init`.
fn continue_along(rif: &Rif, alpha: C64, bases: &[[C64; 2]], init: &[C64]) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(bases.len());
    out.push(init.to_vec());
    for k in 1..bases.len() {
        let sr = blaschke::slice_roots_unchecked(rif, &bases[k], alpha)?;
        let cur = &out[k - 1];
        let pred: Vec<C64> = if k >= 2 {
            cur.iter().zip(&out[k - 2]).map(|(a, b)| to_circle(2.0 * a - b)).collect()
        } else {
            cur.clone()
        };
        let (assigned, ok) = assign(&pred, &sr.roots);
        if !ok || assigned.iter().any(|v| v.is_none()) {
            return Err(Error::ContinuationCollision {
                theta: bases[k][1].arg(),
            });
        }
        out.push(assigned.into_iter().map(|v| to_circle(v.unwrap())).collect());
    }
    Ok(out)
}

/// The level set of `alpha` as `deg_{z3} p` sheets over a `grid_n^2` grid,
/// for a three-variable `phi` whose denominator has no zeros on the closed
/// polydisk. Continuation runs along `zeta1` and then along each row in
/// `zeta2`.
pub fn build_measure_d(rif: &Rif, alpha: C64, grid_n: usize) -> Result<Vec<HyperBranch>> {
    if rif.nvars() != 3 {
        return Err(Error::InvalidArgument(format!(
            "the polydisk builder handles three variables, got {}",
            rif.nvars()
        )));
    }
    blaschke::check_unimodular(alpha, "alpha")?;
    if grid_n < 8 || !grid_n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("grid size must be a power of two >= 8, got {grid_n}")));
    }
    let cert = match rif.certificate() {
        Some(c) => c.clone(),
        None => rif.p().stability_check(CERT_GRID)?,
    };
    if !cert.closed_polydisk_zero_free(1e-6) {
        return Err(Error::BoundaryZero {
            min_root_modulus: cert.min_modulus_on_grid,
        });
    }
    let nb = rif.degrees()[2];
    let z: Vec<C64> = uniform_angles(grid_n).into_iter().map(unimodular).collect();

    let first: Vec<[C64; 2]> = z.iter().map(|&a| [a, z[0]]).collect();
    let mut init = blaschke::slice_roots_unchecked(rif, &first[0], alpha)?.roots;
    init.iter_mut().for_each(|r| *r = to_circle(*r));
    init.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
    if init.len() != nb {
        return Err(Error::RootFindFailure {
            slice: "initial slice lost degree".into(),
        });
    }
    let column = continue_along(rif, alpha, &first, &init)?;
    let rows: Vec<Vec<Vec<C64>>> = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let bases: Vec<[C64; 2]> = z.iter().map(|&b| [z[i], b]).collect();
            continue_along(rif, alpha, &bases, &column[i])
        })
        .collect::<Result<_>>()?;

    let mut branches = Vec::with_capacity(nb);
    for j in 0..nb {
        let mut values = Vec::with_capacity(grid_n * grid_n);
        let mut weights = Vec::with_capacity(grid_n * grid_n);
        for (i, row) in rows.iter().enumerate() {
            for (k, node) in row.iter().enumerate() {
                let g = node[j];
                let w = rif.weight_sample(alpha, 2, &[z[i], z[k], g]);
                values.push(g);
                weights.push(w.numerator / w.denominator);
            }
        }
        branches.push(HyperBranch {
            alpha,
            grid_n,
            values,
            weights,
        });
    }
    Ok(branches)
}

/// Tensor trapezoid integral of `f` against the measure carried by `branches`.
pub fn integrate_d<F>(branches: &[HyperBranch], f: F) -> C64
where
    F: Fn(&[C64; 3]) -> C64 + Sync,
{
    let mut total = C64::new(0.0, 0.0);
    for b in branches {
        let n = b.grid_n;
        let z: Vec<C64> = uniform_angles(n).into_iter().map(unimodular).collect();
        let rows: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    let idx = i * n + k;
                    s += f(&[z[i], z[k], b.values[idx]]) * b.weights[idx];
                }
                s
            })
            .collect();
        total += rows.iter().sum::<C64>() / (n * n) as f64;
    }
    total
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 3.0) {
        return Err(Error::InvalidArgument(format!("tridisk parameter must be >= 3, got {s}")));
    }
    Ok(())
}

fn tridisk_den(s: f64, alpha: C64, z1: C64, z2: C64) -> Result<C64> {
    let d = s * z1 * z2 - z1 - z2 + alpha;
    if d.norm() < 1e-14 * (s + 3.0) {
        return Err(Error::SingularDenominator);
    }
    Ok(d)
}

/// `zeta3 = psi_s^alpha(zeta1, zeta2)` on the level set of `phi_s`.
pub fn tridisk_level(s: f64, alpha: C64, z1: C64, z2: C64) -> Result<C64> {
    check_s(s)?;
    let den = tridisk_den(s, alpha, z1, z2)?;
    Ok((alpha * s - alpha * z1 - alpha * z2 + z1 * z2) / den)
}

/// Density `W_{s,alpha}(zeta1, zeta2) = 1 / |d phi_s / d z3|` on the level set.
pub fn tridisk_weight(s: f64, alpha: C64, z1: C64, z2: C64) -> Result<f64> {
    check_s(s)?;
    let den = tridisk_den(s, alpha, z1, z2)?;
    let num = s * s * z1 * z2 - s * (z1 * z1 * z2 + z1 * z2 * z2 + z1 + z2) + z1 * z1 + z1 * z2 + z2 * z2;
    Ok(num.norm() / den.norm_sqr())
}

/// `W_{3,-1}` on the anti-diagonal `(e^{i theta}, e^{-i theta})`.
pub fn diagonal_weight(theta: f64) -> Result<f64> {
    tridisk_weight(3.0, C64::new(-1.0, 0.0), unimodular(theta), unimodular(-theta))
}

/// Closed form `1 + 1 / (1 - cos theta)` of [`diagonal_weight`].
pub fn diagonal_weight_reference(theta: f64) -> f64 {
    let h = (0.5 * theta).sin();
    1.0 + 1.0 / (2.0 * h * h)
}

/// Values of `psi_3^{-1}` near `(1, 1)` along the diagonal and the
/// anti-diagonal at angle `theta`.
pub fn singular_path_values(theta: f64) -> Result<(C64, C64)> {
    let a = C64::new(-1.0, 0.0);
    let z = unimodular(theta);
    Ok((tridisk_level(3.0, a, z, z)?, tridisk_level(3.0, a, z, z.conj())?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonReportD {
    pub point: Vec<C64>,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// Three-variable Poisson identity for `phi_s` at an interior point, with the
/// closed-form level set and weight on a `grid_n^2` tensor grid. `refinement`
/// concentrates nodes near `(1, 1)` (1 for the uniform rule).
pub fn verify_poisson_d(s: f64, alpha: C64, z: &[C64; 3], grid_n: usize, refinement: f64) -> Result<PoissonReportD> {
    check_s(s)?;
    blaschke::check_unimodular(alpha, "alpha")?;
    if z.iter().any(|c| c.norm() >= 1.0) {
        return Err(Error::InvalidArgument("test point must be interior".into()));
    }
    if !(refinement >= 1.0) {
        return Err(Error::InvalidArgument("refinement must be >= 1".into()));
    }
    let (nodes, quad) = if refinement > 1.0 {
        graded_rule(grid_n, 0.0, refinement)
    } else {
        uniform_rule(grid_n)
    };
    let pts: Vec<C64> = nodes.iter().map(|&t| unimodular(t)).collect();
    let rows: Vec<f64> = (0..grid_n)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut acc = 0.0;
            for k in 0..grid_n {
                let (a, b) = (pts[i], pts[k]);
                let w = match tridisk_weight(s, alpha, a, b) {
                    Ok(w) => w,
                    // the single node at the singular point carries no mass
                    Err(Error::SingularDenominator) => continue,
                    Err(e) => return Err(e),
                };
                if w == 0.0 {
                    continue;
                }
                let c = tridisk_level(s, alpha, a, b)?;
                acc += quad[i] * quad[k] * w * poisson_kernel_md(z, &[a, b, c]);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let rhs: f64 = rows.iter().sum();
    let phi = crate::corpus::tridisk(s).eval(z)?;
    let lhs = (1.0 - phi.norm_sqr()) / (alpha - phi).norm_sqr();
    Ok(PoissonReportD {
        point: z.to_vec(),
        lhs,
        rhs,
        rel_error: (lhs - rhs).abs() / lhs,
    })
}

/// Samples `(theta1, theta2, arg psi)` of the level surface on a uniform
/// grid; singular nodes are skipped.
pub fn tridisk_level_surface(s: f64, alpha: C64, grid_n: usize) -> Result<Vec<(f64, f64, f64)>> {
    check_s(s)?;
    let th = uniform_angles(grid_n);
    let mut out = Vec::with_capacity(grid_n * grid_n);
    for &a in &th {
        for &b in &th {
            match tridisk_level(s, alpha, unimodular(a), unimodular(b)) {
                Ok(v) => out.push((a, b, v.arg())),
                Err(Error::SingularDenominator) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use std::f64::consts::TAU;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn monomial3_measure() {
        let b = build_measure_d(&corpus::monomial3(), one(), 16).unwrap();
        assert_eq!(b.len(), 1);
        let th = uniform_angles(16);
        for i in 0..16 {
            for k in 0..16 {
                let g = b[0].values[i * 16 + k];
                assert!((g - unimodular(-th[i] - th[k])).norm() < 1e-13);
                assert!((b[0].weights[i * 16 + k] - 1.0).abs() < 1e-13);
            }
        }
        assert!((integrate_d(&b, |_| one()).re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tridisk_closed_form_examples() {
        assert!((tridisk_level(4.0, one(), one(), one()).unwrap() - one()).norm() < 1e-15);
        assert!(matches!(tridisk_level(3.0, -one(), one(), one()), Err(Error::SingularDenominator)));
        let v = tridisk_level(4.0, C64::new(0.0, 1.0), one(), -one()).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((tridisk_weight(4.0, one(), one(), one()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tridisk_weight(3.0, C64::new(0.0, 1.0), one(), one()).unwrap(), 0.0);
        // phi_s(zeta1, zeta2, psi) = alpha
        let phi = corpus::tridisk(4.5);
        let alpha = unimodular(2.0);
        for (a, b) in [(0.3, 1.2), (-2.0, 0.5), (3.0, 3.0)] {
            let (a, b) = (unimodular(a), unimodular(b));
            let c = tridisk_level(4.5, alpha, a, b).unwrap();
            assert!((phi.eval(&[a, b, c]).unwrap() - alpha).norm() < 1e-10);
        }
    }

    #[test]
    fn builder_matches_closed_form() {
        for s in [4.0, 5.0] {
            let rif = corpus::tridisk(s);
            for alpha in [one(), C64::new(0.0, 1.0), -one(), unimodular(0.7)] {
                let b = build_measure_d(&rif, alpha, 32).unwrap();
                assert_eq!(b.len(), 1);
                assert!(b[0].max_residual(&rif) < 1e-8 * rif.scale());
                let th = uniform_angles(32);
                for i in 0..32 {
                    for k in 0..32 {
                        let (a, c) = (unimodular(th[i]), unimodular(th[k]));
                        let idx = i * 32 + k;
                        let w = tridisk_weight(s, alpha, a, c).unwrap();
                        assert!((b[0].weights[idx] - w).abs() < 1e-8);
                        assert!((b[0].values[idx] - tridisk_level(s, alpha, a, c).unwrap()).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn singular_tridisk_is_refused() {
        assert!(matches!(
            build_measure_d(&corpus::tridisk(3.0), one(), 16),
            Err(Error::BoundaryZero { .. })
        ));
    }

    #[test]
    fn diagonal_blow_up() {
        let n = 4096;
        let mut max: f64 = 0.0;
        for i in 1..n {
            let t = TAU * i as f64 / n as f64;
            let w = diagonal_weight(t).unwrap();
            let r = diagonal_weight_reference(t);
            assert!((w - r).abs() / r < 1e-8);
            max = max.max(w);
        }
        assert!(max > 1e3);
        let (d, a) = singular_path_values(1e-6).unwrap();
        assert!((d - a).norm() > 0.1);
    }

    #[test]
    fn tridisk_poisson() {
        let z = [C64::new(0.2, 0.0), C64::new(0.0, 0.3), C64::new(-0.1, 0.0)];
        let r = verify_poisson_d(4.0, one(), &z, 512, 1.0).unwrap();
        assert!(r.rel_error < 1e-5, "{r:?}");
        let zero = [C64::new(0.0, 0.0); 3];
        let r = verify_poisson_d(4.0, C64::new(0.0, 1.0), &zero, 256, 1.0).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && r.rel_error < 1e-10);
        let z = [C64::new(0.5, 0.0); 3];
        let r = verify_poisson_d(3.0, C64::new(0.0, 1.0), &z, 512, 8.0).unwrap();
        assert!(r.rel_error < 1e-4, "{r:?}");
    }
}
