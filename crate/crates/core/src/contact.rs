//! Numerical contact-order analysis at boundary singularities.

use crate::error::{Error, Result};
use crate::quadrature::{angular_distance, to_circle, unimodular};
use crate::rif::Rif;
use crate::roots;
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Dyadic offsets `2^-k`, `k = K_MIN..=K_MAX`, on both sides of `tau`.
const K_MIN: i32 = 6;
const K_MAX: i32 = 16;
const MIN_R2: f64 = 0.999;

/// Result of a log-log fit `y ~ C x^K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    /// Fitted exponent.
    pub raw_order: f64,
    /// Nearest even integer.
    pub order: u32,
    pub r_squared: f64,
    /// `min` and `max` of `y / x^K` over the fit range.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchOrder {
    pub alpha: C64,
    pub branch: usize,
    pub fit: PowerFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityReport {
    pub location: [C64; 2],
    pub nontangential_value: C64,
    pub branch_orders: Vec<BranchOrder>,
    /// Parameters whose fits were rejected by the quality check.
    pub flagged_alphas: Vec<C64>,
}

fn nearest_even(x: f64) -> u32 {
    let r = (x / 2.0).round() * 2.0;
    if r < 0.0 {
        0
    } else {
        r as u32
    }
}

/// Least-squares fit of `log y` against `log x`.
pub fn power_fit(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::FitDegenerate { r2: 0.0 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    if !(r2 >= MIN_R2) {
        return Err(Error::FitDegenerate { r2 });
    }
    let ratios: Vec<f64> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| y / x.powf(slope))
        .collect();
    Ok(PowerFit {
        raw_order: slope,
        order: nearest_even(slope),
        r_squared: r2,
        lower: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        upper: ratios.iter().cloned().fold(0.0, f64::max),
    })
}

/// Sample of the local branches through a singularity at one offset.
struct LocalSample {
    zeta: C64,
    dist: f64,
    values: Vec<C64>,
}

fn require_point(rif: &Rif, point: &[C64]) -> Result<()> {
    if point.len() != rif.nvars() {
        return Err(Error::DimensionMismatch {
            expected: rif.nvars(),
            got: point.len(),
        });
    }
    Ok(())
}

/// Branches of the `alpha` level set through `(tau, gamma)`, sampled at
/// `zeta1 = tau e^{+- i 2^-k}` with Newton-polished slice roots. The two
/// sides are paired so that index `j` is the same analytic branch.
fn local_branches(rif: &Rif, alpha: C64, sing: [C64; 2]) -> Result<Vec<LocalSample>> {
    if rif.nvars() != 2 {
        return Err(Error::InvalidArgument("contact analysis needs two variables".into()));
    }
    let [tau, gamma] = sing;
    let coeffs_at = |z: C64| rif.level_slice(alpha, 1, &[z, C64::new(0.0, 0.0)]);
    let at_tau = coeffs_at(tau);
    let scale = rif.level_poly(alpha).max_abs_coeff();
    if at_tau.iter().all(|c| c.norm() < 1e-10 * scale) {
        return Err(Error::IdenticallyZeroSlice {
            base: vec![(tau.re, tau.im)],
        });
    }
    let rts = roots::roots(&at_tau).ok_or_else(|| Error::RootFindFailure {
        slice: format!("zeta1 = {tau}"),
    })?;
    let m = rts.iter().filter(|r| (*r - gamma).norm() < 1e-5).count();
    if m == 0 {
        return Err(Error::NoBranchThroughPoint);
    }

    let mut sides: Vec<Vec<LocalSample>> = Vec::new();
    for sign in [1.0, -1.0] {
        let mut side: Vec<LocalSample> = Vec::new();
        let mut prev: Option<Vec<C64>> = None;
        // innermost first, labels carried outward
        for k in (K_MIN..=K_MAX).rev() {
            let d = sign * 2f64.powi(-k);
            let zeta = tau * unimodular(d);
            let c = coeffs_at(zeta);
            let mut rts = roots::roots(&c).ok_or_else(|| Error::RootFindFailure {
                slice: format!("zeta1 = {zeta}"),
            })?;
            for r in rts.iter_mut() {
                *r = to_circle(roots::newton_polish(&c, *r, 4));
            }
            let mut values = Vec::with_capacity(m);
            match &prev {
                None => {
                    rts.sort_by(|a, b| (a - gamma).norm().partial_cmp(&(b - gamma).norm()).unwrap());
                    values.extend_from_slice(&rts[..m]);
                }
                Some(pv) => {
                    let mut used = vec![false; rts.len()];
                    for v in pv {
                        let (idx, _) = rts
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| !used[*i])
                            .map(|(i, r)| (i, (r - v).norm()))
                            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                            .unwrap();
                        used[idx] = true;
                        values.push(rts[idx]);
                    }
                }
            }
            prev = Some(values.clone());
            side.push(LocalSample {
                zeta,
                dist: (zeta - tau).norm(),
                values,
            });
        }
        // pair by the first-order angular slope at the innermost offset
        let inner = &side[0];
        let d = sign * 2f64.powi(-K_MAX);
        let slopes: Vec<f64> = inner.values.iter().map(|v| (v * gamma.conj()).arg() / d).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| slopes[a].partial_cmp(&slopes[b]).unwrap());
        for s in side.iter_mut() {
            s.values = order.iter().map(|&j| s.values[j]).collect();
        }
        sides.push(side);
    }
    Ok(sides.into_iter().flatten().collect())
}

fn check_singular(rif: &Rif, point: &[C64]) -> Result<()> {
    let s = rif.scale();
    if rif.p().eval_unchecked(point).norm() > 1e-8 * s {
        return Err(Error::NoBranchThroughPoint);
    }
    Ok(())
}

/// Exponent `K` with `W_j(zeta) ~ |zeta - tau|^K` along local branch `branch`
/// through the singularity.
pub fn weight_vanish_order(rif: &Rif, alpha: C64, branch: usize, sing: [C64; 2]) -> Result<PowerFit> {
    require_point(rif, &sing)?;
    check_singular(rif, &sing)?;
    let samples = local_branches(rif, alpha, sing)?;
    if branch >= samples[0].values.len() {
        return Err(Error::NoBranchThroughPoint);
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.dist).collect();
    let ys: Vec<f64> = samples
        .iter()
        .map(|s| {
            let w = rif.weight_sample(alpha, 1, &[s.zeta, s.values[branch]]);
            w.numerator / w.denominator
        })
        .collect();
    power_fit(&xs, &ys)
}

/// Number of local branches of the `alpha` level set through `sing`.
pub fn local_branch_count(rif: &Rif, alpha: C64, sing: [C64; 2]) -> Result<usize> {
    Ok(local_branches(rif, alpha, sing)?[0].values.len())
}

/// Maximal vanishing order of `g_j^{alpha1} - g_k^{alpha2}` near the
/// singularity over all pairs of local branches.
pub fn branch_contact_order(rif: &Rif, sing: [C64; 2], alpha1: C64, alpha2: C64) -> Result<PowerFit> {
    require_point(rif, &sing)?;
    if angular_distance(alpha1, alpha2) < 1e-9 {
        return Err(Error::InvalidArgument("the two parameters must differ".into()));
    }
    check_singular(rif, &sing)?;
    let a = local_branches(rif, alpha1, sing)?;
    let b = local_branches(rif, alpha2, sing)?;
    let xs: Vec<f64> = a.iter().map(|s| s.dist).collect();
    let mut best: Option<PowerFit> = None;
    let mut last_err = Error::NoBranchThroughPoint;
    for j in 0..a[0].values.len() {
        for k in 0..b[0].values.len() {
            let ys: Vec<f64> = a.iter().zip(&b).map(|(sa, sb)| (sa.values[j] - sb.values[k]).norm()).collect();
            match power_fit(&xs, &ys) {
                Ok(fit) => {
                    if best.is_none_or(|bf| fit.raw_order > bf.raw_order) {
                        best = Some(fit);
                    }
                }
                Err(e) => last_err = e,
            }
        }
    }
    best.ok_or(last_err)
}

/// Radial limit of `phi(r point)` as `r -> 1`, by Richardson extrapolation
/// over `r = 1 - 2^-k`, `k = 4..=20`.
pub fn nontangential_value(rif: &Rif, point: &[C64]) -> Result<C64> {
    require_point(rif, point)?;
    let vals: Vec<C64> = (4..=20)
        .map(|k| {
            let r = 1.0 - 2f64.powi(-k);
            let z: Vec<C64> = point.iter().map(|c| c * r).collect();
            rif.eval_unchecked(&z)
        })
        .collect();
    // h halves at each step: eliminate h, h^2, h^3
    let mut table = vals;
    let mut change = f64::INFINITY;
    for level in 1..=3 {
        let f = 2f64.powi(level);
        table = table.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        let n = table.len();
        change = (table[n - 1] - table[n - 2]).norm();
    }
    let v = *table.last().unwrap();
    let modulus = v.norm();
    if !(change <= 1e-6) || !((modulus - 1.0).abs() <= 1e-6) {
        return Err(Error::NonConvergent { change, modulus });
    }
    Ok(v)
}

/// Nontangential value plus weight-order fits for every local branch and
/// each parameter in `alphas`; parameters with rejected fits are flagged.
pub fn analyze_singularity(rif: &Rif, sing: [C64; 2], alphas: &[C64]) -> Result<SingularityReport> {
    let nontangential_value = nontangential_value(rif, &sing)?;
    let mut branch_orders = Vec::new();
    let mut flagged_alphas = Vec::new();
    for &alpha in alphas {
        let count = local_branch_count(rif, alpha, sing)?;
        let fits: Result<Vec<PowerFit>> = (0..count).map(|j| weight_vanish_order(rif, alpha, j, sing)).collect();
        match fits {
            Ok(fits) => {
                for (branch, fit) in fits.into_iter().enumerate() {
                    branch_orders.push(BranchOrder { alpha, branch, fit });
                }
            }
            Err(Error::FitDegenerate { .. }) => flagged_alphas.push(alpha),
            Err(e) => return Err(e),
        }
    }
    Ok(SingularityReport {
        location: sing,
        nontangential_value,
        branch_orders,
        flagged_alphas,
    })
}
