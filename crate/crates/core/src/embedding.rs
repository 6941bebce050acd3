//! Finite-rank checks of the Clark embedding `J_alpha : K_phi -> L^2(sigma_alpha)`.

use crate::clark::{integrate, ClarkMeasure};
use crate::error::{Error, Result};
use crate::levelset::{Branch, FrozenAxis};
use crate::poly::PolyMD;
use crate::quadrature::{cauchy_kernel, unimodular, uniform_angles};
use crate::rif::Rif;
use crate::roots;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramReport {
    pub sample_points: Vec<[C64; 2]>,
    pub gram_model: Vec<Vec<C64>>,
    pub gram_embedded: Vec<Vec<C64>>,
    pub max_abs_error: f64,
    /// Largest `|G - G^*|` entry over both matrices.
    pub hermitian_defect: f64,
    pub min_eigenvalue_model: f64,
    pub min_eigenvalue_embedded: f64,
}

/// `J_alpha[K_w](zeta) = (1 - alpha conj(phi(w))) C_w(zeta)`.
pub fn embedded_kernel(rif: &Rif, alpha: C64, w: &[C64; 2], zeta: &[C64; 2]) -> C64 {
    (C64::new(1.0, 0.0) - alpha * rif.eval_unchecked(w).conj()) * cauchy_kernel(w, zeta)
}

fn hermitian_min_eig(g: &[Vec<C64>]) -> (f64, f64) {
    let m = g.len();
    let mat = DMatrix::from_fn(m, m, |i, j| g[i][j]);
    let defect = (&mat - mat.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let herm = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
    let min = herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    (defect, min)
}

/// Compare `<K_{w_i}, K_{w_j}>` in the model space with the
/// `L^2(sigma_alpha)` inner products of the embedded kernels.
pub fn gram_isometry_check(rif: &Rif, alpha: C64, ws: &[[C64; 2]], mu: &ClarkMeasure) -> Result<GramReport> {
    if rif.nvars() != 2 {
        return Err(Error::InvalidArgument("Gram check needs two variables".into()));
    }
    for (i, w) in ws.iter().enumerate() {
        if w.iter().any(|c| c.norm() >= 1.0) {
            return Err(Error::InvalidArgument(format!("sample point {w:?} is not interior")));
        }
        if ws[..i].iter().any(|v| (v[0] - w[0]).norm() + (v[1] - w[1]).norm() < 1e-12) {
            return Err(Error::InvalidArgument("sample points must be distinct".into()));
        }
    }
    let m = ws.len();
    let phi: Vec<C64> = ws.iter().map(|w| rif.eval_unchecked(w)).collect();
    let gram_model: Vec<Vec<C64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (C64::new(1.0, 0.0) - phi[i].conj() * phi[j]) * cauchy_kernel(&ws[i], &ws[j]))
                .collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let entries: Vec<C64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            integrate(mu, |a, b| {
                let z = [a, b];
                embedded_kernel(rif, alpha, &ws[i], &z) * embedded_kernel(rif, alpha, &ws[j], &z).conj()
            })
        })
        .collect();
    let gram_embedded: Vec<Vec<C64>> = entries.chunks(m.max(1)).map(|r| r.to_vec()).collect();
    let mut max_abs_error: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            max_abs_error = max_abs_error.max((gram_model[i][j] - gram_embedded[i][j]).norm());
        }
    }
    let (d1, min_eigenvalue_model) = hermitian_min_eig(&gram_model);
    let (d2, min_eigenvalue_embedded) = hermitian_min_eig(&gram_embedded);
    Ok(GramReport {
        sample_points: ws.to_vec(),
        gram_model,
        gram_embedded,
        max_abs_error,
        hermitian_defect: d1.max(d2),
        min_eigenvalue_model,
        min_eigenvalue_embedded,
    })
}

/// `num(z) / den(z_other)`: a rational function whose denominator depends on
/// one variable only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitRational {
    pub numerator: PolyMD,
    /// Ascending coefficients in variable `den_var`.
    pub denominator: Vec<C64>,
    pub den_var: usize,
}

impl SplitRational {
    pub fn eval(&self, z: &[C64; 2]) -> C64 {
        self.numerator.eval_unchecked(z) / roots::horner(&self.denominator, z[self.den_var]).0
    }
}

/// Rational functions `R_1`, `R_2` in the polydisk algebra agreeing with
/// `conj(zeta_1)`, `conj(zeta_2)` on the level set of a generic `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjRational {
    pub alpha: C64,
    pub r1: SplitRational,
    pub r2: SplitRational,
}

impl ConjRational {
    /// Largest `|R_1 - conj(zeta1)|` and `|R_2 - conj(zeta2)|` over branch samples.
    pub fn max_branch_error(&self, branches: &[Branch]) -> f64 {
        let mut worst: f64 = 0.0;
        for b in branches {
            for (t, g) in b.theta.iter().zip(&b.values) {
                let z = [unimodular(*t), *g];
                worst = worst.max((self.r1.eval(&z) - z[0].conj()).norm());
                worst = worst.max((self.r2.eval(&z) - z[1].conj()).norm());
            }
        }
        worst
    }
}

/// Write `q = q_1(z_other) + z_var q_2(z)` and return
/// `(alpha p_2 - q_2) / (q_1 - alpha p_1)`.
fn split_for(rif: &Rif, alpha: C64, var: usize) -> Result<SplitRational> {
    let other = 1 - var;
    let deg = rif.degrees().to_vec();
    let mut num_deg = deg.clone();
    num_deg[var] -= 1;
    let mut num_terms = Vec::new();
    let mut den = vec![C64::new(0.0, 0.0); deg[other] + 1];
    for (poly, sign_num, sign_den) in [(rif.p(), alpha, -alpha), (rif.p_tilde(), C64::new(-1.0, 0.0), C64::new(1.0, 0.0))] {
        for (exps, c) in poly.terms() {
            if exps[var] == 0 {
                den[exps[other]] += sign_den * c;
            } else {
                let mut e = exps.clone();
                e[var] -= 1;
                num_terms.push((e, sign_num * c));
            }
        }
    }
    let numerator = PolyMD::from_terms(num_deg, &num_terms)?;
    let scale = rif.scale();
    if den.iter().all(|c| c.norm() < 1e-12 * scale) {
        return Err(Error::DenominatorVanishes);
    }
    let rts = roots::roots(&den).ok_or(Error::DenominatorVanishes)?;
    if rts.iter().any(|r| r.norm() <= 1.0 + 1e-9) {
        return Err(Error::DenominatorVanishes);
    }
    Ok(SplitRational {
        numerator,
        denominator: den,
        den_var: other,
    })
}

pub fn conj_rational(rif: &Rif, alpha: C64) -> Result<ConjRational> {
    if rif.nvars() != 2 {
        return Err(Error::InvalidArgument("needs two variables".into()));
    }
    Ok(ConjRational {
        alpha,
        r1: split_for(rif, alpha, 0)?,
        r2: split_for(rif, alpha, 1)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityVerdict {
    ConsistentWithUnitary,
    ConsistentWithNonunitary,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub alpha: C64,
    pub degree: usize,
    /// Distance from `conj(zeta2)` to the monomial span in `L^2(mu)`.
    pub distance_conj_z2: f64,
    /// Same for `conj(zeta1)`.
    pub distance_conj_z1: f64,
    /// Numerical rank kept by the truncated pseudoinverse.
    pub rank: usize,
    pub columns: usize,
    pub verdict: DensityVerdict,
}

impl DensityReport {
    pub fn distance(&self) -> f64 {
        self.distance_conj_z1.max(self.distance_conj_z2)
    }
}

/// Weighted point samples `(zeta, weight)` whose sum represents `mu`.
fn measure_samples(mu: &ClarkMeasure) -> Vec<([C64; 2], f64)> {
    let mut out = Vec::new();
    for b in &mu.branches {
        for (((t, g), w), q) in b.theta.iter().zip(&b.values).zip(&b.weights).zip(&b.quad_weights) {
            let m = w * q;
            if m > 0.0 {
                out.push(([unimodular(*t), *g], m));
            }
        }
    }
    let grid = uniform_angles(mu.grid_n);
    for l in &mu.lines {
        for &t in &grid {
            let z = unimodular(t);
            let pt = match l.axis {
                FrozenAxis::First => [l.tau, z],
                FrozenAxis::Second => [z, l.tau],
            };
            out.push((pt, l.constant / mu.grid_n as f64));
        }
    }
    out
}

/// Relative singular-value cutoff; equals a `1e-10` cutoff on the Gram
/// matrix of the monomials.
const SV_CUTOFF: f64 = 1e-5;

/// Least-squares distance in `L^2(mu)` from `conj(zeta2)` (and `conj(zeta1)`)
/// to `span{ zeta1^a zeta2^b : 0 <= a, b <= degree }`.
pub fn density_distance(mu: &ClarkMeasure, degree: usize) -> Result<DensityReport> {
    if degree < 1 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let samples = measure_samples(mu);
    let cols = (degree + 1) * (degree + 1);
    let rows = samples.len();
    let mut a = DMatrix::<C64>::zeros(rows, cols);
    let mut b1 = DVector::<C64>::zeros(rows);
    let mut b2 = DVector::<C64>::zeros(rows);
    for (r, (z, w)) in samples.iter().enumerate() {
        let s = w.sqrt();
        let mut pa = C64::new(s, 0.0);
        for i in 0..=degree {
            let mut pb = pa;
            for j in 0..=degree {
                a[(r, i * (degree + 1) + j)] = pb;
                pb *= z[1];
            }
            pa *= z[0];
        }
        b1[r] = z[0].conj() * s;
        b2[r] = z[1].conj() * s;
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let rmat = qr.r();
    let svd = rmat.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > SV_CUTOFF * smax)
        .collect();
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let solve = |b: &DVector<C64>| -> f64 {
        let c = q.adjoint() * b;
        let uc = u.adjoint() * c;
        let mut x = DVector::<C64>::zeros(cols);
        for &k in &keep {
            let coef = uc[k] / svd.singular_values[k];
            for col in 0..cols {
                x[col] += vt[(k, col)].conj() * coef;
            }
        }
        (&a * x - b).norm()
    };
    let distance_conj_z1 = solve(&b1);
    let distance_conj_z2 = solve(&b2);
    let d = distance_conj_z1.max(distance_conj_z2);
    let verdict = if d < 0.05 {
        DensityVerdict::ConsistentWithUnitary
    } else if d > 0.3 {
        DensityVerdict::ConsistentWithNonunitary
    } else {
        DensityVerdict::Inconclusive
    };
    Ok(DensityReport {
        alpha: mu.alpha,
        degree,
        distance_conj_z2,
        distance_conj_z1,
        rank: keep.len(),
        columns: cols,
        verdict,
    })
}

/// Distances for each degree in `degrees`.
pub fn density_curve(mu: &ClarkMeasure, degrees: &[usize]) -> Result<Vec<DensityReport>> {
    degrees.par_iter().map(|&d| density_distance(mu, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clark::build_measure;
    use crate::corpus;
    use crate::quadrature::random_interior_points;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn gram_at_origin() {
        let rif = corpus::half_at_origin();
        let alpha = unimodular(0.8);
        let mu = build_measure(&rif, alpha, 512).unwrap();
        let z = C64::new(0.0, 0.0);
        let r = gram_isometry_check(&rif, alpha, &[[z, z]], &mu).unwrap();
        assert!((r.gram_model[0][0].re - 0.75).abs() < 1e-15);
        assert!(r.max_abs_error < 1e-10);
    }

    #[test]
    fn gram_monomial_two_points() {
        let rif = corpus::monomial();
        let ws = [
            [C64::new(0.3, 0.0), C64::new(0.0, 0.4)],
            [C64::new(0.1, 0.0), C64::new(-0.2, 0.0)],
        ];
        let mu = build_measure(&rif, one(), 256).unwrap();
        let r = gram_isometry_check(&rif, one(), &ws, &mu).unwrap();
        assert!(r.max_abs_error < 1e-8);
        assert!(r.hermitian_defect < 1e-10 && r.min_eigenvalue_embedded > 0.0);
    }

    #[test]
    fn gram_favard_random_kernels() {
        let rif = corpus::favard();
        let alpha = C64::new(0.0, 1.0);
        let mu = build_measure(&rif, alpha, 8192).unwrap();
        let ws: Vec<[C64; 2]> = random_interior_points(17, 10, 2, 0.6).into_iter().map(|v| [v[0], v[1]]).collect();
        let r = gram_isometry_check(&rif, alpha, &ws, &mu).unwrap();
        assert!(r.max_abs_error < 1e-5, "{}", r.max_abs_error);
        assert!(r.min_eigenvalue_model > -1e-10);
    }

    #[test]
    fn conj_rational_examples() {
        let alpha = unimodular(1.3);
        let c = conj_rational(&corpus::monomial(), alpha).unwrap();
        let z = [unimodular(0.4), alpha * unimodular(-0.4)];
        assert!((c.r1.eval(&z) - z[0].conj()).norm() < 1e-14);
        // favard: denominator of R1 is the constant -2 at alpha = 1
        let c = conj_rational(&corpus::favard(), one()).unwrap();
        assert_eq!(c.r1.den_var, 1);
        assert!((c.r1.denominator[0] + 2.0).norm() < 1e-15 && c.r1.denominator[1].norm() < 1e-15);
        assert!(matches!(
            conj_rational(&corpus::favard_squared(), -one()),
            Err(Error::DenominatorVanishes)
        ));
    }

    #[test]
    fn conj_rational_on_branches() {
        for (_, rif) in corpus::bidisk_corpus() {
            let alpha = unimodular(2.2);
            let c = conj_rational(&rif, alpha).unwrap();
            let branches = crate::levelset::trace_branches(&rif, alpha, 256).unwrap();
            assert!(c.max_branch_error(&branches) < 1e-8);
        }
    }

    #[test]
    fn density_dichotomy() {
        let fe = corpus::favard_squared();
        let mu = build_measure(&fe, one(), 512).unwrap();
        let r = density_distance(&mu, 4).unwrap();
        assert!(r.distance() < 1e-6, "{r:?}");
        assert_eq!(r.verdict, DensityVerdict::ConsistentWithUnitary);
        let mu = build_measure(&fe, -one(), 512).unwrap();
        let curve = density_curve(&mu, &[1, 2, 4, 8]).unwrap();
        for r in &curve {
            assert!(r.distance_conj_z2 >= 0.5f64.sqrt() - 0.01, "{r:?}");
            assert_eq!(r.verdict, DensityVerdict::ConsistentWithNonunitary);
        }
        for w in curve.windows(2) {
            assert!(w[1].distance_conj_z2 <= w[0].distance_conj_z2 + 1e-12);
        }
        let mu = build_measure(&corpus::monomial(), one(), 256).unwrap();
        assert!(density_distance(&mu, 2).unwrap().distance() < 1e-8);
    }
}
