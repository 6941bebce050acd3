//! Clark measures of two-variable rational inner functions.
//!
//! For unimodular `alpha` the Clark measure is carried by the level set: each
//! branch `zeta2 = g_j(zeta1)` contributes `W_j(zeta1) dm(zeta1)` and each
//! vertical line `zeta1 = tau_k` contributes `c_k dm(zeta2)`.

use crate::error::{Error, Result};
use crate::levelset::{self, Branch, FrozenAxis, LineComponent};
use crate::quadrature::{poisson_kernel_md, unimodular, uniform_angles};
use crate::rif::Rif;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClarkMeasure {
    pub alpha: C64,
    pub branches: Vec<Branch>,
    pub lines: Vec<LineComponent>,
    pub grid_n: usize,
}

impl ClarkMeasure {
    /// Assemble a measure from parts, checking the sign invariants.
    pub fn from_parts(alpha: C64, branches: Vec<Branch>, lines: Vec<LineComponent>, grid_n: usize) -> Result<Self> {
        if branches.iter().any(|b| b.theta.len() != grid_n || b.weights.iter().any(|w| !(*w >= 0.0))) {
            return Err(Error::InvalidArgument("branch weights must be nonnegative on the grid".into()));
        }
        if lines.iter().any(|l| !(l.constant > 0.0)) {
            return Err(Error::InvalidArgument("line constants must be positive".into()));
        }
        Ok(Self {
            alpha,
            branches,
            lines,
            grid_n,
        })
    }

    pub fn is_exceptional(&self) -> bool {
        !self.lines.is_empty()
    }
}

/// The Clark measure `sigma_alpha` sampled on `grid_n` nodes per branch.
/// Nodes are uniform unless the level set has nearly vertical pieces (near an
/// exceptional `alpha`), which get concentrated nodes.
pub fn build_measure(rif: &Rif, alpha: C64, grid_n: usize) -> Result<ClarkMeasure> {
    let lines = levelset::detect_lines(rif, alpha)?;
    let taus: Vec<C64> = lines.iter().map(|l| l.tau).collect();
    let branches = levelset::trace_adaptive(rif, alpha, grid_n, &taus)?;
    ClarkMeasure::from_parts(alpha, branches, lines, grid_n)
}

/// `|p| / |d_{z2}(p~ - alpha p)|` at a level-set point.
pub fn weight_at(rif: &Rif, zeta: C64, g: C64, alpha: C64) -> Result<f64> {
    let w = rif.weight_sample(alpha, 1, &[zeta, g]);
    w.value(1e-12 * rif.scale()).ok_or(Error::ZeroOverZero { re: g.re, im: g.im })
}

/// Constant `1 / |d phi / d z_axis|` along a line of the level set.
pub fn line_constant(rif: &Rif, axis: FrozenAxis, tau: C64, alpha: C64) -> Result<f64> {
    let scale = rif.scale();
    let var = match axis {
        FrozenAxis::First => 0,
        FrozenAxis::Second => 1,
    };
    let mut derivs = Vec::with_capacity(8);
    let mut residual: f64 = 0.0;
    for k in 0..8 {
        let w = unimodular(std::f64::consts::TAU * k as f64 / 8.0 + 0.3);
        let z = match axis {
            FrozenAxis::First => [tau, w],
            FrozenAxis::Second => [w, tau],
        };
        let p = rif.p().eval_unchecked(&z);
        if p.norm() < 1e-8 * scale {
            continue;
        }
        let d = rif.p_tilde().eval_partial_unchecked(var, &z) - alpha * rif.p().eval_partial_unchecked(var, &z);
        derivs.push((d / p).norm());
        residual = residual.max(rif.level_residual(alpha, &z));
    }
    if derivs.is_empty() {
        return Err(Error::NotALine { re: tau.re, im: tau.im });
    }
    let max = derivs.iter().cloned().fold(f64::MIN, f64::max);
    let min = derivs.iter().cloned().fold(f64::MAX, f64::min);
    let mean = derivs.iter().sum::<f64>() / derivs.len() as f64;
    let spread = (max - min) / mean.max(f64::MIN_POSITIVE);
    if spread > 1e-8 {
        return Err(Error::NonConstantDerivative { spread });
    }
    // a constant derivative alone does not make a line (e.g. z1 z2)
    if residual > 1e-10 * scale || mean == 0.0 {
        return Err(Error::NotALine { re: tau.re, im: tau.im });
    }
    Ok(1.0 / mean)
}

/// `int f d mu` by the trapezoid rule on the measure's grid.
pub fn integrate<F>(mu: &ClarkMeasure, f: F) -> C64
where
    F: Fn(C64, C64) -> C64,
{
    let n = mu.grid_n as f64;
    let mut total = C64::new(0.0, 0.0);
    for b in &mu.branches {
        let mut s = C64::new(0.0, 0.0);
        for (((t, g), w), q) in b.theta.iter().zip(&b.values).zip(&b.weights).zip(&b.quad_weights) {
            if *w != 0.0 {
                s += f(unimodular(*t), *g) * (*w * *q);
            }
        }
        total += s;
    }
    if !mu.lines.is_empty() {
        let grid = uniform_angles(mu.grid_n);
        for l in &mu.lines {
            let mut s = C64::new(0.0, 0.0);
            for &t in &grid {
                let z = unimodular(t);
                s += match l.axis {
                    FrozenAxis::First => f(l.tau, z),
                    FrozenAxis::Second => f(z, l.tau),
                };
            }
            total += s * l.constant / n;
        }
    }
    total
}

pub fn total_mass(mu: &ClarkMeasure) -> f64 {
    integrate(mu, |_, _| C64::new(1.0, 0.0)).re
}

/// Expected total mass `(1 - |phi(0)|^2) / |alpha - phi(0)|^2`.
pub fn expected_mass(rif: &Rif, alpha: C64) -> f64 {
    let zero = vec![C64::new(0.0, 0.0); rif.nvars()];
    let v = rif.eval_unchecked(&zero);
    (1.0 - v.norm_sqr()) / (alpha - v).norm_sqr()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonResidualReport {
    pub test_points: Vec<Vec<C64>>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub rel_errors: Vec<f64>,
}

impl PoissonResidualReport {
    pub fn max_rel_error(&self) -> f64 {
        self.rel_errors.iter().cloned().fold(0.0, f64::max)
    }
}

/// Compare `(1 - |phi(z)|^2) / |alpha - phi(z)|^2` with the Poisson integral of
/// the measure at each interior point.
pub fn verify_poisson(mu: &ClarkMeasure, rif: &Rif, points: &[Vec<C64>]) -> Result<PoissonResidualReport> {
    for z in points {
        if z.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: z.len() });
        }
        if z.iter().any(|c| c.norm() >= 1.0) {
            return Err(Error::InvalidArgument(format!("test point {z:?} is not interior")));
        }
        let v = rif.eval_unchecked(z);
        if (v - mu.alpha).norm() <= 1e-6 {
            return Err(Error::InvalidArgument(format!("phi(z) is within 1e-6 of alpha at {z:?}")));
        }
    }
    let rows: Vec<(f64, f64)> = points
        .par_iter()
        .map(|z| {
            let v = rif.eval_unchecked(z);
            let lhs = (1.0 - v.norm_sqr()) / (mu.alpha - v).norm_sqr();
            let rhs = integrate(mu, |a, b| C64::new(poisson_kernel_md(z, &[a, b]), 0.0)).re;
            (lhs, rhs)
        })
        .collect();
    let lhs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let rel_errors = rows.iter().map(|(l, r)| (l - r).abs() / l.abs()).collect();
    Ok(PoissonResidualReport {
        test_points: points.to_vec(),
        lhs,
        rhs,
        rel_errors,
    })
}

/// `phi_mu = (H - 1) / (H + 1)` with `H(z) = c00 + 2 sum c_jk z1^j z2^k`
/// truncated at degree `degree` in each variable.
///
/// For the measure of `phi` at `alpha` this recovers `conj(alpha) phi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HerglotzFunction {
    pub degree: usize,
    /// `moments[j * (degree + 1) + k] = int conj(zeta1)^j conj(zeta2)^k d mu`.
    pub moments: Vec<C64>,
}

impl HerglotzFunction {
    pub fn moment(&self, j: usize, k: usize) -> C64 {
        self.moments[j * (self.degree + 1) + k]
    }

    pub fn herglotz(&self, z: &[C64; 2]) -> C64 {
        let d = self.degree;
        let mut h = C64::new(0.0, 0.0);
        // Horner in z1 over rows of Horner in z2
        for j in (0..=d).rev() {
            let mut row = C64::new(0.0, 0.0);
            for k in (0..=d).rev() {
                let c = if j == 0 && k == 0 { self.moment(0, 0) } else { 2.0 * self.moment(j, k) };
                row = row * z[1] + c;
            }
            h = h * z[0] + row;
        }
        h
    }

    pub fn eval(&self, z: &[C64; 2]) -> C64 {
        let h = self.herglotz(z);
        (h - 1.0) / (h + 1.0)
    }
}

/// Moments `int conj(zeta1)^j conj(zeta2)^k d mu` for `0 <= j, k <= degree`.
pub fn moments(mu: &ClarkMeasure, degree: usize) -> Vec<C64> {
    let m = degree + 1;
    let mut acc = vec![C64::new(0.0, 0.0); m * m];
    let n = mu.grid_n as f64;
    let mut add = |a: C64, b: C64, weight: f64| {
        let (ca, cb) = (a.conj(), b.conj());
        let mut pa = C64::new(weight, 0.0);
        for j in 0..m {
            let mut pb = pa;
            for k in 0..m {
                acc[j * m + k] += pb;
                pb *= cb;
            }
            pa *= ca;
        }
    };
    for b in &mu.branches {
        for (((t, g), w), q) in b.theta.iter().zip(&b.values).zip(&b.weights).zip(&b.quad_weights) {
            add(unimodular(*t), *g, *w * *q);
        }
    }
    let grid = uniform_angles(mu.grid_n);
    for l in &mu.lines {
        for &t in &grid {
            let z = unimodular(t);
            match l.axis {
                FrozenAxis::First => add(l.tau, z, l.constant / n),
                FrozenAxis::Second => add(z, l.tau, l.constant / n),
            }
        }
    }
    acc
}

pub fn herglotz_reconstruct(mu: &ClarkMeasure, degree: usize) -> Result<HerglotzFunction> {
    let mass = total_mass(mu);
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::MassNotOne { mass });
    }
    Ok(HerglotzFunction {
        degree,
        moments: moments(mu, degree),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::quadrature::random_interior_points;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn monomial_measure() {
        let mu = build_measure(&corpus::monomial(), one(), 256).unwrap();
        assert_eq!(mu.branches.len(), 1);
        assert!(mu.lines.is_empty());
        assert!((total_mass(&mu) - 1.0).abs() < 1e-14);
        let i = C64::new(0.0, 1.0);
        let mu = build_measure(&corpus::monomial(), i, 256).unwrap();
        let r = verify_poisson(&mu, &corpus::monomial(), &[vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0)]]).unwrap();
        assert!((r.lhs[0] - 1.0).abs() < 1e-15);
        assert!(r.max_rel_error() < 1e-13);
    }

    #[test]
    fn weight_at_examples() {
        let fav = corpus::favard();
        let t: f64 = 1.1;
        let w = weight_at(&fav, unimodular(t), unimodular(-t), one()).unwrap();
        assert!((w - (1.0 - t.cos())).abs() < 1e-14);
        let w = weight_at(&fav, one(), one(), C64::new(0.0, 1.0)).unwrap();
        assert_eq!(w, 0.0);
        let w = weight_at(&corpus::monomial(), unimodular(0.4), unimodular(-0.4), one()).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        // both numerator and denominator vanish on a line
        let e = weight_at(&corpus::favard_squared(), one(), unimodular(0.7), -one());
        assert!(matches!(e, Err(Error::ZeroOverZero { .. })));
    }

    #[test]
    fn line_constants() {
        let fe = corpus::favard_squared();
        for tau in [one(), -one()] {
            let c = line_constant(&fe, FrozenAxis::First, tau, -one()).unwrap();
            assert!((c - 0.25).abs() < 1e-12);
        }
        let e = line_constant(&fe, FrozenAxis::First, unimodular(0.5), C64::new(0.0, 1.0));
        assert!(matches!(e, Err(Error::NonConstantDerivative { .. })));
        let e = line_constant(&corpus::monomial(), FrozenAxis::First, one(), C64::new(0.0, 1.0));
        assert!(matches!(e, Err(Error::NotALine { .. })));
    }

    #[test]
    fn favard_measure_mass_and_poisson() {
        let fav = corpus::favard();
        let mu = build_measure(&fav, one(), 8192).unwrap();
        assert!((total_mass(&mu) - 1.0).abs() < 1e-12);
        let z = vec![C64::new(0.3, 0.2), C64::new(-0.4, 0.0)];
        let r = verify_poisson(&mu, &fav, &[z]).unwrap();
        assert!(r.max_rel_error() < 1e-6);
    }

    #[test]
    fn exceptional_measures() {
        let fe = corpus::favard_squared();
        let mu = build_measure(&fe, -one(), 1024).unwrap();
        assert_eq!(mu.lines.len(), 2);
        assert_eq!(mu.branches.len(), 2);
        assert!((total_mass(&mu) - 1.0).abs() < 1e-10);
        let pts = random_interior_points(11, 20, 2, 0.7);
        let r = verify_poisson(&mu, &fe, &pts).unwrap();
        assert!(r.max_rel_error() < 1e-6, "{}", r.max_rel_error());

        let fav = corpus::favard();
        let mu = build_measure(&fav, -one(), 1024).unwrap();
        assert_eq!(mu.lines.len(), 1);
        assert!((mu.lines[0].constant - 0.5).abs() < 1e-12);
        assert!((total_mass(&mu) - 1.0).abs() < 1e-10);
        let r = verify_poisson(&mu, &fav, &pts).unwrap();
        assert!(r.max_rel_error() < 1e-6, "{}", r.max_rel_error());
    }

    #[test]
    fn mass_identity_off_zero() {
        let rif = corpus::half_at_origin();
        assert!((expected_mass(&rif, one()) - 3.0).abs() < 1e-14);
        let mu = build_measure(&rif, one(), 1024).unwrap();
        assert!((total_mass(&mu) - 3.0).abs() < 1e-8);
        assert!(matches!(herglotz_reconstruct(&mu, 2), Err(Error::MassNotOne { .. })));
    }

    #[test]
    fn positivity_on_nonnegative_trig_polys() {
        let fav = corpus::favard();
        let mu = build_measure(&fav, unimodular(2.0), 1024).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let coeffs: Vec<(i32, i32, C64)> = (0..6)
                .map(|_| {
                    (
                        rng.gen_range(-3..=3),
                        rng.gen_range(-3..=3),
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                })
                .collect();
            let v = integrate(&mu, |a, b| {
                let q: C64 = coeffs.iter().map(|(j, k, c)| c * a.powi(*j) * b.powi(*k)).sum();
                C64::new(q.norm_sqr(), 0.0)
            });
            assert!(v.re >= 0.0 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn weak_star_towards_exceptional() {
        let fe = corpus::favard_squared();
        let target = build_measure(&fe, -one(), 2048).unwrap();
        let tests: Vec<Box<dyn Fn(C64, C64) -> C64>> = vec![
            Box::new(|a, b| a * a + b.conj()),
            Box::new(|a, b| (a * a * b * b).re.into()),
            Box::new(|a, _| (a.im * a.im).into()),
            Box::new(|a, b| (C64::new(2.5, 0.0) - a - b).inv()),
            Box::new(|a, b| ((a.re * b.im).exp()).into()),
        ];
        for f in &tests {
            let exact = integrate(&target, f);
            let diffs: Vec<f64> = (1..=6)
                .map(|i| {
                    let alpha = -unimodular(1.0 / 2f64.powi(i));
                    let mu = build_measure(&fe, alpha, 2048).unwrap();
                    (integrate(&mu, f) - exact).norm()
                })
                .collect();
            assert!(diffs[3] < diffs[2] && diffs[4] < diffs[3] && diffs[5] < diffs[4], "{diffs:?}");
        }
    }

    #[test]
    fn herglotz_monomial_round_trip() {
        let mu = build_measure(&corpus::monomial(), one(), 256).unwrap();
        let h = herglotz_reconstruct(&mu, 4).unwrap();
        for j in 0..=4 {
            for k in 0..=4 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((h.moment(j, k) - expected).norm() < 1e-13);
            }
        }
        // truncation at degree 4 leaves |z1 z2|^5 behind; go deeper for 1e-8
        let h = herglotz_reconstruct(&mu, 40).unwrap();
        for z in random_interior_points(3, 50, 2, 0.5) {
            let z = [z[0], z[1]];
            assert!((h.eval(&z) - z[0] * z[1]).norm() < 1e-8);
        }
    }
}
