//! Dense multivariate complex polynomials.
//!
//! A [`PolyMD`] in `d` variables with polydegree `(n_1, ..., n_d)` stores its
//! coefficients in a flat row-major tensor of shape `(n_1+1) x ... x (n_d+1)`,
//! last variable fastest. Reversing that flat array reverses every axis at
//! once, which is what makes reflection a one-liner.

use crate::error::{Error, Result};
use crate::roots;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Coefficients below this (absolute) are treated as zero when checking that
/// a declared degree is attained.
pub const COEFF_TOL: f64 = 1e-14;

/// Serialized as `{"degrees": [...], "coeffs": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly")]
pub struct PolyMD {
    degrees: Vec<usize>,
    coeffs: Vec<C64>,
}

#[derive(Deserialize)]
struct RawPoly {
    degrees: Vec<usize>,
    coeffs: Vec<C64>,
}

impl TryFrom<RawPoly> for PolyMD {
    type Error = Error;

    fn try_from(raw: RawPoly) -> Result<Self> {
        Self::padded(raw.degrees, raw.coeffs)
    }
}

fn tensor_len(degrees: &[usize]) -> usize {
    degrees.iter().map(|n| n + 1).product()
}

impl PolyMD {
    /// Checked constructor: shape must match and every declared degree must be
    /// attained by some coefficient.
    pub fn new(degrees: Vec<usize>, coeffs: Vec<C64>) -> Result<Self> {
        let p = Self::padded(degrees, coeffs)?;
        if let Some(var) = p.first_unattained() {
            return Err(Error::DegreeNotAttained {
                var,
                degree: p.degrees[var],
            });
        }
        Ok(p)
    }

    /// Shape-checked constructor that allows the declared degrees to exceed the
    /// attained ones. Rational inner functions store their denominator padded
    /// to the common polydegree (e.g. `p = 1` for `z1 z2`).
    pub fn padded(degrees: Vec<usize>, coeffs: Vec<C64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidArgument("polynomial needs at least one variable".into()));
        }
        let expected = tensor_len(&degrees);
        if coeffs.len() != expected {
            return Err(Error::ShapeMismatch {
                degrees,
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { degrees, coeffs })
    }

    /// Build from `(exponents, coefficient)` terms; repeated exponents add up.
    pub fn from_terms(degrees: Vec<usize>, terms: &[(Vec<usize>, C64)]) -> Result<Self> {
        let mut coeffs = vec![C64::new(0.0, 0.0); tensor_len(&degrees)];
        let strides = strides(&degrees);
        for (exps, c) in terms {
            if exps.len() != degrees.len() {
                return Err(Error::DimensionMismatch {
                    expected: degrees.len(),
                    got: exps.len(),
                });
            }
            if exps.iter().zip(&degrees).any(|(e, n)| e > n) {
                return Err(Error::InvalidArgument(format!(
                    "exponent {exps:?} exceeds degrees {degrees:?}"
                )));
            }
            let idx: usize = exps.iter().zip(&strides).map(|(e, s)| e * s).sum();
            coeffs[idx] += c;
        }
        Self::padded(degrees, coeffs)
    }

    pub fn nvars(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, exps: &[usize]) -> C64 {
        let idx: usize = exps.iter().zip(strides(&self.degrees)).map(|(e, s)| e * s).sum();
        self.coeffs[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Iterate `(exponents, coefficient)` over the whole tensor.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, C64)> + '_ {
        let degrees = self.degrees.clone();
        self.coeffs.iter().enumerate().map(move |(idx, &c)| (unflatten(idx, &degrees), c))
    }

    /// Degree actually attained in each variable (coefficients above
    /// [`COEFF_TOL`]); `None` for the zero polynomial.
    pub fn attained_degrees(&self) -> Option<Vec<usize>> {
        let mut out = vec![0usize; self.nvars()];
        let mut any = false;
        for (exps, c) in self.terms() {
            if c.norm() > COEFF_TOL {
                any = true;
                for (o, e) in out.iter_mut().zip(exps) {
                    *o = (*o).max(e);
                }
            }
        }
        any.then_some(out)
    }

    fn first_unattained(&self) -> Option<usize> {
        match self.attained_degrees() {
            None => Some(0),
            Some(att) => att.iter().zip(&self.degrees).position(|(a, n)| a < n),
        }
    }

    /// Reflection `z^n conj(p(1/conj z))` with respect to the
    /// declared degrees. Rejects the zero polynomial and unattained degrees.
    pub fn reflect(&self) -> Result<PolyMD> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if let Some(var) = self.first_unattained() {
            return Err(Error::DegreeNotAttained {
                var,
                degree: self.degrees[var],
            });
        }
        Ok(self.reflect_padded())
    }

    /// Reflection with respect to the declared (possibly padded) degrees.
    pub fn reflect_padded(&self) -> PolyMD {
        PolyMD {
            degrees: self.degrees.clone(),
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    /// `self - alpha * other`; both operands must share a shape.
    pub fn sub_scaled(&self, other: &PolyMD, alpha: C64) -> PolyMD {
        assert_eq!(self.degrees, other.degrees, "shape mismatch in sub_scaled");
        PolyMD {
            degrees: self.degrees.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - alpha * b)
                .collect(),
        }
    }

    fn check_dim(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        self.check_dim(z)?;
        Ok(self.eval_unchecked(z))
    }

    /// Partial derivative in variable `j` (zero-based).
    pub fn eval_partial(&self, j: usize, z: &[C64]) -> Result<C64> {
        self.check_dim(z)?;
        if j >= self.nvars() {
            return Err(Error::InvalidArgument(format!(
                "variable index {j} out of range for {} variables",
                self.nvars()
            )));
        }
        Ok(self.eval_partial_unchecked(j, z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        // nested Horner, last variable innermost
        fn rec(coeffs: &[C64], degrees: &[usize], z: &[C64]) -> C64 {
            if degrees.len() == 1 {
                return roots::horner(coeffs, z[0]).0;
            }
            let block = coeffs.len() / (degrees[0] + 1);
            let mut acc = C64::new(0.0, 0.0);
            for k in (0..=degrees[0]).rev() {
                acc = acc * z[0] + rec(&coeffs[k * block..(k + 1) * block], &degrees[1..], &z[1..]);
            }
            acc
        }
        rec(&self.coeffs, &self.degrees, z)
    }

    pub(crate) fn eval_partial_unchecked(&self, j: usize, z: &[C64]) -> C64 {
        let slice = self.slice_unchecked(j, z);
        roots::horner(&slice, z[j]).1
    }

    /// Coefficients (ascending) of the univariate polynomial in variable `var`
    /// obtained by freezing every other coordinate of `point` (the entry at
    /// `var` is ignored).
    pub fn slice(&self, var: usize, point: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(point)?;
        Ok(self.slice_unchecked(var, point))
    }

    pub(crate) fn slice_unchecked(&self, var: usize, point: &[C64]) -> Vec<C64> {
        let d = self.nvars();
        let powers: Vec<Vec<C64>> = (0..d)
            .map(|v| {
                let mut pw = Vec::with_capacity(self.degrees[v] + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=self.degrees[v] {
                    pw.push(acc);
                    acc *= point[v];
                }
                pw
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); self.degrees[var] + 1];
        let mut exps = vec![0usize; d];
        for &c in &self.coeffs {
            if c.norm() != 0.0 {
                let mut m = c;
                for v in 0..d {
                    if v != var {
                        m *= powers[v][exps[v]];
                    }
                }
                out[exps[var]] += m;
            }
            // advance multi-index, last variable fastest
            for v in (0..d).rev() {
                exps[v] += 1;
                if exps[v] <= self.degrees[v] {
                    break;
                }
                exps[v] = 0;
            }
        }
        out
    }

    /// Coefficients of `self` viewed as a polynomial in variable `var` whose
    /// coefficients are polynomials in the remaining variables. Only defined for
    /// two variables, where each coefficient is univariate in the other one.
    pub(crate) fn coefficient_polys_2d(&self, var: usize) -> Vec<Vec<C64>> {
        assert_eq!(self.nvars(), 2);
        let other = 1 - var;
        let mut out = vec![vec![C64::new(0.0, 0.0); self.degrees[other] + 1]; self.degrees[var] + 1];
        for (exps, c) in self.terms() {
            out[exps[var]][exps[other]] += c;
        }
        out
    }

    /// Numerical stability certificate by slice-root scanning.
    ///
    /// For every distinguished variable, the remaining coordinates range over
    /// `grid_n / 4` radii in `[0, 1]` times `grid_n` angles each; the slice in
    /// the distinguished variable is solved and its smallest root modulus
    /// recorded. `p` is declared stable when no slice vanishes identically and
    /// no root lies inside the unit disk by more than `1e-9`.
    pub fn stability_check(&self, grid_n: usize) -> Result<StabilityCertificate> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if grid_n < 4 {
            return Err(Error::InvalidArgument("stability grid must have at least 4 angles".into()));
        }
        let d = self.nvars();
        let n_radii = (grid_n / 4).max(2);
        let mut samples = Vec::with_capacity(n_radii * grid_n);
        for i in 0..n_radii {
            let r = i as f64 / (n_radii - 1) as f64;
            let n_ang = if i == 0 { 1 } else { grid_n };
            for k in 0..n_ang {
                samples.push(C64::from_polar(r, TAU * k as f64 / grid_n as f64));
            }
        }
        let zero_tol = 1e-14 * self.max_abs_coeff();
        let mut min_root = f64::INFINITY;
        let mut offending: Option<Vec<(f64, f64)>> = None;
        for var in 0..d {
            let others = d - 1;
            let total = samples.len().pow(others as u32);
            let result: std::result::Result<Vec<(f64, Vec<C64>)>, Vec<C64>> = (0..total)
                .into_par_iter()
                .map(|mut flat| {
                    let mut point = vec![C64::new(0.0, 0.0); d];
                    for v in (0..d).rev() {
                        if v == var {
                            continue;
                        }
                        point[v] = samples[flat % samples.len()];
                        flat /= samples.len();
                    }
                    let slice = self.slice_unchecked(var, &point);
                    if slice.iter().all(|c| c.norm() <= zero_tol) {
                        return Ok((0.0, point));
                    }
                    let rts = roots::roots(&slice).ok_or_else(|| point.clone())?;
                    let m = rts.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
                    Ok((m, point))
                })
                .collect();
            let per_slice = result.map_err(|pt| Error::RootFindFailure {
                slice: format!("variable {} at {:?}", var + 1, pt),
            })?;
            for (m, point) in per_slice {
                if m < min_root {
                    min_root = m;
                    if m < 1.0 - 1e-9 && offending.is_none() {
                        offending = Some(point.iter().map(|z| (z.re, z.im)).collect());
                    }
                }
            }
        }
        Ok(StabilityCertificate {
            is_stable: min_root >= 1.0 - 1e-9,
            min_modulus_on_grid: min_root,
            grid_resolution: grid_n,
            method: StabilityMethod::GridSliceRoots,
            offending_point: offending,
        })
    }
}

pub(crate) fn strides(degrees: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; degrees.len()];
    for v in (0..degrees.len().saturating_sub(1)).rev() {
        s[v] = s[v + 1] * (degrees[v + 1] + 1);
    }
    s
}

fn unflatten(mut idx: usize, degrees: &[usize]) -> Vec<usize> {
    let mut exps = vec![0usize; degrees.len()];
    for v in (0..degrees.len()).rev() {
        exps[v] = idx % (degrees[v] + 1);
        idx /= degrees[v] + 1;
    }
    exps
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityMethod {
    GridSliceRoots,
}

/// Outcome of [`PolyMD::stability_check`]. `min_modulus_on_grid` is the
/// smallest slice-root modulus seen; values `>= 1` mean no zeros in the open
/// polydisk and values `> 1` mean no zeros on the closed one (up to the grid).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub is_stable: bool,
    pub min_modulus_on_grid: f64,
    pub grid_resolution: usize,
    pub method: StabilityMethod,
    /// First grid point whose slice had a root inside the disk.
    pub offending_point: Option<Vec<(f64, f64)>>,
}

impl StabilityCertificate {
    /// Zero-free on the closed polydisk with the given margin.
    pub fn closed_polydisk_zero_free(&self, margin: f64) -> bool {
        self.min_modulus_on_grid > 1.0 + margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn fav_p() -> PolyMD {
        PolyMD::new(vec![1, 1], vec![c(2.0), c(-1.0), c(-1.0), c(0.0)]).unwrap()
    }

    /// Independent reflection oracle: evaluate z^n conj(p(1/conj z)) at points.
    fn reflect_by_evaluation(p: &PolyMD, z: &[C64]) -> C64 {
        let inv: Vec<C64> = z.iter().map(|w| w.conj().inv()).collect();
        let mono: C64 = z.iter().zip(p.degrees()).map(|(w, &n)| w.powu(n as u32)).product();
        mono * p.eval(&inv).unwrap().conj()
    }

    #[test]
    fn reflect_favard_denominator() {
        let pt = fav_p().reflect().unwrap();
        // 2 z1 z2 - z1 - z2
        assert_eq!(pt.coeff(&[0, 0]), c(0.0));
        assert_eq!(pt.coeff(&[1, 0]), c(-1.0));
        assert_eq!(pt.coeff(&[0, 1]), c(-1.0));
        assert_eq!(pt.coeff(&[1, 1]), c(2.0));
        let z = [C64::new(0.3, -0.7), C64::new(-1.2, 0.4)];
        assert!((pt.eval(&z).unwrap() - reflect_by_evaluation(&fav_p(), &z)).norm() < 1e-14);
    }

    #[test]
    fn reflect_constants() {
        let one11 = PolyMD::new(vec![1, 1], vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(matches!(one11, Err(Error::DegreeNotAttained { .. })));
        let padded = PolyMD::padded(vec![1, 1], vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert!(padded.reflect().is_err());
        let one = PolyMD::new(vec![0, 0], vec![c(1.0)]).unwrap();
        assert_eq!(one.reflect().unwrap(), one);
        let zero = PolyMD::padded(vec![0, 0], vec![c(0.0)]).unwrap();
        assert_eq!(zero.reflect(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn reflect_tridisk() {
        let s = 3.5;
        let p = PolyMD::from_terms(
            vec![1, 1, 1],
            &[
                (vec![0, 0, 0], c(s)),
                (vec![1, 0, 0], c(-1.0)),
                (vec![0, 1, 0], c(-1.0)),
                (vec![0, 0, 1], c(-1.0)),
            ],
        )
        .unwrap();
        let pt = p.reflect().unwrap();
        assert_eq!(pt.coeff(&[1, 1, 1]), c(s));
        assert_eq!(pt.coeff(&[1, 1, 0]), c(-1.0));
        assert_eq!(pt.coeff(&[1, 0, 1]), c(-1.0));
        assert_eq!(pt.coeff(&[0, 1, 1]), c(-1.0));
        assert_eq!(pt.coeff(&[0, 0, 0]), c(0.0));
        let one = [c(1.0); 3];
        assert!((pt.eval(&one).unwrap() - c(s - 3.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        let p = fav_p();
        assert_eq!(p.eval(&[c(0.0), c(0.0)]).unwrap(), c(2.0));
        let pt = p.reflect().unwrap();
        assert_eq!(pt.eval_partial(1, &[c(1.0), c(1.0)]).unwrap(), c(1.0));
        assert!(matches!(p.eval(&[c(0.0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn stability_examples() {
        assert!(fav_p().stability_check(64).unwrap().is_stable);
        let z1z2 = PolyMD::new(vec![1, 1], vec![c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        let cert = z1z2.stability_check(32).unwrap();
        assert!(!cert.is_stable);
        assert!(cert.offending_point.is_some());
        let p3 = PolyMD::from_terms(
            vec![1, 1, 1],
            &[
                (vec![0, 0, 0], c(3.0)),
                (vec![1, 0, 0], c(-1.0)),
                (vec![0, 1, 0], c(-1.0)),
                (vec![0, 0, 1], c(-1.0)),
            ],
        )
        .unwrap();
        let cert = p3.stability_check(16).unwrap();
        assert!(cert.is_stable);
        assert!(!cert.closed_polydisk_zero_free(1e-6));
    }

    #[test]
    fn unimodular_symmetry_of_reflection() {
        let p = PolyMD::new(
            vec![2, 2],
            vec![
                c(5.0),
                C64::new(0.5, 0.2),
                c(-0.3),
                C64::new(-1.0, 0.4),
                c(0.7),
                c(0.1),
                c(0.2),
                C64::new(0.0, -0.6),
                c(0.25),
            ],
        )
        .unwrap();
        let pt = p.reflect().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let z = [
                C64::from_polar(1.0, rng.gen_range(0.0..TAU)),
                C64::from_polar(1.0, rng.gen_range(0.0..TAU)),
            ];
            let diff = pt.eval(&z).unwrap().norm() - p.eval(&z).unwrap().norm();
            assert!(diff.abs() < 1e-10);
        }
    }

    #[test]
    fn partials_match_central_differences() {
        let p = PolyMD::new(
            vec![2, 1, 1],
            (0..12).map(|k| C64::new(1.0 / (k as f64 + 1.0), (k as f64).sin())).collect(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..100 {
            let z: Vec<C64> = (0..3)
                .map(|_| C64::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(0.0..TAU)))
                .collect();
            for j in 0..3 {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[j] += h;
                zm[j] -= h;
                let fd = (p.eval(&zp).unwrap() - p.eval(&zm).unwrap()) / (2.0 * h);
                let exact = p.eval_partial(j, &z).unwrap();
                assert!((fd - exact).norm() <= 1e-8 * exact.norm().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn reflection_is_an_involution(re in prop::collection::vec(-3.0f64..3.0, 6),
                                       im in prop::collection::vec(-3.0f64..3.0, 6)) {
            let coeffs: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
            let p = PolyMD::padded(vec![1, 2], coeffs).unwrap();
            prop_assert_eq!(p.reflect_padded().reflect_padded(), p);
        }
    }
}
