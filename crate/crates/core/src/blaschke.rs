//! One-variable slices: for a base point `zeta'` on the (d-1)-torus the map
//! `z_d -> phi(zeta', z_d)` is a finite Blaschke product, and its `alpha`-points
//! are the roots of `p~(zeta', .) - alpha p(zeta', .)`.

use crate::error::{Error, Result};
use crate::rif::Rif;
use crate::roots;
use num_complex::Complex64 as C64;
use serde::Serialize;

/// Roots within this distance of the circle are flagged unimodular.
pub const UNIMODULAR_TOL: f64 = 1e-6;
/// Slice coefficients below this fraction of the full level polynomial's
/// largest coefficient count as zero.
pub const ZERO_SLICE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceRoots {
    pub base_point: Vec<C64>,
    pub alpha: C64,
    pub roots: Vec<C64>,
    pub unimodular_flags: Vec<bool>,
}

impl SliceRoots {
    pub fn unimodular(&self) -> impl Iterator<Item = C64> + '_ {
        self.roots
            .iter()
            .zip(&self.unimodular_flags)
            .filter(|(_, &f)| f)
            .map(|(r, _)| *r)
    }
}

/// One atom `mass * delta_point` of a slice Clark measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClarkAtom {
    pub point: C64,
    pub mass: f64,
    /// The atom sits on a singularity of `phi` and its mass is unreliable.
    pub degenerate: bool,
}

pub(crate) fn check_unimodular(z: C64, what: &str) -> Result<()> {
    if (z.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{what} = {z} is not unimodular")));
    }
    Ok(())
}

fn full_point(base: &[C64]) -> Vec<C64> {
    let mut point = base.to_vec();
    point.push(C64::new(0.0, 0.0));
    point
}

/// Coefficients of `p~(zeta', .) - alpha p(zeta', .)` in the last variable, or
/// [`Error::IdenticallyZeroSlice`] when the whole slice collapses.
pub fn slice_coefficients(rif: &Rif, base: &[C64], alpha: C64) -> Result<Vec<C64>> {
    let d = rif.nvars();
    if base.len() + 1 != d {
        return Err(Error::DimensionMismatch {
            expected: d - 1,
            got: base.len(),
        });
    }
    let point = full_point(base);
    let coeffs = rif.level_slice(alpha, d - 1, &point);
    let scale = rif.level_poly(alpha).max_abs_coeff();
    if coeffs.iter().all(|c| c.norm() < ZERO_SLICE_TOL * scale) {
        return Err(Error::IdenticallyZeroSlice {
            base: base.iter().map(|z| (z.re, z.im)).collect(),
        });
    }
    Ok(coeffs)
}

/// All roots of the slice level polynomial, Newton polished.
pub fn slice_roots(rif: &Rif, base: &[C64], alpha: C64) -> Result<SliceRoots> {
    for z in base {
        check_unimodular(*z, "base point coordinate")?;
    }
    check_unimodular(alpha, "alpha")?;
    slice_roots_unchecked(rif, base, alpha)
}

pub(crate) fn slice_roots_unchecked(rif: &Rif, base: &[C64], alpha: C64) -> Result<SliceRoots> {
    let coeffs = slice_coefficients(rif, base, alpha)?;
    let found = roots::roots(&coeffs).ok_or_else(|| Error::RootFindFailure {
        slice: format!("base {base:?}, alpha {alpha}"),
    })?;
    let found: Vec<C64> = found.into_iter().map(|r| roots::newton_polish(&coeffs, r, 3)).collect();
    let unimodular_flags = found.iter().map(|r| (r.norm() - 1.0).abs() < UNIMODULAR_TOL).collect();
    Ok(SliceRoots {
        base_point: base.to_vec(),
        alpha,
        roots: found,
        unimodular_flags,
    })
}

/// Atoms of the Clark measure of the slice Blaschke product at `alpha`:
/// `1 / |d phi / d z_d|` at each unimodular root.
pub fn slice_clark_atoms(rif: &Rif, base: &[C64], alpha: C64) -> Result<Vec<ClarkAtom>> {
    let sr = slice_roots(rif, base, alpha)?;
    let d = rif.nvars();
    let tol = 1e-12 * rif.scale();
    let atoms = sr
        .unimodular()
        .map(|eta| {
            let eta = eta / eta.norm();
            let mut z = base.to_vec();
            z.push(eta);
            let w = rif.weight_sample(alpha, d - 1, &z);
            let degenerate = w.numerator <= tol;
            let mass = w.value(tol).unwrap_or(0.0);
            ClarkAtom {
                point: eta,
                mass,
                degenerate,
            }
        })
        .collect();
    Ok(atoms)
}

/// Total mass of the slice Clark measure from the Poisson identity at the
/// origin, `(1 - |phi(zeta', 0)|^2) / |alpha - phi(zeta', 0)|^2`.
pub fn slice_total_mass(rif: &Rif, base: &[C64], alpha: C64) -> Result<f64> {
    let point = full_point(base);
    let v = rif.eval(&point)?;
    Ok((1.0 - v.norm_sqr()) / (alpha - v).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::quadrature::{angular_distance, unimodular};

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    /// Closed-form level curve of the Favard function.
    fn favard_branch(alpha: C64, zeta: C64) -> C64 {
        (2.0 * alpha + (one() - alpha) * zeta) / (2.0 * zeta - (one() - alpha))
    }

    #[test]
    fn monomial_slice_root_is_alpha() {
        let alpha = unimodular(0.9);
        let sr = slice_roots(&corpus::monomial(), &[one()], alpha).unwrap();
        assert_eq!(sr.roots.len(), 1);
        assert!((sr.roots[0] - alpha).norm() < 1e-14);
        let atoms = slice_clark_atoms(&corpus::monomial(), &[one()], alpha).unwrap();
        assert!((atoms[0].mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn favard_slice_at_i() {
        let i = C64::new(0.0, 1.0);
        let sr = slice_roots(&corpus::favard(), &[i], one()).unwrap();
        assert_eq!(sr.roots.len(), 1);
        assert!((sr.roots[0] + i).norm() < 1e-14);
        // closed form agrees
        assert!((favard_branch(one(), i) + i).norm() < 1e-15);
    }

    #[test]
    fn favard_squared_line_slice() {
        let err = slice_roots(&corpus::favard_squared(), &[one()], -one()).unwrap_err();
        assert!(matches!(err, Error::IdenticallyZeroSlice { .. }));
        assert!(matches!(
            slice_clark_atoms(&corpus::favard_squared(), &[-one()], -one()),
            Err(Error::IdenticallyZeroSlice { .. })
        ));
    }

    #[test]
    fn favard_atoms_match_one_minus_cos() {
        for &theta in &[0.3, 1.0, 2.5, -2.0] {
            let zeta = unimodular(theta);
            let atoms = slice_clark_atoms(&corpus::favard(), &[zeta], one()).unwrap();
            assert_eq!(atoms.len(), 1);
            assert!(angular_distance(atoms[0].point, zeta.conj()) < 1e-13);
            assert!((atoms[0].mass - (1.0 - theta.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn favard_atom_at_singularity_is_degenerate() {
        let atoms = slice_clark_atoms(&corpus::favard(), &[one()], one()).unwrap();
        assert_eq!(atoms.len(), 1);
        assert!(atoms[0].degenerate);
        assert_eq!(atoms[0].mass, 0.0);
        assert!((atoms[0].point - one()).norm() < 1e-12);
    }

    #[test]
    fn generic_slices_have_full_unimodular_count_and_mass() {
        let alphas = crate::quadrature::random_unimodular(5, 6);
        let bases = crate::quadrature::random_unimodular(6, 12);
        for (_, rif) in corpus::bidisk_corpus() {
            let n = rif.degrees()[1];
            for &alpha in &alphas {
                for &b in &bases {
                    let sr = slice_roots(&rif, &[b], alpha).unwrap();
                    assert_eq!(sr.unimodular().count(), n);
                    for r in &sr.roots {
                        assert!((r.norm() - 1.0).abs() < 1e-8);
                        let mut z = vec![b, *r];
                        assert!(rif.level_residual(alpha, &z) < 1e-9 * rif.scale());
                        z.clear();
                    }
                    let atoms = slice_clark_atoms(&rif, &[b], alpha).unwrap();
                    assert!(atoms.iter().all(|a| a.mass > 0.0));
                    let total: f64 = atoms.iter().map(|a| a.mass).sum();
                    let expected = slice_total_mass(&rif, &[b], alpha).unwrap();
                    assert!((total - expected).abs() < 1e-9 * expected.max(1.0));
                }
            }
        }
    }
}
