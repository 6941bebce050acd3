//! Rational inner functions `phi = p~ / p`.

use crate::error::{Error, Result};
use crate::poly::{PolyMD, StabilityCertificate};
use num_complex::Complex64 as C64;

/// A rational inner function built from a stable denominator `p`.
///
/// `p` is stored padded to the polydegree of `phi`, so `p = 1` with degrees
/// `(1, 1)` describes `phi = z1 z2`. The pair must jointly attain the
/// polydegree, and every degree must be positive (functions of fewer
/// variables are rejected). That `p` and `p~` share no factor is the caller's
/// responsibility.
#[derive(Clone, Debug, PartialEq)]
pub struct Rif {
    p: PolyMD,
    p_tilde: PolyMD,
    certificate: Option<StabilityCertificate>,
}

/// Value of the level-set weight `|p| / |d_var (p~ - alpha p)|` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSample {
    pub numerator: f64,
    pub denominator: f64,
}

impl WeightSample {
    /// `None` when the denominator vanishes (0/0 at a singularity).
    pub fn value(&self, tol: f64) -> Option<f64> {
        if self.denominator <= tol {
            None
        } else if self.numerator <= tol {
            Some(0.0)
        } else {
            Some(self.numerator / self.denominator)
        }
    }
}

impl Rif {
    pub fn new(p: PolyMD) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if p.degrees().contains(&0) {
            return Err(Error::DegenerateDegree(p.degrees().to_vec()));
        }
        let p_tilde = p.reflect_padded();
        let a = p.attained_degrees().unwrap_or_default();
        let b = p_tilde.attained_degrees().unwrap_or_default();
        for (var, &n) in p.degrees().iter().enumerate() {
            if a[var].max(b[var]) < n {
                return Err(Error::DegreeNotAttained { var, degree: n });
            }
        }
        Ok(Self {
            p,
            p_tilde,
            certificate: None,
        })
    }

    /// Construct and require a passing stability certificate.
    pub fn certified(p: PolyMD, grid_n: usize) -> Result<Self> {
        let mut rif = Self::new(p)?;
        let cert = rif.p.stability_check(grid_n)?;
        if !cert.is_stable {
            return Err(Error::InvalidArgument(format!(
                "denominator is not stable (min slice root modulus {})",
                cert.min_modulus_on_grid
            )));
        }
        rif.certificate = Some(cert);
        Ok(rif)
    }

    pub fn with_certificate(mut self, cert: StabilityCertificate) -> Self {
        self.certificate = Some(cert);
        self
    }

    pub fn certificate(&self) -> Option<&StabilityCertificate> {
        self.certificate.as_ref()
    }

    pub fn p(&self) -> &PolyMD {
        &self.p
    }

    pub fn p_tilde(&self) -> &PolyMD {
        &self.p_tilde
    }

    pub fn degrees(&self) -> &[usize] {
        self.p.degrees()
    }

    pub fn nvars(&self) -> usize {
        self.p.nvars()
    }

    /// Coefficient scale used to normalize residuals.
    pub fn scale(&self) -> f64 {
        self.p.max_abs_coeff()
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        Ok(self.p_tilde.eval(z)? / self.p.eval(z)?)
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        self.p_tilde.eval_unchecked(z) / self.p.eval_unchecked(z)
    }

    /// Partial derivative of `phi` in variable `j` by the quotient rule.
    pub fn partial(&self, j: usize, z: &[C64]) -> Result<C64> {
        let p = self.p.eval(z)?;
        let q = self.p_tilde.eval(z)?;
        let dp = self.p.eval_partial(j, z)?;
        let dq = self.p_tilde.eval_partial(j, z)?;
        Ok((dq * p - q * dp) / (p * p))
    }

    /// `p~ - alpha p`, whose zero set on the torus is the level set of `alpha`.
    pub fn level_poly(&self, alpha: C64) -> PolyMD {
        self.p_tilde.sub_scaled(&self.p, alpha)
    }

    /// Slice of `p~ - alpha p` in variable `var` through `point`.
    pub(crate) fn level_slice(&self, alpha: C64, var: usize, point: &[C64]) -> Vec<C64> {
        let a = self.p_tilde.slice_unchecked(var, point);
        let b = self.p.slice_unchecked(var, point);
        a.iter().zip(&b).map(|(x, y)| x - alpha * y).collect()
    }

    pub(crate) fn level_residual(&self, alpha: C64, z: &[C64]) -> f64 {
        (self.p_tilde.eval_unchecked(z) - alpha * self.p.eval_unchecked(z)).norm()
    }

    /// Numerator and denominator of `1 / |d phi / d z_var|` on the level set,
    /// written without the cancelling factor of `p` so that it stays finite at
    /// singularities.
    pub fn weight_sample(&self, alpha: C64, var: usize, z: &[C64]) -> WeightSample {
        let num = self.p.eval_unchecked(z).norm();
        let den = (self.p_tilde.eval_partial_unchecked(var, z)
            - alpha * self.p.eval_partial_unchecked(var, z))
        .norm();
        WeightSample {
            numerator: num,
            denominator: den,
        }
    }
}
