//! Named rational inner functions used throughout the tests, benches and CLI.

use crate::poly::PolyMD;
use crate::rif::Rif;
use num_complex::Complex64 as C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn build(degrees: Vec<usize>, terms: &[(Vec<usize>, f64)]) -> Rif {
    let terms: Vec<_> = terms.iter().map(|(e, x)| (e.clone(), c(*x))).collect();
    Rif::new(PolyMD::from_terms(degrees, &terms).expect("valid corpus polynomial"))
        .expect("valid corpus function")
}

/// `z1 z2`, denominator `1` padded to bidegree (1, 1).
pub fn monomial() -> Rif {
    build(vec![1, 1], &[(vec![0, 0], 1.0)])
}

/// `(2 z1 z2 - z1 - z2) / (2 - z1 - z2)`, singular at (1, 1).
pub fn favard() -> Rif {
    build(vec![1, 1], &[(vec![0, 0], 2.0), (vec![1, 0], -1.0), (vec![0, 1], -1.0)])
}

/// `(2 z1^2 z2^2 - z1^2 - z2^2) / (2 - z1^2 - z2^2)`, with `-1` exceptional.
pub fn favard_squared() -> Rif {
    build(vec![2, 2], &[(vec![0, 0], 2.0), (vec![2, 0], -1.0), (vec![0, 2], -1.0)])
}

/// `(1 + 2 z1 z2) / (2 + z1 z2)`, with `phi(0) = 1/2`.
pub fn half_at_origin() -> Rif {
    build(vec![1, 1], &[(vec![0, 0], 2.0), (vec![1, 1], 1.0)])
}

/// `p = 4 - z1 - z2 - z1 z2`: zero-free on the closed bidisk.
pub fn smooth_bilinear() -> Rif {
    build(
        vec![1, 1],
        &[(vec![0, 0], 4.0), (vec![1, 0], -1.0), (vec![0, 1], -1.0), (vec![1, 1], -1.0)],
    )
}

/// `p = 3 - z1 - z2^2`: bidegree (1, 2), zero-free on the closed bidisk.
pub fn smooth_quadratic() -> Rif {
    build(vec![1, 2], &[(vec![0, 0], 3.0), (vec![1, 0], -1.0), (vec![0, 2], -1.0)])
}

/// Denominator `s - z1 - z2 - z3` of the tridisk family.
pub fn tridisk_poly(s: f64) -> PolyMD {
    PolyMD::from_terms(
        vec![1, 1, 1],
        &[
            (vec![0, 0, 0], c(s)),
            (vec![1, 0, 0], c(-1.0)),
            (vec![0, 1, 0], c(-1.0)),
            (vec![0, 0, 1], c(-1.0)),
        ],
    )
    .expect("valid tridisk polynomial")
}

/// `phi_s = (s z1 z2 z3 - z1 z2 - z1 z3 - z2 z3) / (s - z1 - z2 - z3)`.
pub fn tridisk(s: f64) -> Rif {
    Rif::new(tridisk_poly(s)).expect("valid tridisk function")
}

/// All two-variable examples with their names.
pub fn bidisk_corpus() -> Vec<(&'static str, Rif)> {
    vec![
        ("monomial", monomial()),
        ("favard", favard()),
        ("favard_squared", favard_squared()),
        ("half_at_origin", half_at_origin()),
        ("smooth_bilinear", smooth_bilinear()),
        ("smooth_quadratic", smooth_quadratic()),
    ]
}

/// Look up a corpus function by name (`tridisk:<s>` for the tridisk family).
pub fn by_name(name: &str) -> Option<Rif> {
    if let Some(s) = name.strip_prefix("tridisk:") {
        return s.parse::<f64>().ok().map(tridisk);
    }
    bidisk_corpus().into_iter().find(|(n, _)| *n == name).map(|(_, r)| r)
}

/// `z1 z2 z3`, denominator `1` padded to degrees (1, 1, 1).
pub fn monomial3() -> Rif {
    build(vec![1, 1, 1], &[(vec![0, 0, 0], 1.0)])
}
