//! Clark measures of rational inner functions on the bidisk and polydisk.
//!
//! A rational inner function is `phi = p~ / p` with `p` stable and
//! `p~(z) = z^n conj(p(1 / conj(z)))`. For unimodular `alpha` its Clark
//! measure lives on the level set `{ phi = alpha }` of the torus; this crate
//! traces that set, assembles the measure and checks it against the Poisson
//! identity, contact orders at singularities and the Clark embedding.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blaschke;
pub mod clark;
pub mod contact;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod io;
pub mod levelset;
pub mod poly;
pub mod polydisk;
pub mod quadrature;
pub mod rif;
pub mod roots;

pub use blaschke::{ClarkAtom, SliceRoots};
pub use clark::{ClarkMeasure, HerglotzFunction, PoissonResidualReport};
pub use contact::{PowerFit, SingularityReport};
pub use embedding::{ConjRational, DensityReport, DensityVerdict, GramReport};
pub use error::{Error, Result};
pub use levelset::{AlphaClass, AlphaKind, Branch, FrozenAxis, LineComponent};
pub use num_complex::Complex64;
pub use poly::{PolyMD, StabilityCertificate, StabilityMethod};
pub use polydisk::HyperBranch;
pub use rif::Rif;
