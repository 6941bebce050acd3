use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("coefficient tensor has {got} entries, degrees {degrees:?} require {expected}")]
    ShapeMismatch {
        degrees: Vec<usize>,
        expected: usize,
        got: usize,
    },

    #[error("declared degree {degree} in variable {var} is not attained")]
    DegreeNotAttained { var: usize, degree: usize },

    #[error("expected a point with {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rational inner function must have positive degree in every variable, got {0:?}")]
    DegenerateDegree(Vec<usize>),

    #[error("root finder did not converge on slice {slice}")]
    RootFindFailure { slice: String },

    #[error("slice polynomial vanishes identically at {base:?}")]
    IdenticallyZeroSlice { base: Vec<(f64, f64)> },

    #[error("continuation could not separate colliding roots near theta = {theta}")]
    ContinuationCollision { theta: f64 },

    #[error("weight numerator and denominator both vanish at ({re}, {im})")]
    ZeroOverZero { re: f64, im: f64 },

    #[error("|d phi / d z| varies along the frozen slice (spread {spread:.3e})")]
    NonConstantDerivative { spread: f64 },

    #[error("frozen slice at tau = ({re}, {im}) is not identically alpha")]
    NotALine { re: f64, im: f64 },

    #[error("measure has total mass {mass}, expected 1")]
    MassNotOne { mass: f64 },

    #[error("log-log fit degenerate (R^2 = {r2:.6})")]
    FitDegenerate { r2: f64 },

    #[error("no level-set branch passes through the requested point")]
    NoBranchThroughPoint,

    #[error("radial limit did not converge (last change {change:.3e}, modulus {modulus})")]
    NonConvergent { change: f64, modulus: f64 },

    #[error("denominator of the rational conjugate vanishes on the closed disk")]
    DenominatorVanishes,

    #[error("singular denominator")]
    SingularDenominator,

    #[error("polynomial is not zero-free on the closed polydisk (min slice root modulus {min_root_modulus})")]
    BoundaryZero { min_root_modulus: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::DegreeNotAttained { .. } => "DegreeNotAttained",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateDegree(_) => "DegenerateDegree",
            Error::RootFindFailure { .. } => "RootFindFailure",
            Error::IdenticallyZeroSlice { .. } => "IdenticallyZeroSlice",
            Error::ContinuationCollision { .. } => "ContinuationCollision",
            Error::ZeroOverZero { .. } => "ZeroOverZero",
            Error::NonConstantDerivative { .. } => "NonConstantDerivative",
            Error::NotALine { .. } => "NotALine",
            Error::MassNotOne { .. } => "MassNotOne",
            Error::FitDegenerate { .. } => "FitDegenerate",
            Error::NoBranchThroughPoint => "NoBranchThroughPoint",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::DenominatorVanishes => "DenominatorVanishes",
            Error::SingularDenominator => "SingularDenominator",
            Error::BoundaryZero { .. } => "BoundaryZero",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }
}
