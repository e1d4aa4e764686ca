use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tensor is singular on the symmetric subspace")]
    SingularOnSymmetric,
    #[error("tensor is not positive definite on the symmetric subspace")]
    NotPositiveDefinite,
    #[error("tensor invariant violated: {what} (residual {residual:.3e})")]
    InvariantViolation { what: &'static str, residual: f64 },
    #[error("cannot normalize {what}: normalizing component vanishes")]
    NormalizationFailure { what: &'static str },
    #[error("e1 = {re} + {im}i is not in the admissible region")]
    NotInOmega { re: f64, im: f64 },
    #[error("no root of the argument equation found (internal inconsistency)")]
    NoRoot,
    #[error("the line y = -1/2 maps to e1 = 0 and cannot be inverted")]
    DegenerateLine,
    #[error("layering weight p = {p} lies in [0, 1]; no self-similar construction")]
    BranchAmbiguity { p: f64 },
    #[error("phi has a pole at theta = {theta}")]
    PoleAtTheta { theta: f64 },
    #[error("no theta with real phi")]
    NoCandidates,
    #[error("zI = {zi} is not admissible for the asymptotic family")]
    InadmissibleZI { zi: f64 },
    #[error("self-intersection equation has no real solution")]
    NoRealGamma,
    #[error("self-intersection lies outside the unit disk (|c1'| = {modulus})")]
    OutsideUnitDisk { modulus: f64 },
    #[error("trajectory sampled too coarsely for a winding count")]
    UndersampledTrajectory,
    #[error("no attaining construction found within the search")]
    NotAttainedWithinSearch,
    #[error("interface system of the laminate is singular")]
    SingularInterfaceSystem,
    #[error(
        "fixed point did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("fixed-point iterate lost positivity at iteration {iteration}")]
    LostPositivity { iteration: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable tag, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::SingularOnSymmetric => "SingularOnSymmetric",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::NormalizationFailure { .. } => "NormalizationFailure",
            Error::NotInOmega { .. } => "NotInOmega",
            Error::NoRoot => "NoRoot",
            Error::DegenerateLine => "DegenerateLine",
            Error::BranchAmbiguity { .. } => "BranchAmbiguity",
            Error::PoleAtTheta { .. } => "PoleAtTheta",
            Error::NoCandidates => "NoCandidates",
            Error::InadmissibleZI { .. } => "InadmissibleZI",
            Error::NoRealGamma => "NoRealGamma",
            Error::OutsideUnitDisk { .. } => "OutsideUnitDisk",
            Error::UndersampledTrajectory => "UndersampledTrajectory",
            Error::NotAttainedWithinSearch => "NotAttainedWithinSearch",
            Error::SingularInterfaceSystem => "SingularInterfaceSystem",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::LostPositivity { .. } => "LostPositivity",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
