use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by measure construction, transform evaluation, the
/// fixed-point solvers and the recovery routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("total mass {0} is not 1 within 1e-10")]
    NonUnitMass(f64),
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("duplicate atom position {0}")]
    DuplicatePosition(f64),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("pushforward leaves the domain: {0}")]
    SupportViolation(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("not a self-map of the upper half-plane (Im F(i) = {0})")]
    NotSelfMap(f64),
    #[error("inversion diverged at {0} (point outside the invertibility domain)")]
    InversionDiverged(Complex64),
    #[error("{0} lies outside the inversion interval of eta")]
    OutsideInversionInterval(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("map is not admissible for this inversion: {0}")]
    NotAdmissible(String),
    #[error("subordination solver failed: {0}")]
    SolverFailure(String),
    #[error("bad two-atom weights: {0}")]
    BadWeights(String),
    #[error("Abel estimate did not converge: {0}")]
    NonConvergent(String),
    #[error("bad exponent t = {0}")]
    BadExponent(f64),
    #[error("measure has zero first moment; t >= 2 is required")]
    ZeroFirstMoment,
    #[error("eta vanishes inside the disk; t >= 2 is required")]
    ZeroOfEta,
    #[error("the point mass at zero has no multiplicative powers")]
    DeltaZero,
    #[error("measure is not infinitely divisible for multiplicative boolean convolution: {0}")]
    NotBooleanInfDiv(String),
    #[error("boundary limit does not settle: {0}")]
    OscillatoryLimit(String),
    #[error("measure spec: {0}")]
    Spec(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::InversionDiverged(_)
                | Error::MaxIterations { .. }
                | Error::SolverFailure(_)
                | Error::NonConvergent(_)
                | Error::OscillatoryLimit(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
