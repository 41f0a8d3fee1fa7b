use thiserror::Error;

/// Failures surfaced by the numerical modules.
///
/// Non-existence of a decoherence-free state is a verdict, not an error, and
/// never appears here.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency {omega} sits on a band edge or van Hove point")]
    BandEdge { omega: f64 },

    #[error("frequency {omega} lies outside the band [{lower}, {upper}]")]
    OutOfBand { omega: f64, lower: f64, upper: f64 },

    #[error("principal-value quadrature did not settle: last change {change:e} with {nodes} nodes")]
    QuadratureNotConverged { change: f64, nodes: usize },

    #[error("integrand is not integrable at E0 = {e0}: interference factor {factor:e} does not vanish")]
    NonIntegrable { e0: f64, factor: f64 },

    #[error("evaluation point is within {distance:e} of a pole")]
    PoleProximity { distance: f64 },

    #[error("no bound state in the continuum for these parameters")]
    NoBoundState,

    #[error("step {step} too large: half-step error estimate {estimate:e} per step")]
    StepTooLarge { step: f64, estimate: f64 },

    #[error("density matrix lost positivity (min eigenvalue {min_eigenvalue:e}) at t = {time}")]
    PositivityViolated { time: f64, min_eigenvalue: f64 },

    #[error("time grid is not uniform or too short")]
    BadTimeGrid,

    #[error("emitter site {site} outside 1..={n_sites}")]
    SiteOutOfRange { site: i64, n_sites: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("no decoherence-free state to build a density matrix from")]
    NoDfs,
}

pub type Result<T> = std::result::Result<T, Error>;
