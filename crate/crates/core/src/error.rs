use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("perturbation series diverges: |q| = {q_abs} >= 1")]
    DivergentSeries { q_abs: f64 },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("at grid point (omega1 = {omega1}, omega2 = {omega2}): {source}")]
    AtGridPoint {
        omega1: f64,
        omega2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("amplitude matrix is identically zero")]
    ZeroMatrix,

    #[error("amplitude matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is {rows}x{cols} but the grids have {n1} and {n2} points")]
    GridMismatch {
        rows: usize,
        cols: usize,
        n1: usize,
        n2: usize,
    },

    #[error("times do not satisfy ordering {case}: {detail}")]
    OrderingViolation { case: &'static str, detail: String },

    #[error("invalid covariance: |sigma12^2| = {sigma12_sq_abs} exceeds sigma1*sigma2 = {bound}")]
    InvalidCovariance { sigma12_sq_abs: f64, bound: f64 },

    #[error("sampler requires equal correlation times, got tau1 = {tau1}, tau2 = {tau2}, tau12 = {tau12}")]
    TimescaleMismatch { tau1: f64, tau2: f64, tau12: f64 },

    #[error("time {time} lies outside the sampled horizon [0, {horizon}]")]
    HorizonExceeded { time: f64, horizon: f64 },

    #[error("{0} must not be empty")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::DivergentSeries { .. } | Error::NonConvergence { .. } | Error::ZeroMatrix | Error::NonFinite => true,
            Error::AtGridPoint { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
