use crate::loyalty::Side;
use crate::qre::QreProfile;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("closed-form results are only available for the uniform shock on [0, 1]")]
    NonUniformShock,

    #[error("{side} threshold {value} is outside the open support ({lo}, {hi})")]
    ThresholdOutsideSupport { side: Side, value: f64, lo: f64, hi: f64 },

    #[error("no root of the {side} equation inside the support")]
    NoInteriorRoot { side: Side },

    #[error("price grid is empty")]
    EmptyGrid,

    #[error("value system is singular")]
    SingularSystem,

    #[error("price ordering assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("logit homotopy stalled at precision {precision}")]
    HomotopyStalled {
        precision: f64,
        last_converged: Option<Box<QreProfile>>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
