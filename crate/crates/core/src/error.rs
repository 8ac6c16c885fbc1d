use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-finite value in state component `{component}`")]
    NonFinite { component: &'static str },

    #[error("control value {0} outside [0, 1]")]
    ControlOutOfRange(f64),

    #[error("state component `{component}` = {value} is negative beyond round-off at t = {t}")]
    NegativeState {
        component: &'static str,
        value: f64,
        t: f64,
    },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("step size {h:e} fell below minimum {h_min:e} at t = {t}")]
    StepSizeUnderflow { t: f64, h: f64, h_min: f64 },

    #[error("time {t} outside trajectory span [{t0}, {tf}]")]
    OutOfRange { t: f64, t0: f64, tf: f64 },

    #[error("sensitivity index undefined: reproduction number is zero")]
    UndefinedIndex,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("forward-backward sweep diverged at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },
}
