use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {value}")]
    InvalidParameter { field: &'static str, value: f64 },

    #[error("no stable steady-state branch for the given drive")]
    DegenerateSolution,

    #[error("mechanical susceptibility pole at delta = {delta} rad/s")]
    Pole { delta: f64 },

    #[error("singular probe response at delta = {delta} rad/s")]
    SingularResponse { delta: f64 },

    #[error("group-delay differentiation did not converge: step {step} rad/s, last estimates {last:?}")]
    DifferentiationFailure { step: f64, last: [f64; 2] },

    #[error("time integration diverged at t = {last_finite_t} s")]
    Divergence { last_finite_t: f64 },

    #[error("demodulation window error: {reason}")]
    Windowing { reason: String },

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown config key `{key}` at line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("config key `{key}` out of range: {message}")]
    OutOfRange { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 1 for config errors, 2 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse { .. } | Error::UnknownKey { .. } | Error::OutOfRange { .. } => 1,
            _ => 2,
        }
    }
}
