use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the model equation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Torque requested below the minimum rotor speed, where P/ω is singular.
    #[error("rotor speed {omega} rad/s is below the torque evaluation floor {omega_min} rad/s")]
    LowSpeed { omega: f64, omega_min: f64 },

    /// The power-coefficient polynomial has no usable interior maximum.
    #[error("model error: {0}")]
    Model(String),

    #[error("identification error: {0}")]
    Identification(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("step size {dt} s exceeds the configured maximum {max_dt} s")]
    StepSize { dt: f64, max_dt: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    /// A sub-model failed while advancing the bench.
    #[error("simulation halted at step {index}: {source}")]
    Step {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
