use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Bench(#[from] windlab_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid server options: {0}")]
    Options(String),
    #[error("simulation thread has stopped")]
    Stopped,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
