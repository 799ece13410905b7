use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition of a circuit, gadget or oracle was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("trial {trial} was rerun {reruns} times without completing QEC (cap {cap})")]
    RerunCap { trial: u64, reruns: u32, cap: u32 },

    #[error("ancilla verification failed {attempts} times in a row (cap {cap})")]
    RetryCap { attempts: u32, cap: u32 },

    #[error("decoding table collision for signature {signature:#05x}: no single correction serves every first-order fault")]
    DecoderCollision { signature: u16 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}
