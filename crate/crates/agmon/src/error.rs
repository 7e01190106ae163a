use std::fmt;

/// Config problems exit 2, data problems exit 1. Scripts key on the split,
/// so every failure path must land in the right bucket.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(msg: impl fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

pub fn data_err(msg: impl fmt::Display) -> CliError {
    CliError::Data(msg.to_string())
}

macro_rules! from_data {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

from_data!(
    std::io::Error,
    csv::Error,
    serde_json::Error,
    minicube::CubeError,
    sits::SitsError,
    indices::IndexError,
    pheno_metrics::PhenoError,
    ml_core::MlError,
    rice_pipeline::RiceError,
    pheno_pipeline::PhenoError,
    cap_compliance::CapError,
);
