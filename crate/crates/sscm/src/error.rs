use thiserror::Error;

/// Errors surfaced by samplers, model evaluation, and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo={lo} exceeds hi={hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid parameter `{name}` = {value}: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("invalid config field `{field}`: {constraint}")]
    InvalidConfig { field: String, constraint: String },

    #[error("distance {0} m is below the 1 m close-in reference distance")]
    DistanceBelowReference(f64),

    #[error("power delay profile has no taps")]
    EmptyPdp,

    #[error("power spectrum has no nonzero cells")]
    EmptySpectrum,

    #[error("exponential fit requires positive powers, got {0}")]
    NonPositivePower(f64),

    #[error("exponential fit needs at least two points at distinct delays")]
    DegenerateFit,

    #[error("unknown realization id {id}: ensemble holds {size} realizations")]
    UnknownRealization { id: u64, size: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed record: {0}")]
    MalformedRecord(String),
}

impl Error {
    /// Process exit code for the CLI: 1 config, 2 acceptance, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::MalformedRecord(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
