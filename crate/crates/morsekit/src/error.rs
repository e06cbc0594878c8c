use thiserror::Error;

/// Errors produced by dataset generation, metrics, training and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown label {0:?}: not one of the 64 supported characters")]
    UnknownLabel(char),

    #[error("invalid codebook fixture: {0}")]
    InvalidCodebook(String),

    #[error("invalid generation config: {0}")]
    InvalidConfig(String),

    #[error("invalid variant family {family} (expected 1..=4) or sigma {sigma} (expected 0..=4)")]
    InvalidVariant { family: u32, sigma: u32 },

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),

    #[error("coincident centroids: d_min({class}) = 0 with sigma > 0, metric D diverges")]
    CoincidentCentroids { class: usize },

    #[error("degenerate variance: correlation inputs need nonzero variance on both sides")]
    DegenerateVariance,

    #[error("correlation inputs must have equal length >= 2 (got {0} and {1})")]
    CorrelationLength(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}: {loss}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },

    #[error("split {0:?} is empty")]
    EmptySplit(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 8], found: [u8; 8] },

    #[error("corrupt dataset file: {0}")]
    CorruptFile(String),

    #[error("stored thousandth {0} exceeds 1000")]
    BoundsViolation(u16),

    #[error("feature count {0} exceeds the format limit of 65535")]
    SerializationOverflow(usize),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("variant {variant}: {source}")]
    Variant {
        variant: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("report serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
