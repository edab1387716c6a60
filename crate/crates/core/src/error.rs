use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("region does not fit the lattice box: {0}")]
    RegionOutsideBox(String),

    #[error("ambient interactions are disabled for this weight table")]
    AmbientForbidden,

    #[error("ring and domain overlap in {0} cells")]
    RingOverlapsDomain(usize),

    #[error("quantization scale {scale} unusable: {reason}")]
    ScaleOverflow { scale: u64, reason: String },

    #[error("brute force limited to {limit} free cells, got {got}")]
    TooManyFreeCells { limit: usize, got: usize },

    #[error("configurations disagree outside the domain: {0}")]
    DatumMismatch(String),

    #[error("level sets not nested at threshold {threshold}")]
    NestingViolation { threshold: f64 },

    #[error("isometry {0} does not preserve the instance")]
    IsometryMismatch(String),

    #[error("ring of width {width} leaves the box")]
    RingExceedsBox { width: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that signal a broken internal invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NestingViolation { .. })
    }
}
