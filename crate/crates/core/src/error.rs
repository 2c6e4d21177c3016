use thiserror::Error;

/// Errors produced by code construction, decoding and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("CSS condition violated: X row {x_row} anticommutes with Z row {z_row}")]
    CssViolation { x_row: usize, z_row: usize },

    #[error("construction error: {0}")]
    Construction(String),

    #[error(
        "check matrix is rank-deficient (rank {rank} < {rows} rows); \
         pass the full-rank check matrix"
    )]
    RankDeficient { rank: usize, rows: usize },

    #[error("{rows} rows is too many for exhaustive combination; use the randomized search")]
    TooManyRows { rows: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
