use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {value} outside [0, 1] ({what})")]
    Domain { what: &'static str, value: f64 },

    #[error("distribution has total mass {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("invalid probability entry {value} at index {index}")]
    InvalidEntry { index: usize, value: f64 },

    #[error("empty alphabet")]
    EmptyAlphabet,

    #[error("alphabet of size {size} exceeds the dense-table cap of {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid axes: {0}")]
    Axis(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("codebook of {cells} cells exceeds the memory cap of {cap} cells")]
    Overflow { cells: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}
