use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transition graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not strongly connected")]
    NotTransitive,
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },
    #[error("word is not admissible: {0}")]
    NotAdmissible(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid roof function: {0}")]
    InvalidRoof(String),
    #[error("cylinder depth mismatch: expected {expected}, got {got}")]
    DepthMismatch { expected: usize, got: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("loop length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("curves too close for reliable linking computation (min distance {min_dist})")]
    CurvesTooClose { min_dist: f64 },
    #[error("degenerate projection; retried {retries} directions without success")]
    DegenerateProjection { retries: usize },
    #[error("tangential intersection with the section at t = {t}")]
    TangentialIntersection { t: f64 },
    #[error("grid too coarse for epsilon = {epsilon}")]
    GridTooCoarse { epsilon: f64 },
    #[error("label collision in Fried link selection: {0}")]
    LabelCollision(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
