use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph must be connected")]
    Disconnected,

    #[error("invalid k = {k}: must satisfy 1 <= k <= {n}")]
    InvalidK { k: usize, n: usize },

    #[error(
        "edge target {target} unreachable for {nodes} nodes: achievable range is [{min}, {max}]"
    )]
    UnreachableEdgeTarget {
        nodes: usize,
        target: usize,
        min: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no calibration available: run `dismantle calibrate` and pass --calib, or pass --{0} directly")]
    MissingCalibration(&'static str),

    #[error("calibration domain: {0}")]
    CalibrationDomain(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("per-edge efficiency is undefined for an empty cut set")]
    EmptyCut,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("determinism failure: {0}")]
    Determinism(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
