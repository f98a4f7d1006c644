use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate (lat {lat}, lon {lon})")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("negative radius {0} m")]
    NegativeRadius(f64),
    #[error("no cloudless cells inside the zone")]
    EmptyZone,
    #[error("malformed raster header: {0}")]
    MalformedHeader(String),
    #[error("raster declares {expected} cells but contains {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("social record references unknown cluster `{0}`")]
    UnknownCluster(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("column `{0}` has no non-missing values")]
    AllMissingColumn(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("cluster `{0}` has no households")]
    EmptyCluster(String),
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("target has zero variance")]
    ZeroVarianceTarget,
    #[error("{n} rows cannot be split into {k} folds")]
    TooFewRows { n: usize, k: usize },
    #[error("exact Shapley enumeration is limited to 15 features, got {0}")]
    TooManyFeatures(usize),
    #[error("tree {tree} node {node} has no cover count")]
    MissingCover { tree: usize, node: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("dataset contains missing values in column `{0}`")]
    MissingValues(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model is not a tree ensemble")]
    ModelNotTree,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem
                | Error::ZeroVarianceTarget
                | Error::DegenerateInput(_)
                | Error::EmptyZone
        )
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
