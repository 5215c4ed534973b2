use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid format: {0}")]
    InvalidFormat(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("secant variety fills the ambient space (codimension 0); slicing is inapplicable")]
    FillingSecant,

    #[error("negative fiber-slice count {0}: codimension is inconsistent with the chart")]
    NegativeFiberCount(i64),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("singular linear system (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration diverged (norm {norm:e})")]
    Diverged { norm: f64 },

    #[error("random-point Jacobian ranks disagree: {ranks:?}")]
    Disagreement { ranks: Vec<usize> },

    #[error("could not draw a nondegenerate seed after {attempts} attempts")]
    SeedFailure { attempts: usize },

    #[error("target {target} does not exceed r = {r}; no degree improves the bound")]
    NoImprovement { r: u64, target: f64 },

    #[error("codimension {codim} needs a full-rank interpolation certificate")]
    MissingCertificate { codim: usize },

    #[error("path {index} failed to track: {status}")]
    TrackFailure { index: usize, status: String },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("witness file schema violation: {0}")]
    Schema(String),

    #[error("solution {index} fails validation (residual {residual:e})")]
    ResidualValidation { index: usize, residual: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
