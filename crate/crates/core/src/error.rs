//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("too few samples")]
    TooFewSamples,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("class {class} has no samples")]
    MissingClass { class: usize },

    #[error("sample {index} has zero similarity mass")]
    ZeroSimilarityRow { index: usize },

    #[error("vertex {index} has zero degree")]
    ZeroVertexDegree { index: usize },

    #[error("hypergraph weights are not set")]
    WeightsUnset,

    #[error("regression for target {target} failed: {source}")]
    Solver {
        target: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "requested {requested} nonzero eigenvalues but only {available} remain; spectrum: {spectrum:?}"
    )]
    SpectrumTooSmall {
        requested: usize,
        available: usize,
        spectrum: Vec<f64>,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("numerical failure in {context}")]
    Numerical { context: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            msg: msg.into(),
        }
    }

    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
