use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("collocation order {0} is too small (need at least {1})")]
    InvalidOrder(usize, usize),

    #[error("point {0} lies outside the reference interval [-1, 1]")]
    OutOfDomain(f64),

    #[error("invalid domain [{lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("concentration argument {0} outside (0, 1]")]
    InvalidEta(f64),

    #[error("jump approximations live on different grids")]
    GridMismatch,

    #[error("{0}")]
    InvalidInput(String),

    #[error("polynomial degree {0} exceeds the overflow guard of {1}")]
    DegreeOverflow(usize, usize),

    #[error("mollifier is degenerate at x = {0} (point sits on an edge)")]
    DegenerateKernel(f64),

    #[error("cell [{0}, {1}] is degenerate or leaves the domain")]
    DegenerateCell(f64, f64),

    #[error("cells do not tile the domain near x = {0}")]
    Tiling(f64),

    #[error("vandermonde matrix is singular at order {0}")]
    Singular(usize),

    #[error("advection blew up at t = {t} (N = {order})")]
    BlowUp { t: f64, order: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Study {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Study {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the caller's configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidOrder(..) | Error::InvalidDomain { .. } => true,
            Error::Study { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
