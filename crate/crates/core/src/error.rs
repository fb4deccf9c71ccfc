use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the synthesis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot keep the training graph connected: requested {requested} validation edges but at most {max_feasible} ({max_fraction:.4} of edges) can be removed")]
    SplitInfeasible {
        requested: usize,
        max_feasible: usize,
        max_fraction: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite values in parameter group `{0}`")]
    NonFinite(String),

    #[error("non-finite {what} at step {step}")]
    Diverged { what: &'static str, step: u64 },

    #[error("gradient norm {norm} exceeds clip bound {bound}")]
    ClipViolation { norm: f64, bound: f64 },

    #[error("privacy budget exhausted: epsilon {epsilon} at delta {delta}")]
    BudgetExhausted { epsilon: f64, delta: f64 },

    #[error("node id {id} out of range for {num_nodes} nodes")]
    NodeOutOfRange { id: usize, num_nodes: usize },

    #[error("score matrix support has {available} distinct pairs, cannot reach {requested} edges")]
    InsufficientSupport { available: usize, requested: usize },

    #[error("phase one produced {produced} edges which exceeds the target of {target}")]
    PhaseOneOverflow { produced: usize, target: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by the user's configuration rather than a stage
    /// failing, including configuration errors a stage ran into.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => true,
            Error::Stage { source, .. } => matches!(**source, Error::Config(_)),
            _ => false,
        }
    }
}
