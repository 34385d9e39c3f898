use thiserror::Error;

/// Which evaluator block produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Objective,
    Equality,
    Inequality,
    Dynamics,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Block::Objective => "objective",
            Block::Equality => "equality constraints",
            Block::Inequality => "inequality constraints",
            Block::Dynamics => "dynamics",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum ScvxError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {block} at component {index}")]
    NonFinite { block: Block, index: usize },

    #[error("convex backend failed: {0}")]
    Backend(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, ScvxError>;
