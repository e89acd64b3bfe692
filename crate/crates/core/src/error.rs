//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::game::Coalition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Exact Shapley computation enumerates `n!` permutations (or `2^n`
    /// coalitions) and is refused above the configured cap.
    #[error("exact Shapley computation supports at most {cap} players, got {n}")]
    PlayerCountExceedsCap { n: usize, cap: usize },

    #[error("utility evaluation failed for coalition {coalition}: {source}")]
    UtilityEvaluation {
        coalition: Coalition,
        #[source]
        source: Box<Error>,
    },

    #[error("game {game}: {source}")]
    GameContext {
        game: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration {iteration}: {source}")]
    IterationContext {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} predictions vs {right} truths")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed data in {path}: {detail}")]
    MalformedData { path: String, detail: String },

    #[error("unexpected column set in {path}: {detail}")]
    SchemaMismatch { path: String, detail: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_coalition(self, coalition: Coalition) -> Error {
        Error::UtilityEvaluation {
            coalition,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_game(self, game: usize) -> Error {
        Error::GameContext {
            game,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_iteration(self, iteration: usize) -> Error {
        Error::IterationContext {
            iteration,
            source: Box::new(self),
        }
    }
}
