//! Evaluation protocols: performance and generalization tests,
//! exploitability curves and team-similarity statistics.

pub mod exploit;
pub mod protocols;
pub mod similarity;

use thiserror::Error;

pub use exploit::{exploitability, ExploitConfig, ExploitCurve};
pub use protocols::{generalization_test, performance_test, AgentInfo, EvalAgent, EvalReport, Protocol};
pub use similarity::{set_statistics, team_similarity, SimilarityStats};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Meta(#[from] crate::metagame::MetaError),
    #[error(transparent)]
    Learn(#[from] crate::learn::LearnError),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
