//! Behavior cloning, PPO with GAE, and population training (self-play,
//! fictitious play, double oracle).

pub mod bc;
pub mod optim;
pub mod paradigm;
pub mod pool;
pub mod ppo;
pub mod rollout;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentError;
use crate::game::GameError;
use crate::metagame::MetaError;

pub use bc::{bc_train, BcConfig, Dataset, GameMeta, Sample};
pub use optim::Adam;
pub use paradigm::{run_paradigm, Paradigm, RunSpec, TrainOutput};
pub use pool::{CheckpointPool, PoolMember, Provenance};
pub use ppo::{gae, ppo_update, PpoDiagnostics};
pub use rollout::{collect_rollouts, Choice, OpponentSampler, RolloutBatch, TeamSampler, Transition};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("data error: {0}")]
    Data(String),
    #[error("invalid hyperparameters: {0}")]
    Hyper(String),
    #[error("non-finite loss at update {update}: {diagnostics:?}")]
    NonFinite { update: u64, diagnostics: PpoDiagnostics },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// PPO hyperparameters. Defaults are the full-scale reference values; desk
/// runs override the learning rate and budget through configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_range: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub steps_per_update: usize,
    pub batch_size: usize,
    pub n_epochs: usize,
    pub total_timesteps: u64,
    /// Standardize advantages within each minibatch.
    pub normalize_advantage: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 1e-5,
            gamma: 1.0,
            gae_lambda: 0.95,
            clip_range: 0.2,
            entropy_coef: 0.001,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            steps_per_update: 24 * 128,
            batch_size: 64,
            n_epochs: 10,
            total_timesteps: 200_000,
            normalize_advantage: true,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), LearnError> {
        let pos = [
            ("learning_rate", self.learning_rate),
            ("clip_range", self.clip_range),
            ("max_grad_norm", self.max_grad_norm),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LearnError::Hyper(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("gae_lambda", self.gae_lambda)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(LearnError::Hyper(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.entropy_coef < 0.0 || self.value_coef < 0.0 {
            return Err(LearnError::Hyper("loss coefficients must be non-negative".into()));
        }
        if self.steps_per_update == 0 || self.batch_size == 0 || self.n_epochs == 0 {
            return Err(LearnError::Hyper("steps_per_update, batch_size and n_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_values() {
        let h = Hyperparameters::default();
        assert_eq!(h.learning_rate, 1e-5);
        assert_eq!(h.gamma, 1.0);
        assert_eq!(h.gae_lambda, 0.95);
        assert_eq!(h.clip_range, 0.2);
        assert_eq!(h.entropy_coef, 0.001);
        assert_eq!(h.value_coef, 0.5);
        assert_eq!(h.max_grad_norm, 0.5);
        assert_eq!(h.steps_per_update, 3072);
        assert_eq!(h.batch_size, 64);
        assert_eq!(h.n_epochs, 10);
        h.validate().unwrap();
        assert!(Hyperparameters { batch_size: 0, ..h }.validate().is_err());
    }
}
