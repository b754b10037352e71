//! Policies: baselines, the parametric network policy, and a game runner.

pub mod baselines;
pub mod checkpoint;
pub mod net;
pub mod policy;
pub mod runner;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::game::{GameError, JointAction, Observation};

pub use baselines::{HeuristicWeights, MaxBasePowerPlayer, RandomPlayer, SimpleHeuristicsPlayer};
pub use checkpoint::Checkpoint;
pub use net::{Arch, Network};
pub use policy::NetworkPolicy;
pub use runner::{play_game, GameRecord};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("architecture mismatch: {0}")]
    Arch(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A (possibly stochastic) map from observations to legal joint actions.
pub trait Policy: Send + Sync {
    fn name(&self) -> String;

    /// Probability of each legal joint action. Entries sum to 1.
    fn action_distribution(&self, obs: &Observation) -> Vec<(JointAction, f64)>;

    fn act(&self, obs: &Observation, rng: &mut dyn RngCore) -> JointAction {
        sample(&self.action_distribution(obs), rng)
    }
}

/// Draw from a probability table; falls back to the last entry on rounding.
pub fn sample(dist: &[(JointAction, f64)], rng: &mut dyn RngCore) -> JointAction {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(a, p) in dist {
        acc += p;
        if u < acc {
            return a;
        }
    }
    dist.last().expect("at least one legal joint action").0
}

impl<P: Policy + ?Sized> Policy for std::sync::Arc<P> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn action_distribution(&self, obs: &Observation) -> Vec<(JointAction, f64)> {
        (**self).action_distribution(obs)
    }

    fn act(&self, obs: &Observation, rng: &mut dyn RngCore) -> JointAction {
        (**self).act(obs, rng)
    }
}
