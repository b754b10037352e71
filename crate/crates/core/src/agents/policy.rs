//! Policy backed by an actor network.

use super::net::{joint_log_probs, EncodedObs, Network};
use super::{AgentError, Policy};
use crate::game::{JointAction, Observation};

#[derive(Clone, Debug)]
pub struct NetworkPolicy {
    pub network: Network,
    /// Play the most likely joint action instead of sampling.
    pub greedy: bool,
    label: String,
}

impl NetworkPolicy {
    pub fn new(network: Network, label: impl Into<String>) -> NetworkPolicy {
        NetworkPolicy { network, greedy: false, label: label.into() }
    }

    pub fn greedy(mut self) -> NetworkPolicy {
        self.greedy = true;
        self
    }

    /// Log-probabilities over the observation's legal joint actions.
    pub fn log_probs(&self, obs: &Observation) -> Result<Vec<f64>, AgentError> {
        self.log_probs_encoded(&EncodedObs::from_observation(obs))
    }

    pub fn log_probs_encoded(&self, x: &EncodedObs) -> Result<Vec<f64>, AgentError> {
        if x.legal.is_empty() {
            return Err(AgentError::Data("no legal joint actions".into()));
        }
        let cache = self.network.forward(x)?;
        Ok(joint_log_probs(&cache.out, &x.legal))
    }
}

impl Policy for NetworkPolicy {
    fn name(&self) -> String {
        self.label.clone()
    }

    /// Panics if the observation frame count differs from the network's;
    /// callers build observations with the network's `n_frames`.
    fn action_distribution(&self, obs: &Observation) -> Vec<(JointAction, f64)> {
        let lp = self.log_probs(obs).expect("observation matches network architecture");
        if self.greedy {
            let best = lp
                .iter()
                .enumerate()
                .fold(0, |b, (i, &l)| if l > lp[b] { i } else { b });
            return obs.legal.iter().enumerate().map(|(i, &a)| (a, (i == best) as u8 as f64)).collect();
        }
        obs.legal.iter().copied().zip(lp.into_iter().map(f64::exp)).collect()
    }
}
