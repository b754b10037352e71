//! Behavior cloning from demonstrations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::{clip_global_norm, Adam};
use super::rollout::TeamSampler;
use super::LearnError;
use crate::agents::net::{add_logp_grad, backward, forward, joint_log_probs, EncodedObs};
use crate::agents::runner::play_game_observed;
use crate::agents::{Network, Policy};
use crate::game::{JointAction, Player};
use crate::metagame::crossplay::uniform_pair;
use crate::seeds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub obs: EncodedObs,
    pub action: JointAction,
    /// Index into [`Dataset::games`].
    pub game: usize,
}

/// Per-player game metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameMeta {
    pub rating: Option<u32>,
    pub winner: bool,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub games: Vec<GameMeta>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Every recorded action must be legal under its observation.
    pub fn validate(&self) -> Result<(), LearnError> {
        for (i, s) in self.samples.iter().enumerate() {
            if s.obs.legal_index(s.action).is_none() {
                return Err(LearnError::Data(format!("record {i}: action {} is not legal under its observation", s.action)));
            }
            if s.game >= self.games.len() {
                return Err(LearnError::Data(format!("record {i}: unknown game {}", s.game)));
            }
        }
        Ok(())
    }

    /// Record `teacher`'s decisions over `n_games` against `opponent`. The
    /// teacher alternates seats; with `both` set, decisions of both seats
    /// are recorded (for self-play demonstrations).
    pub fn from_games(
        teacher: &dyn Policy,
        opponent: &dyn Policy,
        teams: &TeamSampler,
        n_games: u64,
        seed: u64,
        both: bool,
    ) -> Result<Dataset, LearnError> {
        let mut ds = Dataset::default();
        for g in 0..n_games {
            let gs = seeds::derive(seed, g);
            let [mine, theirs] = uniform_pair(&teams.teams, &teams.options, gs)?;
            let seat = if g % 2 == 0 { Player::P1 } else { Player::P2 };
            let (p1, p2, pair): (&dyn Policy, &dyn Policy, _) =
                if seat == Player::P1 { (teacher, opponent, [mine, theirs]) } else { (opponent, teacher, [theirs, mine]) };
            let base = ds.games.len();
            let mut samples = Vec::new();
            let rec = play_game_observed(p1, p2, pair, teams.options.clone(), gs, |d| {
                if both || d.player == seat {
                    let idx = base + if d.player == Player::P1 { 0 } else { 1 };
                    samples.push(Sample { obs: EncodedObs::from_observation(d.obs), action: d.action, game: idx });
                }
            })?;
            for p in Player::BOTH {
                ds.games.push(GameMeta { rating: None, winner: rec.winner == Some(p), seed: Some(gs) });
            }
            ds.samples.extend(samples);
        }
        Ok(ds)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_grad_norm: f64,
    pub seed: u64,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig { learning_rate: 1e-3, epochs: 20, batch_size: 64, max_grad_norm: 5.0, seed: 0 }
    }
}

/// Mean negative log-likelihood of the demonstrated actions.
pub fn mean_nll(net: &Network, samples: &[Sample]) -> Result<f64, LearnError> {
    let mut total = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let k = s.obs.legal_index(s.action).ok_or_else(|| LearnError::Data(format!("record {i}: illegal action")))?;
        let c = net.forward(&s.obs)?;
        total -= joint_log_probs(&c.out, &s.obs.legal)[k];
    }
    Ok(total / samples.len().max(1) as f64)
}

/// Fraction of samples where the most likely action equals the demonstrated one.
pub fn match_rate(net: &Network, samples: &[Sample]) -> Result<f64, LearnError> {
    let mut hits = 0usize;
    for s in samples {
        let c = net.forward(&s.obs)?;
        let lp = joint_log_probs(&c.out, &s.obs.legal);
        let best = lp.iter().enumerate().fold(0, |b, (i, &l)| if l > lp[b] { i } else { b });
        hits += (s.obs.legal[best] == s.action) as usize;
    }
    Ok(hits as f64 / samples.len().max(1) as f64)
}

/// Minibatch Adam on the mean negative log-likelihood. Returns the trained
/// network and the dataset loss after each epoch.
pub fn bc_train(dataset: &Dataset, init: Network, cfg: &BcConfig) -> Result<(Network, Vec<f64>), LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::Data("empty dataset".into()));
    }
    dataset.validate()?;
    if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(LearnError::Hyper("batch_size and learning_rate must be positive".into()));
    }
    let mut net = init;
    let mut opt = Adam::new(net.params.len(), cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut grad = vec![0.0; net.params.len()];
    let mut d_out = vec![0.0; net.arch.out];
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for mb in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let b = mb.len() as f64;
            for &i in mb {
                let s = &dataset.samples[i];
                let k = s.obs.legal_index(s.action).expect("validated");
                let c = forward(&net.arch, &net.params, &s.obs);
                let lp = joint_log_probs(&c.out, &s.obs.legal);
                d_out.iter_mut().for_each(|x| *x = 0.0);
                add_logp_grad(&s.obs.legal, &lp, k, -1.0 / b, &mut d_out);
                backward(&net.arch, &net.params, &s.obs, &c, &d_out, &mut grad);
            }
            clip_global_norm(&mut [&mut grad], cfg.max_grad_norm);
            opt.step(&mut net.params, &grad);
        }
        losses.push(mean_nll(&net, &dataset.samples)?);
    }
    Ok((net, losses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Arch, RandomPlayer};
    use crate::game::{teams, GameOptions};
    use std::sync::Arc;

    fn small_dataset() -> Dataset {
        let ts = TeamSampler::new(vec![Arc::new(teams::bundled()[0].clone())], GameOptions::default());
        Dataset::from_games(&RandomPlayer, &RandomPlayer, &ts, 2, 1, false).unwrap()
    }

    #[test]
    fn point_mass_is_learned() {
        let mut ds = small_dataset();
        ds.samples.truncate(1);
        let cfg = BcConfig { epochs: 200, learning_rate: 1e-2, ..BcConfig::default() };
        let (net, losses) = bc_train(&ds, Network::init(Arch::actor(1, 8, 8), 0), &cfg).unwrap();
        assert!(losses.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let s = &ds.samples[0];
        let lp = joint_log_probs(&net.forward(&s.obs).unwrap().out, &s.obs.legal);
        assert!(lp[s.obs.legal_index(s.action).unwrap()].exp() >= 0.99);
    }

    #[test]
    fn empty_and_illegal_are_rejected() {
        let cfg = BcConfig::default();
        let net = Network::zeros(Arch::actor(1, 4, 4));
        assert!(matches!(bc_train(&Dataset::default(), net.clone(), &cfg), Err(LearnError::Data(_))));
        let mut ds = small_dataset();
        ds.samples[3].action = JointAction::new(crate::game::SlotAction(106), crate::game::SlotAction(106));
        let e = bc_train(&ds, net, &cfg).unwrap_err();
        assert!(e.to_string().contains("record 3"));
    }
}
