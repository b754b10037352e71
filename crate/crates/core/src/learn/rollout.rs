//! Experience collection against sampled opponents.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::agents::net::{forward, joint_log_probs, EncodedObs};
use crate::agents::{Network, NetworkPolicy, Policy};
use crate::game::{start_battle, GameOptions, Observation, ObservationStack, Player, TeamConfig};
use crate::metagame::crossplay::uniform_pair;
use crate::seeds;

/// One learner decision point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transition {
    pub obs: EncodedObs,
    /// Index of the chosen joint action in `obs.legal`.
    pub action: usize,
    pub logp: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// Which opponent played an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    /// The current learner snapshot.
    Learner,
    Pool(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpisodeInfo {
    pub seed: u64,
    pub opponent: Choice,
    pub learner: Player,
    /// Terminal reward from the learner's side.
    pub reward: f64,
    /// First transition of this episode in the batch.
    pub start: usize,
    pub len: usize,
    /// Value estimate after the last kept step when the episode was cut.
    pub bootstrap: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RolloutBatch {
    pub transitions: Vec<Transition>,
    pub episodes: Vec<EpisodeInfo>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Mean terminal score in [0, 1] over completed episodes.
    pub fn win_rate(&self) -> f64 {
        let done: Vec<_> = self.episodes.iter().filter(|e| e.bootstrap.is_none()).collect();
        if done.is_empty() {
            return 0.5;
        }
        done.iter().map(|e| (e.reward + 1.0) / 2.0).sum::<f64>() / done.len() as f64
    }
}

/// Opponent distribution for each episode.
#[derive(Clone, Default)]
pub struct OpponentSampler {
    pub pool: Vec<Arc<dyn Policy>>,
    /// Sampling weights over `pool`; uniform when `None`. An empty pool
    /// means self-play against the current learner.
    pub weights: Option<Vec<f64>>,
}

impl OpponentSampler {
    pub fn self_play() -> OpponentSampler {
        OpponentSampler::default()
    }

    pub fn uniform(pool: Vec<Arc<dyn Policy>>) -> OpponentSampler {
        OpponentSampler { pool, weights: None }
    }

    pub fn weighted(pool: Vec<Arc<dyn Policy>>, weights: Vec<f64>) -> OpponentSampler {
        OpponentSampler { pool, weights: Some(weights) }
    }

    pub fn fixed(policy: Arc<dyn Policy>) -> OpponentSampler {
        OpponentSampler::uniform(vec![policy])
    }

    /// Opponent for the episode with `episode_seed`.
    pub fn draw(&self, episode_seed: u64) -> Choice {
        if self.pool.is_empty() {
            return Choice::Learner;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(episode_seed, 0x0b0e));
        match &self.weights {
            None => Choice::Pool(rng.random_range(0..self.pool.len())),
            Some(w) => {
                let total: f64 = w.iter().sum();
                let u = rng.random::<f64>() * total;
                let mut acc = 0.0;
                for (i, &x) in w.iter().enumerate() {
                    acc += x;
                    if u < acc {
                        return Choice::Pool(i);
                    }
                }
                Choice::Pool(w.iter().rposition(|&x| x > 0.0).unwrap_or(0))
            }
        }
    }
}

/// Uniform team pairs from a training set.
#[derive(Clone, Debug)]
pub struct TeamSampler {
    pub teams: Vec<Arc<TeamConfig>>,
    pub options: GameOptions,
}

impl TeamSampler {
    pub fn new(teams: Vec<Arc<TeamConfig>>, options: GameOptions) -> TeamSampler {
        TeamSampler { teams, options }
    }
}

/// Collect exactly `n_steps` learner decisions. Episodes are played in
/// parallel waves; episode `e` uses seed `derive(seed, e)` and the learner
/// sits in seat one for even `e`. Results do not depend on thread count.
pub fn collect_rollouts(
    actor: &Network,
    critic: &Network,
    sampler: &OpponentSampler,
    teams: &TeamSampler,
    n_steps: usize,
    seed: u64,
) -> Result<RolloutBatch, LearnError> {
    let snapshot: Arc<dyn Policy> = Arc::new(NetworkPolicy::new(actor.clone(), "learner"));
    let wave = 16.max(rayon::current_num_threads() * 4);
    let mut batch = RolloutBatch::default();
    let mut next = 0u64;
    while batch.transitions.len() < n_steps {
        let episodes: Result<Vec<_>, LearnError> = (next..next + wave as u64)
            .into_par_iter()
            .map(|e| {
                let es = seeds::derive(seed, e);
                let choice = sampler.draw(es);
                let opp: &dyn Policy = match choice {
                    Choice::Learner => snapshot.as_ref(),
                    Choice::Pool(i) => sampler.pool[i].as_ref(),
                };
                let learner = if e % 2 == 0 { Player::P1 } else { Player::P2 };
                let (trs, reward) = play_episode(actor, critic, opp, teams, learner, es)?;
                Ok((es, choice, learner, trs, reward))
            })
            .collect();
        next += wave as u64;
        for (es, choice, learner, mut trs, reward) in episodes? {
            let room = n_steps - batch.transitions.len();
            if room == 0 {
                break;
            }
            let start = batch.transitions.len();
            let mut bootstrap = None;
            if trs.len() > room {
                bootstrap = Some(trs[room].value);
                trs.truncate(room);
            }
            batch.episodes.push(EpisodeInfo { seed: es, opponent: choice, learner, reward, start, len: trs.len(), bootstrap });
            batch.transitions.extend(trs);
        }
    }
    Ok(batch)
}

fn play_episode(
    actor: &Network,
    critic: &Network,
    opponent: &dyn Policy,
    teams: &TeamSampler,
    learner: Player,
    es: u64,
) -> Result<(Vec<Transition>, f64), LearnError> {
    let [mine, theirs] = uniform_pair(&teams.teams, &teams.options, es)?;
    let ordered = if learner == Player::P1 { [mine, theirs] } else { [theirs, mine] };
    let mut state = start_battle(ordered, teams.options.clone(), seeds::derive(es, 0))?;
    let mut rngs = [ChaCha8Rng::seed_from_u64(seeds::derive(es, 1)), ChaCha8Rng::seed_from_u64(seeds::derive(es, 2))];
    let n = teams.options.n_frames;
    let mut stacks = [ObservationStack::new(n), ObservationStack::new(n)];
    let mut out = Vec::new();
    while !state.is_terminal() {
        let mut chosen = Vec::with_capacity(2);
        for player in Player::BOTH {
            let i = player.index();
            let obs = Observation::build(&state, player, &mut stacks[i]);
            if obs.legal.len() == 1 {
                chosen.push(obs.legal[0]);
            } else if player == learner {
                let x = EncodedObs::from_observation(&obs);
                let cache = actor.forward(&x)?;
                let lp = joint_log_probs(&cache.out, &x.legal);
                let u: f64 = rngs[i].random();
                let mut acc = 0.0;
                let mut k = lp.len() - 1;
                for (j, l) in lp.iter().enumerate() {
                    acc += l.exp();
                    if u < acc {
                        k = j;
                        break;
                    }
                }
                let value = forward(&critic.arch, &critic.params, &x).out[0];
                chosen.push(x.legal[k]);
                out.push(Transition { obs: x, action: k, logp: lp[k], value, reward: 0.0, done: false });
            } else {
                chosen.push(opponent.act(&obs, &mut rngs[i]));
            }
        }
        state.step(chosen[0], chosen[1])?;
    }
    let reward = match state.winner() {
        Some(w) if w == learner => 1.0,
        Some(_) => -1.0,
        None => 0.0,
    };
    if let Some(last) = out.last_mut() {
        last.reward = reward;
        last.done = true;
    }
    Ok((out, reward))
}
