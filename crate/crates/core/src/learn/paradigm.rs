//! Population training loops: self-play, fictitious play and double oracle.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::pool::{CheckpointPool, Provenance};
use super::ppo::{ppo_update, Optimizers, PpoDiagnostics};
use super::rollout::{collect_rollouts, OpponentSampler, TeamSampler};
use super::{Hyperparameters, LearnError};
use crate::agents::{Arch, Checkpoint, Network, NetworkPolicy, Policy};
use crate::game::{GameOptions, TeamConfig};
use crate::metagame::crossplay::{head_to_head, uniform_pair};
use crate::metagame::{solve_zero_sum_nash, PayoffMatrix};
use crate::seeds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    /// Self-play against the current parameters.
    Sp,
    /// Fictitious play: uniform over past checkpoints.
    Fp,
    /// Double oracle: Nash mixture over past checkpoints.
    Do,
}

impl std::str::FromStr for Paradigm {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Paradigm, LearnError> {
        match s.to_ascii_lowercase().as_str() {
            "sp" | "self-play" => Ok(Paradigm::Sp),
            "fp" | "fictitious-play" => Ok(Paradigm::Fp),
            "do" | "double-oracle" => Ok(Paradigm::Do),
            other => Err(LearnError::Hyper(format!("unknown paradigm {other:?}"))),
        }
    }
}

/// Architecture widths for freshly initialized networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Widths {
    pub embed: usize,
    pub hidden: usize,
}

impl Default for Widths {
    fn default() -> Self {
        Widths { embed: 32, hidden: 64 }
    }
}

pub struct RunSpec {
    pub paradigm: Paradigm,
    /// Initial actor, such as a behavior-cloned policy.
    pub init: Option<Network>,
    pub widths: Widths,
    pub teams: Vec<Arc<TeamConfig>>,
    pub team_set: String,
    pub options: GameOptions,
    pub hyper: Hyperparameters,
    pub seed: u64,
    /// Learner steps between pool snapshots; defaults to ten updates.
    pub snapshot_every: Option<u64>,
    pub pool_cap: usize,
    /// Evaluation games per new pool pair (double oracle only).
    pub eval_games: u64,
    /// Train against this frozen policy instead of the paradigm's sampler.
    pub fixed_opponent: Option<Arc<dyn Policy>>,
    pub run_dir: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(paradigm: Paradigm, teams: Vec<Arc<TeamConfig>>, hyper: Hyperparameters, seed: u64) -> RunSpec {
        RunSpec {
            paradigm,
            init: None,
            widths: Widths::default(),
            teams,
            team_set: "custom".into(),
            options: GameOptions::default(),
            hyper,
            seed,
            snapshot_every: None,
            pool_cap: 32,
            eval_games: 100,
            fixed_opponent: None,
            run_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub update: u64,
    pub step: u64,
    pub pool_size: usize,
    pub win_rate: f64,
    #[serde(flatten)]
    pub diagnostics: PpoDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incident: Option<String>,
}

pub struct TrainOutput {
    pub pool: CheckpointPool,
    pub actor: Network,
    pub critic: Network,
    pub metrics: Vec<UpdateMetrics>,
}

/// Opponent weights for double oracle: the Nash row strategy of the pool's
/// zero-sum payoffs, or uniform with an incident note if the solver fails.
pub fn do_distribution(payoff: &PayoffMatrix) -> (Vec<f64>, Option<String>) {
    let n = payoff.len();
    match solve_zero_sum_nash(&payoff.zero_sum(), 1e-6) {
        Ok(sol) => (sol.row.probs, None),
        Err(e) => (vec![1.0 / n as f64; n], Some(format!("Nash solver failed ({e}); sampling uniformly"))),
    }
}

#[derive(Serialize)]
struct ConfigSnapshot<'a> {
    paradigm: Paradigm,
    init: &'a str,
    widths: Widths,
    team_set: &'a str,
    n_teams: usize,
    options: &'a GameOptions,
    hyper: &'a Hyperparameters,
    seed: u64,
    snapshot_every: u64,
    pool_cap: usize,
    eval_games: u64,
    fixed_opponent: Option<String>,
}

pub fn run_paradigm(spec: &RunSpec) -> Result<TrainOutput, LearnError> {
    run_paradigm_with(spec, |_, _| {})
}

/// Alternate rollouts and PPO updates until `total_timesteps` learner steps.
/// `on_update` sees each update's metrics and the updated actor.
pub fn run_paradigm_with(spec: &RunSpec, mut on_update: impl FnMut(&UpdateMetrics, &Network)) -> Result<TrainOutput, LearnError> {
    let h = &spec.hyper;
    h.validate()?;
    if spec.teams.is_empty() {
        return Err(LearnError::Data("empty team set".into()));
    }
    let nf = spec.options.n_frames;
    let mut actor = match &spec.init {
        Some(net) => {
            if net.arch.rows() != nf * crate::game::observe::ROWS_PER_FRAME {
                return Err(LearnError::Hyper("initial network frame count differs from the game options".into()));
            }
            net.clone()
        }
        None => Network::init(Arch::actor(nf, spec.widths.embed, spec.widths.hidden), seeds::derive(spec.seed, 1)),
    };
    let mut critic = Network::init(Arch::critic(nf, actor.arch.embed, actor.arch.hidden), seeds::derive(spec.seed, 2));
    let mut opt = Optimizers::new(&actor, &critic, h.learning_rate);
    let teams = TeamSampler::new(spec.teams.clone(), spec.options.clone());
    let snapshot_every = spec.snapshot_every.unwrap_or(h.steps_per_update as u64 * 10).max(1);
    let init_label = if spec.init.is_some() { "bc" } else { "random" };
    let label = format!("{}{}", if spec.init.is_some() { "bc" } else { "" }, format!("{:?}", spec.paradigm).to_lowercase());
    let mut pool = CheckpointPool::new(
        Provenance { paradigm: label.clone(), init: init_label.into(), seed: spec.seed, team_set: spec.team_set.clone() },
        spec.pool_cap,
    );

    let mut metrics_file = None;
    if let Some(dir) = &spec.run_dir {
        std::fs::create_dir_all(dir.join("checkpoints"))?;
        let snap = ConfigSnapshot {
            paradigm: spec.paradigm,
            init: init_label,
            widths: Widths { embed: actor.arch.embed, hidden: actor.arch.hidden },
            team_set: &spec.team_set,
            n_teams: spec.teams.len(),
            options: &spec.options,
            hyper: h,
            seed: spec.seed,
            snapshot_every,
            pool_cap: spec.pool_cap,
            eval_games: spec.eval_games,
            fixed_opponent: spec.fixed_opponent.as_ref().map(|p| p.name()),
        };
        std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&snap)?)?;
        metrics_file = Some(std::fs::File::create(dir.join("metrics.jsonl"))?);
    }

    let mut policies: Vec<Arc<dyn Policy>> = Vec::new();
    let mut do_weights: Vec<f64> = Vec::new();
    let mut incident: Option<String> = None;
    let mut step = 0u64;
    let snapshot = |pool: &mut CheckpointPool,
                        policies: &mut Vec<Arc<dyn Policy>>,
                        do_weights: &mut Vec<f64>,
                        incident: &mut Option<String>,
                        net: &Network,
                        step: u64|
     -> Result<(), LearnError> {
        let removed = pool.push(step, net.clone());
        let pol: Arc<dyn Policy> = Arc::new(NetworkPolicy::new(net.clone(), CheckpointPool::id_of(step)));
        policies.push(pol);
        if let Some(r) = removed {
            policies.remove(r);
        }
        if let Some(dir) = &spec.run_dir {
            Checkpoint::new(net.clone(), step).save(&dir.join("checkpoints").join(format!("step_{step:010}.ckpt")))?;
        }
        if spec.paradigm == Paradigm::Do {
            let new = pool.len() - 1;
            for j in 0..new {
                let draw = |gs| uniform_pair(&teams.teams, &teams.options, gs);
                let wins = head_to_head(
                    policies[new].as_ref(),
                    policies[j].as_ref(),
                    draw,
                    spec.eval_games,
                    seeds::derive(spec.seed, 0xd0 ^ step),
                    &teams.options,
                )?;
                pool.set_payoff(new, j, wins / spec.eval_games.max(1) as f64, spec.eval_games);
            }
            let (w, inc) = do_distribution(&pool.payoff);
            *do_weights = w;
            *incident = inc;
        }
        if let Some(dir) = &spec.run_dir {
            std::fs::write(dir.join("payoff.txt"), pool.payoff.to_text())?;
        }
        Ok(())
    };
    snapshot(&mut pool, &mut policies, &mut do_weights, &mut incident, &actor, 0)?;

    let mut metrics = Vec::new();
    let mut update = 0u64;
    while step < h.total_timesteps {
        let sampler = match (&spec.fixed_opponent, spec.paradigm) {
            (Some(p), _) => OpponentSampler::fixed(p.clone()),
            (None, Paradigm::Sp) => OpponentSampler::self_play(),
            (None, Paradigm::Fp) => OpponentSampler::uniform(policies.clone()),
            (None, Paradigm::Do) => OpponentSampler::weighted(policies.clone(), do_weights.clone()),
        };
        let n = (h.steps_per_update as u64).min(h.total_timesteps - step) as usize;
        let batch = collect_rollouts(&actor, &critic, &sampler, &teams, n, seeds::derive(spec.seed, 1000 + update))?;
        let diag = ppo_update(&mut actor, &mut critic, &mut opt, &batch, h, seeds::derive(spec.seed, 2000 + update), update)?;
        let before = step;
        step += batch.len() as u64;
        let m = UpdateMetrics {
            update,
            step,
            pool_size: pool.len(),
            win_rate: batch.win_rate(),
            diagnostics: diag,
            incident: incident.take(),
        };
        if let Some(f) = metrics_file.as_mut() {
            writeln!(f, "{}", serde_json::to_string(&m)?)?;
        }
        on_update(&m, &actor);
        metrics.push(m);
        if before / snapshot_every != step / snapshot_every && step < h.total_timesteps {
            snapshot(&mut pool, &mut policies, &mut do_weights, &mut incident, &actor, step)?;
        }
        update += 1;
    }
    if pool.members.last().map(|m| m.step) != Some(step) {
        snapshot(&mut pool, &mut policies, &mut do_weights, &mut incident, &actor, step)?;
    }
    pool.output = Some(pool.len() - 1);
    if let Some(dir) = &spec.run_dir {
        Checkpoint::new(critic.clone(), step).save(&dir.join("critic.ckpt"))?;
        Checkpoint::new(actor.clone(), step).save(&dir.join("output.ckpt"))?;
    }
    Ok(TrainOutput { pool, actor, critic, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::teams;

    #[test]
    fn double_oracle_weights_on_dominant_member() {
        let m = PayoffMatrix::from_rows(vec!["a".into(), "b".into()], vec![vec![0.5, 0.9], vec![0.1, 0.5]]).unwrap();
        let (w, inc) = do_distribution(&m);
        assert!(inc.is_none());
        assert!((w[0] - 1.0).abs() < 1e-9 && w[1].abs() < 1e-9);
    }

    #[test]
    fn bc_init_is_step_zero_member() {
        let init = Network::init(Arch::actor(1, 4, 4), 9);
        let hyper = Hyperparameters { steps_per_update: 32, total_timesteps: 64, n_epochs: 1, ..Hyperparameters::default() };
        let mut spec = RunSpec::new(Paradigm::Fp, vec![Arc::new(teams::bundled()[0].clone())], hyper, 3);
        spec.init = Some(init.clone());
        let out = run_paradigm(&spec).unwrap();
        assert_eq!(out.pool.members[0].network, init);
        assert_eq!(out.pool.output, Some(out.pool.len() - 1));
        assert_eq!(out.metrics.len(), 2);
        assert_eq!(out.pool.provenance.paradigm, "bcfp");
    }
}
