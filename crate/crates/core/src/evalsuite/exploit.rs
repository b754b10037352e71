//! Exploitability: train a best-response approximation against a frozen
//! target and track its win rate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agents::{Network, NetworkPolicy, Policy};
use crate::game::{GameOptions, TeamConfig};
use crate::learn::paradigm::{run_paradigm_with, Widths};
use crate::learn::{Hyperparameters, Paradigm, RunSpec};
use crate::metagame::crossplay::{head_to_head, uniform_pair};
use crate::metagame::halfwidth;
use crate::seeds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploitConfig {
    pub hyper: Hyperparameters,
    pub widths: Widths,
    /// Number of PPO updates; zero evaluates the initial exploiter only.
    pub updates: u64,
    pub eval_every: u64,
    pub eval_games: u64,
    pub seed: u64,
    pub options: GameOptions,
}

impl Default for ExploitConfig {
    fn default() -> Self {
        ExploitConfig {
            hyper: Hyperparameters::default(),
            widths: Widths::default(),
            updates: 20,
            eval_every: 5,
            eval_games: 200,
            seed: 0,
            options: GameOptions::default(),
        }
    }
}

/// Salt separating evaluation seeds from training seeds.
const EVAL_STREAM: u64 = 0xe7a1_0000_0000_0000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExploitCurve {
    /// (learner steps, exploiter win rate) at each evaluation.
    pub points: Vec<(u64, f64)>,
    pub eval_games: u64,
}

impl ExploitCurve {
    /// Running maximum of the curve.
    pub fn exploitability(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    pub fn halfwidth(&self) -> f64 {
        halfwidth(self.eval_games, self.exploitability())
    }

    pub fn to_table(&self, title: &str) -> String {
        let mut s = format!("{title}\n{:>10}  {:>9}  {:>9}\n", "Step", "Win rate", "Running");
        let mut best = 0.0f64;
        for &(step, w) in &self.points {
            best = best.max(w);
            s += &format!("{step:>10}  {w:>9.3}  {best:>9.3}\n");
        }
        s
    }
}

fn evaluate(exploiter: &dyn Policy, target: &dyn Policy, teams: &[Arc<TeamConfig>], cfg: &ExploitConfig) -> Result<f64, EvalError> {
    let draw = |gs| uniform_pair(teams, &cfg.options, gs);
    let seed = seeds::derive(cfg.seed, EVAL_STREAM);
    Ok(head_to_head(exploiter, target, draw, cfg.eval_games, seed, &cfg.options)? / cfg.eval_games as f64)
}

/// Train an exploiter (from `init` or randomly initialized) against the
/// frozen `target`, evaluating on fixed seeds every `eval_every` updates.
pub fn exploitability(
    target: Arc<dyn Policy>,
    teams: &[Arc<TeamConfig>],
    init: Option<Network>,
    cfg: &ExploitConfig,
) -> Result<ExploitCurve, EvalError> {
    if cfg.eval_games == 0 {
        return Err(EvalError::Protocol("eval_games must be at least 1".into()));
    }
    let hyper = Hyperparameters { total_timesteps: cfg.updates * cfg.hyper.steps_per_update as u64, ..cfg.hyper.clone() };
    let mut spec = RunSpec::new(Paradigm::Sp, teams.to_vec(), hyper, cfg.seed);
    spec.init = init;
    spec.widths = cfg.widths;
    spec.options = cfg.options.clone();
    spec.fixed_opponent = Some(target.clone());
    spec.snapshot_every = Some(u64::MAX);

    let initial = match &spec.init {
        Some(n) => n.clone(),
        None => Network::init(
            crate::agents::Arch::actor(cfg.options.n_frames, cfg.widths.embed, cfg.widths.hidden),
            seeds::derive(cfg.seed, 1),
        ),
    };
    let mut points = vec![(0, evaluate(&NetworkPolicy::new(initial, "exploiter"), target.as_ref(), teams, cfg)?)];
    if cfg.updates == 0 {
        return Ok(ExploitCurve { points, eval_games: cfg.eval_games });
    }
    let every = cfg.eval_every.max(1);
    let mut failure = None;
    run_paradigm_with(&spec, |m, actor| {
        if failure.is_some() {
            return;
        }
        if (m.update + 1) % every == 0 || m.update + 1 == cfg.updates {
            match evaluate(&NetworkPolicy::new(actor.clone(), "exploiter"), target.as_ref(), teams, cfg) {
                Ok(w) => points.push((m.step, w)),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ExploitCurve { points, eval_games: cfg.eval_games })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::teams;

    #[test]
    fn zero_budget_against_twin_is_even() {
        let net = Network::init(crate::agents::Arch::actor(1, 4, 4), seeds::derive(3, 1));
        let target: Arc<dyn Policy> = Arc::new(NetworkPolicy::new(net.clone(), "twin"));
        let cfg = ExploitConfig { updates: 0, eval_games: 200, seed: 3, widths: Widths { embed: 4, hidden: 4 }, ..ExploitConfig::default() };
        let t = vec![Arc::new(teams::bundled()[0].clone())];
        let c = exploitability(target, &t, Some(net), &cfg).unwrap();
        assert_eq!(c.points.len(), 1);
        let w = c.points[0].1;
        assert!((w - 0.5).abs() <= halfwidth(200, 0.5) * 1.5, "{w}");
    }

    #[test]
    fn reported_value_is_running_max() {
        let c = ExploitCurve { points: vec![(0, 0.4), (10, 0.8), (20, 0.7)], eval_games: 10 };
        assert_eq!(c.exploitability(), 0.8);
    }
}
