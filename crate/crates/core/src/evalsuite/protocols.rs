//! Performance and generalization tests over trained agents.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agents::Policy;
use crate::game::{GameOptions, TeamConfig, TeamId};
use crate::metagame::{estimate_crossplay, CrossplaySpec, PayoffMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Performance,
    Generalization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub id: String,
    pub paradigm: String,
    pub team_set_size: usize,
    pub seed: u64,
}

/// An agent together with the teams it trained on.
#[derive(Clone)]
pub struct EvalAgent {
    pub info: AgentInfo,
    pub policy: Arc<dyn Policy>,
    pub train_teams: Vec<Arc<TeamConfig>>,
}

/// Result of a protocol run. Only the protocol functions construct it, after
/// checking the team-set constraint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    protocol: Protocol,
    agents: Vec<AgentInfo>,
    eval_teams: Vec<TeamId>,
    matrix: PayoffMatrix,
    halfwidth: Vec<Vec<f64>>,
    n_games: u64,
}

impl EvalReport {
    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn agents(&self) -> &[AgentInfo] {
        &self.agents
    }

    pub fn eval_teams(&self) -> &[TeamId] {
        &self.eval_teams
    }

    pub fn matrix(&self) -> &PayoffMatrix {
        &self.matrix
    }

    pub fn halfwidth(&self) -> &[Vec<f64>] {
        &self.halfwidth
    }

    /// Row agent's win rate against column agent with its halfwidth.
    pub fn entry(&self, i: usize, j: usize) -> (f64, f64) {
        (self.matrix.win[i][j], self.halfwidth[i][j])
    }

    pub fn to_table(&self) -> String {
        let title = match self.protocol {
            Protocol::Performance => "Performance Test",
            Protocol::Generalization => "Generalization Test",
        };
        let w = self.agents.iter().map(|a| a.id.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{title} ({} evaluation teams, {} games per pair)\n{:<w$}", self.eval_teams.len(), self.n_games, "");
        for a in &self.agents {
            s += &format!("  {:>15}", a.id);
        }
        s += "\n";
        for (i, a) in self.agents.iter().enumerate() {
            s += &format!("{:<w$}", a.id);
            for j in 0..self.agents.len() {
                if i == j {
                    s += &format!("  {:>15}", "-");
                } else {
                    let (p, h) = self.entry(i, j);
                    s += &format!("  {:>15}", format!("{p:.3} ± {h:.3}"));
                }
            }
            s += "\n";
        }
        s
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn crossplay(
    protocol: Protocol,
    agents: &[EvalAgent],
    teams: Vec<Arc<TeamConfig>>,
    n_games: u64,
    seed: u64,
    options: &GameOptions,
) -> Result<EvalReport, EvalError> {
    let pool: Vec<&dyn Policy> = agents.iter().map(|a| a.policy.as_ref()).collect();
    let eval_teams = teams.iter().map(|t| t.id().clone()).collect();
    let spec = CrossplaySpec { teams, n_games, seed, options: options.clone() };
    let mut cp = estimate_crossplay(&pool, &spec)?;
    cp.matrix.ids = agents.iter().map(|a| a.info.id.clone()).collect();
    Ok(EvalReport {
        protocol,
        agents: agents.iter().map(|a| a.info.clone()).collect(),
        eval_teams,
        matrix: cp.matrix,
        halfwidth: cp.halfwidth,
        n_games,
    })
}

/// Cross-play restricted to the teams every agent trained on.
pub fn performance_test(agents: &[EvalAgent], n_games: u64, seed: u64, options: &GameOptions) -> Result<EvalReport, EvalError> {
    let Some(first) = agents.first() else {
        return Err(EvalError::Protocol("no agents".into()));
    };
    let common: Vec<Arc<TeamConfig>> = first
        .train_teams
        .iter()
        .filter(|t| agents.iter().all(|a| a.train_teams.iter().any(|u| u.id() == t.id())))
        .cloned()
        .collect();
    if common.is_empty() {
        return Err(EvalError::Protocol("the agents' training team sets have an empty intersection".into()));
    }
    crossplay(Protocol::Performance, agents, common, n_games, seed, options)
}

/// Cross-play on held-out teams that no agent trained on.
pub fn generalization_test(
    agents: &[EvalAgent],
    held_out: &[Arc<TeamConfig>],
    n_games: u64,
    seed: u64,
    options: &GameOptions,
) -> Result<EvalReport, EvalError> {
    if agents.is_empty() {
        return Err(EvalError::Protocol("no agents".into()));
    }
    if held_out.is_empty() {
        return Err(EvalError::Protocol("empty held-out team set".into()));
    }
    let seen: BTreeSet<&TeamId> = agents.iter().flat_map(|a| a.train_teams.iter().map(|t| t.id())).collect();
    let overlap: Vec<String> = held_out.iter().filter(|t| seen.contains(t.id())).map(|t| t.id().to_string()).collect();
    if !overlap.is_empty() {
        return Err(EvalError::Protocol(format!("held-out teams were seen in training: {}", overlap.join(", "))));
    }
    crossplay(Protocol::Generalization, agents, held_out.to_vec(), n_games, seed, options)
}
