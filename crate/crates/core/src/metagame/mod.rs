//! Meta-game numerics over policy pools: cross-play estimation, zero-sum
//! Nash equilibria and Alpha-Rank.

pub mod alpharank;
pub mod crossplay;
pub mod matrix;
pub mod nash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alpharank::{alpha_rank, alpha_sweep, AlphaRankParams, AlphaRankResult};
pub use crossplay::{estimate_crossplay, halfwidth, Crossplay, CrossplaySpec};
pub use matrix::PayoffMatrix;
pub use nash::{solve_zero_sum_nash, NashSolution};

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("did not converge: residual {residual:e}")]
    Convergence { residual: f64, best: Vec<f64> },
    #[error("payoff matrix file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetaKind {
    Uniform,
    Nash,
    AlpharankStationary,
}

/// Distribution over the members of a policy pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaStrategy {
    pub probs: Vec<f64>,
    pub kind: MetaKind,
}

impl MetaStrategy {
    pub fn uniform(n: usize) -> MetaStrategy {
        MetaStrategy { probs: vec![1.0 / n as f64; n], kind: MetaKind::Uniform }
    }

    /// Index of the largest mass; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        self.probs.iter().enumerate().fold(0, |b, (i, &p)| if p > self.probs[b] { i } else { b })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// 1-based; tied entries share a rank.
    pub rank: usize,
    pub id: String,
    pub score: f64,
}

/// Policies ordered by descending score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

/// Scores closer than this are reported as ties.
pub const TIE_TOL: f64 = 1e-9;

impl Ranking {
    pub fn from_scores(ids: &[String], scores: &[f64]) -> Ranking {
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| {
            let (sa, sb) = (scores[a], scores[b]);
            if (sa - sb).abs() <= TIE_TOL {
                ids[a].cmp(&ids[b])
            } else {
                sb.total_cmp(&sa)
            }
        });
        let mut entries: Vec<RankEntry> = Vec::with_capacity(ids.len());
        for (pos, &i) in order.iter().enumerate() {
            let rank = match entries.last() {
                Some(prev) if (prev.score - scores[i]).abs() <= TIE_TOL => prev.rank,
                _ => pos + 1,
            };
            entries.push(RankEntry { rank, id: ids[i].clone(), score: scores[i] });
        }
        Ranking { entries }
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    /// Plain-text table in the layout of a ranking report.
    pub fn to_table(&self, title: &str) -> String {
        let w = self.entries.iter().map(|e| e.id.len()).max().unwrap_or(6).max(6);
        let mut s = format!("{title}\n{:<4}  {:<w$}  {:>10}\n", "Rank", "Policy", "Mass");
        for e in &self.entries {
            s += &format!("{:<4}  {:<w$}  {:>10.6}\n", e.rank, e.id, e.score);
        }
        s
    }
}
