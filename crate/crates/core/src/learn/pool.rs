//! Checkpoint pools with an empirical payoff matrix over members.

use serde::{Deserialize, Serialize};

use crate::agents::Network;
use crate::metagame::PayoffMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct PoolMember {
    pub step: u64,
    pub network: Network,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub paradigm: String,
    pub init: String,
    pub seed: u64,
    pub team_set: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointPool {
    pub members: Vec<PoolMember>,
    /// Win rates between members, row against column.
    pub payoff: PayoffMatrix,
    pub provenance: Provenance,
    /// Index of the method's output policy.
    pub output: Option<usize>,
    pub cap: usize,
}

impl CheckpointPool {
    pub fn new(provenance: Provenance, cap: usize) -> CheckpointPool {
        CheckpointPool { members: Vec::new(), payoff: PayoffMatrix::new(Vec::new()), provenance, output: None, cap: cap.max(2) }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn id_of(step: u64) -> String {
        format!("step{step}")
    }

    /// Append a member with unknown payoffs (0.5 placeholders). When the cap
    /// is exceeded one interior member is removed: the one whose neighbours
    /// are closest in step, so the oldest and newest are always kept.
    /// Returns the removed index.
    pub fn push(&mut self, step: u64, network: Network) -> Option<usize> {
        self.members.push(PoolMember { step, network });
        let n = self.members.len();
        self.payoff.ids.push(Self::id_of(step));
        for row in &mut self.payoff.win {
            row.push(0.5);
        }
        for row in &mut self.payoff.games {
            row.push(0);
        }
        self.payoff.win.push(vec![0.5; n]);
        self.payoff.games.push(vec![0; n]);
        if n <= self.cap {
            return None;
        }
        let victim = (1..n - 1)
            .min_by_key(|&i| (self.members[i + 1].step - self.members[i - 1].step, i))
            .expect("cap of at least two leaves an interior member");
        self.remove(victim);
        Some(victim)
    }

    fn remove(&mut self, i: usize) {
        self.members.remove(i);
        self.payoff.ids.remove(i);
        self.payoff.win.remove(i);
        self.payoff.games.remove(i);
        for row in &mut self.payoff.win {
            row.remove(i);
        }
        for row in &mut self.payoff.games {
            row.remove(i);
        }
    }

    /// Record `rate` for row `i` against column `j` and its complement.
    pub fn set_payoff(&mut self, i: usize, j: usize, rate: f64, games: u64) {
        self.payoff.win[i][j] = rate;
        self.payoff.win[j][i] = 1.0 - rate;
        self.payoff.games[i][j] = games;
        self.payoff.games[j][i] = games;
    }

    pub fn output_network(&self) -> Option<&Network> {
        self.output.map(|i| &self.members[i].network)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Arch;

    fn prov() -> Provenance {
        Provenance { paradigm: "sp".into(), init: "random".into(), seed: 0, team_set: "t".into() }
    }

    #[test]
    fn cap_keeps_endpoints_and_square_matrix() {
        let net = Network::zeros(Arch::actor(1, 2, 2));
        let mut p = CheckpointPool::new(prov(), 4);
        for s in 0..10 {
            p.push(s * 10, net.clone());
            assert_eq!(p.payoff.win.len(), p.len());
            assert!(p.payoff.win.iter().all(|r| r.len() == p.len()));
        }
        assert_eq!(p.len(), 4);
        assert_eq!(p.members[0].step, 0);
        assert_eq!(p.members.last().unwrap().step, 90);
        p.payoff.validate().unwrap();
    }
}
