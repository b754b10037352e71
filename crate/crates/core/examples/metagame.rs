//! Cross-play the scripted baselines, then rank them with Alpha-Rank and the
//! zero-sum Nash mixture.

use std::sync::Arc;

use arena::agents::{MaxBasePowerPlayer, Policy, RandomPlayer, SimpleHeuristicsPlayer};
use arena::game::{teams, GameOptions};
use arena::metagame::{alpha_rank, estimate_crossplay, solve_zero_sum_nash, AlphaRankParams, CrossplaySpec, Ranking};

fn main() {
    let games: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let sh = SimpleHeuristicsPlayer::default();
    let pool: [&dyn Policy; 3] = [&RandomPlayer, &MaxBasePowerPlayer, &sh];
    let spec = CrossplaySpec {
        teams: teams::bundled().iter().cloned().map(Arc::new).collect(),
        n_games: games,
        seed: 1,
        options: GameOptions::default(),
    };
    let mut cp = estimate_crossplay(&pool, &spec).expect("cross-play runs");
    cp.matrix.ids = vec!["random".into(), "max-power".into(), "heuristic".into()];
    print!("{}", cp.matrix.to_text());
    let ar = alpha_rank(&cp.matrix, AlphaRankParams::default()).expect("chain solves");
    print!("{}", ar.ranking.to_table("Alpha-Rank"));
    let nash = solve_zero_sum_nash(&cp.matrix.zero_sum(), 1e-9).expect("LP solves");
    print!("{}", Ranking::from_scores(&cp.matrix.ids, &nash.row.probs).to_table("Nash"));
}
