//! Head-to-head win rates between the scripted baselines on the bundled teams.

use std::sync::Arc;
use std::time::Instant;

use arena::agents::{play_game, MaxBasePowerPlayer, Policy, RandomPlayer, SimpleHeuristicsPlayer};
use arena::game::{teams, GameOptions, Player};

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let t = teams::bundled();
    let team = Arc::new(t[0].clone());
    let sh = SimpleHeuristicsPlayer::default();
    let players: [(&str, &dyn Policy); 3] = [("random", &RandomPlayer), ("max-power", &MaxBasePowerPlayer), ("heuristic", &sh)];
    let start = Instant::now();
    for (i, (na, a)) in players.iter().enumerate() {
        for (nb, b) in players.iter().skip(i + 1) {
            let mut wins = 0.0;
            for g in 0..n {
                // Alternate seats to cancel any first-player effect.
                let (p1, p2, me) = if g % 2 == 0 { (*a, *b, Player::P1) } else { (*b, *a, Player::P2) };
                let rec = play_game(p1, p2, [team.clone(), team.clone()], GameOptions::default(), g).expect("game runs");
                wins += (rec.reward(me) + 1.0) / 2.0;
            }
            println!("{na:>10} vs {nb:<10} win rate {:.3}", wins / n as f64);
        }
    }
    println!("{} games in {:.2?}", 3 * n, start.elapsed());
}
