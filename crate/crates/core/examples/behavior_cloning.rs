//! Clone the heuristic player from its own games and report held-out
//! action agreement.
//!
//! Usage: `cargo run --release --example behavior_cloning -- [train_games] [epochs]`

use std::sync::Arc;
use std::time::Instant;

use arena::agents::{Arch, Network, SimpleHeuristicsPlayer};
use arena::game::{teams, GameOptions};
use arena::learn::bc::match_rate;
use arena::learn::{bc_train, BcConfig, Dataset, TeamSampler};

fn main() {
    let mut args = std::env::args().skip(1);
    let games: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);
    let start = Instant::now();
    let ts = TeamSampler::new(vec![Arc::new(teams::bundled()[0].clone())], GameOptions::default());
    let teacher = SimpleHeuristicsPlayer::default();
    let train = Dataset::from_games(&teacher, &teacher, &ts, games, 1, true).expect("games run");
    let held_out = Dataset::from_games(&teacher, &teacher, &ts, 50, 2, true).expect("games run");
    println!("{} training and {} held-out decisions", train.len(), held_out.len());
    let cfg = BcConfig { epochs, ..BcConfig::default() };
    let (net, losses) = bc_train(&train, Network::init(Arch::actor(1, 32, 64), 0), &cfg).expect("training runs");
    for (i, l) in losses.iter().enumerate() {
        println!("epoch {:>2} loss {l:.4}", i + 1);
    }
    println!("train match {:.3}", match_rate(&net, &train.samples).unwrap());
    println!("held-out match {:.3}", match_rate(&net, &held_out.samples).unwrap());
    println!("total {:.1?}", start.elapsed());
}
