//! Play one seeded game between two scripted agents and print its log.
//!
//! Usage: `cargo run --example battle -- [seed]`

use std::sync::Arc;

use arena::agents::{play_game, MaxBasePowerPlayer, SimpleHeuristicsPlayer};
use arena::game::{teams, GameOptions};
use arena::replay::{write_log, PlayerInfo};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let t = teams::bundled();
    let pair = [Arc::new(t[0].clone()), Arc::new(t[1].clone())];
    let opts = GameOptions::default();
    let sh = SimpleHeuristicsPlayer::default();
    let rec = play_game(&sh, &MaxBasePowerPlayer, pair.clone(), opts.clone(), seed).expect("game runs");
    let players = [PlayerInfo::new("heuristic", None), PlayerInfo::new("max-power", None)];
    print!("{}", write_log(&rec, &pair, &opts, &players, true).expect("log writes"));
    println!("# winner {:?} after {} turns by {:?}", rec.winner, rec.turns, rec.reason);
}
