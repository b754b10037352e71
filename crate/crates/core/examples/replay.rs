//! Write battle logs, parse them back, export a cloning dataset and fuzz the
//! parser with corrupted copies.

use std::sync::Arc;

use arena::agents::{play_game, MaxBasePowerPlayer, RandomPlayer};
use arena::game::{teams, GameOptions};
use arena::replay::fuzz::fuzz_logs;
use arena::replay::reader::to_dataset;
use arena::replay::{parse_log, write_log, Filters, PlayerInfo};

fn main() {
    let t = teams::bundled();
    let pair = [Arc::new(t[0].clone()), Arc::new(t[2].clone())];
    let opts = GameOptions::default();
    let players = [PlayerInfo::new("mbp", Some(1600)), PlayerInfo::new("random", Some(1200))];
    let mut logs = Vec::new();
    let mut parsed = Vec::new();
    for seed in 0..20 {
        let rec = play_game(&MaxBasePowerPlayer, &RandomPlayer, pair.clone(), opts.clone(), seed).expect("game runs");
        let text = write_log(&rec, &pair, &opts, &players, true).expect("log writes");
        let log = parse_log(&text).expect("own logs parse");
        assert_eq!(log.actions, rec.actions, "actions round-trip");
        logs.push(text);
        parsed.push(log);
    }
    println!("20 logs round-trip exactly");
    let all = to_dataset(&parsed, &Filters::default());
    let strong = to_dataset(&parsed, &Filters { min_rating: Some(1500), winner_only: true });
    println!("dataset: {} samples, {} from winners rated 1500+", all.len(), strong.len());
    let report = fuzz_logs(&logs, 0.05, 20, 7);
    println!("fuzz: {report:?}");
}
