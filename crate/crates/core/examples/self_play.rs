//! Train a self-play agent on one team and report win rates against the
//! scripted baselines.
//!
//! Usage: `cargo run --release --example self_play -- [timesteps] [seed]`

use std::sync::Arc;
use std::time::Instant;

use arena::agents::{MaxBasePowerPlayer, NetworkPolicy, Policy, RandomPlayer};
use arena::game::{teams, GameOptions};
use arena::learn::paradigm::run_paradigm_with;
use arena::learn::{Hyperparameters, Paradigm, RunSpec};
use arena::metagame::crossplay::head_to_head;

fn main() {
    let mut args = std::env::args().skip(1);
    let total: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let team = Arc::new(teams::bundled()[0].clone());
    let hyper = Hyperparameters { learning_rate: 3e-4, total_timesteps: total, n_epochs: 4, ..Hyperparameters::default() };
    let spec = RunSpec::new(Paradigm::Sp, vec![team.clone()], hyper, seed);
    let start = Instant::now();
    let out = run_paradigm_with(&spec, |m, _| {
        println!(
            "update {:>3} step {:>7} entropy {:.3} kl {:.4} value {:.3} ({:.0?})",
            m.update, m.step, m.diagnostics.entropy, m.diagnostics.approx_kl, m.diagnostics.value_loss, start.elapsed()
        )
    })
    .expect("training runs");
    let agent = NetworkPolicy::new(out.actor, "sp");
    let opts = GameOptions::default();
    let draw = |_| Ok([team.clone(), team.clone()]);
    for (name, opp) in [("random", &RandomPlayer as &dyn Policy), ("max-power", &MaxBasePowerPlayer)] {
        let w = head_to_head(&agent, opp, draw, 1000, 77, &opts).expect("games run");
        println!("self-play vs {name}: {:.3}", w / 1000.0);
    }
    println!("total {:.1?}", start.elapsed());
}
