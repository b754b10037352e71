//! Train an exploiter against a frozen random agent and print the curve.
//!
//! Usage: `cargo run --release --example exploit -- [updates]`

use std::sync::Arc;

use arena::agents::RandomPlayer;
use arena::evalsuite::{exploitability, ExploitConfig};
use arena::game::teams;
use arena::learn::Hyperparameters;

fn main() {
    let updates: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let hyper = Hyperparameters { learning_rate: 3e-4, n_epochs: 4, ..Hyperparameters::default() };
    let cfg = ExploitConfig { hyper, updates, eval_every: 5, eval_games: 200, ..ExploitConfig::default() };
    let team = vec![Arc::new(teams::bundled()[0].clone())];
    let curve = exploitability(Arc::new(RandomPlayer), &team, None, &cfg).expect("exploiter trains");
    print!("{}", curve.to_table("Exploiter vs random"));
    println!("exploitability {:.3} ± {:.3}", curve.exploitability(), curve.halfwidth());
}
