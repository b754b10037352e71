//! Performance and generalization tests on self-play agents trained with
//! different team-set sizes.
//!
//! Usage: `cargo run --release --example protocols -- [timesteps] [games]`

use std::sync::Arc;
use std::time::Instant;

use arena::agents::{NetworkPolicy, Policy};
use arena::evalsuite::{generalization_test, performance_test, AgentInfo, EvalAgent};
use arena::game::{teams, GameOptions, TeamConfig};
use arena::learn::{run_paradigm, Hyperparameters, Paradigm, RunSpec};

fn train(teams: &[Arc<TeamConfig>], total: u64, seed: u64) -> EvalAgent {
    let hyper = Hyperparameters { learning_rate: 3e-4, total_timesteps: total, n_epochs: 4, ..Hyperparameters::default() };
    let out = run_paradigm(&RunSpec::new(Paradigm::Sp, teams.to_vec(), hyper, seed)).expect("training runs");
    let id = format!("sp-{}team", teams.len());
    let policy: Arc<dyn Policy> = Arc::new(NetworkPolicy::new(out.actor, id.clone()));
    EvalAgent {
        info: AgentInfo { id, paradigm: "sp".into(), team_set_size: teams.len(), seed },
        policy,
        train_teams: teams.to_vec(),
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let total: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let games: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let start = Instant::now();
    let pool: Vec<Arc<TeamConfig>> = teams::pool(8, 0).into_iter().map(Arc::new).collect();
    let one = train(&pool[..1], total, 0);
    let four = train(&pool[..4], total, 0);
    let eight = train(&pool[..8], total, 0);
    println!("trained in {:.1?}", start.elapsed());
    let opts = GameOptions::default();
    let perf = performance_test(&[one.clone(), four], games, 11, &opts).expect("protocol holds");
    print!("{}", perf.to_table());
    let seen: Vec<TeamConfig> = pool.iter().map(|t| (**t).clone()).collect();
    let held: Vec<Arc<TeamConfig>> = teams::held_out(24, 99, &seen).into_iter().map(Arc::new).collect();
    let gen = generalization_test(&[eight, one], &held, games, 12, &opts).expect("protocol holds");
    print!("{}", gen.to_table());
    println!("total {:.1?}", start.elapsed());
}
