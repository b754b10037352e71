//! Short fictitious-play and double-oracle runs; prints each pool's payoff
//! matrix and the double-oracle opponent mixture.

use std::sync::Arc;

use arena::game::teams;
use arena::learn::paradigm::do_distribution;
use arena::learn::{run_paradigm, Hyperparameters, Paradigm, RunSpec};

fn main() {
    let team = vec![Arc::new(teams::bundled()[0].clone())];
    let hyper = Hyperparameters {
        learning_rate: 3e-4,
        n_epochs: 2,
        steps_per_update: 1024,
        total_timesteps: 8192,
        ..Hyperparameters::default()
    };
    for paradigm in [Paradigm::Fp, Paradigm::Do] {
        let mut spec = RunSpec::new(paradigm, team.clone(), hyper.clone(), 5);
        spec.snapshot_every = Some(2048);
        spec.eval_games = 40;
        let out = run_paradigm(&spec).expect("training runs");
        println!("{paradigm:?}: {} pool members", out.pool.len());
        if paradigm == Paradigm::Do {
            print!("{}", out.pool.payoff.to_text());
            println!("opponent mixture {:?}", do_distribution(&out.pool.payoff).0);
        }
    }
}
