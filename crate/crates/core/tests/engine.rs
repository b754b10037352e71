//! Engine properties: zero-sum outcomes, thread-count independence and legal
//! masks checked against an independent rules oracle.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use arena::agents::{play_game, GameRecord, RandomPlayer};
use arena::game::{start_battle, teams, GameOptions, JointAction, Player, SlotAction, TeamConfig};
use common::legality;

fn pair(seed: u64) -> [Arc<TeamConfig>; 2] {
    let t = teams::bundled();
    [Arc::new(t[seed as usize % 4].clone()), Arc::new(t[(seed as usize / 4) % 4].clone())]
}

fn options(seed: u64) -> GameOptions {
    GameOptions { skip_team_preview: seed % 3 == 0, ..GameOptions::default() }
}

fn game(seed: u64) -> GameRecord {
    play_game(&RandomPlayer, &RandomPlayer, pair(seed), options(seed), seed).expect("games between legal agents run")
}

#[test]
fn ten_thousand_seeded_battles_are_zero_sum() {
    let records: Vec<GameRecord> = (0..10_000u64).into_par_iter().map(game).collect();
    for (seed, r) in records.iter().enumerate() {
        assert_eq!(r.reward(Player::P1) + r.reward(Player::P2), 0.0, "seed {seed}");
        assert!([-1.0, 0.0, 1.0].contains(&r.reward(Player::P1)), "seed {seed}");
        assert!(r.reason.is_some(), "seed {seed} ended without a reason");
    }
}

#[test]
fn event_lists_do_not_depend_on_thread_count() {
    let run = |threads: usize| -> Vec<GameRecord> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| (0..400u64).into_par_iter().map(game).collect())
    };
    let one = run(1);
    let eight = run(8);
    for (a, b) in one.iter().zip(&eight) {
        assert_eq!(a.events, b.events, "seed {}", a.seed);
        assert_eq!(a.actions, b.actions, "seed {}", a.seed);
    }
}

#[test]
fn replayed_seed_is_identical() {
    for seed in [0u64, 17, 999] {
        assert_eq!(game(seed).events, game(seed).events);
    }
}

#[test]
fn legality_matches_oracle_on_two_battler_trees() {
    let nodes = legality::two_battler_trees(21);
    assert!(nodes >= 12 * 13, "visited {nodes} nodes");
}

#[test]
fn legality_matches_oracle_through_preview_and_play() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..8u64 {
        let mut s = start_battle(pair(seed), GameOptions::default(), seed).unwrap();
        let mut steps = 0;
        while !s.is_terminal() && steps < 40 {
            legality::check_node(&s);
            let a = *s.legal_joint_actions(Player::P1).choose(&mut rng).unwrap();
            let b = *s.legal_joint_actions(Player::P2).choose(&mut rng).unwrap();
            s.step(a, b).unwrap();
            steps += 1;
        }
    }
}

#[test]
fn preview_offers_ninety_decisions() {
    let s = start_battle(pair(0), GameOptions::default(), 0).unwrap();
    let leads = s.legal_joint_actions(Player::P1);
    // Ordered lead pairs; the slot order matters for play but not for the
    // set of battlers brought.
    let lead_sets: BTreeSet<[i16; 2]> = leads.iter().map(|j| { let mut v = [j.a.0, j.b.0]; v.sort(); v }).collect();
    assert_eq!(lead_sets.len(), 15);
    let mut total = 0;
    for l in &lead_sets {
        let mut c = s.clone();
        c.step(JointAction::new(SlotAction(l[0]), SlotAction(l[1])), s.legal_joint_actions(Player::P2)[0]).unwrap();
        let backs: BTreeSet<[i16; 2]> =
            c.legal_joint_actions(Player::P1).iter().map(|j| { let mut v = [j.a.0, j.b.0]; v.sort(); v }).collect();
        assert_eq!(backs.len(), 6);
        total += backs.len();
    }
    assert_eq!(total, 90);
}
