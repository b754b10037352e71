//! Battle-log round trips across many seeded games and corruption fuzzing.

use std::sync::Arc;

use proptest::prelude::*;
use rayon::prelude::*;

use arena::agents::{play_game, MaxBasePowerPlayer, Policy, RandomPlayer, SimpleHeuristicsPlayer};
use arena::game::{teams, GameOptions, TeamConfig};
use arena::replay::fuzz::fuzz_logs;
use arena::replay::{parse_log, write_log, PlayerInfo};

fn battle_log(seed: u64, sheets: bool) -> (arena::agents::GameRecord, String) {
    let t = teams::bundled();
    let pair: [Arc<TeamConfig>; 2] = [Arc::new(t[seed as usize % 4].clone()), Arc::new(t[(seed as usize / 4) % 4].clone())];
    let opts = GameOptions { skip_team_preview: seed % 5 == 0, ..GameOptions::default() };
    let sh = SimpleHeuristicsPlayer::default();
    let agents: [&dyn Policy; 3] = [&RandomPlayer, &MaxBasePowerPlayer, &sh];
    let (a, b) = (agents[seed as usize % 3], agents[(seed as usize / 3) % 3]);
    let rec = play_game(a, b, pair.clone(), opts.clone(), seed).unwrap();
    let players = [PlayerInfo::new(a.name(), Some(1000 + seed as u32)), PlayerInfo::new(b.name(), None)];
    let text = write_log(&rec, &pair, &opts, &players, sheets).unwrap();
    (rec, text)
}

#[test]
fn five_hundred_battles_round_trip_exactly() {
    let results: Vec<Result<(), String>> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let (rec, text) = battle_log(seed, true);
            let log = parse_log(&text).map_err(|e| format!("seed {seed}: {e}"))?;
            if log.actions != rec.actions {
                return Err(format!("seed {seed}: actions differ"));
            }
            if log.winner != rec.winner || log.reason != rec.reason || log.turns != rec.turns {
                return Err(format!("seed {seed}: outcome differs"));
            }
            if log.step_starts != rec.step_starts {
                return Err(format!("seed {seed}: step boundaries differ"));
            }
            Ok(())
        })
        .collect();
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn logs_without_sheets_keep_the_event_stream() {
    for seed in 0..100u64 {
        let (rec, text) = battle_log(seed, false);
        let log = parse_log(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(log.fidelity.placeholder_teams);
        assert_eq!(log.actions.len(), rec.actions.len(), "seed {seed}");
        assert_eq!((log.winner, log.turns), (rec.winner, rec.turns), "seed {seed}");
        // Switches and picks name members directly, so they survive.
        for (a, b) in log.actions.iter().zip(&rec.actions) {
            for (x, y) in a.iter().flat_map(|j| j.slots()).zip(b.iter().flat_map(|j| j.slots())) {
                if (1..=6).contains(&y.0) {
                    assert_eq!(x, y, "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn corrupted_logs_are_always_diagnosed() {
    let logs: Vec<String> = (0..60u64).map(|s| battle_log(s, s % 4 != 0).1).collect();
    let report = fuzz_logs(&logs, 0.05, 10, 3);
    assert_eq!(report.crashes, 0, "{report:?}");
    assert_eq!(report.undetected, 0, "{report:?}");
    assert!(report.all_diagnosed());
    assert_eq!(report.cases, 600);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_single_byte_flip_is_diagnosed_or_harmless(seed in 0u64..40, pos in any::<prop::sample::Index>(), byte in any::<u8>()) {
        let (rec, text) = battle_log(seed, true);
        let mut bytes = text.into_bytes();
        let i = pos.index(bytes.len());
        if bytes[i] != byte {
            bytes[i] = byte;
            match arena::replay::parse_log_bytes(&bytes) {
                // The digest covers every byte before the trailer, so any
                // accepted log must carry the original decisions.
                Ok(log) => prop_assert_eq!(log.actions, rec.actions),
                Err(e) => prop_assert!(!e.to_string().is_empty()),
            }
        }
    }
}
