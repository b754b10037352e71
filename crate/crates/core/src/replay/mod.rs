//! Battle-log writer, parser and trajectory reconstruction.
//!
//! Logs are neutral-perspective, pipe-delimited text; the grammar is
//! documented in `docs/battlelog-grammar.md`. Parsing replays the logged
//! transitions through the engine's event application to rebuild states.

pub mod fuzz;
pub mod header;
pub mod line;
pub mod reader;
pub mod writer;

use thiserror::Error;

pub use header::{LogHeader, PlayerInfo};
pub use reader::{parse_log, parse_log_bytes, Fidelity, Filters, ParsedLog, Trajectory};
pub use writer::write_log;

/// File extension for battle logs.
pub const EXTENSION: &str = "battlelog";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("event {event} (line {line}): {message}")]
    Reconstruct { event: usize, line: usize, message: String },
    #[error("integrity check failed: {0}")]
    Integrity(String),
}

impl ReplayError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> ReplayError {
        ReplayError::Parse { line, column, message: message.into() }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::agents::{play_game, GameRecord, MaxBasePowerPlayer, RandomPlayer};
    use crate::game::state::hp_percent;
    use crate::game::{teams, Event, GameOptions, TeamConfig};

    fn game(seed: u64, options: &GameOptions) -> ([Arc<TeamConfig>; 2], GameRecord) {
        let t = teams::bundled();
        let pair = [Arc::new(t[0].clone()), Arc::new(t[1].clone())];
        let rec = play_game(&RandomPlayer, &MaxBasePowerPlayer, pair.clone(), options.clone(), seed).unwrap();
        (pair, rec)
    }

    fn players() -> [PlayerInfo; 2] {
        [PlayerInfo::new("alice", Some(1500)), PlayerInfo::new("b|ob", None)]
    }

    fn percent(e: &Event) -> Event {
        match *e {
            Event::Damage { mon, hp, max_hp, cause } => Event::Damage { mon, hp: hp_percent(hp, max_hp), max_hp: 100, cause },
            Event::Heal { mon, hp, max_hp, cause } => Event::Heal { mon, hp: hp_percent(hp, max_hp), max_hp: 100, cause },
            ref e => e.clone(),
        }
    }

    #[test]
    fn round_trip_recovers_actions_and_events() {
        for (seed, skip) in [(1, false), (2, true), (3, false)] {
            let options = GameOptions { skip_team_preview: skip, ..GameOptions::default() };
            let (pair, rec) = game(seed, &options);
            let text = write_log(&rec, &pair, &options, &players(), true).unwrap();
            let log = parse_log(&text).unwrap();
            assert_eq!(log.actions, rec.actions);
            assert_eq!(log.events, rec.events.iter().map(percent).collect::<Vec<_>>());
            assert_eq!(log.step_starts, rec.step_starts);
            assert_eq!(log.winner, rec.winner);
            assert_eq!(log.header.players[1].name, "b|ob");
            let markers = text.lines().filter(|l| l.starts_with("|turn|")).count();
            let framing = 4 + 2 + 12 + 1 + 1;
            assert_eq!(text.lines().count(), framing + rec.events.len() + markers);
        }
    }

    #[test]
    fn logs_without_sheets_use_placeholders() {
        let options = GameOptions::default();
        let (pair, rec) = game(4, &options);
        let text = write_log(&rec, &pair, &options, &players(), false).unwrap();
        let log = parse_log(&text).unwrap();
        assert!(log.fidelity.placeholder_teams);
        assert_eq!(log.winner, rec.winner);
        assert_eq!(log.actions.len(), rec.actions.len());
    }

    #[test]
    fn filters_select_trajectories() {
        let options = GameOptions::default();
        let (pair, rec) = game(5, &options);
        let log = parse_log(&write_log(&rec, &pair, &options, &players(), true).unwrap()).unwrap();
        let all = Filters::default();
        assert_eq!(log.selected(&all).count(), 2);
        let rated = Filters { min_rating: Some(1400), winner_only: false };
        assert_eq!(log.selected(&rated).map(|t| t.info.name.as_str()).collect::<Vec<_>>(), ["alice"]);
        let winners = Filters { min_rating: None, winner_only: true };
        assert!(log.selected(&winners).all(|t| Some(t.player) == log.winner));
        let ds = reader::to_dataset([&log], &all);
        ds.validate().unwrap();
        assert!(!ds.is_empty());
    }

    #[test]
    fn corruption_is_diagnosed_with_position() {
        let options = GameOptions::default();
        let (pair, rec) = game(6, &options);
        let text = write_log(&rec, &pair, &options, &players(), true).unwrap();
        let bad = text.replacen("|turn|1\n", "|turn|2\n", 1);
        assert!(matches!(parse_log(&bad), Err(ReplayError::Reconstruct { .. })));
        let bad = text.replacen("|start\n", "|start\n|bogus|x\n", 1);
        assert!(matches!(parse_log(&bad), Err(ReplayError::Parse { column: 2, .. })));
        let bad = text.replacen("|upkeep\n", "", 1);
        assert!(parse_log(&bad).is_err());
        let report = fuzz::fuzz_logs(&[text], 0.05, 40, 7);
        assert!(report.all_diagnosed(), "{report:?}");
    }
}
