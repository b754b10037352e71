//! Live match service: JSON messages over WebSocket, one battle owner per
//! session, commit/reveal turn resolution.
//!
//! The wire contract is documented in `docs/match-protocol.md`.

pub mod client;
pub mod protocol;
pub mod server;
pub mod session;

use thiserror::Error;

pub use client::{play_remote, RemoteOutcome};
pub use protocol::{ClientMessage, ErrorCode, ServerMessage, Wire, PROTO};
pub use server::{serve, ServerHandle};
pub use session::{fixture_transcripts, record_transcript, transcript_jsonl, Session, SessionConfig, TranscriptLine};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("websocket error: {0}")]
    WebSocket(#[from] tungstenite::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
    #[error(transparent)]
    Replay(#[from] crate::replay::ReplayError),
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::protocol::Score;
    use super::session::mask_events;
    use super::*;
    use crate::agents::RandomPlayer;
    use crate::game::{teams, Event, Player};
    use crate::replay::parse_log;

    fn session(games: u32) -> Session {
        let t = teams::bundled();
        let mut cfg = SessionConfig::new(Arc::new(t[0].clone()), Arc::new(t[1].clone()));
        cfg.games = games;
        cfg.seed = 11;
        Session::new(cfg, Arc::new(RandomPlayer), "t0")
    }

    fn choose(msgs: &[ServerMessage]) -> Option<(u32, u64, [i16; 2])> {
        msgs.iter().rev().find_map(|m| match m {
            ServerMessage::Request { game, seq, legal, .. } => Some((*game, *seq, legal[legal.len() / 2])),
            _ => None,
        })
    }

    #[test]
    fn illegal_choice_is_reported_and_request_reissued() {
        let mut s = session(1);
        let first = s.start(None);
        let (game, seq, _) = choose(&first).unwrap();
        let out = s.handle(ClientMessage::Choose { game, seq, actions: [7, 7] });
        assert!(matches!(out[0], ServerMessage::Error { code: ErrorCode::IllegalAction, index: Some(7), .. }), "{out:?}");
        assert!(matches!(out[1], ServerMessage::Request { .. }));
        let out = s.handle_text("{not json");
        assert!(matches!(out[0], ServerMessage::Error { code: ErrorCode::Malformed, .. }));
        let out = s.handle_text(r#"{"proto":9,"type":"hello"}"#);
        assert!(matches!(out[0], ServerMessage::Error { code: ErrorCode::Version, .. }));
        let out = s.handle(ClientMessage::Choose { game, seq: seq + 5, actions: [1, 2] });
        assert!(matches!(out[0], ServerMessage::Error { code: ErrorCode::StaleChoice, .. }));
    }

    #[test]
    fn reveals_follow_both_commits_and_match_the_log() {
        let mut s = session(2);
        let mut transcript = s.start(None);
        while !s.is_finished() {
            let (game, seq, a) = choose(&transcript).unwrap();
            transcript.extend(s.handle(ClientMessage::Choose { game, seq, actions: a }));
        }
        let mut commits: Vec<(u32, u64, Player)> = Vec::new();
        let mut revealed = vec![Vec::new(), Vec::new()];
        for m in &transcript {
            match m {
                ServerMessage::Commit { game, seq, player, .. } => commits.push((*game, *seq, *player)),
                ServerMessage::Reveal { game, seq, events } => {
                    if !(*seq == 0 && commits.iter().all(|c| c.0 != *game)) {
                        for p in Player::BOTH {
                            assert!(commits.contains(&(*game, *seq, p)), "reveal {game}/{seq} before {p} committed");
                        }
                    }
                    revealed[*game as usize].extend(events.iter().cloned());
                }
                _ => {}
            }
        }
        assert_eq!(s.logs().len(), 2);
        for (g, log) in s.logs().iter().enumerate() {
            let parsed = parse_log(log).unwrap();
            let to_percent = |es: &[Event]| mask_events(&mask_events(es, Player::P1), Player::P2);
            assert_eq!(to_percent(&revealed[g]), parsed.events);
        }
        let Score { client, agent, draws } = s.score();
        assert_eq!(client + agent + draws, 2);
    }

    #[test]
    fn wire_format_is_tagged_and_versioned() {
        let m = Wire::new(ClientMessage::Choose { game: 0, seq: 3, actions: [1, 2] }).to_json();
        assert_eq!(m, r#"{"proto":1,"type":"choose","game":0,"seq":3,"actions":[1,2]}"#);
        assert_eq!(protocol::parse_client(&m).unwrap(), ClientMessage::Choose { game: 0, seq: 3, actions: [1, 2] });
        assert!(protocol::parse_client(r#"{"proto":1,"type":"choose","game":0,"seq":3,"actions":[1,2],"x":1}"#).is_err());
    }
}
