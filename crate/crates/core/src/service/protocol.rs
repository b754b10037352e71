//! Message types. Every message is one JSON object with a `proto` version
//! and a `type` tag.

use serde::{Deserialize, Serialize};

use crate::game::{ActionMask, Event, Phase, Player, PlayerView, WinReason};

pub const PROTO: u32 = 1;

/// A message with its protocol version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wire<M> {
    pub proto: u32,
    #[serde(flatten)]
    pub msg: M,
}

impl<M: Serialize> Wire<M> {
    pub fn new(msg: M) -> Wire<M> {
        Wire { proto: PROTO, msg }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// Open a session, or resume one with its token.
    Hello {
        #[serde(default)]
        token: Option<String>,
        #[serde(default)]
        name: Option<String>,
    },
    /// Slot-a and slot-b action indices for decision `seq`.
    Choose { game: u32, seq: u64, actions: [i16; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not valid JSON or not a known message.
    Malformed,
    /// Wrong `proto` version.
    Version,
    /// A choice for a decision that is not pending.
    StaleChoice,
    /// The indices are outside the action space or not legal now.
    IllegalAction,
    /// Resume token not found.
    UnknownSession,
    /// The session already finished.
    SessionOver,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub client: u32,
    pub agent: u32,
    pub draws: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServerMessage {
    Hello {
        session: String,
        games: u32,
        resumed: bool,
        /// Species names indexed by species id.
        species: Vec<String>,
        /// Move names indexed by move id.
        moves: Vec<String>,
    },
    /// The client's view before decision `seq`. Contains nothing the
    /// client may not know.
    State { game: u32, seq: u64, seat: Player, snapshot: PlayerView },
    /// A decision is pending. `masks` are per-slot legality strings over the
    /// 107 action indices; `legal` lists every legal pair.
    Request {
        game: u32,
        seq: u64,
        phase: Phase,
        masks: [ActionMask; 2],
        legal: Vec<[i16; 2]>,
        /// Milliseconds left to choose; absent when untimed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        deadline_ms: Option<u64>,
    },
    /// `player` has locked in a choice for `seq`. `auto` marks a forced
    /// decision taken by the server.
    Commit { game: u32, seq: u64, player: Player, auto: bool },
    /// Result of decision `seq`, sent once both sides are committed. HP of
    /// the opponent's battlers is given in percent.
    Reveal { game: u32, seq: u64, events: Vec<Event> },
    End {
        game: u32,
        winner: Option<Player>,
        reason: Option<WinReason>,
        seat: Player,
        score: Score,
        session_over: bool,
    },
    Error {
        code: ErrorCode,
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<i16>,
    },
}

/// Parse a client message, checking the version.
pub fn parse_client(text: &str) -> Result<ClientMessage, (ErrorCode, String)> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| (ErrorCode::Malformed, e.to_string()))?;
    match value.get("proto").and_then(|v| v.as_u64()) {
        Some(p) if p == PROTO as u64 => {}
        Some(p) => return Err((ErrorCode::Version, format!("proto {p} is not supported, use {PROTO}"))),
        None => return Err((ErrorCode::Malformed, "missing `proto`".into())),
    }
    let w: Wire<ClientMessage> = serde_json::from_value(value).map_err(|e| (ErrorCode::Malformed, e.to_string()))?;
    Ok(w.msg)
}

pub fn parse_server(text: &str) -> Result<ServerMessage, serde_json::Error> {
    let w: Wire<ServerMessage> = serde_json::from_str(text)?;
    Ok(w.msg)
}
