//! Simultaneous-move doubles battle engine.
//!
//! All state changes go through [`state::BattleState::apply_event`]; the
//! engine produces events and the replay module re-applies them.

pub mod action;
pub mod config;
pub mod data;
pub mod engine;
pub mod events;
pub mod observe;
pub mod state;
pub mod stats;
pub mod teams;

use thiserror::Error;

pub use action::{ActionMask, DecodedAction, Gimmick, JointAction, SlotAction, Target, NUM_ACTIONS};
pub use config::{Gender, PokemonConfig, StatAllocation, TeamConfig, TeamId};
pub use data::{MoveId, Ruleset, SpeciesId, Type};
pub use engine::{start_battle, start_position, StepOutcome};
pub use events::{Event, MonRef, Player, Position, Slot, WinReason};
pub use observe::{Observation, ObservationStack, PlayerView, SparseTensor};
pub use state::{BattleState, GameOptions, Phase};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("rule data error: {0}")]
    Data(String),
    #[error("illegal action for {player} slot {slot}: index {index}: {reason}")]
    IllegalAction {
        player: Player,
        slot: Slot,
        index: i16,
        reason: String,
    },
    #[error("action index {0} is outside the action space")]
    Decode(i16),
    #[error("invalid state: {0}")]
    State(String),
}
