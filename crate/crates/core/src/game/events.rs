//! Battle events. Every state change is expressed as one of these.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::data::{Ability, BoostStat, Field, Item, MoveId, SideCondition, Status, Type, Weather};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::P1, Player::P2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Player::P1 => "p1",
            Player::P2 => "p2",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Player> {
        match tag {
            "p1" => Some(Player::P1),
            "p2" => Some(Player::P2),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

impl Slot {
    pub const BOTH: [Slot; 2] = [Slot::A, Slot::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Slot {
        match self {
            Slot::A => Slot::B,
            Slot::B => Slot::A,
        }
    }

    pub fn tag(self) -> char {
        match self {
            Slot::A => 'a',
            Slot::B => 'b',
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// A field position such as `p2a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub player: Player,
    pub slot: Slot,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.player, self.slot)
    }
}

/// A team member, referenced by player and 0-based team index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonRef {
    pub player: Player,
    pub member: u8,
}

impl MonRef {
    pub fn new(player: Player, member: u8) -> MonRef {
        MonRef { player, member }
    }
}

impl fmt::Display for MonRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.player, self.member + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PickStage {
    Leads,
    Back,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CantReason {
    Paralysis,
    Flinch,
    /// The user fainted before its turn to act.
    Fainted,
    /// The battle ended before the user's turn to act.
    Ended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HpCause {
    Move,
    Burn,
    Poison,
    LifeOrb,
    Leftovers,
    Sitrus,
    Recover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WinReason {
    Elimination,
    TurnCap,
    Forfeit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    /// Team-preview choice of two members (0-based).
    Pick { player: Player, stage: PickStage, members: [u8; 2] },
    Switch { player: Player, slot: Slot, member: u8 },
    AbilityShown { mon: MonRef, ability: Ability },
    Terastallize { mon: MonRef, tera: Type },
    /// A move is used. `target` is the chosen position for single-target moves.
    Move { mon: MonRef, move_id: MoveId, target: Option<Position> },
    /// A chosen move is not executed. Keeps the choice so logs record every action.
    Cant { mon: MonRef, reason: CantReason, move_id: MoveId, target: Option<Position> },
    Fail { mon: MonRef },
    Miss { target: MonRef },
    Immune { target: MonRef },
    Protected { target: MonRef },
    ProtectUp { mon: MonRef },
    Crit { target: MonRef },
    SuperEffective { target: MonRef },
    Resisted { target: MonRef },
    Damage { mon: MonRef, hp: u16, max_hp: u16, cause: HpCause },
    Heal { mon: MonRef, hp: u16, max_hp: u16, cause: HpCause },
    Status { mon: MonRef, status: Status },
    Boost { mon: MonRef, stat: BoostStat, stages: i8 },
    Flinch { mon: MonRef },
    Weather { weather: Weather, turns: u8 },
    Field { field: Field, turns: u8 },
    FieldEnd { field: Field },
    SideStart { player: Player, condition: SideCondition, turns: u8 },
    ItemEnd { mon: MonRef, item: Item },
    Faint { mon: MonRef },
    /// End-of-turn bookkeeping: timers tick, per-turn flags clear, turn advances.
    Upkeep,
    Win { winner: Player, reason: WinReason },
}
