//! The 107-index per-slot action space and joint actions.
//!
//! | index     | meaning                               |
//! |-----------|---------------------------------------|
//! | -2        | default (engine picks)                |
//! | -1        | forfeit                               |
//! | 0         | pass                                  |
//! | 1..=6     | switch to team member 1..=6           |
//! | 7..=106   | move × target, one block of 20 per gimmick |
//!
//! Inside a gimmick block, move `m` (1-based) and target offset `t` map to
//! `7 + 20*gimmick + 5*(m-1) + t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::GameError;

pub const NUM_ACTIONS: usize = 107;
pub const MOVE_BASE: i16 = 7;
pub const TERA_BASE: i16 = 87;

/// Target offsets within a move's block of five.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    /// Own slot a.
    OwnA,
    /// Own slot b.
    OwnB,
    NoTarget,
    FoeA,
    FoeB,
}

impl Target {
    pub const ALL: [Target; 5] = [Target::OwnA, Target::OwnB, Target::NoTarget, Target::FoeA, Target::FoeB];

    pub fn offset(self) -> i16 {
        self as i16
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gimmick {
    None,
    Mega,
    ZMove,
    Dynamax,
    Tera,
}

impl Gimmick {
    pub const ALL: [Gimmick; 5] = [Gimmick::None, Gimmick::Mega, Gimmick::ZMove, Gimmick::Dynamax, Gimmick::Tera];
}

/// Structured form of a slot action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodedAction {
    Default,
    Forfeit,
    Pass,
    /// Team member, 1-based.
    Switch(u8),
    Move {
        /// Move slot, 1-based.
        slot: u8,
        target: Target,
        gimmick: Gimmick,
    },
}

/// One slot's action index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotAction(pub i16);

impl SlotAction {
    pub const DEFAULT: SlotAction = SlotAction(-2);
    pub const FORFEIT: SlotAction = SlotAction(-1);
    pub const PASS: SlotAction = SlotAction(0);

    pub fn switch(member: u8) -> SlotAction {
        encode_action(DecodedAction::Switch(member))
    }

    pub fn mv(slot: u8, target: Target, tera: bool) -> SlotAction {
        let gimmick = if tera { Gimmick::Tera } else { Gimmick::None };
        encode_action(DecodedAction::Move { slot, target, gimmick })
    }

    pub fn decode(self) -> Result<DecodedAction, GameError> {
        decode_action(self.0)
    }

    /// Index into a 107-entry mask, if this is a regular action.
    pub fn mask_index(self) -> Option<usize> {
        (0..NUM_ACTIONS as i16).contains(&self.0).then_some(self.0 as usize)
    }

    pub fn switch_target(self) -> Option<u8> {
        (1..=6).contains(&self.0).then_some(self.0 as u8)
    }
}

impl fmt::Display for SlotAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn encode_action(action: DecodedAction) -> SlotAction {
    SlotAction(match action {
        DecodedAction::Default => -2,
        DecodedAction::Forfeit => -1,
        DecodedAction::Pass => 0,
        DecodedAction::Switch(m) => {
            debug_assert!((1..=6).contains(&m));
            m as i16
        }
        DecodedAction::Move { slot, target, gimmick } => {
            debug_assert!((1..=4).contains(&slot));
            MOVE_BASE + 20 * gimmick as i16 + 5 * (slot as i16 - 1) + target.offset()
        }
    })
}

pub fn decode_action(index: i16) -> Result<DecodedAction, GameError> {
    Ok(match index {
        -2 => DecodedAction::Default,
        -1 => DecodedAction::Forfeit,
        0 => DecodedAction::Pass,
        1..=6 => DecodedAction::Switch(index as u8),
        7..=106 => {
            let k = index - MOVE_BASE;
            DecodedAction::Move {
                slot: ((k % 20) / 5 + 1) as u8,
                target: Target::ALL[(k % 5) as usize],
                gimmick: Gimmick::ALL[(k / 20) as usize],
            }
        }
        _ => return Err(GameError::Decode(index)),
    })
}

/// The pair of slot actions a player commits in one decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointAction {
    pub a: SlotAction,
    pub b: SlotAction,
}

impl JointAction {
    pub fn new(a: SlotAction, b: SlotAction) -> JointAction {
        JointAction { a, b }
    }

    pub fn slots(&self) -> [SlotAction; 2] {
        [self.a, self.b]
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Boolean legality mask over the 107 regular indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionMask(#[serde(with = "mask_bits")] pub [bool; NUM_ACTIONS]);

impl ActionMask {
    pub const NONE: ActionMask = ActionMask([false; NUM_ACTIONS]);

    pub fn allows(&self, action: SlotAction) -> bool {
        action.mask_index().is_some_and(|i| self.0[i])
    }

    pub fn set(&mut self, action: SlotAction) {
        if let Some(i) = action.mask_index() {
            self.0[i] = true;
        }
    }

    pub fn legal(&self) -> impl Iterator<Item = SlotAction> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &ok)| ok)
            .map(|(i, _)| SlotAction(i as i16))
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Debug for ActionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.legal().map(|a| a.0)).finish()
    }
}

mod mask_bits {
    use super::NUM_ACTIONS;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mask: &[bool; NUM_ACTIONS], s: S) -> Result<S::Ok, S::Error> {
        let text: String = mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[bool; NUM_ACTIONS], D::Error> {
        let text = String::deserialize(d)?;
        if text.len() != NUM_ACTIONS {
            return Err(serde::de::Error::custom("mask must have 107 cells"));
        }
        let mut out = [false; NUM_ACTIONS];
        for (i, c) in text.chars().enumerate() {
            out[i] = match c {
                '1' => true,
                '0' => false,
                _ => return Err(serde::de::Error::custom("mask cells are 0 or 1")),
            };
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        assert_eq!(decode_action(0).unwrap(), DecodedAction::Pass);
        assert_eq!(decode_action(-1).unwrap(), DecodedAction::Forfeit);
        assert_eq!(decode_action(-2).unwrap(), DecodedAction::Default);
        assert_eq!(SlotAction::mv(1, Target::OwnA, true).0, 87);
        assert_eq!(SlotAction::mv(4, Target::FoeB, true).0, 106);
        assert_eq!(SlotAction::mv(1, Target::OwnA, false).0, 7);
        assert_eq!(SlotAction::mv(2, Target::OwnA, false).0, 12);
        assert_eq!(
            encode_action(DecodedAction::Move { slot: 1, target: Target::OwnA, gimmick: Gimmick::Mega }).0,
            27
        );
        assert_eq!(
            encode_action(DecodedAction::Move { slot: 4, target: Target::FoeB, gimmick: Gimmick::Dynamax }).0,
            86
        );
    }

    #[test]
    fn bijection_over_all_indices() {
        for i in -2..NUM_ACTIONS as i16 {
            assert_eq!(encode_action(decode_action(i).unwrap()).0, i);
        }
        assert!(decode_action(107).is_err());
        assert!(decode_action(-3).is_err());
    }

    #[test]
    fn mask_serde_round_trip() {
        let mut m = ActionMask::NONE;
        m.set(SlotAction(3));
        m.set(SlotAction(90));
        let json = serde_json::to_string(&m).unwrap();
        let back: ActionMask = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert_eq!(back.legal().map(|a| a.0).collect::<Vec<_>>(), vec![3, 90]);
    }
}
