//! Battle state and the single event-application entry point.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{TeamConfig, TEAM_SIZE};
use super::data::{Ability, BoostStat, Field, Item, MoveId, Ruleset, SideCondition, Status, Type, Weather};
use super::events::{Event, MonRef, PickStage, Player, Position, Slot, WinReason};
use super::stats::{compute_stats, StatBlock};
use super::GameError;

/// Default maximum number of turns.
pub const TURN_CAP: u32 = 300;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameOptions {
    /// Apply a seeded random team preview instead of asking the players.
    pub skip_team_preview: bool,
    /// When sampling opponents, never pair a team against itself.
    pub disable_mirror_matches: bool,
    /// Both players see the full opposing configuration except stat allocations.
    pub open_team_sheets: bool,
    pub turn_cap: u32,
    /// Observation frames stacked for the learner.
    pub n_frames: usize,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            skip_team_preview: false,
            disable_mirror_matches: false,
            open_team_sheets: true,
            turn_cap: TURN_CAP,
            n_frames: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Choose the two leads.
    TeamPreview1,
    /// Choose the two back members.
    TeamPreview2,
    Turn,
    Terminal,
}

impl Phase {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonState {
    pub stats: StatBlock,
    pub hp: u16,
    pub max_hp: u16,
    pub status: Option<Status>,
    pub boosts: [i8; 7],
    pub terastallized: bool,
    pub item: Option<Item>,
    pub fainted: bool,
    /// Seen on the field by the opponent.
    pub revealed: bool,
    /// Bit `i` set once move slot `i` has been used.
    pub revealed_moves: u8,
    pub ability_revealed: bool,
    pub protect_streak: u8,
    pub protected: bool,
    pub flinched: bool,
}

impl MonState {
    pub fn boost(&self, stat: BoostStat) -> i8 {
        self.boosts[stat.index()]
    }

    pub fn hp_fraction(&self) -> f64 {
        if self.max_hp == 0 {
            0.0
        } else {
            self.hp as f64 / self.max_hp as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideState {
    /// Members brought to battle, leads first.
    pub chosen: Vec<u8>,
    pub active: [Option<u8>; 2],
    pub mons: Vec<MonState>,
    pub tera_used: bool,
    pub tailwind: u8,
    pub reflect: u8,
}

impl SideState {
    pub fn condition(&self, c: SideCondition) -> u8 {
        match c {
            SideCondition::Tailwind => self.tailwind,
            SideCondition::Reflect => self.reflect,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BattleState {
    pub(crate) options: GameOptions,
    pub(crate) teams: [Arc<TeamConfig>; 2],
    pub(crate) phase: Phase,
    pub(crate) sides: [SideState; 2],
    pub(crate) weather: Option<(Weather, u8)>,
    pub(crate) field: Option<(Field, u8)>,
    pub(crate) turn: u32,
    pub(crate) winner: Option<(Player, WinReason)>,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) opening: Vec<Event>,
}

/// HP percentage as shown to players: rounded up, never 0 for a live mon.
pub fn hp_percent(hp: u16, max_hp: u16) -> u16 {
    if hp == 0 || max_hp == 0 {
        0
    } else {
        ((100 * hp as u32).div_ceil(max_hp as u32)) as u16
    }
}

impl BattleState {
    /// Fresh state before any event. Stats come from the team configurations.
    pub fn new(teams: [Arc<TeamConfig>; 2], options: GameOptions, seed: u64) -> Result<BattleState, GameError> {
        let mut sides = Vec::with_capacity(2);
        for team in &teams {
            let mons = team
                .members()
                .iter()
                .map(|cfg| {
                    let stats = compute_stats(cfg)?;
                    Ok(fresh_mon(stats, cfg.item))
                })
                .collect::<Result<Vec<_>, GameError>>()?;
            sides.push(empty_side(mons));
        }
        let sides: [SideState; 2] = sides.try_into().expect("two sides");
        Ok(BattleState {
            options,
            teams,
            phase: Phase::TeamPreview1,
            sides,
            weather: None,
            field: None,
            turn: 0,
            winner: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            opening: Vec::new(),
        })
    }

    /// State for log reconstruction: HP is tracked in percent since logs
    /// carry only percentages.
    pub fn for_replay(teams: [Arc<TeamConfig>; 2], options: GameOptions) -> Result<BattleState, GameError> {
        let mut s = BattleState::new(teams, options, 0)?;
        for side in &mut s.sides {
            for m in &mut side.mons {
                m.hp = 100;
                m.max_hp = 100;
            }
        }
        Ok(s)
    }

    pub fn options(&self) -> &GameOptions {
        &self.options
    }

    pub fn team(&self, player: Player) -> &Arc<TeamConfig> {
        &self.teams[player.index()]
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn side(&self, player: Player) -> &SideState {
        &self.sides[player.index()]
    }

    pub fn mon(&self, r: MonRef) -> &MonState {
        &self.sides[r.player.index()].mons[r.member as usize]
    }

    pub(crate) fn mon_mut(&mut self, r: MonRef) -> &mut MonState {
        &mut self.sides[r.player.index()].mons[r.member as usize]
    }

    pub fn weather(&self) -> Option<(Weather, u8)> {
        self.weather
    }

    pub fn field(&self) -> Option<(Field, u8)> {
        self.field
    }

    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn winner(&self) -> Option<Player> {
        self.winner.map(|(p, _)| p)
    }

    pub fn win_reason(&self) -> Option<WinReason> {
        self.winner.map(|(_, r)| r)
    }

    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::Terminal
    }

    /// Events emitted before the first decision (non-empty when team
    /// preview is skipped).
    pub fn opening_events(&self) -> &[Event] {
        &self.opening
    }

    pub fn occupant(&self, pos: Position) -> Option<MonRef> {
        self.sides[pos.player.index()].active[pos.slot.index()].map(|m| MonRef::new(pos.player, m))
    }

    /// Chosen members that are neither active nor fainted.
    pub fn available_bench(&self, player: Player) -> Vec<u8> {
        let side = &self.sides[player.index()];
        side.chosen
            .iter()
            .copied()
            .filter(|&m| !side.mons[m as usize].fainted && !side.active.contains(&Some(m)))
            .collect()
    }

    pub fn empty_slots(&self, player: Player) -> Vec<Slot> {
        Slot::BOTH
            .into_iter()
            .filter(|s| self.sides[player.index()].active[s.index()].is_none())
            .collect()
    }

    /// Whether `player` must fill an empty slot before the next turn.
    pub fn needs_replacement(&self, player: Player) -> bool {
        self.phase == Phase::Turn && !self.empty_slots(player).is_empty() && !self.available_bench(player).is_empty()
    }

    /// True during the replacement sub-step that follows faints.
    pub fn is_replacing(&self) -> bool {
        Player::BOTH.into_iter().any(|p| self.needs_replacement(p))
    }

    pub fn alive_count(&self, player: Player) -> usize {
        let side = &self.sides[player.index()];
        side.chosen.iter().filter(|&&m| !side.mons[m as usize].fainted).count()
    }

    /// Current defensive typing.
    pub fn types_of(&self, r: MonRef) -> Vec<Type> {
        let cfg = self.teams[r.player.index()].member(r.member as usize);
        if self.mon(r).terastallized {
            vec![cfg.tera_type]
        } else {
            Ruleset::bundled().species(cfg.species).types.clone()
        }
    }

    pub fn ability_of(&self, r: MonRef) -> Ability {
        self.teams[r.player.index()].member(r.member as usize).ability
    }

    fn position_of(&self, r: MonRef) -> Option<Slot> {
        let side = &self.sides[r.player.index()];
        Slot::BOTH.into_iter().find(|s| side.active[s.index()] == Some(r.member))
    }

    fn check_mon(&self, r: MonRef) -> Result<(), GameError> {
        if (r.member as usize) < TEAM_SIZE {
            Ok(())
        } else {
            Err(GameError::State(format!("no team member {r}")))
        }
    }

    /// Apply one event. This is the only way state changes, for live play and
    /// for log reconstruction alike.
    pub fn apply_event(&mut self, event: &Event) -> Result<(), GameError> {
        if self.phase == Phase::Terminal {
            return Err(GameError::State(format!("event after the battle ended: {event:?}")));
        }
        match *event {
            Event::Pick { player, stage, members } => {
                let expected = match stage {
                    PickStage::Leads => Phase::TeamPreview1,
                    PickStage::Back => Phase::TeamPreview2,
                };
                if self.phase != expected {
                    return Err(GameError::State(format!("{stage:?} pick during {:?}", self.phase)));
                }
                let side = &mut self.sides[player.index()];
                let need = if stage == PickStage::Leads { 0 } else { 2 };
                if side.chosen.len() != need {
                    return Err(GameError::State(format!("{player} already picked")));
                }
                if members[0] == members[1]
                    || members.iter().any(|&m| m as usize >= TEAM_SIZE || side.chosen.contains(&m))
                {
                    return Err(GameError::State(format!("{player} pick {members:?} is not distinct")));
                }
                side.chosen.extend_from_slice(&members);
                let done = |s: &SideState| s.chosen.len() == need + 2;
                if done(&self.sides[0]) && done(&self.sides[1]) {
                    self.phase = match stage {
                        PickStage::Leads => Phase::TeamPreview2,
                        PickStage::Back => {
                            self.turn = 1;
                            Phase::Turn
                        }
                    };
                }
            }
            Event::Switch { player, slot, member } => {
                self.require_turn()?;
                let r = MonRef::new(player, member);
                self.check_mon(r)?;
                let side = &self.sides[player.index()];
                if !side.chosen.contains(&member) || side.mons[member as usize].fainted {
                    return Err(GameError::State(format!("{r} cannot switch in")));
                }
                if side.active.contains(&Some(member)) {
                    return Err(GameError::State(format!("{r} is already active")));
                }
                if let Some(old) = side.active[slot.index()] {
                    let m = self.mon_mut(MonRef::new(player, old));
                    m.boosts = [0; 7];
                    m.protected = false;
                    m.flinched = false;
                    m.protect_streak = 0;
                }
                self.sides[player.index()].active[slot.index()] = Some(member);
                self.mon_mut(r).revealed = true;
            }
            Event::AbilityShown { mon, .. } => {
                self.check_mon(mon)?;
                self.mon_mut(mon).ability_revealed = true;
            }
            Event::Terastallize { mon, tera } => {
                self.check_mon(mon)?;
                if self.sides[mon.player.index()].tera_used {
                    return Err(GameError::State(format!("{} already used tera", mon.player)));
                }
                if self.teams[mon.player.index()].member(mon.member as usize).tera_type != tera {
                    return Err(GameError::State(format!("{mon} has a different tera type")));
                }
                self.sides[mon.player.index()].tera_used = true;
                self.mon_mut(mon).terastallized = true;
            }
            Event::Move { mon, move_id, .. } => {
                self.require_active(mon)?;
                let slot = self.move_slot(mon, move_id)?;
                let is_protect = matches!(
                    Ruleset::bundled().move_data(move_id).effect,
                    Some(super::data::MoveEffect::Protect)
                );
                let m = self.mon_mut(mon);
                m.revealed_moves |= 1 << slot;
                if !is_protect {
                    m.protect_streak = 0;
                }
            }
            Event::Cant { mon, move_id, .. } => {
                self.check_mon(mon)?;
                self.move_slot(mon, move_id)?;
                self.mon_mut(mon).protect_streak = 0;
            }
            Event::Fail { mon } => {
                self.check_mon(mon)?;
                self.mon_mut(mon).protect_streak = 0;
            }
            Event::Miss { target }
            | Event::Immune { target }
            | Event::Protected { target }
            | Event::Crit { target }
            | Event::SuperEffective { target }
            | Event::Resisted { target } => self.check_mon(target)?,
            Event::ProtectUp { mon } => {
                self.require_active(mon)?;
                let m = self.mon_mut(mon);
                m.protected = true;
                m.protect_streak = m.protect_streak.saturating_add(1);
            }
            Event::Damage { mon, hp, max_hp, .. } | Event::Heal { mon, hp, max_hp, .. } => {
                self.check_mon(mon)?;
                if hp > max_hp || max_hp == 0 {
                    return Err(GameError::State(format!("{mon} hp {hp}/{max_hp} out of range")));
                }
                if self.mon(mon).fainted {
                    return Err(GameError::State(format!("{mon} is fainted")));
                }
                let m = self.mon_mut(mon);
                m.hp = hp;
                m.max_hp = max_hp;
            }
            Event::Status { mon, status } => {
                self.check_mon(mon)?;
                self.mon_mut(mon).status = Some(status);
            }
            Event::Boost { mon, stat, stages } => {
                self.check_mon(mon)?;
                let b = &mut self.mon_mut(mon).boosts[stat.index()];
                *b = (*b + stages).clamp(-6, 6);
            }
            Event::Flinch { mon } => {
                self.check_mon(mon)?;
                self.mon_mut(mon).flinched = true;
            }
            Event::Weather { weather, turns } => self.weather = Some((weather, turns)),
            Event::Field { field, turns } => self.field = Some((field, turns)),
            Event::FieldEnd { field } => {
                if self.field.map(|(f, _)| f) != Some(field) {
                    return Err(GameError::State(format!("{field} is not active")));
                }
                self.field = None;
            }
            Event::SideStart { player, condition, turns } => {
                let side = &mut self.sides[player.index()];
                match condition {
                    SideCondition::Tailwind => side.tailwind = turns,
                    SideCondition::Reflect => side.reflect = turns,
                }
            }
            Event::ItemEnd { mon, .. } => {
                self.check_mon(mon)?;
                self.mon_mut(mon).item = None;
            }
            Event::Faint { mon } => {
                self.check_mon(mon)?;
                if self.mon(mon).fainted {
                    return Err(GameError::State(format!("{mon} already fainted")));
                }
                if let Some(slot) = self.position_of(mon) {
                    self.sides[mon.player.index()].active[slot.index()] = None;
                }
                let m = self.mon_mut(mon);
                m.hp = 0;
                m.fainted = true;
                m.boosts = [0; 7];
                m.protected = false;
                m.flinched = false;
            }
            Event::Upkeep => {
                self.require_turn()?;
                self.weather = tick(self.weather);
                self.field = tick(self.field);
                for side in &mut self.sides {
                    side.tailwind = side.tailwind.saturating_sub(1);
                    side.reflect = side.reflect.saturating_sub(1);
                    for m in &mut side.mons {
                        m.protected = false;
                        m.flinched = false;
                    }
                }
                self.turn += 1;
            }
            Event::Win { winner, reason } => {
                self.winner = Some((winner, reason));
                self.phase = Phase::Terminal;
            }
        }
        Ok(())
    }

    fn require_turn(&self) -> Result<(), GameError> {
        if self.phase == Phase::Turn {
            Ok(())
        } else {
            Err(GameError::State(format!("turn event during {:?}", self.phase)))
        }
    }

    fn require_active(&self, r: MonRef) -> Result<(), GameError> {
        self.check_mon(r)?;
        if self.position_of(r).is_some() {
            Ok(())
        } else {
            Err(GameError::State(format!("{r} is not active")))
        }
    }

    fn move_slot(&self, r: MonRef, id: MoveId) -> Result<usize, GameError> {
        self.teams[r.player.index()]
            .member(r.member as usize)
            .moves
            .iter()
            .position(|&m| m == id)
            .ok_or_else(|| GameError::State(format!("{r} does not know move {}", id.0)))
    }
}

fn tick<T>(timer: Option<(T, u8)>) -> Option<(T, u8)> {
    match timer {
        Some((v, n)) if n > 1 => Some((v, n - 1)),
        _ => None,
    }
}

fn fresh_mon(stats: StatBlock, item: Option<Item>) -> MonState {
    let hp = stats.0[0];
    MonState {
        stats,
        hp,
        max_hp: hp,
        status: None,
        boosts: [0; 7],
        terastallized: false,
        item,
        fainted: false,
        revealed: false,
        revealed_moves: 0,
        ability_revealed: false,
        protect_streak: 0,
        protected: false,
        flinched: false,
    }
}

fn empty_side(mons: Vec<MonState>) -> SideState {
    SideState { chosen: Vec::new(), active: [None, None], mons, tera_used: false, tailwind: 0, reflect: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hp_percent_rounds_up() {
        assert_eq!(hp_percent(0, 150), 0);
        assert_eq!(hp_percent(1, 150), 1);
        assert_eq!(hp_percent(150, 150), 100);
        assert_eq!(hp_percent(149, 150), 100);
        assert_eq!(hp_percent(75, 150), 50);
    }

    #[test]
    fn timers_expire() {
        assert_eq!(tick(Some((1u8, 2))), Some((1, 1)));
        assert_eq!(tick(Some((1u8, 1))), None);
        assert_eq!(tick::<u8>(None), None);
    }
}
