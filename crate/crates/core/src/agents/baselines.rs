//! Scripted baseline players.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::Policy;
use crate::game::action::{DecodedAction, Gimmick, Target};
use crate::game::data::{BoostStat, Category, MoveData, MoveTarget, Ruleset, Stat, Type};
use crate::game::engine::{base_damage, stat_stage_ratio};
use crate::game::observe::{MonView, PlayerView};
use crate::game::{JointAction, Observation, Phase, Slot, SlotAction};

/// Uniform over legal joint actions.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomPlayer;

impl Policy for RandomPlayer {
    fn name(&self) -> String {
        "random".into()
    }

    fn action_distribution(&self, obs: &Observation) -> Vec<(JointAction, f64)> {
        let p = 1.0 / obs.legal.len() as f64;
        obs.legal.iter().map(|&a| (a, p)).collect()
    }

    fn act(&self, obs: &Observation, rng: &mut dyn RngCore) -> JointAction {
        use rand::Rng;
        obs.legal[rng.random_range(0..obs.legal.len())]
    }
}

fn active_of<'a>(view: &'a PlayerView, side: usize, slot: Slot) -> Option<&'a MonView> {
    view.active(side, slot)
}

fn move_of(view: &PlayerView, slot: Slot, move_slot: u8) -> Option<&'static MoveData> {
    let mon = active_of(view, 0, slot)?;
    let id = (*mon.moves.get(move_slot as usize - 1)?)?;
    Some(Ruleset::bundled().move_data(id))
}

/// Combine per-slot candidate weights into a joint distribution over `legal`.
fn joint_from_slots(obs: &Observation, wa: &[(SlotAction, f64)], wb: &[(SlotAction, f64)]) -> Vec<(JointAction, f64)> {
    let weight = |list: &[(SlotAction, f64)], a: SlotAction| list.iter().find(|(x, _)| *x == a).map(|(_, w)| *w);
    let mut out: Vec<(JointAction, f64)> = obs
        .legal
        .iter()
        .filter_map(|&j| Some((j, weight(wa, j.a)? * weight(wb, j.b)?)))
        .collect();
    if out.is_empty() {
        // Candidate sets incompatible (only possible when slot choices interact);
        // pick slot a's candidates and any compatible slot b.
        out = obs
            .legal
            .iter()
            .filter_map(|&j| Some((j, weight(wa, j.a)?)))
            .collect();
    }
    if out.is_empty() {
        out = obs.legal.iter().map(|&j| (j, 1.0)).collect();
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    out.iter_mut().for_each(|(_, w)| *w /= total);
    out
}

/// Greedy on base power; uniform over legal foe targets of the chosen move.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaxBasePowerPlayer;

impl MaxBasePowerPlayer {
    /// Candidate actions for one slot with their weights.
    pub fn slot_candidates(obs: &Observation, slot: Slot) -> Vec<(SlotAction, f64)> {
        let mask = &obs.masks[slot.index()];
        let mut best: Option<(u16, u8)> = None;
        for a in mask.legal() {
            if let Ok(DecodedAction::Move { slot: ms, gimmick: Gimmick::None, .. }) = a.decode() {
                let power = move_of(&obs.view, slot, ms).map_or(0, |m| m.power);
                match best {
                    Some((p, _)) if p >= power => {}
                    _ => best = Some((power, ms)),
                }
            }
        }
        let Some((_, ms)) = best else {
            let all: Vec<_> = mask.legal().collect();
            let w = 1.0 / all.len().max(1) as f64;
            return all.into_iter().map(|a| (a, w)).collect();
        };
        let targets: Vec<SlotAction> = mask
            .legal()
            .filter(|a| matches!(a.decode(), Ok(DecodedAction::Move { slot, gimmick: Gimmick::None, .. }) if slot == ms))
            .collect();
        let foe: Vec<SlotAction> = targets
            .iter()
            .copied()
            .filter(|a| matches!(a.decode(), Ok(DecodedAction::Move { target: Target::FoeA | Target::FoeB | Target::NoTarget, .. })))
            .collect();
        let chosen = if foe.is_empty() { targets } else { foe };
        let w = 1.0 / chosen.len() as f64;
        chosen.into_iter().map(|a| (a, w)).collect()
    }
}

impl Policy for MaxBasePowerPlayer {
    fn name(&self) -> String {
        "max_base_power".into()
    }

    fn action_distribution(&self, obs: &Observation) -> Vec<(JointAction, f64)> {
        let wa = Self::slot_candidates(obs, Slot::A);
        let wb = Self::slot_candidates(obs, Slot::B);
        joint_from_slots(obs, &wa, &wb)
    }
}

/// Weights of the five heuristic terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicWeights {
    /// Expected fraction of the target's remaining HP removed.
    pub damage: f64,
    /// log2 of the type multiplier against the target.
    pub effectiveness: f64,
    /// Hit probability of the move.
    pub accuracy: f64,
    /// Switching out a battler in proportion to its missing HP.
    pub hp_pressure: f64,
    /// Offensive minus defensive type matchup of the incoming battler.
    pub matchup: f64,
}

impl Default for HeuristicWeights {
    fn default() -> Self {
        HeuristicWeights { damage: 1.0, effectiveness: 0.25, accuracy: 0.2, hp_pressure: 0.3, matchup: 0.3 }
    }
}

impl HeuristicWeights {
    pub const ZERO: HeuristicWeights =
        HeuristicWeights { damage: 0.0, effectiveness: 0.0, accuracy: 0.0, hp_pressure: 0.0, matchup: 0.0 };
}

/// Deterministic weighted-sum scorer.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimpleHeuristicsPlayer {
    pub weights: HeuristicWeights,
}

fn types_of(m: &MonView) -> Vec<Type> {
    match (m.terastallized, m.tera_type) {
        (true, Some(t)) => vec![t],
        _ => Ruleset::bundled().species(m.species).types.clone(),
    }
}

fn log_eff(e: f64) -> f64 {
    if e == 0.0 {
        -2.0
    } else {
        e.log2()
    }
}

/// Expected HP fraction one hit removes, from baseline stats.
fn expected_fraction(user: &MonView, target: &MonView, md: &MoveData, spread: bool) -> f64 {
    let rs = Ruleset::bundled();
    if !md.is_damaging() {
        return 0.0;
    }
    let us = rs.species(user.species);
    let ts = rs.species(target.species);
    let (a, d, ab, db) = match md.category {
        Category::Physical => (Stat::Atk, Stat::Def, BoostStat::Atk, BoostStat::Def),
        _ => (Stat::Spa, Stat::Spd, BoostStat::Spa, BoostStat::Spd),
    };
    let (an, ad) = stat_stage_ratio(user.boosts[ab.index()]);
    let (dn, dd) = stat_stage_ratio(target.boosts[db.index()]);
    let atk = us.baseline[a.index()] as u32 * an / ad;
    let def = ts.baseline[d.index()] as u32 * dn / dd;
    let mut dmg = base_damage(md.power as u32, atk, def) as f64 * 0.925;
    let stab = us.types.contains(&md.move_type) || (user.terastallized && user.tera_type == Some(md.move_type));
    if stab {
        dmg *= 1.5;
    }
    if spread {
        dmg *= 0.75;
    }
    dmg *= rs.effectiveness(md.move_type, &types_of(target));
    let hp = ts.baseline[0] as f64 * target.hp_percent as f64 / 100.0;
    (dmg / hp.max(1.0)).min(1.0)
}

/// Offensive best-move matchup minus defensive exposure against `foes`.
fn matchup(mon: &MonView, foes: &[&MonView]) -> f64 {
    let rs = Ruleset::bundled();
    if foes.is_empty() {
        return 0.0;
    }
    let mine = types_of(mon);
    let mut total = 0.0;
    for foe in foes {
        let theirs = types_of(foe);
        let offense = mon
            .moves
            .iter()
            .flatten()
            .map(|&id| rs.move_data(id))
            .filter(|m| m.is_damaging())
            .map(|m| log_eff(rs.effectiveness(m.move_type, &theirs)))
            .fold(-2.0, f64::max);
        let defense = theirs.iter().map(|&t| log_eff(rs.effectiveness(t, &mine))).fold(-2.0, f64::max);
        total += offense - defense;
    }
    total / foes.len() as f64
}

impl SimpleHeuristicsPlayer {
    pub fn new(weights: HeuristicWeights) -> Self {
        SimpleHeuristicsPlayer { weights }
    }

    /// Weighted score of one slot action.
    pub fn score(&self, obs: &Observation, slot: Slot, action: SlotAction) -> f64 {
        let w = &self.weights;
        let view = &obs.view;
        let Ok(decoded) = action.decode() else { return f64::NEG_INFINITY };
        match decoded {
            DecodedAction::Switch(m) => {
                let incoming = &view.own().mons[m as usize - 1];
                let foes: Vec<&MonView> = if matches!(obs.phase, Phase::TeamPreview1 | Phase::TeamPreview2) {
                    view.opponent().mons.iter().collect()
                } else {
                    Slot::BOTH.into_iter().filter_map(|s| active_of(view, 1, s)).collect()
                };
                let pressure = active_of(view, 0, slot).map_or(0.0, |cur| 1.0 - cur.hp_percent as f64 / 100.0);
                w.hp_pressure * pressure + w.matchup * matchup(incoming, &foes)
            }
            DecodedAction::Move { slot: ms, target, .. } => {
                let (Some(user), Some(md)) = (active_of(view, 0, slot), move_of(view, slot, ms)) else {
                    return 0.0;
                };
                let accuracy = if md.accuracy == 0 { 1.0 } else { md.accuracy as f64 / 100.0 };
                let targets: Vec<(&MonView, f64)> = match md.target {
                    MoveTarget::Single => {
                        let t = match target {
                            Target::FoeA => active_of(view, 1, Slot::A).map(|m| (m, 1.0)),
                            Target::FoeB => active_of(view, 1, Slot::B).map(|m| (m, 1.0)),
                            Target::OwnA => active_of(view, 0, Slot::A).map(|m| (m, -1.0)),
                            Target::OwnB => active_of(view, 0, Slot::B).map(|m| (m, -1.0)),
                            Target::NoTarget => None,
                        };
                        t.into_iter().collect()
                    }
                    MoveTarget::Foes => Slot::BOTH.into_iter().filter_map(|s| active_of(view, 1, s)).map(|m| (m, 1.0)).collect(),
                    _ => Vec::new(),
                };
                let spread = targets.len() > 1;
                let mut dmg = 0.0;
                let mut eff = 0.0;
                for (t, sign) in &targets {
                    dmg += sign * expected_fraction(user, t, md, spread);
                    if md.is_damaging() {
                        eff += sign * log_eff(Ruleset::bundled().effectiveness(md.move_type, &types_of(t)));
                    }
                }
                if !targets.is_empty() {
                    eff /= targets.len() as f64;
                }
                w.damage * dmg * accuracy + w.effectiveness * eff + w.accuracy * accuracy
            }
            _ => 0.0,
        }
    }

    /// Argmax with ties to the lowest index; slot b only among actions
    /// jointly legal with slot a's choice.
    pub fn choose(&self, obs: &Observation) -> JointAction {
        let argmax = |cands: &mut dyn Iterator<Item = SlotAction>, slot: Slot| {
            let mut best: Option<(f64, SlotAction)> = None;
            for a in cands {
                let s = self.score(obs, slot, a);
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, a));
                }
            }
            best.map(|(_, a)| a)
        };
        let mut firsts: Vec<SlotAction> = obs.legal.iter().map(|j| j.a).collect();
        firsts.dedup();
        let a = argmax(&mut firsts.into_iter(), Slot::A).expect("legal actions exist");
        let mut seconds = obs.legal.iter().filter(|j| j.a == a).map(|j| j.b);
        let b = argmax(&mut seconds, Slot::B).expect("slot a choice came from a legal pair");
        JointAction::new(a, b)
    }
}

impl Policy for SimpleHeuristicsPlayer {
    fn name(&self) -> String {
        "simple_heuristics".into()
    }

    fn action_distribution(&self, obs: &Observation) -> Vec<(JointAction, f64)> {
        vec![(self.choose(obs), 1.0)]
    }

    fn act(&self, obs: &Observation, _rng: &mut dyn RngCore) -> JointAction {
        self.choose(obs)
    }
}
