//! Per-player views and their sparse tensor encoding.
//!
//! The tensor has 12 rows per frame: the observer's six team members in team
//! order, then the opponent's six. Each row is
//! `[battler features | that battler's side features | global features]`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::action::{ActionMask, JointAction};
use super::config::{StatAllocation, TEAM_SIZE};
use super::data::{Ability, Field, Item, MoveId, Ruleset, SpeciesId, Status, Type, Weather};
use super::events::{MonRef, Player, Slot};
use super::state::{hp_percent, BattleState, Phase};

pub const ROWS_PER_FRAME: usize = 2 * TEAM_SIZE;
const N_TYPES: usize = 18;
const N_PHASES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonView {
    pub member: u8,
    pub species: SpeciesId,
    pub hp_percent: u16,
    pub status: Option<Status>,
    pub boosts: [i8; 7],
    pub terastallized: bool,
    pub tera_type: Option<Type>,
    /// Known moves by slot; `None` when not yet revealed.
    pub moves: Vec<Option<MoveId>>,
    pub item: Option<Item>,
    pub ability: Option<Ability>,
    pub slot: Option<Slot>,
    /// Known to be brought but not currently on the field.
    pub bench: bool,
    pub fainted: bool,
    pub revealed: bool,
    /// Own battlers only.
    pub stats: Option<StatAllocation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideView {
    pub player: Player,
    pub tera_used: bool,
    pub tailwind: u8,
    pub reflect: u8,
    pub mons: Vec<MonView>,
}

/// Everything one player may know. Index 0 of `sides` is the observer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerView {
    pub player: Player,
    pub phase: Phase,
    pub replacing: bool,
    pub turn: u32,
    pub turn_cap: u32,
    pub weather: Option<(Weather, u8)>,
    pub field: Option<(Field, u8)>,
    pub sides: [SideView; 2],
}

impl PlayerView {
    pub fn own(&self) -> &SideView {
        &self.sides[0]
    }

    pub fn opponent(&self) -> &SideView {
        &self.sides[1]
    }

    /// Active battler of `side` (0 own, 1 opponent) in `slot`.
    pub fn active(&self, side: usize, slot: Slot) -> Option<&MonView> {
        self.sides[side].mons.iter().find(|m| m.slot == Some(slot))
    }
}

pub fn observe(state: &BattleState, player: Player) -> PlayerView {
    let ots = state.options().open_team_sheets;
    let side_view = |p: Player| {
        let own = p == player;
        let side = state.side(p);
        let team = state.team(p);
        let mons = (0..TEAM_SIZE as u8)
            .map(|i| {
                let m = state.mon(MonRef::new(p, i));
                let cfg = team.member(i as usize);
                let slot = Slot::BOTH.into_iter().find(|s| side.active[s.index()] == Some(i));
                let chosen = side.chosen.contains(&i);
                let full = own || ots;
                MonView {
                    member: i,
                    species: cfg.species,
                    hp_percent: hp_percent(m.hp, m.max_hp),
                    status: m.status,
                    boosts: m.boosts,
                    terastallized: m.terastallized,
                    tera_type: (full || m.terastallized).then_some(cfg.tera_type),
                    moves: cfg
                        .moves
                        .iter()
                        .enumerate()
                        .map(|(k, &id)| (full || m.revealed_moves & (1 << k) != 0).then_some(id))
                        .collect(),
                    item: if full { m.item } else { None },
                    ability: (full || m.ability_revealed).then_some(cfg.ability),
                    slot,
                    bench: chosen && slot.is_none() && !m.fainted && (own || m.revealed),
                    fainted: m.fainted,
                    revealed: m.revealed,
                    stats: own.then_some(cfg.stats),
                }
            })
            .collect();
        SideView { player: p, tera_used: side.tera_used, tailwind: side.tailwind, reflect: side.reflect, mons }
    };
    PlayerView {
        player,
        phase: state.phase(),
        replacing: state.is_replacing(),
        turn: state.turn(),
        turn_cap: state.options().turn_cap,
        weather: state.weather(),
        field: state.field(),
        sides: [side_view(player), side_view(player.other())],
    }
}

/// Feature layout offsets.
pub struct Layout {
    pub n_species: usize,
    pub n_moves: usize,
}

impl Layout {
    pub fn bundled() -> Layout {
        let rs = Ruleset::bundled();
        Layout { n_species: rs.num_species(), n_moves: rs.num_moves() }
    }

    /// Width of one move block.
    pub fn move_block(&self) -> usize {
        self.n_moves + 4
    }

    pub fn battler_dim(&self) -> usize {
        self.n_species + 3 * N_TYPES + 1 + 1 + 4 + 7 + 4 + 1 + 4 * self.move_block()
    }

    pub const SIDE_DIM: usize = 5;
    pub const GLOBAL_DIM: usize = 4 + 4 + 1 + N_PHASES;

    pub fn row_dim(&self) -> usize {
        self.battler_dim() + Self::SIDE_DIM + Self::GLOBAL_DIM
    }
}

/// Row-sparse tensor of shape `(rows, dim)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseTensor {
    pub dim: usize,
    pub rows: Vec<Vec<(u16, f32)>>,
}

impl SparseTensor {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.dim)
    }

    pub fn to_dense(&self) -> Vec<Vec<f32>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.dim];
                for &(i, v) in r {
                    d[i as usize] = v;
                }
                d
            })
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

struct RowWriter {
    row: Vec<(u16, f32)>,
    base: usize,
}

impl RowWriter {
    fn put(&mut self, offset: usize, v: f32) {
        if v != 0.0 {
            self.row.push(((self.base + offset) as u16, v));
        }
    }
}

fn eff_feature(eff: f64) -> f32 {
    if eff == 0.0 {
        -1.5
    } else {
        (eff.log2() / 2.0) as f32
    }
}

/// One frame: 12 rows in canonical order.
pub fn encode_view(view: &PlayerView) -> Vec<Vec<(u16, f32)>> {
    let rs = Ruleset::bundled();
    let lay = Layout::bundled();
    let bdim = lay.battler_dim();

    let mut global = RowWriter { row: Vec::new(), base: bdim + Layout::SIDE_DIM };
    match view.weather {
        None => global.put(0, 1.0),
        Some((w, t)) => {
            global.put(1 + w.index(), 1.0);
            global.put(3, t as f32 / Weather::DURATION as f32);
        }
    }
    match view.field {
        None => global.put(4, 1.0),
        Some((f, t)) => {
            global.put(5 + f.index(), 1.0);
            global.put(7, t as f32 / Field::DURATION as f32);
        }
    }
    global.put(8, view.turn as f32 / view.turn_cap.max(1) as f32);
    global.put(9 + view.phase.index(), 1.0);

    let mut rows = Vec::with_capacity(ROWS_PER_FRAME);
    for (si, side) in view.sides.iter().enumerate() {
        let mut sw = RowWriter { row: Vec::new(), base: bdim };
        sw.put(0, (side.tailwind > 0) as u8 as f32);
        sw.put(1, side.tailwind as f32 / 4.0);
        sw.put(2, (side.reflect > 0) as u8 as f32);
        sw.put(3, side.reflect as f32 / 5.0);
        sw.put(4, side.tera_used as u8 as f32);
        let foes: Vec<Vec<Type>> = Slot::BOTH
            .into_iter()
            .map(|s| view.active(1 - si, s).map(current_types).unwrap_or_default())
            .collect();
        for m in &side.mons {
            let mut w = RowWriter { row: Vec::new(), base: 0 };
            let sp = rs.species(m.species);
            w.put(m.species.0 as usize, 1.0);
            let mut o = lay.n_species;
            w.put(o + sp.types[0].index(), 1.0);
            o += N_TYPES;
            if let Some(t) = sp.types.get(1) {
                w.put(o + t.index(), 1.0);
            }
            o += N_TYPES;
            if let Some(t) = m.tera_type {
                w.put(o + t.index(), 1.0);
            }
            o += N_TYPES;
            w.put(o, m.terastallized as u8 as f32);
            w.put(o + 1, m.hp_percent as f32 / 100.0);
            o += 2;
            let st = match m.status {
                None => 0,
                Some(s) => 1 + s.index(),
            };
            w.put(o + st, 1.0);
            o += 4;
            for (k, &b) in m.boosts.iter().enumerate() {
                w.put(o + k, b as f32 / 6.0);
            }
            o += 7;
            w.put(o, (m.slot == Some(Slot::A)) as u8 as f32);
            w.put(o + 1, (m.slot == Some(Slot::B)) as u8 as f32);
            w.put(o + 2, m.bench as u8 as f32);
            w.put(o + 3, m.fainted as u8 as f32);
            w.put(o + 4, m.revealed as u8 as f32);
            o += 5;
            for k in 0..4 {
                let base = o + k * lay.move_block();
                if let Some(Some(id)) = m.moves.get(k) {
                    let md = rs.move_data(*id);
                    w.put(base + id.0 as usize, 1.0);
                    w.put(base + lay.n_moves, md.power as f32 / 250.0);
                    w.put(base + lay.n_moves + 1, md.accuracy as f32 / 100.0);
                    if md.is_damaging() {
                        for (j, ft) in foes.iter().enumerate() {
                            if !ft.is_empty() {
                                w.put(base + lay.n_moves + 2 + j, eff_feature(rs.effectiveness(md.move_type, ft)));
                            }
                        }
                    }
                }
            }
            let mut row = w.row;
            row.extend_from_slice(&sw.row);
            row.extend_from_slice(&global.row);
            rows.push(row);
        }
    }
    rows
}

fn current_types(m: &MonView) -> Vec<Type> {
    match (m.terastallized, m.tera_type) {
        (true, Some(t)) => vec![t],
        _ => Ruleset::bundled().species(m.species).types.clone(),
    }
}

/// Sliding window of the last `n` frames for one player; missing frames are
/// empty rows at the oldest positions.
#[derive(Clone, Debug)]
pub struct ObservationStack {
    n: usize,
    frames: VecDeque<Vec<Vec<(u16, f32)>>>,
}

impl ObservationStack {
    pub fn new(n: usize) -> ObservationStack {
        ObservationStack { n: n.max(1), frames: VecDeque::new() }
    }

    pub fn push(&mut self, view: &PlayerView) {
        if self.frames.len() == self.n {
            self.frames.pop_front();
        }
        self.frames.push_back(encode_view(view));
    }

    pub fn tensor(&self) -> SparseTensor {
        let mut rows = Vec::with_capacity(self.n * ROWS_PER_FRAME);
        for _ in self.frames.len()..self.n {
            rows.extend(std::iter::repeat_with(Vec::new).take(ROWS_PER_FRAME));
        }
        for f in &self.frames {
            rows.extend(f.iter().cloned());
        }
        SparseTensor { dim: Layout::bundled().row_dim(), rows }
    }
}

/// What an agent receives at a decision point.
#[derive(Clone, Debug)]
pub struct Observation {
    pub player: Player,
    pub phase: Phase,
    pub view: PlayerView,
    pub tensor: SparseTensor,
    pub masks: [ActionMask; 2],
    /// Legal joint actions in canonical order.
    pub legal: Vec<JointAction>,
}

impl Observation {
    /// Observe `state` for `player`, pushing the new frame onto `stack`.
    pub fn build(state: &BattleState, player: Player, stack: &mut ObservationStack) -> Observation {
        let view = observe(state, player);
        stack.push(&view);
        Observation {
            player,
            phase: state.phase(),
            tensor: stack.tensor(),
            masks: state.legal_masks(player),
            legal: state.legal_joint_actions(player),
            view,
        }
    }

    /// Single-frame observation without history.
    pub fn single(state: &BattleState, player: Player) -> Observation {
        Observation::build(state, player, &mut ObservationStack::new(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::engine::start_battle;
    use crate::game::state::GameOptions;
    use crate::game::teams;
    use std::sync::Arc;

    fn state(ots: bool) -> BattleState {
        let t = teams::bundled();
        let opts = GameOptions { skip_team_preview: true, open_team_sheets: ots, ..GameOptions::default() };
        start_battle([Arc::new(t[0].clone()), Arc::new(t[1].clone())], opts, 1).unwrap()
    }

    #[test]
    fn layout_width() {
        let lay = Layout::bundled();
        assert_eq!(lay.battler_dim(), 16 + 54 + 2 + 4 + 7 + 5 + 4 * 51);
        assert_eq!(lay.row_dim(), lay.battler_dim() + 5 + 13);
    }

    #[test]
    fn opponent_allocation_and_unrevealed_bench_are_hidden() {
        let s = state(true);
        let v = observe(&s, Player::P1);
        assert!(v.opponent().mons.iter().all(|m| m.stats.is_none()));
        assert!(v.own().mons.iter().all(|m| m.stats.is_some()));
        // Opponent members 3 and 4 are chosen but unseen.
        assert!(!v.opponent().mons[2].bench && !v.opponent().mons[3].bench);
        assert!(v.own().mons[2].bench);
    }

    #[test]
    fn closed_sheets_hide_moves_until_used() {
        let s = state(false);
        let v = observe(&s, Player::P1);
        assert!(v.opponent().mons[0].moves.iter().all(Option::is_none));
        assert!(v.opponent().mons[0].tera_type.is_none());
        let open = observe(&state(true), Player::P1);
        assert!(open.opponent().mons[0].moves.iter().all(Option::is_some));
    }

    #[test]
    fn stack_pads_oldest_frames() {
        let s = state(true);
        let mut st = ObservationStack::new(3);
        st.push(&observe(&s, Player::P1));
        let t = st.tensor();
        assert_eq!(t.shape(), (36, Layout::bundled().row_dim()));
        assert!(t.rows[..24].iter().all(Vec::is_empty));
        assert!(t.rows[24..].iter().all(|r| !r.is_empty()));
        let dense = t.to_dense();
        assert_eq!(dense[24].iter().filter(|&&x| x != 0.0).count(), t.rows[24].len());
    }

    #[test]
    fn rows_are_in_canonical_order() {
        let s = state(true);
        let rows = encode_view(&observe(&s, Player::P2));
        let own_species = teams::bundled()[1].member(0).species.0;
        assert_eq!(rows[0][0], (own_species, 1.0));
        let opp_species = teams::bundled()[0].member(0).species.0;
        assert_eq!(rows[6][0], (opp_species, 1.0));
    }
}
