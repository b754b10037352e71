//! Log parsing and trajectory reconstruction.

use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::header::{parse_header, LogHeader, PlayerInfo};
use super::line::{parse_body, split, BodyLine};
use super::ReplayError;
use crate::agents::net::EncodedObs;
use crate::game::data::{MoveTarget, Ruleset};
use crate::game::events::PickStage;
use crate::game::{
    BattleState, Event, Gender, JointAction, MonRef, Observation, ObservationStack, Phase, Player, PokemonConfig,
    Position, Slot, SlotAction, StatAllocation, Target, TeamConfig, WinReason,
};
use crate::learn::bc::{Dataset, GameMeta, Sample};

/// How faithfully a log could be reconstructed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fidelity {
    /// Stat allocations are unknown and replaced by neutral ones.
    pub stats_default: bool,
    /// HP is tracked in percent, as shown in logs.
    pub hp_percent: bool,
    /// The log had no team sheets; unrevealed members and move order are guesses.
    pub placeholder_teams: bool,
    /// Decisions whose actions could not be read from the log.
    pub inferred_actions: usize,
}

#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub obs: Observation,
    pub action: JointAction,
    /// The action was guessed rather than read from events.
    pub inferred: bool,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub player: Player,
    pub info: PlayerInfo,
    pub steps: Vec<TrajectoryStep>,
    /// +1 win, -1 loss, 0 draw.
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct ParsedLog {
    pub header: LogHeader,
    pub teams: [Arc<TeamConfig>; 2],
    /// Events with HP in percent.
    pub events: Vec<Event>,
    pub actions: Vec<[JointAction; 2]>,
    pub step_starts: Vec<usize>,
    pub winner: Option<Player>,
    pub reason: Option<WinReason>,
    pub turns: u32,
    pub trajectories: [Trajectory; 2],
    pub fidelity: Fidelity,
}

/// Trajectory selection for dataset export.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Filters {
    /// Keep only players rated at least this much. Unrated players are dropped.
    pub min_rating: Option<u32>,
    /// Keep only the winner's side.
    pub winner_only: bool,
}

impl Filters {
    pub fn accepts(&self, t: &Trajectory) -> bool {
        let rated = match self.min_rating {
            Some(min) => t.info.rating.is_some_and(|r| r >= min),
            None => true,
        };
        rated && (!self.winner_only || t.reward > 0.0)
    }
}

impl ParsedLog {
    pub fn selected<'a>(&'a self, filters: &'a Filters) -> impl Iterator<Item = &'a Trajectory> + 'a {
        self.trajectories.iter().filter(move |t| filters.accepts(t))
    }
}

/// Demonstrations from the selected trajectories. Forced and inferred
/// decisions are skipped.
pub fn to_dataset<'a>(logs: impl IntoIterator<Item = &'a ParsedLog>, filters: &Filters) -> Dataset {
    let mut ds = Dataset::default();
    for log in logs {
        for t in log.selected(filters) {
            let game = ds.games.len();
            ds.games.push(GameMeta { rating: t.info.rating, winner: t.reward > 0.0, seed: None });
            for s in &t.steps {
                if !s.inferred && s.obs.legal.len() > 1 {
                    ds.samples.push(Sample { obs: EncodedObs::from_observation(&s.obs), action: s.action, game });
                }
            }
        }
    }
    ds
}

pub fn parse_log_bytes(bytes: &[u8]) -> Result<ParsedLog, ReplayError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_log(text),
        Err(e) => {
            let head = &bytes[..e.valid_up_to()];
            let line = head.iter().filter(|&&b| b == b'\n').count() + 1;
            let column = head.len() - head.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
            Err(ReplayError::parse(line, column, "invalid UTF-8"))
        }
    }
}

pub fn parse_log(text: &str) -> Result<ParsedLog, ReplayError> {
    let body_text = text.strip_suffix('\n').unwrap_or(text);
    let lines: Vec<&str> = body_text.split('\n').collect();
    let (header, first) = parse_header(&lines)?;

    let mut body = Vec::new();
    let mut end = None;
    for (i, &l) in lines.iter().enumerate().skip(first) {
        let n = i + 1;
        if let Some(hash) = l.strip_prefix("|end|") {
            if n != lines.len() {
                return Err(ReplayError::parse(n + 1, 1, "content after the `|end|` line"));
            }
            split(n, l)?;
            end = Some((n, hash));
            break;
        }
        body.push((n, parse_body(n, l)?));
    }
    let Some((end_line, hash)) = end else {
        return Err(ReplayError::parse(lines.len(), 1, "log has no `|end|` line"));
    };

    let (teams, placeholder) = match &header.teams {
        Some([a, b]) => ([Arc::new(a.clone()), Arc::new(b.clone())], false),
        None => (placeholder_teams(&body)?, true),
    };
    check_species(&body, &teams)?;
    let mut parsed = reconstruct(&header, teams, &body, end_line)?;
    parsed.fidelity.placeholder_teams = placeholder;

    let prefix_len: usize = lines[..end_line - 1].iter().map(|l| l.len() + 1).sum();
    let digest = hex::encode(Sha256::digest(&text.as_bytes()[..prefix_len]));
    if digest != hash {
        return Err(ReplayError::Integrity(format!("line {end_line}: digest does not match the log content")));
    }
    Ok(parsed)
}

type Body = [(usize, BodyLine)];

fn check_species(body: &Body, teams: &[Arc<TeamConfig>; 2]) -> Result<(), ReplayError> {
    let rs = Ruleset::bundled();
    for (n, l) in body {
        if let BodyLine::Event(Event::Switch { player, member, .. }, Some(name)) = l {
            let want = &rs.species(teams[player.index()].member(*member as usize).species).name;
            if want != name {
                return Err(ReplayError::parse(*n, 1, format!("switch shows {name} but the team sheet lists {want}")));
            }
        }
    }
    Ok(())
}

/// Teams assembled from what the log reveals.
fn placeholder_teams(body: &Body) -> Result<[Arc<TeamConfig>; 2], ReplayError> {
    let rs = Ruleset::bundled();
    let mut out = Vec::new();
    for p in Player::BOTH {
        let mut species = [None; 6];
        let mut moves: [Vec<_>; 6] = Default::default();
        let mut tera = [None; 6];
        let mut items = [None; 6];
        for (n, l) in body {
            let BodyLine::Event(e, extra) = l else { continue };
            match (e, extra) {
                (Event::Switch { player, member, .. }, Some(name)) if *player == p => {
                    let id = rs.species_id(name).expect("species checked by the line parser");
                    match species[*member as usize] {
                        Some(old) if old != id => {
                            return Err(ReplayError::parse(*n, 1, format!("{p}:{} changes species", member + 1)));
                        }
                        _ => species[*member as usize] = Some(id),
                    }
                }
                (Event::Move { mon, move_id, .. } | Event::Cant { mon, move_id, .. }, _) if mon.player == p => {
                    let list = &mut moves[mon.member as usize];
                    if !list.contains(move_id) {
                        if list.len() == 4 {
                            return Err(ReplayError::parse(*n, 1, format!("{mon} uses more than four moves")));
                        }
                        list.push(*move_id);
                    }
                }
                (Event::Terastallize { mon, tera: t }, _) if mon.player == p => tera[mon.member as usize] = Some(*t),
                (Event::ItemEnd { mon, item }, _) if mon.player == p => items[mon.member as usize] = Some(*item),
                _ => {}
            }
        }
        let mut spare = rs.species_ids().filter(|id| !species.contains(&Some(*id)));
        let mut members = Vec::new();
        for i in 0..6 {
            let sp = match species[i] {
                Some(s) => s,
                None => spare.next().ok_or_else(|| ReplayError::parse(1, 1, "roster too small for placeholders"))?,
            };
            let data = rs.species(sp);
            if let Some(&m) = moves[i].iter().find(|m| !data.learnset.contains(m)) {
                return Err(ReplayError::parse(1, 1, format!("{} cannot learn {}", data.name, rs.move_data(m).name)));
            }
            let mv = if moves[i].is_empty() { vec![data.learnset[0]] } else { moves[i].clone() };
            members.push(PokemonConfig {
                species: sp,
                moves: mv,
                ability: data.ability,
                item: items[i],
                tera_type: tera[i].unwrap_or(data.types[0]),
                stats: StatAllocation::NEUTRAL,
                gender: Gender::Male,
            });
        }
        out.push(Arc::new(TeamConfig::new(members).map_err(|e| ReplayError::parse(1, 1, format!("placeholder team: {e}")))?));
    }
    Ok(out.try_into().expect("two teams"))
}

struct Replayer<'a> {
    body: &'a Body,
    pos: usize,
    end_line: usize,
    events: Vec<Event>,
    state: BattleState,
}

impl Replayer<'_> {
    fn line(&self) -> usize {
        self.body.get(self.pos).map_or(self.end_line, |b| b.0)
    }

    fn err(&self, message: impl Into<String>) -> ReplayError {
        ReplayError::Reconstruct { event: self.events.len(), line: self.line(), message: message.into() }
    }

    fn peek_turn(&self) -> Option<u32> {
        match self.body.get(self.pos) {
            Some((_, BodyLine::Turn(n))) => Some(*n),
            _ => None,
        }
    }

    fn peek_event(&self) -> Option<&Event> {
        match self.body.get(self.pos) {
            Some((_, BodyLine::Event(e, _))) => Some(e),
            _ => None,
        }
    }

    /// Collect the next step's events as (event, line) without applying them.
    fn take_until(&mut self, mut stop: impl FnMut(&Event) -> bool) -> Vec<(Event, usize)> {
        let mut out = Vec::new();
        while let Some(e) = self.peek_event() {
            let e = e.clone();
            out.push((e.clone(), self.line()));
            self.pos += 1;
            if stop(&e) {
                break;
            }
        }
        out
    }

    fn apply(&mut self, step: &[(Event, usize)]) -> Result<(), ReplayError> {
        for (e, line) in step {
            self.state.apply_event(e).map_err(|err| ReplayError::Reconstruct {
                event: self.events.len(),
                line: *line,
                message: err.to_string(),
            })?;
            self.events.push(e.clone());
        }
        Ok(())
    }
}

fn reconstruct(
    header: &LogHeader,
    teams: [Arc<TeamConfig>; 2],
    body: &Body,
    end_line: usize,
) -> Result<ParsedLog, ReplayError> {
    let state = BattleState::for_replay(teams.clone(), header.options.clone())
        .map_err(|e| ReplayError::parse(1, 1, format!("teams: {e}")))?;
    let mut r = Replayer { body, pos: 0, end_line, events: Vec::new(), state };
    if header.options.skip_team_preview {
        let opening = r.take_until(|_| false);
        r.apply(&opening)?;
        if r.state.phase() != Phase::Turn {
            return Err(r.err("opening events do not complete the team preview"));
        }
    }
    let n_frames = header.options.n_frames;
    let mut stacks = [ObservationStack::new(n_frames), ObservationStack::new(n_frames)];
    let mut traj: [Vec<TrajectoryStep>; 2] = [Vec::new(), Vec::new()];
    let mut actions = Vec::new();
    let mut step_starts = Vec::new();
    let mut inferred_total = 0;
    while !r.state.is_terminal() {
        if r.pos >= body.len() {
            return Err(r.err("log ends before the battle is decided"));
        }
        let obs = [
            Observation::build(&r.state, Player::P1, &mut stacks[0]),
            Observation::build(&r.state, Player::P2, &mut stacks[1]),
        ];
        let phase = r.state.phase();
        let turn_step = phase == Phase::Turn && !r.state.is_replacing();
        if turn_step {
            match r.peek_turn() {
                Some(n) if n == r.state.turn() => r.pos += 1,
                Some(n) => return Err(r.err(format!("expected turn {}, found turn {n}", r.state.turn()))),
                None => return Err(r.err(format!("expected `|turn|{}`", r.state.turn()))),
            }
        } else if r.peek_turn().is_some() {
            return Err(r.err("unexpected turn marker"));
        }
        let step = match phase {
            Phase::TeamPreview1 => {
                let mut seen = 0;
                r.take_until(|e| {
                    seen += 1;
                    seen == 2 || matches!(e, Event::Win { .. })
                })
            }
            _ if turn_step => r.take_until(|e| matches!(e, Event::Upkeep | Event::Win { .. })),
            _ => r.take_until(|e| matches!(e, Event::Win { .. })),
        };
        if step.is_empty() {
            return Err(r.err("decision without events"));
        }
        let first_event = r.events.len();
        let first_line = step[0].1;
        let here = |message: String| ReplayError::Reconstruct { event: first_event, line: first_line, message };
        let events: Vec<&Event> = step.iter().map(|s| &s.0).collect();
        let (joint, inferred) = if let [Event::Win { winner, reason: WinReason::Forfeit }] = events[..] {
            let ff = JointAction::new(SlotAction::FORFEIT, SlotAction::FORFEIT);
            let pass = JointAction::new(SlotAction::PASS, SlotAction::PASS);
            let mut j = [pass; 2];
            j[winner.other().index()] = ff;
            let mut inf = [false; 2];
            inf[winner.index()] = true;
            (j, inf)
        } else {
            let mut j = [JointAction::new(SlotAction::PASS, SlotAction::PASS); 2];
            for p in Player::BOTH {
                let ja = infer(&r.state, &events, p).map_err(&here)?;
                if !r.state.joint_legal(p, ja) {
                    return Err(here(format!("{p} action {ja} is not legal at this point")));
                }
                j[p.index()] = ja;
            }
            (j, [false; 2])
        };
        if turn_step {
            if let Some(bad) = events.iter().position(|e| matches!(e, Event::Pick { .. })) {
                return Err(ReplayError::Reconstruct { event: first_event + bad, line: step[bad].1, message: "pick during a turn".into() });
            }
        }
        if turn_step && !matches!(events.last(), Some(Event::Upkeep | Event::Win { .. })) {
            return Err(r.err(format!("turn {} has no `|upkeep` or `|win` line", r.state.turn())));
        }
        step_starts.push(first_event);
        r.apply(&step)?;
        for (i, o) in obs.into_iter().enumerate() {
            inferred_total += inferred[i] as usize;
            traj[i].push(TrajectoryStep { obs: o, action: joint[i], inferred: inferred[i] });
        }
        actions.push(joint);
    }
    if r.pos < body.len() {
        return Err(r.err("content after the battle ended"));
    }
    let winner = r.state.winner();
    let reward = |p: Player| match winner {
        Some(w) if w == p => 1.0,
        Some(_) => -1.0,
        None => 0.0,
    };
    let [t1, t2] = traj;
    let trajectories = [
        Trajectory { player: Player::P1, info: header.players[0].clone(), steps: t1, reward: reward(Player::P1) },
        Trajectory { player: Player::P2, info: header.players[1].clone(), steps: t2, reward: reward(Player::P2) },
    ];
    Ok(ParsedLog {
        header: header.clone(),
        teams,
        events: r.events,
        actions,
        step_starts,
        winner,
        reason: r.state.win_reason(),
        turns: r.state.turn(),
        trajectories,
        fidelity: Fidelity { stats_default: true, hp_percent: true, placeholder_teams: false, inferred_actions: inferred_total },
    })
}

/// Read `player`'s committed joint action from one step's events.
fn infer(state: &BattleState, events: &[&Event], player: Player) -> Result<JointAction, String> {
    match state.phase() {
        Phase::TeamPreview1 | Phase::TeamPreview2 => {
            let stage = if state.phase() == Phase::TeamPreview1 { PickStage::Leads } else { PickStage::Back };
            events
                .iter()
                .find_map(|e| match e {
                    Event::Pick { player: p, stage: s, members } if *p == player && *s == stage => {
                        Some(JointAction::new(SlotAction::switch(members[0] + 1), SlotAction::switch(members[1] + 1)))
                    }
                    _ => None,
                })
                .ok_or_else(|| format!("no {stage:?} pick for {player}"))
        }
        Phase::Turn if state.is_replacing() => {
            let slot_action = |slot: Slot| {
                events
                    .iter()
                    .find_map(|e| match e {
                        Event::Switch { player: p, slot: s, member } if *p == player && *s == slot => {
                            Some(SlotAction::switch(member + 1))
                        }
                        _ => None,
                    })
                    .unwrap_or(SlotAction::PASS)
            };
            Ok(JointAction::new(slot_action(Slot::A), slot_action(Slot::B)))
        }
        Phase::Turn => {
            let mut out = [SlotAction::PASS; 2];
            for slot in Slot::BOTH {
                let Some(mon) = state.occupant(Position { player, slot }) else { continue };
                out[slot.index()] = turn_action(state, events, player, slot, mon)?;
            }
            Ok(JointAction::new(out[0], out[1]))
        }
        Phase::Terminal => Err("the battle is over".into()),
    }
}

fn turn_action(state: &BattleState, events: &[&Event], player: Player, slot: Slot, mon: MonRef) -> Result<SlotAction, String> {
    let rs = Ruleset::bundled();
    let tera = events.iter().any(|e| matches!(e, Event::Terastallize { mon: m, .. } if *m == mon));
    for e in events {
        match **e {
            Event::Switch { player: p, slot: s, member } if p == player && s == slot => return Ok(SlotAction::switch(member + 1)),
            Event::Move { mon: m, move_id, target } | Event::Cant { mon: m, move_id, target, .. } if m == mon => {
                let cfg = state.team(player).member(mon.member as usize);
                let idx = cfg.moves.iter().position(|&x| x == move_id).ok_or_else(|| format!("{mon} does not know {}", rs.move_data(move_id).name))?;
                let t = match (rs.move_data(move_id).target, target) {
                    (MoveTarget::Single, Some(pos)) => match (pos.player == player, pos.slot) {
                        (true, Slot::A) => Target::OwnA,
                        (true, Slot::B) => Target::OwnB,
                        (false, Slot::A) => Target::FoeA,
                        (false, Slot::B) => Target::FoeB,
                    },
                    (MoveTarget::Single, None) => return Err(format!("{mon} uses a single-target move without a target")),
                    (_, None) => Target::NoTarget,
                    (_, Some(_)) => return Err(format!("{mon} names a target for a spread or self move")),
                };
                return Ok(SlotAction::mv(idx as u8 + 1, t, tera));
            }
            _ => {}
        }
    }
    Err(format!("no action recorded for {mon} in slot {player}{slot}"))
}
