//! Transport-independent session: a series of games between a client and a
//! server-side agent.

use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::protocol::{parse_client, ClientMessage, ErrorCode, Score, ServerMessage};
use crate::agents::{GameRecord, Policy};
use crate::game::state::hp_percent;
use crate::game::{
    start_battle, BattleState, Event, GameOptions, JointAction, Observation, ObservationStack, Player, Ruleset, SlotAction,
    TeamConfig,
};
use crate::replay::{write_log, PlayerInfo};
use crate::seeds;

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub games: u32,
    pub seed: u64,
    pub options: GameOptions,
    pub client_team: Arc<TeamConfig>,
    pub agent_team: Arc<TeamConfig>,
    /// Directory for per-game battle logs.
    pub transcript_dir: Option<PathBuf>,
    /// Decision time limit reported to the client; `None` is untimed.
    pub deadline_ms: Option<u64>,
}

impl SessionConfig {
    pub fn new(client_team: Arc<TeamConfig>, agent_team: Arc<TeamConfig>) -> SessionConfig {
        SessionConfig {
            games: 5,
            seed: 0,
            options: GameOptions::default(),
            client_team,
            agent_team,
            transcript_dir: None,
            deadline_ms: None,
        }
    }
}

struct Live {
    state: BattleState,
    seat: Player,
    seq: u64,
    stack: ObservationStack,
    rng: ChaCha8Rng,
    record: GameRecord,
    /// Client messages for the pending decision, kept for resumption.
    pending: Vec<ServerMessage>,
}

pub struct Session {
    cfg: SessionConfig,
    agent: Arc<dyn Policy>,
    token: String,
    client_name: String,
    game: u32,
    score: Score,
    live: Option<Live>,
    logs: Vec<String>,
    finished: bool,
}

impl Session {
    pub fn new(cfg: SessionConfig, agent: Arc<dyn Policy>, token: impl Into<String>) -> Session {
        Session {
            cfg,
            agent,
            token: token.into(),
            client_name: "client".into(),
            game: 0,
            score: Score { client: 0, agent: 0, draws: 0 },
            live: None,
            logs: Vec::new(),
            finished: false,
        }
    }

    pub fn token(&self) -> &str {
        &self.token
    }

    pub fn score(&self) -> Score {
        self.score
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Battle logs of the completed games.
    pub fn logs(&self) -> &[String] {
        &self.logs
    }

    fn hello(&self, resumed: bool) -> ServerMessage {
        let rs = Ruleset::bundled();
        ServerMessage::Hello {
            session: self.token.clone(),
            games: self.cfg.games,
            resumed,
            species: rs.species_ids().map(|id| rs.species(id).name.clone()).collect(),
            moves: (0..rs.num_moves()).map(|i| rs.move_data(crate::game::MoveId(i as u16)).name.clone()).collect(),
        }
    }

    /// Greeting and the first decision.
    pub fn start(&mut self, client_name: Option<String>) -> Vec<ServerMessage> {
        if let Some(n) = client_name {
            self.client_name = n;
        }
        let mut out = vec![self.hello(false)];
        if self.live.is_none() && !self.finished {
            out.extend(self.begin_game());
        }
        out
    }

    /// Greeting and the pending decision after a reconnect.
    pub fn resume(&mut self) -> Vec<ServerMessage> {
        let mut out = vec![self.hello(true)];
        match &self.live {
            Some(l) => out.extend(l.pending.iter().cloned()),
            None if self.finished => out.push(self.error(ErrorCode::SessionOver, "the session is over".into(), None)),
            None => out.extend(self.begin_game()),
        }
        out
    }

    fn error(&self, code: ErrorCode, message: String, index: Option<i16>) -> ServerMessage {
        ServerMessage::Error { code, message, index }
    }

    /// Answer one raw client message. Errors never end the session.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match parse_client(text) {
            Ok(msg) => self.handle(msg),
            Err((code, message)) => self.with_pending(self.error(code, message, None)),
        }
    }

    fn with_pending(&self, first: ServerMessage) -> Vec<ServerMessage> {
        let mut out = vec![first];
        if let Some(l) = &self.live {
            out.extend(l.pending.iter().filter(|m| matches!(m, ServerMessage::Request { .. })).cloned());
        }
        out
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Hello { name, .. } => {
                if self.live.is_none() && self.game == 0 {
                    self.start(name)
                } else {
                    self.resume()
                }
            }
            ClientMessage::Choose { game, seq, actions } => {
                if self.finished {
                    return vec![self.error(ErrorCode::SessionOver, "the session is over".into(), None)];
                }
                let Some(live) = &self.live else {
                    return vec![self.error(ErrorCode::StaleChoice, "no decision is pending".into(), None)];
                };
                if game != self.game || seq != live.seq {
                    let msg = format!("decision {seq} of game {game} is not pending; current is {} of game {}", live.seq, self.game);
                    return self.with_pending(self.error(ErrorCode::StaleChoice, msg, None));
                }
                let ja = JointAction::new(SlotAction(actions[0]), SlotAction(actions[1]));
                let resolved = match live.state.resolve_joint(live.seat, ja) {
                    Ok(r) => r,
                    Err(e) => {
                        let index = match &e {
                            crate::game::GameError::IllegalAction { index, .. } => Some(*index),
                            _ => None,
                        };
                        return self.with_pending(self.error(ErrorCode::IllegalAction, e.to_string(), index));
                    }
                };
                self.advance(Some(resolved))
            }
        }
    }

    fn begin_game(&mut self) -> Vec<ServerMessage> {
        let g = self.game;
        let game_seed = seeds::derive(self.cfg.seed, g as u64);
        let seat = if g % 2 == 0 { Player::P1 } else { Player::P2 };
        let teams = if seat == Player::P1 {
            [self.cfg.client_team.clone(), self.cfg.agent_team.clone()]
        } else {
            [self.cfg.agent_team.clone(), self.cfg.client_team.clone()]
        };
        let state = start_battle(teams, self.cfg.options.clone(), seeds::derive(game_seed, 0)).expect("session teams are valid");
        let n = self.cfg.options.n_frames;
        let record = GameRecord {
            seed: game_seed,
            winner: None,
            reason: None,
            turns: 0,
            events: state.opening_events().to_vec(),
            actions: Vec::new(),
            step_starts: Vec::new(),
        };
        let mut out = Vec::new();
        if !record.events.is_empty() {
            out.push(ServerMessage::Reveal { game: g, seq: 0, events: mask_events(&record.events, seat) });
        }
        self.live = Some(Live {
            state,
            seat,
            seq: 0,
            stack: ObservationStack::new(n),
            rng: ChaCha8Rng::seed_from_u64(seeds::derive(game_seed, 2)),
            record,
            pending: Vec::new(),
        });
        out.extend(self.advance(None));
        out
    }

    /// Resolve the pending decision with the client's choice (if any), then
    /// auto-resolve forced decisions until the client must choose again.
    fn advance(&mut self, mut client: Option<JointAction>) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        loop {
            let g = self.game;
            let live = self.live.as_mut().expect("a live game");
            let client_obs = Observation::single(&live.state, live.seat);
            let choice = match client.take() {
                Some(c) => {
                    out.push(ServerMessage::Commit { game: g, seq: live.seq, player: live.seat, auto: false });
                    c
                }
                None if client_obs.legal.len() == 1 => {
                    out.push(ServerMessage::Commit { game: g, seq: live.seq, player: live.seat, auto: true });
                    client_obs.legal[0]
                }
                None => {
                    live.pending = vec![
                        ServerMessage::State { game: g, seq: live.seq, seat: live.seat, snapshot: client_obs.view.clone() },
                        ServerMessage::Request {
                            game: g,
                            seq: live.seq,
                            phase: client_obs.phase,
                            masks: client_obs.masks,
                            legal: client_obs.legal.iter().map(|j| [j.a.0, j.b.0]).collect(),
                            deadline_ms: self.cfg.deadline_ms,
                        },
                    ];
                    out.extend(live.pending.iter().cloned());
                    return out;
                }
            };
            let agent_seat = live.seat.other();
            let agent_obs = Observation::build(&live.state, agent_seat, &mut live.stack);
            let agent_choice =
                if agent_obs.legal.len() == 1 { agent_obs.legal[0] } else { self.agent.act(&agent_obs, &mut live.rng) };
            out.push(ServerMessage::Commit { game: g, seq: live.seq, player: agent_seat, auto: agent_obs.legal.len() == 1 });
            let (p1, p2) = if live.seat == Player::P1 { (choice, agent_choice) } else { (agent_choice, choice) };
            let step = live.state.step(p1, p2).expect("server-validated choices are legal");
            live.record.step_starts.push(live.record.events.len());
            live.record.actions.push([p1, p2]);
            out.push(ServerMessage::Reveal { game: g, seq: live.seq, events: mask_events(&step.events, live.seat) });
            live.record.events.extend(step.events);
            live.seq += 1;
            live.pending.clear();
            if live.state.is_terminal() {
                out.extend(self.finish_game());
                return out;
            }
        }
    }

    fn finish_game(&mut self) -> Vec<ServerMessage> {
        let mut live = self.live.take().expect("a live game");
        live.record.winner = live.state.winner();
        live.record.reason = live.state.win_reason();
        live.record.turns = live.state.turn();
        match live.record.winner {
            Some(w) if w == live.seat => self.score.client += 1,
            Some(_) => self.score.agent += 1,
            None => self.score.draws += 1,
        }
        let teams = [live.state.team(Player::P1).clone(), live.state.team(Player::P2).clone()];
        let names = if live.seat == Player::P1 {
            [PlayerInfo::new(self.client_name.clone(), None), PlayerInfo::new(self.agent.name(), None)]
        } else {
            [PlayerInfo::new(self.agent.name(), None), PlayerInfo::new(self.client_name.clone(), None)]
        };
        let log = write_log(&live.record, &teams, &self.cfg.options, &names, true).expect("live records are consistent");
        if let Some(dir) = &self.cfg.transcript_dir {
            let path = dir.join(format!("{}_game{}.battlelog", self.token, self.game + 1));
            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, &log)) {
                eprintln!("could not write transcript {}: {e}", path.display());
            }
        }
        self.logs.push(log);
        let g = self.game;
        self.game += 1;
        self.finished = self.game >= self.cfg.games;
        let mut out = vec![ServerMessage::End {
            game: g,
            winner: live.record.winner,
            reason: live.record.reason,
            seat: live.seat,
            score: self.score,
            session_over: self.finished,
        }];
        if !self.finished {
            out.extend(self.begin_game());
        }
        out
    }
}

/// Replace exact HP of `viewer`'s opponent with percentages.
pub fn mask_events(events: &[Event], viewer: Player) -> Vec<Event> {
    events
        .iter()
        .map(|e| match *e {
            Event::Damage { mon, hp, max_hp, cause } if mon.player != viewer => {
                Event::Damage { mon, hp: hp_percent(hp, max_hp), max_hp: 100, cause }
            }
            Event::Heal { mon, hp, max_hp, cause } if mon.player != viewer => {
                Event::Heal { mon, hp: hp_percent(hp, max_hp), max_hp: 100, cause }
            }
            ref e => e.clone(),
        })
        .collect()
}

/// One wire message of a recorded exchange.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TranscriptLine {
    /// `client` or `server`.
    pub from: String,
    pub message: serde_json::Value,
}

/// Drive `session` in-process with `client` choosing, recording every wire
/// message in order.
pub fn record_transcript(session: &mut Session, client: &dyn Policy, seed: u64) -> Vec<TranscriptLine> {
    use super::protocol::Wire;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let server = |lines: &mut Vec<TranscriptLine>, msgs: &[ServerMessage]| {
        for m in msgs {
            let v = serde_json::to_value(Wire::new(m.clone())).expect("serializes");
            lines.push(TranscriptLine { from: "server".into(), message: v });
        }
    };
    let hello = ClientMessage::Hello { token: None, name: Some(client.name()) };
    lines.push(TranscriptLine { from: "client".into(), message: serde_json::to_value(Wire::new(hello.clone())).expect("serializes") });
    let mut pending = session.handle(hello);
    server(&mut lines, &pending);
    let mut stack = ObservationStack::new(session.cfg.options.n_frames);
    while !session.is_finished() {
        let mut view = None;
        let mut request = None;
        for m in &pending {
            match m {
                ServerMessage::State { seat, snapshot, .. } => view = Some((*seat, snapshot.clone())),
                ServerMessage::Request { .. } => request = Some(m.clone()),
                ServerMessage::End { .. } => stack = ObservationStack::new(session.cfg.options.n_frames),
                _ => {}
            }
        }
        let (Some((seat, v)), Some(ServerMessage::Request { game, seq, phase, masks, legal, .. })) = (view, request) else {
            break;
        };
        stack.push(&v);
        let obs = Observation {
            player: seat,
            phase,
            view: v,
            tensor: stack.tensor(),
            masks,
            legal: legal.iter().map(|p| JointAction::new(SlotAction(p[0]), SlotAction(p[1]))).collect(),
        };
        let a = client.act(&obs, &mut rng);
        let choose = ClientMessage::Choose { game, seq, actions: [a.a.0, a.b.0] };
        lines.push(TranscriptLine { from: "client".into(), message: serde_json::to_value(Wire::new(choose.clone())).expect("serializes") });
        pending = session.handle(choose);
        server(&mut lines, &pending);
    }
    lines
}

/// Seeded exchanges shipped as protocol fixtures: a one-game session and an
/// error catalogue.
pub fn fixture_transcripts() -> Vec<(&'static str, Vec<TranscriptLine>)> {
    use crate::agents::{MaxBasePowerPlayer, RandomPlayer};
    use crate::game::teams;
    let t = teams::bundled();
    let mut cfg = SessionConfig::new(Arc::new(t[0].clone()), Arc::new(t[1].clone()));
    cfg.games = 1;
    cfg.seed = 11;
    let mut s = Session::new(cfg.clone(), Arc::new(RandomPlayer), "fixture");
    let session = record_transcript(&mut s, &MaxBasePowerPlayer, 3);

    let mut s = Session::new(cfg, Arc::new(RandomPlayer), "fixture");
    let mut errors = Vec::new();
    let push_server = |errors: &mut Vec<TranscriptLine>, msgs: Vec<ServerMessage>| {
        for m in msgs {
            let v = serde_json::to_value(super::protocol::Wire::new(m)).expect("serializes");
            errors.push(TranscriptLine { from: "server".into(), message: v });
        }
    };
    let seq = s.start(None).iter().rev().find_map(|m| match m {
        ServerMessage::Request { seq, .. } => Some(*seq),
        _ => None,
    });
    let seq = seq.expect("the first decision is pending");
    let probes = [
        serde_json::json!({"proto": 1, "type": "hello"}),
        serde_json::json!({"proto": 1, "type": "chose", "game": 0, "seq": seq, "actions": [1, 1]}),
        serde_json::json!({"proto": 9, "type": "choose", "game": 0, "seq": seq, "actions": [1, 1]}),
        serde_json::json!({"proto": 1, "type": "choose", "game": 0, "seq": seq + 5, "actions": [1, 1]}),
        serde_json::json!({"proto": 1, "type": "choose", "game": 0, "seq": seq, "actions": [999, 1]}),
    ];
    for p in probes {
        let text = p.to_string();
        errors.push(TranscriptLine { from: "client".into(), message: p });
        push_server(&mut errors, s.handle_text(&text));
    }
    vec![("session", session), ("errors", errors)]
}

/// JSON-lines rendering of a transcript.
pub fn transcript_jsonl(lines: &[TranscriptLine]) -> String {
    lines.iter().map(|l| serde_json::to_string(l).expect("serializes") + "\n").collect()
}
