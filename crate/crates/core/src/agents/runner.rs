//! Plays complete games between two policies.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Policy;
use crate::game::{
    start_battle, BattleState, Event, GameError, GameOptions, JointAction, Observation, ObservationStack, Player, SlotAction,
    TeamConfig, WinReason,
};
use crate::seeds;

/// Full trace of one game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameRecord {
    pub seed: u64,
    pub winner: Option<Player>,
    pub reason: Option<WinReason>,
    pub turns: u32,
    /// Opening events followed by every step's events.
    pub events: Vec<Event>,
    /// Joint actions actually applied at each decision, per player.
    pub actions: Vec<[JointAction; 2]>,
    /// Index into `events` where each decision's events begin.
    pub step_starts: Vec<usize>,
}

impl GameRecord {
    /// +1 win, -1 loss, 0 otherwise, from `player`'s side.
    pub fn reward(&self, player: Player) -> f64 {
        match self.winner {
            Some(w) if w == player => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        }
    }
}

/// Agent decision seen by a [`play_game_observed`] hook.
pub struct Decision<'a> {
    pub player: Player,
    pub obs: &'a Observation,
    pub action: JointAction,
}

pub fn play_game(
    p1: &dyn Policy,
    p2: &dyn Policy,
    teams: [Arc<TeamConfig>; 2],
    options: GameOptions,
    seed: u64,
) -> Result<GameRecord, GameError> {
    play_game_observed(p1, p2, teams, options, seed, |_| {})
}

/// Play to completion, calling `hook` for every decision where a player had
/// more than one legal option.
///
/// The engine uses stream 0 of `seed`; players sample from streams 1 and 2.
pub fn play_game_observed(
    p1: &dyn Policy,
    p2: &dyn Policy,
    teams: [Arc<TeamConfig>; 2],
    options: GameOptions,
    seed: u64,
    mut hook: impl FnMut(Decision<'_>),
) -> Result<GameRecord, GameError> {
    let n_frames = options.n_frames;
    let mut state = start_battle(teams, options, seeds::derive(seed, 0))?;
    let mut rngs = [ChaCha8Rng::seed_from_u64(seeds::derive(seed, 1)), ChaCha8Rng::seed_from_u64(seeds::derive(seed, 2))];
    let mut stacks = [ObservationStack::new(n_frames), ObservationStack::new(n_frames)];
    let mut events = state.opening_events().to_vec();
    let mut actions = Vec::new();
    let mut step_starts = Vec::new();
    while !state.is_terminal() {
        let mut chosen = [JointAction::new(SlotAction::PASS, SlotAction::PASS); 2];
        for player in Player::BOTH {
            let i = player.index();
            chosen[i] = decide(&state, player, if i == 0 { p1 } else { p2 }, &mut stacks[i], &mut rngs[i], &mut hook);
        }
        let out = state.step(chosen[0], chosen[1])?;
        step_starts.push(events.len());
        events.extend(out.events);
        actions.push(chosen);
    }
    Ok(GameRecord {
        seed,
        winner: state.winner(),
        reason: state.win_reason(),
        turns: state.turn(),
        events,
        actions,
        step_starts,
    })
}

fn decide(
    state: &BattleState,
    player: Player,
    policy: &dyn Policy,
    stack: &mut ObservationStack,
    rng: &mut ChaCha8Rng,
    hook: &mut impl FnMut(Decision<'_>),
) -> JointAction {
    let obs = Observation::build(state, player, stack);
    if obs.legal.len() == 1 {
        return obs.legal[0];
    }
    let action = policy.act(&obs, rng);
    hook(Decision { player, obs: &obs, action });
    action
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{MaxBasePowerPlayer, RandomPlayer};
    use crate::game::teams;

    fn pair() -> [Arc<TeamConfig>; 2] {
        let t = teams::bundled();
        [Arc::new(t[0].clone()), Arc::new(t[1].clone())]
    }

    #[test]
    fn games_terminate_and_are_reproducible() {
        let a = play_game(&RandomPlayer, &MaxBasePowerPlayer, pair(), GameOptions::default(), 9).unwrap();
        let b = play_game(&RandomPlayer, &MaxBasePowerPlayer, pair(), GameOptions::default(), 9).unwrap();
        assert!(a.winner.is_some());
        assert_eq!(a.events, b.events);
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.reward(Player::P1) + a.reward(Player::P2), 0.0);
    }
}
