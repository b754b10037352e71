//! Serializes a played game to the battle-log text format.

use std::fmt::Write as _;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::header::{LogHeader, PlayerInfo};
use super::line::format_event;
use super::ReplayError;
use crate::agents::GameRecord;
use crate::game::{BattleState, GameOptions, MonRef, Phase, Ruleset, TeamConfig};

/// Render `record`. With `sheets` the header lists both teams without stat
/// allocations, which makes exact action reconstruction possible.
pub fn write_log(
    record: &GameRecord,
    teams: &[Arc<TeamConfig>; 2],
    options: &GameOptions,
    players: &[PlayerInfo; 2],
    sheets: bool,
) -> Result<String, ReplayError> {
    let rs = Ruleset::bundled();
    let strip = |t: &TeamConfig| {
        let mut members = t.members().to_vec();
        for m in &mut members {
            m.stats = Default::default();
        }
        TeamConfig::new(members).expect("stripping stats keeps a team valid")
    };
    let header = LogHeader {
        rules_hash: rs.hash().to_string(),
        options: options.clone(),
        players: players.clone(),
        teams: sheets.then(|| [strip(&teams[0]), strip(&teams[1])]),
    };
    let mut out = String::new();
    for l in header.lines() {
        out.push_str(&l);
        out.push('\n');
    }
    let species = |m: MonRef| rs.species(teams[m.player.index()].member(m.member as usize).species).name.clone();
    let mut state = BattleState::new(teams.clone(), options.clone(), 0).map_err(|e| bad(0, e))?;
    let mut k = 0;
    let bounds: Vec<usize> = record.step_starts.iter().copied().chain([record.events.len()]).collect();
    let opening = bounds.first().copied().unwrap_or(record.events.len());
    for (i, e) in record.events[..opening].iter().enumerate() {
        state.apply_event(e).map_err(|err| bad(i, err))?;
        writeln!(out, "{}", format_event(e, species)).expect("string write");
    }
    k += opening;
    for w in bounds.windows(2) {
        if state.phase() == Phase::Turn && !state.is_replacing() {
            writeln!(out, "|turn|{}", state.turn()).expect("string write");
        }
        for e in &record.events[w[0]..w[1]] {
            state.apply_event(e).map_err(|err| bad(k, err))?;
            writeln!(out, "{}", format_event(e, species)).expect("string write");
            k += 1;
        }
    }
    let digest = hex::encode(Sha256::digest(out.as_bytes()));
    writeln!(out, "|end|{digest}").expect("string write");
    Ok(out)
}

fn bad(event: usize, err: impl std::fmt::Display) -> ReplayError {
    ReplayError::Reconstruct { event, line: 0, message: format!("record is inconsistent: {err}") }
}
