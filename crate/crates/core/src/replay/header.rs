//! Log header: format tags, options, players and optional team sheets.

use super::line::{escape, split, Cursor};
use super::ReplayError;
use crate::game::data::{Ability, Item};
use crate::game::{Gender, GameOptions, Player, PokemonConfig, Ruleset, StatAllocation, TeamConfig, Type};

pub const FORMAT_VERSION: u32 = 1;
pub const FORMAT_NAME: &str = "doubles-arena";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayerInfo {
    pub name: String,
    pub rating: Option<u32>,
}

impl PlayerInfo {
    pub fn new(name: impl Into<String>, rating: Option<u32>) -> PlayerInfo {
        PlayerInfo { name: name.into(), rating }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogHeader {
    pub rules_hash: String,
    pub options: GameOptions,
    pub players: [PlayerInfo; 2],
    /// Team sheets without stat allocations, when the log carries them.
    pub teams: Option<[TeamConfig; 2]>,
}

impl LogHeader {
    pub fn lines(&self) -> Vec<String> {
        let o = &self.options;
        let mut out = vec![
            format!("|arenalog|{FORMAT_VERSION}"),
            format!("|format|{FORMAT_NAME}"),
            format!("|rules|{}", self.rules_hash),
            format!(
                "|options|skip_preview={}|no_mirror={}|ots={}|turn_cap={}|frames={}",
                o.skip_team_preview as u8, o.disable_mirror_matches as u8, o.open_team_sheets as u8, o.turn_cap, o.n_frames
            ),
        ];
        for (p, info) in Player::BOTH.iter().zip(&self.players) {
            let rating = info.rating.map(|r| r.to_string()).unwrap_or_else(|| "-".into());
            out.push(format!("|player|{p}|{}|{rating}", escape(&info.name)));
        }
        if let Some(teams) = &self.teams {
            let rs = Ruleset::bundled();
            for (p, team) in Player::BOTH.iter().zip(teams) {
                for (i, m) in team.members().iter().enumerate() {
                    let moves: Vec<&str> = m.moves.iter().map(|&id| rs.move_data(id).name.as_str()).collect();
                    let gender = if m.gender == Gender::Male { "m" } else { "f" };
                    out.push(format!(
                        "|poke|{p}|{}|{}|{}|{}|{}|{gender}|{}",
                        i + 1,
                        rs.species(m.species).name,
                        m.item.map(|x| x.name()).unwrap_or(""),
                        m.ability,
                        m.tera_type,
                        moves.join(",")
                    ));
                }
            }
        }
        out.push("|start".into());
        out
    }
}

fn flag(c: &mut Cursor, key: &str) -> Result<bool, ReplayError> {
    keyed_with(c, key, |v| match v {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    })
}

fn keyed<T: std::str::FromStr>(c: &mut Cursor, key: &str) -> Result<T, ReplayError> {
    keyed_with(c, key, |v| v.parse().ok())
}

fn keyed_with<T>(c: &mut Cursor, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<T, ReplayError> {
    let (col, s) = c.field(key)?;
    let v = s
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| c.err(col, format!("expected `{key}=...`, found {s:?}")))?;
    f(v).ok_or_else(|| c.err(col + key.len() + 1, format!("bad value for {key}: {v:?}")))
}

/// Parsed header and the index of the first body line.
pub fn parse_header(lines: &[&str]) -> Result<(LogHeader, usize), ReplayError> {
    let mut i = 0;
    let mut next = |what: &str| -> Result<(usize, &str), ReplayError> {
        let l = lines.get(i).copied().ok_or_else(|| ReplayError::parse(i + 1, 1, format!("log ends before {what}")))?;
        i += 1;
        Ok((i, l))
    };
    let tagged = |n: usize, l: &str, tag: &str| -> Result<Vec<(usize, String)>, ReplayError> {
        let f = split(n, l)?;
        if f[0].1 != tag {
            return Err(ReplayError::parse(n, 2, format!("expected `|{tag}|` line, found {:?}", f[0].1)));
        }
        Ok(f)
    };

    let (n, l) = next("the version line")?;
    let f = tagged(n, l, "arenalog")?;
    let mut c = Cursor::new(n, &f, l.len());
    let v: u32 = c.number("format version")?;
    if v != FORMAT_VERSION {
        return Err(ReplayError::parse(n, f[1].0, format!("unsupported log version {v}")));
    }
    c.finish()?;

    let (n, l) = next("the format line")?;
    let f = tagged(n, l, "format")?;
    let mut c = Cursor::new(n, &f, l.len());
    let (col, name) = c.field("format name")?;
    if name != FORMAT_NAME {
        return Err(ReplayError::parse(n, col, format!("unknown format {name:?}")));
    }
    c.finish()?;

    let (n, l) = next("the rules line")?;
    let f = tagged(n, l, "rules")?;
    let mut c = Cursor::new(n, &f, l.len());
    let (col, hash) = c.field("ruleset hash")?;
    if hash != Ruleset::bundled().hash() {
        return Err(ReplayError::parse(n, col, "ruleset hash differs from the bundled rules"));
    }
    let rules_hash = hash.to_string();
    c.finish()?;

    let (n, l) = next("the options line")?;
    let f = tagged(n, l, "options")?;
    let mut c = Cursor::new(n, &f, l.len());
    let options = GameOptions {
        skip_team_preview: flag(&mut c, "skip_preview")?,
        disable_mirror_matches: flag(&mut c, "no_mirror")?,
        open_team_sheets: flag(&mut c, "ots")?,
        turn_cap: keyed(&mut c, "turn_cap")?,
        n_frames: keyed(&mut c, "frames")?,
    };
    c.finish()?;
    if options.turn_cap == 0 || options.n_frames == 0 {
        return Err(ReplayError::parse(n, 2, "turn_cap and frames must be at least 1"));
    }

    let mut players = Vec::new();
    for p in Player::BOTH {
        let (n, l) = next("the player lines")?;
        let f = tagged(n, l, "player")?;
        let mut c = Cursor::new(n, &f, l.len());
        let (col, who) = c.field("player")?;
        if who != p.tag() {
            return Err(ReplayError::parse(n, col, format!("expected player {p}, found {who:?}")));
        }
        let (_, name) = c.field("player name")?;
        let (col, r) = c.field("rating")?;
        let rating = match r {
            "-" => None,
            r => Some(r.parse().map_err(|_| ReplayError::parse(n, col, format!("rating must be a number or `-`, found {r:?}")))?),
        };
        c.finish()?;
        players.push(PlayerInfo::new(name, rating));
    }

    let mut pokes: [Vec<PokemonConfig>; 2] = [Vec::new(), Vec::new()];
    loop {
        let (n, l) = next("the `|start` line")?;
        let f = split(n, l)?;
        match f[0].1.as_str() {
            "start" => {
                Cursor::new(n, &f, l.len()).finish()?;
                break;
            }
            "poke" => {
                let mut c = Cursor::new(n, &f, l.len());
                let p = c.player()?;
                let (col, idx) = c.field("member index")?;
                let want = pokes[p.index()].len() + 1;
                if idx != want.to_string() {
                    return Err(ReplayError::parse(n, col, format!("expected member {want}, found {idx:?}")));
                }
                if p == Player::P1 && !pokes[1].is_empty() {
                    return Err(ReplayError::parse(n, f[1].0, "p1 team sheet lines must come first"));
                }
                pokes[p.index()].push(parse_poke(&mut c)?);
                c.finish()?;
            }
            other => return Err(ReplayError::parse(n, 2, format!("unexpected header line {other:?}"))),
        }
    }
    let start_line = i;
    let teams = match (pokes[0].len(), pokes[1].len()) {
        (0, 0) => None,
        (6, 6) => {
            let [a, b] = pokes;
            let build = |m: Vec<PokemonConfig>| {
                TeamConfig::new(m).map_err(|e| ReplayError::parse(start_line, 1, format!("team sheet: {e}")))
            };
            Some([build(a)?, build(b)?])
        }
        (a, b) => return Err(ReplayError::parse(start_line, 1, format!("team sheets need 6 members each, found {a} and {b}"))),
    };
    let players: [PlayerInfo; 2] = players.try_into().expect("two players");
    Ok((LogHeader { rules_hash, options, players, teams }, i))
}

fn parse_poke(c: &mut Cursor) -> Result<PokemonConfig, ReplayError> {
    let rs = Ruleset::bundled();
    let species = c.named("species", |s| rs.species_id(s))?;
    let (col, it) = c.field("item")?;
    let item = if it.is_empty() {
        None
    } else {
        Some(Item::from_name(it).ok_or_else(|| c.err(col, format!("unknown item {it:?}")))?)
    };
    let ability = c.named("ability", Ability::from_name)?;
    let tera_type = c.named("type", Type::from_name)?;
    let gender = c.named("gender", |s| match s {
        "m" => Some(Gender::Male),
        "f" => Some(Gender::Female),
        _ => None,
    })?;
    let (col, ms) = c.field("move list")?;
    let moves = ms
        .split(',')
        .map(|m| rs.move_id(m).ok_or_else(|| c.err(col, format!("unknown move {m:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = PokemonConfig { species, moves, ability, item, tera_type, stats: StatAllocation::NEUTRAL, gender };
    cfg.validate(rs).map_err(|e| c.err(col, e.to_string()))?;
    Ok(cfg)
}
