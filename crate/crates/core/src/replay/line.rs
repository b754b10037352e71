//! Single-line encoding of events and the field tokenizer.

use super::ReplayError;
use crate::game::data::{Ability, BoostStat, Field, Item, SideCondition, Status, Type, Weather};
use crate::game::events::{CantReason, HpCause, PickStage};
use crate::game::state::hp_percent;
use crate::game::{Event, MonRef, Player, Position, Ruleset, Slot, WinReason};

/// Escape backslashes and pipes inside a field.
pub fn escape(field: &str) -> String {
    field.replace('\\', "\\\\").replace('|', "\\|")
}

/// A field and the 1-based column where it starts.
pub type Fields = Vec<(usize, String)>;

/// Split `|a|b\|c|` style lines into unescaped fields.
pub fn split(line_no: usize, line: &str) -> Result<Fields, ReplayError> {
    let Some(rest) = line.strip_prefix('|') else {
        return Err(ReplayError::parse(line_no, 1, "lines must start with `|`"));
    };
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut start = 2;
    let mut chars = rest.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, e @ ('\\' | '|'))) => cur.push(e),
                _ => return Err(ReplayError::parse(line_no, i + 2, "invalid escape sequence")),
            },
            '|' => {
                fields.push((start, std::mem::take(&mut cur)));
                start = i + 3;
            }
            c if c.is_control() => return Err(ReplayError::parse(line_no, i + 2, "control character in field")),
            c => cur.push(c),
        }
    }
    fields.push((start, cur));
    Ok(fields)
}

fn cant_tag(r: CantReason) -> &'static str {
    match r {
        CantReason::Paralysis => "par",
        CantReason::Flinch => "flinch",
        CantReason::Fainted => "fainted",
        CantReason::Ended => "ended",
    }
}

fn cause_tag(c: HpCause) -> &'static str {
    match c {
        HpCause::Move => "move",
        HpCause::Burn => "brn",
        HpCause::Poison => "psn",
        HpCause::LifeOrb => "life_orb",
        HpCause::Leftovers => "leftovers",
        HpCause::Sitrus => "sitrus_berry",
        HpCause::Recover => "recover",
    }
}

fn win_tag(r: WinReason) -> &'static str {
    match r {
        WinReason::Elimination => "elimination",
        WinReason::TurnCap => "turn_cap",
        WinReason::Forfeit => "forfeit",
    }
}

fn hp(h: u16, max: u16) -> String {
    format!("{}/100", hp_percent(h, max))
}

fn target(t: Option<Position>) -> String {
    t.map(|p| p.to_string()).unwrap_or_default()
}

/// Encode one event. `species_of` names the member on switch lines.
pub fn format_event(e: &Event, species_of: impl Fn(MonRef) -> String) -> String {
    let rs = Ruleset::bundled();
    let mv = |id| rs.move_data(id).name.clone();
    match *e {
        Event::Pick { player, stage, members } => {
            let st = if stage == PickStage::Leads { "leads" } else { "back" };
            format!("|pick|{player}|{st}|{},{}", members[0] + 1, members[1] + 1)
        }
        Event::Switch { player, slot, member } => {
            let m = MonRef::new(player, member);
            format!("|switch|{player}{slot}|{m}|{}", escape(&species_of(m)))
        }
        Event::AbilityShown { mon, ability } => format!("|-ability|{mon}|{ability}"),
        Event::Terastallize { mon, tera } => format!("|-terastallize|{mon}|{tera}"),
        Event::Move { mon, move_id, target: t } => format!("|move|{mon}|{}|{}", mv(move_id), target(t)),
        Event::Cant { mon, reason, move_id, target: t } => {
            format!("|cant|{mon}|{}|{}|{}", cant_tag(reason), mv(move_id), target(t))
        }
        Event::Fail { mon } => format!("|-fail|{mon}"),
        Event::Miss { target } => format!("|-miss|{target}"),
        Event::Immune { target } => format!("|-immune|{target}"),
        Event::Protected { target } => format!("|-protected|{target}"),
        Event::ProtectUp { mon } => format!("|-protect|{mon}"),
        Event::Crit { target } => format!("|-crit|{target}"),
        Event::SuperEffective { target } => format!("|-supereffective|{target}"),
        Event::Resisted { target } => format!("|-resisted|{target}"),
        Event::Damage { mon, hp: h, max_hp, cause } => format!("|-damage|{mon}|{}|{}", hp(h, max_hp), cause_tag(cause)),
        Event::Heal { mon, hp: h, max_hp, cause } => format!("|-heal|{mon}|{}|{}", hp(h, max_hp), cause_tag(cause)),
        Event::Status { mon, status } => format!("|-status|{mon}|{status}"),
        Event::Boost { mon, stat, stages } => format!("|-boost|{mon}|{stat}|{stages}"),
        Event::Flinch { mon } => format!("|-flinch|{mon}"),
        Event::Weather { weather, turns } => format!("|-weather|{weather}|{turns}"),
        Event::Field { field, turns } => format!("|-fieldstart|{field}|{turns}"),
        Event::FieldEnd { field } => format!("|-fieldend|{field}"),
        Event::SideStart { player, condition, turns } => format!("|-sidestart|{player}|{condition}|{turns}"),
        Event::ItemEnd { mon, item } => format!("|-enditem|{mon}|{item}"),
        Event::Faint { mon } => format!("|faint|{mon}"),
        Event::Upkeep => "|upkeep".to_string(),
        Event::Win { winner, reason } => format!("|win|{winner}|{}", win_tag(reason)),
    }
}

/// Cursor over a line's fields with positioned errors.
pub struct Cursor<'a> {
    pub line: usize,
    fields: &'a [(usize, String)],
    next: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(line: usize, fields: &'a [(usize, String)], text_len: usize) -> Cursor<'a> {
        Cursor { line, fields, next: 1, end_col: text_len + 1 }
    }

    pub fn err(&self, col: usize, msg: impl Into<String>) -> ReplayError {
        ReplayError::parse(self.line, col, msg)
    }

    pub fn field(&mut self, what: &str) -> Result<(usize, &'a str), ReplayError> {
        match self.fields.get(self.next) {
            Some((c, s)) => {
                self.next += 1;
                Ok((*c, s.as_str()))
            }
            None => Err(self.err(self.end_col, format!("missing {what}"))),
        }
    }

    pub fn finish(&self) -> Result<(), ReplayError> {
        match self.fields.get(self.next) {
            Some((c, _)) => Err(self.err(*c, "unexpected extra field")),
            None => Ok(()),
        }
    }

    pub fn named<T>(&mut self, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<T, ReplayError> {
        let (c, s) = self.field(what)?;
        f(s).ok_or_else(|| self.err(c, format!("unknown {what} {s:?}")))
    }

    pub fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ReplayError> {
        let (c, s) = self.field(what)?;
        s.parse().map_err(|_| self.err(c, format!("{what} must be a number, found {s:?}")))
    }

    pub fn player(&mut self) -> Result<Player, ReplayError> {
        self.named("player", Player::from_tag)
    }

    pub fn mon(&mut self) -> Result<MonRef, ReplayError> {
        self.named("battler reference", parse_mon)
    }

    pub fn position(&mut self) -> Result<Position, ReplayError> {
        self.named("position", parse_position)
    }

    pub fn opt_position(&mut self) -> Result<Option<Position>, ReplayError> {
        let (c, s) = self.field("target")?;
        if s.is_empty() {
            return Ok(None);
        }
        parse_position(s).map(Some).ok_or_else(|| self.err(c, format!("unknown position {s:?}")))
    }

    pub fn percent(&mut self) -> Result<u16, ReplayError> {
        let (c, s) = self.field("hp")?;
        let p = s
            .strip_suffix("/100")
            .and_then(|n| n.parse::<u16>().ok())
            .filter(|&n| n <= 100)
            .ok_or_else(|| self.err(c, format!("hp must look like N/100, found {s:?}")))?;
        Ok(p)
    }
}

pub fn parse_mon(s: &str) -> Option<MonRef> {
    let (p, m) = s.split_once(':')?;
    let member: u8 = m.parse().ok()?;
    let player = Player::from_tag(p)?;
    (1..=6).contains(&member).then(|| MonRef::new(player, member - 1))
}

pub fn parse_position(s: &str) -> Option<Position> {
    if s.len() != 3 {
        return None;
    }
    let player = Player::from_tag(s.get(..2)?)?;
    let slot = match s.get(2..)? {
        "a" => Slot::A,
        "b" => Slot::B,
        _ => return None,
    };
    Some(Position { player, slot })
}

fn cause_from(s: &str) -> Option<HpCause> {
    [HpCause::Move, HpCause::Burn, HpCause::Poison, HpCause::LifeOrb, HpCause::Leftovers, HpCause::Sitrus, HpCause::Recover]
        .into_iter()
        .find(|&c| cause_tag(c) == s)
}

fn cant_from(s: &str) -> Option<CantReason> {
    [CantReason::Paralysis, CantReason::Flinch, CantReason::Fainted, CantReason::Ended].into_iter().find(|&c| cant_tag(c) == s)
}

fn win_from(s: &str) -> Option<WinReason> {
    [WinReason::Elimination, WinReason::TurnCap, WinReason::Forfeit].into_iter().find(|&c| win_tag(c) == s)
}

/// A parsed body line.
#[derive(Clone, Debug, PartialEq)]
pub enum BodyLine {
    Turn(u32),
    /// An event; switch lines also carry the shown species.
    Event(Event, Option<String>),
}

/// Parse one body line (not a header line).
pub fn parse_body(line_no: usize, text: &str) -> Result<BodyLine, ReplayError> {
    let fields = split(line_no, text)?;
    let mut c = Cursor::new(line_no, &fields, text.len());
    let (col, tag) = (fields[0].0, fields[0].1.as_str());
    let rs = Ruleset::bundled();
    let move_id = |c: &mut Cursor| c.named("move", |s| rs.move_id(s));
    let mut extra = None;
    let ev = match tag {
        "turn" => {
            let n: u32 = c.number("turn number")?;
            c.finish()?;
            return Ok(BodyLine::Turn(n));
        }
        "pick" => {
            let player = c.player()?;
            let stage = c.named("pick stage", |s| match s {
                "leads" => Some(PickStage::Leads),
                "back" => Some(PickStage::Back),
                _ => None,
            })?;
            let members = c.named("member pair", |s| {
                let (a, b) = s.split_once(',')?;
                let (a, b): (u8, u8) = (a.parse().ok()?, b.parse().ok()?);
                ((1..=6).contains(&a) && (1..=6).contains(&b)).then(|| [a - 1, b - 1])
            })?;
            Event::Pick { player, stage, members }
        }
        "switch" => {
            let pos = c.position()?;
            let (mc, ms) = c.field("battler reference")?;
            let mon = parse_mon(ms).ok_or_else(|| c.err(mc, format!("unknown battler reference {ms:?}")))?;
            if mon.player != pos.player {
                return Err(c.err(mc, "battler belongs to the other player"));
            }
            let (sc, species) = c.field("species")?;
            if rs.species_id(species).is_none() {
                return Err(c.err(sc, format!("unknown species {species:?}")));
            }
            extra = Some(species.to_string());
            Event::Switch { player: pos.player, slot: pos.slot, member: mon.member }
        }
        "-ability" => Event::AbilityShown { mon: c.mon()?, ability: c.named("ability", Ability::from_name)? },
        "-terastallize" => Event::Terastallize { mon: c.mon()?, tera: c.named("type", Type::from_name)? },
        "move" => Event::Move { mon: c.mon()?, move_id: move_id(&mut c)?, target: c.opt_position()? },
        "cant" => Event::Cant {
            mon: c.mon()?,
            reason: c.named("reason", cant_from)?,
            move_id: move_id(&mut c)?,
            target: c.opt_position()?,
        },
        "-fail" => Event::Fail { mon: c.mon()? },
        "-miss" => Event::Miss { target: c.mon()? },
        "-immune" => Event::Immune { target: c.mon()? },
        "-protected" => Event::Protected { target: c.mon()? },
        "-protect" => Event::ProtectUp { mon: c.mon()? },
        "-crit" => Event::Crit { target: c.mon()? },
        "-supereffective" => Event::SuperEffective { target: c.mon()? },
        "-resisted" => Event::Resisted { target: c.mon()? },
        "-damage" => Event::Damage { mon: c.mon()?, hp: c.percent()?, max_hp: 100, cause: c.named("cause", cause_from)? },
        "-heal" => Event::Heal { mon: c.mon()?, hp: c.percent()?, max_hp: 100, cause: c.named("cause", cause_from)? },
        "-status" => Event::Status { mon: c.mon()?, status: c.named("status", Status::from_name)? },
        "-boost" => Event::Boost { mon: c.mon()?, stat: c.named("stat", BoostStat::from_name)?, stages: c.number("stages")? },
        "-flinch" => Event::Flinch { mon: c.mon()? },
        "-weather" => Event::Weather { weather: c.named("weather", Weather::from_name)?, turns: c.number("turns")? },
        "-fieldstart" => Event::Field { field: c.named("field", Field::from_name)?, turns: c.number("turns")? },
        "-fieldend" => Event::FieldEnd { field: c.named("field", Field::from_name)? },
        "-sidestart" => Event::SideStart {
            player: c.player()?,
            condition: c.named("side condition", SideCondition::from_name)?,
            turns: c.number("turns")?,
        },
        "-enditem" => Event::ItemEnd { mon: c.mon()?, item: c.named("item", Item::from_name)? },
        "faint" => Event::Faint { mon: c.mon()? },
        "upkeep" => Event::Upkeep,
        "win" => Event::Win { winner: c.player()?, reason: c.named("win reason", win_from)? },
        other => return Err(ReplayError::parse(line_no, col, format!("unknown line type {other:?}"))),
    };
    c.finish()?;
    Ok(BodyLine::Event(ev, extra))
}
