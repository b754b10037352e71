//! Team configurations and their canonical text form.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::data::{Ability, Item, MoveId, Ruleset, SpeciesId, Stat, Type};
use super::GameError;

pub const MAX_UNITS_PER_STAT: u8 = 63;
pub const MAX_TOTAL_UNITS: u16 = 127;
pub const TEAM_SIZE: usize = 6;
pub const MAX_MOVES: usize = 4;

/// Names of the 21 effect-distinct natures. Index 0 is neutral; the remaining
/// twenty raise one non-HP stat by 10% and lower another by 10%.
pub const NATURE_NAMES: [&str; 21] = [
    "hardy", "lonely", "adamant", "naughty", "brave", "bold", "impish", "lax", "relaxed", "modest",
    "mild", "rash", "quiet", "calm", "gentle", "careful", "sassy", "timid", "hasty", "jolly", "naive",
];

const NATURE_STATS: [Stat; 5] = [Stat::Atk, Stat::Def, Stat::Spa, Stat::Spd, Stat::Spe];

/// `(raised, lowered)` for a nature index, `None` for the neutral nature.
pub fn nature_effect(index: u8) -> Option<(Stat, Stat)> {
    if index == 0 || index as usize >= NATURE_NAMES.len() {
        return None;
    }
    let k = index as usize - 1;
    let raised = NATURE_STATS[k / 4];
    let others: Vec<Stat> = NATURE_STATS.iter().copied().filter(|&s| s != raised).collect();
    Some((raised, others[k % 4]))
}

pub fn nature_index(name: &str) -> Option<u8> {
    NATURE_NAMES.iter().position(|&n| n == name).map(|i| i as u8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "m")]
    Male,
    #[serde(rename = "f")]
    Female,
}

/// Effort units per stat (1 unit = 4 effort points) and a nature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatAllocation {
    pub units: [u8; 6],
    pub nature: u8,
}

impl StatAllocation {
    pub const NEUTRAL: StatAllocation = StatAllocation { units: [0; 6], nature: 0 };

    pub fn validate(&self) -> Result<(), GameError> {
        if let Some(u) = self.units.iter().find(|&&u| u > MAX_UNITS_PER_STAT) {
            return Err(GameError::Validation(format!(
                "stat units {u} exceed the per-stat cap of {MAX_UNITS_PER_STAT}"
            )));
        }
        let total: u16 = self.units.iter().map(|&u| u as u16).sum();
        if total > MAX_TOTAL_UNITS {
            return Err(GameError::Validation(format!(
                "stat units sum to {total}, above the budget of {MAX_TOTAL_UNITS}"
            )));
        }
        if self.nature as usize >= NATURE_NAMES.len() {
            return Err(GameError::Validation(format!("nature index {} out of range", self.nature)));
        }
        Ok(())
    }
}

impl Default for StatAllocation {
    fn default() -> Self {
        StatAllocation::NEUTRAL
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PokemonConfig {
    pub species: SpeciesId,
    pub moves: Vec<MoveId>,
    pub ability: Ability,
    pub item: Option<Item>,
    pub tera_type: Type,
    pub stats: StatAllocation,
    pub gender: Gender,
}

impl PokemonConfig {
    pub fn validate(&self, rs: &Ruleset) -> Result<(), GameError> {
        if self.species.0 as usize >= rs.num_species() {
            return Err(GameError::Validation(format!("unknown species id {}", self.species.0)));
        }
        let sp = rs.species(self.species);
        if self.moves.is_empty() || self.moves.len() > MAX_MOVES {
            return Err(GameError::Validation(format!(
                "{} must know between 1 and {MAX_MOVES} moves",
                sp.name
            )));
        }
        for (i, m) in self.moves.iter().enumerate() {
            if self.moves[..i].contains(m) {
                return Err(GameError::Validation(format!("{} repeats a move", sp.name)));
            }
            if !sp.learnset.contains(m) {
                return Err(GameError::Validation(format!(
                    "{} cannot learn {}",
                    sp.name,
                    rs.move_data(*m).name
                )));
            }
        }
        if self.ability != sp.ability {
            return Err(GameError::Validation(format!(
                "{} cannot have ability {}",
                sp.name, self.ability
            )));
        }
        self.stats.validate()
    }
}

/// Stable content identifier of a team.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TeamId(pub String);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Six configured battlers. Construct through [`TeamConfig::new`] or
/// [`TeamConfig::from_text`] so the id always matches the content.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TeamConfig {
    members: Vec<PokemonConfig>,
    id: TeamId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberFile {
    species: String,
    ability: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    item: Option<String>,
    tera_type: String,
    gender: Gender,
    nature: String,
    units: [u8; 6],
    moves: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TeamFile {
    members: Vec<MemberFile>,
}

impl TeamConfig {
    pub fn new(members: Vec<PokemonConfig>) -> Result<TeamConfig, GameError> {
        let rs = Ruleset::bundled();
        if members.len() != TEAM_SIZE {
            return Err(GameError::Validation(format!(
                "a team has exactly {TEAM_SIZE} members, got {}",
                members.len()
            )));
        }
        for (i, m) in members.iter().enumerate() {
            m.validate(rs)?;
            if members[..i].iter().any(|o| o.species == m.species) {
                return Err(GameError::Validation(format!(
                    "species {} appears twice",
                    rs.species(m.species).name
                )));
            }
        }
        let text = canonical_text(&members);
        let digest = Sha256::digest(text.as_bytes());
        let id = TeamId(hex::encode(&digest[..8]));
        Ok(TeamConfig { members, id })
    }

    pub fn members(&self) -> &[PokemonConfig] {
        &self.members
    }

    pub fn member(&self, index: usize) -> &PokemonConfig {
        &self.members[index]
    }

    pub fn id(&self) -> &TeamId {
        &self.id
    }

    /// Canonical team-file text; this is what the id hashes.
    pub fn to_text(&self) -> String {
        canonical_text(&self.members)
    }

    pub fn from_text(text: &str) -> Result<TeamConfig, GameError> {
        let rs = Ruleset::bundled();
        let de = toml::Deserializer::new(text);
        let file: TeamFile = serde_path_to_error::deserialize(de)
            .map_err(|e| GameError::Validation(format!("team file at `{}`: {}", e.path(), e.inner())))?;
        let members = file
            .members
            .into_iter()
            .enumerate()
            .map(|(i, m)| member_from_file(rs, i, m))
            .collect::<Result<Vec<_>, _>>()?;
        TeamConfig::new(members)
    }

    /// Copy with a different hidden stat allocation for one member.
    pub fn with_stats(&self, index: usize, stats: StatAllocation) -> Result<TeamConfig, GameError> {
        let mut members = self.members.clone();
        members[index].stats = stats;
        TeamConfig::new(members)
    }
}

fn member_from_file(rs: &Ruleset, i: usize, m: MemberFile) -> Result<PokemonConfig, GameError> {
    let at = |field: &str| format!("members[{i}].{field}");
    let species = rs
        .species_id(&m.species)
        .ok_or_else(|| GameError::Validation(format!("{}: unknown species {}", at("species"), m.species)))?;
    let ability = Ability::from_name(&m.ability)
        .ok_or_else(|| GameError::Validation(format!("{}: unknown ability {}", at("ability"), m.ability)))?;
    let item = match m.item {
        Some(name) => Some(
            Item::from_name(&name)
                .ok_or_else(|| GameError::Validation(format!("{}: unknown item {name}", at("item"))))?,
        ),
        None => None,
    };
    let tera_type = Type::from_name(&m.tera_type).ok_or_else(|| {
        GameError::Validation(format!("{}: unknown type {}", at("tera_type"), m.tera_type))
    })?;
    let nature = nature_index(&m.nature)
        .ok_or_else(|| GameError::Validation(format!("{}: unknown nature {}", at("nature"), m.nature)))?;
    let moves = m
        .moves
        .iter()
        .map(|n| {
            rs.move_id(n)
                .ok_or_else(|| GameError::Validation(format!("{}: unknown move {n}", at("moves"))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PokemonConfig {
        species,
        moves,
        ability,
        item,
        tera_type,
        stats: StatAllocation { units: m.units, nature },
        gender: m.gender,
    })
}

fn canonical_text(members: &[PokemonConfig]) -> String {
    let rs = Ruleset::bundled();
    let file = TeamFile {
        members: members
            .iter()
            .map(|m| MemberFile {
                species: rs.species(m.species).name.clone(),
                ability: m.ability.name().to_string(),
                item: m.item.map(|i| i.name().to_string()),
                tera_type: m.tera_type.name().to_string(),
                gender: m.gender,
                nature: NATURE_NAMES[m.stats.nature as usize].to_string(),
                units: m.stats.units,
                moves: m.moves.iter().map(|&id| rs.move_data(id).name.clone()).collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("team file serializes")
}
