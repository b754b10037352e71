//! Bundled rule-set data: type chart, moves and the species roster.
//!
//! The data lives in `data/ruleset.toml` and is compiled into the binary. Its
//! SHA-256 digest identifies the rule set in battle logs and checkpoints.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::GameError;

const BUNDLED: &str = include_str!("../../data/ruleset.toml");

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_name(text: &str) -> Option<Self> {
                match text { $($text => Some($name::$variant),)+ _ => None }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named_enum!(
    /// The eighteen elemental types.
    Type {
        Normal => "normal", Fire => "fire", Water => "water", Electric => "electric",
        Grass => "grass", Ice => "ice", Fighting => "fighting", Poison => "poison",
        Ground => "ground", Flying => "flying", Psychic => "psychic", Bug => "bug",
        Rock => "rock", Ghost => "ghost", Dragon => "dragon", Dark => "dark",
        Steel => "steel", Fairy => "fairy",
    }
);

named_enum!(
    Ability {
        Intimidate => "intimidate", Levitate => "levitate", Drizzle => "drizzle",
        Drought => "drought", ThickFat => "thick_fat", SpeedBoost => "speed_boost",
    }
);

named_enum!(
    Item {
        Leftovers => "leftovers", LifeOrb => "life_orb", SitrusBerry => "sitrus_berry",
        FocusSash => "focus_sash", ExpertBelt => "expert_belt", MuscleBand => "muscle_band",
        WiseGlasses => "wise_glasses", SwiftScarf => "swift_scarf",
    }
);

named_enum!(
    /// Non-volatile status conditions.
    Status { Burn => "brn", Paralysis => "par", Poison => "psn" }
);

named_enum!(
    /// The six permanent stats, in allocation order.
    Stat { Hp => "hp", Atk => "atk", Def => "def", Spa => "spa", Spd => "spd", Spe => "spe" }
);

named_enum!(
    /// In-battle stat stages.
    BoostStat {
        Atk => "atk", Def => "def", Spa => "spa", Spd => "spd", Spe => "spe",
        Accuracy => "accuracy", Evasion => "evasion",
    }
);

named_enum!(Weather { Rain => "rain", Sun => "sun" });

named_enum!(Field { TrickRoom => "trick_room", ElectricTerrain => "electric_terrain" });

named_enum!(SideCondition { Tailwind => "tailwind", Reflect => "reflect" });

named_enum!(Category { Physical => "physical", Special => "special", Status => "status" });

named_enum!(
    /// What a move can be aimed at.
    MoveTarget { Single => "single", Foes => "foes", User => "user", Side => "side", Field => "field" }
);

impl Status {
    /// Types that can never receive this status.
    pub fn immune_types(self) -> &'static [Type] {
        match self {
            Status::Burn => &[Type::Fire],
            Status::Paralysis => &[Type::Electric],
            Status::Poison => &[Type::Poison, Type::Steel],
        }
    }
}

impl Weather {
    pub const DURATION: u8 = 5;
}

impl Field {
    pub const DURATION: u8 = 5;
}

impl SideCondition {
    pub fn duration(self) -> u8 {
        match self {
            SideCondition::Tailwind => 4,
            SideCondition::Reflect => 5,
        }
    }
}

impl BoostStat {
    pub fn from_stat(stat: Stat) -> Option<BoostStat> {
        match stat {
            Stat::Hp => None,
            Stat::Atk => Some(BoostStat::Atk),
            Stat::Def => Some(BoostStat::Def),
            Stat::Spa => Some(BoostStat::Spa),
            Stat::Spd => Some(BoostStat::Spd),
            Stat::Spe => Some(BoostStat::Spe),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveId(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpeciesId(pub u16);

/// Primary effect of a status move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveEffect {
    Inflict { status: Status },
    Boost { stat: BoostStat, stages: i8 },
    Weather { weather: Weather },
    Field { field: Field },
    Side { condition: SideCondition },
    Protect,
    Heal { percent: u8 },
}

/// Chance-based effect applied after a damaging hit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SecondaryEffect {
    Inflict { status: Status },
    Flinch,
    Drop { stat: BoostStat },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secondary {
    /// Percent chance in 1..=100.
    pub chance: u8,
    pub effect: SecondaryEffect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveData {
    pub name: String,
    #[serde(rename = "type")]
    pub move_type: Type,
    pub category: Category,
    pub power: u16,
    /// Percent; 0 means the move never misses.
    pub accuracy: u8,
    pub priority: i8,
    pub target: MoveTarget,
    #[serde(default)]
    pub effect: Option<MoveEffect>,
    #[serde(default)]
    pub secondary: Option<Secondary>,
}

impl MoveData {
    pub fn is_damaging(&self) -> bool {
        self.category != Category::Status
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeciesData {
    pub name: String,
    pub types: Vec<Type>,
    pub base_stats: [u16; 6],
    /// Level-50 stat block with zero units and a neutral nature.
    pub baseline: [u16; 6],
    pub ability: Ability,
    pub learnset: Vec<MoveId>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    name: String,
    types: Vec<Type>,
    base_stats: [u16; 6],
    baseline: [u16; 6],
    ability: Ability,
    learnset: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRuleset {
    version: u32,
    name: String,
    types: Vec<Type>,
    abilities: Vec<Ability>,
    items: Vec<Item>,
    chart: HashMap<String, String>,
    moves: Vec<MoveData>,
    species: Vec<RawSpecies>,
}

/// Resolved, immutable rule set.
#[derive(Debug)]
pub struct Ruleset {
    pub name: String,
    pub version: u32,
    chart: [[f32; 18]; 18],
    moves: Vec<MoveData>,
    species: Vec<SpeciesData>,
    move_index: HashMap<String, MoveId>,
    species_index: HashMap<String, SpeciesId>,
    hash: String,
}

impl Ruleset {
    /// The rule set compiled into this build.
    pub fn bundled() -> &'static Ruleset {
        static CELL: OnceLock<Ruleset> = OnceLock::new();
        CELL.get_or_init(|| Ruleset::from_toml(BUNDLED).expect("bundled rule set is valid"))
    }

    pub fn from_toml(text: &str) -> Result<Ruleset, GameError> {
        let raw: RawRuleset =
            toml::from_str(text).map_err(|e| GameError::Data(format!("rule set: {e}")))?;
        if raw.types != Type::ALL {
            return Err(GameError::Data("type list must follow the canonical order".into()));
        }
        if raw.abilities != Ability::ALL || raw.items != Item::ALL {
            return Err(GameError::Data("ability and item pools must match the engine".into()));
        }

        let mut chart = [[1.0f32; 18]; 18];
        for attacker in Type::ALL {
            let row = raw
                .chart
                .get(attacker.name())
                .ok_or_else(|| GameError::Data(format!("chart row missing for {attacker}")))?;
            if row.chars().count() != 18 {
                return Err(GameError::Data(format!("chart row {attacker} must have 18 cells")));
            }
            for (j, c) in row.chars().enumerate() {
                chart[attacker.index()][j] = match c {
                    '0' => 0.0,
                    'h' => 0.5,
                    '.' => 1.0,
                    '2' => 2.0,
                    other => {
                        return Err(GameError::Data(format!("bad chart cell {other:?} in {attacker}")))
                    }
                };
            }
        }

        let mut move_index = HashMap::new();
        for (i, m) in raw.moves.iter().enumerate() {
            if move_index.insert(m.name.clone(), MoveId(i as u16)).is_some() {
                return Err(GameError::Data(format!("duplicate move {}", m.name)));
            }
            if m.is_damaging() && m.power == 0 {
                return Err(GameError::Data(format!("damaging move {} has no power", m.name)));
            }
            if !m.is_damaging() && m.effect.is_none() {
                return Err(GameError::Data(format!("status move {} has no effect", m.name)));
            }
        }

        let mut species = Vec::with_capacity(raw.species.len());
        let mut species_index = HashMap::new();
        for (i, s) in raw.species.into_iter().enumerate() {
            if s.types.is_empty() || s.types.len() > 2 {
                return Err(GameError::Data(format!("{} must have one or two types", s.name)));
            }
            let learnset = s
                .learnset
                .iter()
                .map(|name| {
                    move_index
                        .get(name)
                        .copied()
                        .ok_or_else(|| GameError::Data(format!("{}: unknown move {name}", s.name)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if species_index.insert(s.name.clone(), SpeciesId(i as u16)).is_some() {
                return Err(GameError::Data(format!("duplicate species {}", s.name)));
            }
            species.push(SpeciesData {
                name: s.name,
                types: s.types,
                base_stats: s.base_stats,
                baseline: s.baseline,
                ability: s.ability,
                learnset,
            });
        }

        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Ruleset {
            name: raw.name,
            version: raw.version,
            chart,
            moves: raw.moves,
            species,
            move_index,
            species_index,
            hash,
        })
    }

    /// Hex SHA-256 of the source text.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn num_moves(&self) -> usize {
        self.moves.len()
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn move_data(&self, id: MoveId) -> &MoveData {
        &self.moves[id.0 as usize]
    }

    pub fn species(&self, id: SpeciesId) -> &SpeciesData {
        &self.species[id.0 as usize]
    }

    pub fn species_ids(&self) -> impl Iterator<Item = SpeciesId> {
        (0..self.species.len() as u16).map(SpeciesId)
    }

    pub fn move_id(&self, name: &str) -> Option<MoveId> {
        self.move_index.get(name).copied()
    }

    pub fn species_id(&self, name: &str) -> Option<SpeciesId> {
        self.species_index.get(name).copied()
    }

    /// Multiplier of one attacking type against one defending type.
    pub fn single_effectiveness(&self, attack: Type, defend: Type) -> f64 {
        self.chart[attack.index()][defend.index()] as f64
    }

    /// Product over all defending types.
    pub fn effectiveness(&self, attack: Type, defend: &[Type]) -> f64 {
        defend
            .iter()
            .map(|&d| self.single_effectiveness(attack, d))
            .product()
    }
}
