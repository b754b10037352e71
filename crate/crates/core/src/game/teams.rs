//! Bundled teams and seeded team generation.

use std::sync::OnceLock;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{
    Gender, PokemonConfig, StatAllocation, TeamConfig, MAX_MOVES, MAX_TOTAL_UNITS, MAX_UNITS_PER_STAT,
    NATURE_NAMES, TEAM_SIZE,
};
use super::data::{Item, Ruleset, Type};

const BUNDLED_FILES: [(&str, &str); 4] = [
    ("sunrise", include_str!("../../data/teams/01_sunrise.toml")),
    ("frostline", include_str!("../../data/teams/02_frostline.toml")),
    ("riptide", include_str!("../../data/teams/03_riptide.toml")),
    ("ironwall", include_str!("../../data/teams/04_ironwall.toml")),
];

/// The four hand-built teams shipped with the crate.
pub fn bundled() -> &'static [TeamConfig] {
    static CELL: OnceLock<Vec<TeamConfig>> = OnceLock::new();
    CELL.get_or_init(|| {
        BUNDLED_FILES
            .iter()
            .map(|(name, text)| {
                TeamConfig::from_text(text).unwrap_or_else(|e| panic!("bundled team {name}: {e}"))
            })
            .collect()
    })
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED_FILES.iter().map(|(n, _)| *n)
}

/// A legal random team. Every member knows at least two damaging moves.
pub fn generate(seed: u64) -> TeamConfig {
    let rs = Ruleset::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut species: Vec<_> = rs.species_ids().collect();
    species.shuffle(&mut rng);
    let members = species[..TEAM_SIZE]
        .iter()
        .map(|&sp| {
            let data = rs.species(sp);
            let (mut damaging, mut other): (Vec<_>, Vec<_>) =
                data.learnset.iter().partition(|&&m| rs.move_data(m).is_damaging());
            damaging.shuffle(&mut rng);
            other.shuffle(&mut rng);
            let mut moves: Vec<_> = damaging.drain(..2).collect();
            let mut rest: Vec<_> = damaging.into_iter().chain(other).collect();
            rest.shuffle(&mut rng);
            moves.extend(rest.into_iter().take(MAX_MOVES - 2));
            PokemonConfig {
                species: sp,
                moves,
                ability: data.ability,
                item: Some(*Item::ALL.choose(&mut rng).expect("items")),
                tera_type: *Type::ALL.choose(&mut rng).expect("types"),
                stats: random_allocation(&mut rng),
                gender: if rng.random_bool(0.5) { Gender::Male } else { Gender::Female },
            }
        })
        .collect();
    TeamConfig::new(members).expect("generated team is legal")
}

/// Random legal allocation that spends the whole budget.
pub fn random_allocation<R: Rng>(rng: &mut R) -> StatAllocation {
    let mut units = [0u8; 6];
    let mut left = MAX_TOTAL_UNITS;
    while left > 0 {
        let i = rng.random_range(0..6);
        if units[i] < MAX_UNITS_PER_STAT {
            let room = (MAX_UNITS_PER_STAT - units[i]) as u16;
            let add = rng.random_range(1..=room.min(left).min(32));
            units[i] += add as u8;
            left -= add;
        }
    }
    StatAllocation { units, nature: rng.random_range(0..NATURE_NAMES.len() as u8) }
}

/// A near-duplicate of `team`: one member gets a different item and one
/// move swapped for another learnset move.
pub fn variant(team: &TeamConfig, seed: u64) -> TeamConfig {
    let rs = Ruleset::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = team.members().to_vec();
    let k = rng.random_range(0..TEAM_SIZE);
    let m = &mut members[k];
    let items: Vec<_> = Item::ALL.iter().copied().filter(|&i| Some(i) != m.item).collect();
    m.item = Some(*items.choose(&mut rng).expect("items"));
    let spare: Vec<_> = rs
        .species(m.species)
        .learnset
        .iter()
        .copied()
        .filter(|id| !m.moves.contains(id))
        .collect();
    if let Some(&new) = spare.choose(&mut rng) {
        let slot = rng.random_range(0..m.moves.len());
        m.moves[slot] = new;
    }
    TeamConfig::new(members).expect("variant stays legal")
}

/// `n` teams: the bundled ones first, then generated teams seeded from `seed`.
pub fn pool(n: usize, seed: u64) -> Vec<TeamConfig> {
    let mut out: Vec<TeamConfig> = bundled().iter().take(n).cloned().collect();
    let mut k = 0u64;
    while out.len() < n {
        let t = generate(seed.wrapping_add(k));
        k += 1;
        if out.iter().all(|o| o.id() != t.id()) {
            out.push(t);
        }
    }
    out
}

/// `n` generated teams disjoint from `exclude` by id.
pub fn held_out(n: usize, seed: u64, exclude: &[TeamConfig]) -> Vec<TeamConfig> {
    let mut out: Vec<TeamConfig> = Vec::with_capacity(n);
    let mut k = 0u64;
    while out.len() < n {
        let t = generate(seed ^ 0x5eed_0000_0000 ^ k);
        k += 1;
        if exclude.iter().chain(out.iter()).all(|o| o.id() != t.id()) {
            out.push(t);
        }
    }
    out
}
