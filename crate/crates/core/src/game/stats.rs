//! Level-50 stat computation.

use serde::{Deserialize, Serialize};

use super::config::{nature_effect, PokemonConfig};
use super::data::{Ruleset, Stat};
use super::GameError;

pub const LEVEL: u32 = 50;
/// Individual values are fixed at the maximum.
pub const IV: u32 = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatBlock(pub [u16; 6]);

impl StatBlock {
    pub fn get(&self, stat: Stat) -> u16 {
        self.0[stat.index()]
    }
}

/// Nature multiplier in percent for one stat.
pub fn nature_percent(nature: u8, stat: Stat) -> u32 {
    match nature_effect(nature) {
        Some((up, _)) if up == stat => 110,
        Some((_, down)) if down == stat => 90,
        _ => 100,
    }
}

/// Stat block for a configured battler.
///
/// `units` is the effort allocation in multiples of four effort points, so
/// `floor(effort / 4) == units`.
pub fn compute_stats(cfg: &PokemonConfig) -> Result<StatBlock, GameError> {
    cfg.stats.validate()?;
    let rs = Ruleset::bundled();
    let base = rs.species(cfg.species).base_stats;
    Ok(stat_block(base, cfg.stats.units, cfg.stats.nature))
}

pub fn stat_block(base: [u16; 6], units: [u8; 6], nature: u8) -> StatBlock {
    let mut out = [0u16; 6];
    for stat in Stat::ALL.iter().copied() {
        let i = stat.index();
        let core = (2 * base[i] as u32 + IV + units[i] as u32) * LEVEL / 100;
        out[i] = if stat == Stat::Hp {
            core + LEVEL + 10
        } else {
            (core + 5) * nature_percent(nature, stat) / 100
        } as u16;
    }
    StatBlock(out)
}
