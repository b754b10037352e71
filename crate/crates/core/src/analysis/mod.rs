//! Combinatorial size of the game: stat spreads, branching, information
//! sets and configuration spaces, with exact big-integer arithmetic.

pub mod report;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};

pub use report::full_report;

/// Damage rolls per damaging move.
pub const DAMAGE_ROLLS: u64 = 16;
/// Outcome classes per roll: hit, critical hit, miss, secondary effect, no effect.
pub const OUTCOME_CLASSES: u64 = 5;
/// Distinct outcomes of one move use.
pub const MOVE_OUTCOMES: u64 = DAMAGE_ROLLS * OUTCOME_CLASSES;

/// A count, exact when known, with a base-10 logarithm for display.
#[derive(Clone, Debug, PartialEq)]
pub struct Magnitude {
    pub exact: Option<BigUint>,
    pub log10: f64,
}

impl Magnitude {
    pub fn exact(n: BigUint) -> Magnitude {
        let log10 = big_log10(&n);
        Magnitude { exact: Some(n), log10 }
    }

    pub fn from_u64(n: u64) -> Magnitude {
        Magnitude::exact(BigUint::from(n))
    }

    pub fn approx(log10: f64) -> Magnitude {
        Magnitude { exact: None, log10 }
    }

    /// Number of decimal digits of the exact value.
    pub fn digits(&self) -> Option<usize> {
        self.exact.as_ref().map(|n| n.to_str_radix(10).len())
    }

    /// Mantissa digits and exponent rounded half-up to `sig` significant
    /// digits. Exact values round from their decimal expansion.
    pub fn scientific(&self, sig: usize) -> (String, i64) {
        let sig = sig.max(1);
        match &self.exact {
            Some(n) => round_digits(&n.to_str_radix(10), sig),
            None => {
                let e = self.log10.floor();
                let m = 10f64.powf(self.log10 - e);
                let s = format!("{:.*}", sig - 1, m).replace('.', "");
                if s.len() > sig {
                    (with_point(&format!("1{}", "0".repeat(sig - 1))), e as i64 + 1)
                } else {
                    (with_point(&s), e as i64)
                }
            }
        }
    }

    /// `3.419e12` style text.
    pub fn sci(&self, sig: usize) -> String {
        let (m, e) = self.scientific(sig);
        format!("{m}e{e}")
    }

    /// Exact value with thousands separators.
    pub fn grouped(&self) -> Option<String> {
        self.exact.as_ref().map(|n| group(&n.to_str_radix(10)))
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.grouped() {
            Some(g) if g.len() <= 15 => f.write_str(&g),
            _ => f.write_str(&self.sci(4)),
        }
    }
}

fn with_point(digits: &str) -> String {
    if digits.len() == 1 {
        digits.to_string()
    } else {
        format!("{}.{}", &digits[..1], &digits[1..])
    }
}

fn round_digits(decimal: &str, sig: usize) -> (String, i64) {
    let exp = decimal.len() as i64 - 1;
    if decimal.len() <= sig {
        let padded = format!("{decimal}{}", "0".repeat(sig - decimal.len()));
        return (with_point(&padded), exp);
    }
    let mut head: Vec<u8> = decimal.as_bytes()[..sig].iter().map(|b| b - b'0').collect();
    if decimal.as_bytes()[sig] >= b'5' {
        let mut i = sig;
        loop {
            if i == 0 {
                head.insert(0, 1);
                head.pop();
                let s: String = head.iter().map(|d| (d + b'0') as char).collect();
                return (with_point(&s), exp + 1);
            }
            i -= 1;
            if head[i] == 9 {
                head[i] = 0;
            } else {
                head[i] += 1;
                break;
            }
        }
    }
    let s: String = head.iter().map(|d| (d + b'0') as char).collect();
    (with_point(&s), exp)
}

fn group(decimal: &str) -> String {
    let mut out = String::new();
    for (i, c) in decimal.chars().enumerate() {
        if i > 0 && (decimal.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn big_log10(n: &BigUint) -> f64 {
    let s = n.to_str_radix(10);
    if s == "0" {
        return f64::NEG_INFINITY;
    }
    let head: f64 = s[..s.len().min(17)].parse().expect("digits");
    head.log10() + (s.len() - s.len().min(17)) as f64
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Solutions of x_1 + ... + x_parts = total with 0 <= x_i <= cap, by
/// inclusion-exclusion over the parts that exceed the cap.
pub fn bounded_compositions(total: u64, parts: u64, cap: u64) -> BigUint {
    if parts == 0 {
        return BigUint::from((total == 0) as u32);
    }
    let mut sum = BigInt::ZERO;
    for k in 0..=parts {
        let Some(rest) = total.checked_sub(k * (cap + 1)) else { break };
        let term = BigInt::from(binomial(parts, k) * binomial(rest + parts - 1, parts - 1));
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.try_into().expect("inclusion-exclusion count is non-negative")
}

/// Effect-distinct natures: every (raised, lowered) pair over the five
/// non-HP stats, where equal pairs collapse to the neutral effect.
pub fn effective_natures() -> usize {
    let mut effects = BTreeSet::new();
    for up in 0..5 {
        for down in 0..5 {
            let mut m = [10i32; 5];
            m[up] += 1;
            m[down] -= 1;
            effects.insert(m);
        }
    }
    effects.len()
}

/// Nature pairs before collapsing duplicates.
pub const NATURE_PAIRS: usize = 25;

/// Outcomes for one active slot: every move, target and roll outcome, doubled
/// when terastallizing is still possible, plus the available switches.
pub fn slot_outcomes(n_moves: u64, n_targets: u64, n_switches: u64, tera: bool) -> u64 {
    let moves = MOVE_OUTCOMES * n_moves * n_targets;
    if tera {
        2 * moves + n_switches
    } else {
        moves + n_switches
    }
}

/// Worst-case branching of one turn over the four active slots, two counted
/// with terastallizing available and two without.
pub fn turn_branching(with_tera: u64, without_tera: u64) -> Magnitude {
    let w = BigUint::from(with_tera);
    let wo = BigUint::from(without_tera);
    Magnitude::exact(&w * &w * &wo * &wo)
}

/// Stat configurations per battler: natures times spreads.
pub fn stat_configurations() -> BigUint {
    BigUint::from(effective_natures() as u64) * bounded_compositions(127, 6, 63)
}

/// Opponent states indistinguishable to a player. With `bench_hidden` the
/// opponent's two unrevealed back picks multiply the count by C(4, 2).
pub fn info_set_size(n_mons: u32, bench_hidden: bool) -> Magnitude {
    let base = stat_configurations().pow(n_mons);
    Magnitude::exact(if bench_hidden { base * binomial(4, 2) } else { base })
}

/// Inputs of the team configuration count.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigParams {
    pub learnset: u64,
    pub moves: u64,
    pub abilities: u64,
    pub items: u64,
    pub genders: u64,
    pub tera_types: u64,
    pub stat_configs: BigUint,
    pub roster: u64,
    pub team_size: u64,
}

impl ConfigParams {
    /// The rounded chain, which multiplies by the stat count rounded to
    /// four significant digits (5.182e9).
    pub fn rounded() -> ConfigParams {
        ConfigParams { stat_configs: BigUint::from(5_182_000_000u64), ..ConfigParams::exact() }
    }

    /// Same estimates with the unrounded stat count.
    pub fn exact() -> ConfigParams {
        ConfigParams {
            learnset: 100,
            moves: 4,
            abilities: 3,
            items: 223,
            genders: 2,
            tera_types: 19,
            stat_configs: stat_configurations(),
            roster: 750,
            team_size: 6,
        }
    }
}

/// (per-battler, per-team) configuration counts.
pub fn config_space(p: &ConfigParams) -> (Magnitude, Magnitude) {
    let per = binomial(p.learnset, p.moves) * p.abilities * p.items * p.genders * p.tera_types * &p.stat_configs;
    let team = binomial(p.roster, p.team_size) * per.pow(p.team_size as u32);
    (Magnitude::exact(per), Magnitude::exact(team))
}

/// Team-preview decisions: choose the leads, then the back pair.
pub fn preview_decisions(team: u64, bring: u64, active: u64) -> u64 {
    let c = |n, k| u64::try_from(binomial(n, k)).expect("small binomial");
    c(team, active) * c(team - active, bring - active)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameRow {
    pub game: String,
    pub formula: String,
    pub size: Magnitude,
    pub note: Option<String>,
}

/// Initial configuration spaces of benchmark games.
pub fn comparison_table() -> Vec<GameRow> {
    let row = |g: &str, f: &str, size: Magnitude, note: Option<&str>| GameRow {
        game: g.into(),
        formula: f.into(),
        size,
        note: note.map(String::from),
    };
    let mut poker = BigUint::from(1u32);
    for i in 0..10 {
        poker *= binomial(52 - 2 * i, 2);
    }
    let (_, vgc) = config_space(&ConfigParams::rounded());
    vec![
        row("Chess", "white or black", Magnitude::from_u64(2), None),
        row("Go", "black or white", Magnitude::from_u64(2), None),
        row("Poker (10 players)", "prod_{i=0..9} C(52-2i, 2)", Magnitude::exact(poker), None),
        row("StarCraft II", "9 maps * 3 races^2", Magnitude::from_u64(9 * 3u64.pow(2)), None),
        row(
            "Dota 2 (doubled pool)",
            "C(2*126, 5) * C(2*121, 5)",
            Magnitude::exact(binomial(252, 5) * binomial(242, 5)),
            Some("differs from the single-pool count"),
        ),
        row(
            "Dota 2 (single pool)",
            "C(126, 5) * C(121, 5)",
            Magnitude::exact(binomial(126, 5) * binomial(121, 5)),
            Some("differs from the doubled-pool count"),
        ),
        row("VGC", "C(750, 6) * per-battler^6", vgc, None),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(total: usize, parts: usize, cap: usize) -> BigUint {
        let mut ways = vec![BigUint::ZERO; total + 1];
        ways[0] = BigUint::from(1u32);
        for _ in 0..parts {
            let mut next = vec![BigUint::ZERO; total + 1];
            for (t, w) in ways.iter().enumerate() {
                for x in 0..=cap.min(total - t) {
                    next[t + x] += w;
                }
            }
            ways = next;
        }
        ways[total].clone()
    }

    #[test]
    fn compositions_match_dp() {
        for t in 0..=20 {
            for p in 0..=4 {
                for c in 0..=6 {
                    assert_eq!(bounded_compositions(t, p, c), dp(t as usize, p as usize, c as usize), "{t} {p} {c}");
                }
            }
        }
        assert_eq!(bounded_compositions(127, 6, 63), BigUint::from(246_774_528u64));
        assert_eq!(bounded_compositions(0, 5, 3), BigUint::from(1u32));
    }

    #[test]
    fn rounding_is_half_up_with_carry() {
        assert_eq!(Magnitude::from_u64(3_418_700_000_000).sci(4), "3.419e12");
        assert_eq!(Magnitude::from_u64(99_960).sci(3), "1.00e5");
        assert_eq!(Magnitude::from_u64(12).sci(4), "1.200e1");
        assert_eq!(Magnitude::from_u64(246_774_528).grouped().unwrap(), "246,774,528");
        assert_eq!(Magnitude::approx(2.0f64.log10() + 5.0).sci(3), "2.00e5");
    }

    #[test]
    fn exponent_matches_digit_count() {
        for m in [info_set_size(6, false), info_set_size(6, true), config_space(&ConfigParams::rounded()).1] {
            let (_, e) = m.scientific(4);
            assert_eq!(e as usize + 1, m.digits().unwrap());
            assert_eq!(m.log10.floor() as i64, e);
        }
    }

    #[test]
    fn small_counts() {
        assert_eq!(effective_natures(), 21);
        assert_eq!(slot_outcomes(3, 4, 2, true), 1922);
        assert_eq!(slot_outcomes(3, 4, 2, false), 962);
        assert_eq!(preview_decisions(6, 4, 2), 90);
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(3, 5), BigUint::ZERO);
    }
}
