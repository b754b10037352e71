//! Text report of the size analysis.

use std::fmt::Write as _;

use super::*;

/// Reference figures, with the digits they are printed at.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyFigure {
    pub label: &'static str,
    pub value: String,
}

pub fn key_figures() -> Vec<KeyFigure> {
    let fig = |label, value: String| KeyFigure { label, value };
    let with = slot_outcomes(3, 4, 2, true);
    let without = slot_outcomes(3, 4, 2, false);
    let (per, team) = config_space(&ConfigParams::rounded());
    let table = comparison_table();
    let find = |g: &str| table.iter().find(|r| r.game == g).expect("table row").size.clone();
    vec![
        fig("ev_spreads", bounded_compositions(127, 6, 63).to_string()),
        fig("slot_outcomes_tera", with.to_string()),
        fig("slot_outcomes_no_tera", without.to_string()),
        fig("turn_branching", turn_branching(with, without).sci(4)),
        fig("effective_natures", effective_natures().to_string()),
        fig("info_set_revealed", info_set_size(6, false).sci(4)),
        fig("info_set_hidden_bench", info_set_size(6, true).sci(4)),
        fig("per_battler_configs", per.sci(4)),
        fig("team_configs", team.sci(4)),
        fig("preview_decisions", preview_decisions(6, 4, 2).to_string()),
        fig("starcraft", find("StarCraft II").to_string()),
        fig("dota_single_pool", find("Dota 2 (single pool)").sci(3)),
    ]
}

/// Comparison table followed by every step of the derivation.
pub fn full_report() -> String {
    let mut o = String::new();
    let w = &mut o;
    let line = |w: &mut String, s: String| {
        w.push_str(&s);
        w.push('\n');
    };

    line(w, "Configuration space of benchmark games".into());
    line(w, format!("{:<28} {:<30} {:>14}  {}", "game", "formula", "size", "note"));
    for r in comparison_table() {
        let size = if r.size.digits().is_some_and(|d| d <= 6) { r.size.to_string() } else { r.size.sci(4) };
        line(w, format!("{:<28} {:<30} {:>14}  {}", r.game, r.formula, size, r.note.unwrap_or_default()));
    }
    line(w, String::new());

    line(w, "Stat spreads".into());
    line(w, "  EV budget: 510 // 4 = 127 units".into());
    line(w, "  per-stat cap: 255 // 4 = 63 units".into());
    let spreads = Magnitude::exact(bounded_compositions(127, 6, 63));
    line(w, "  x1 + ... + x6 = 127, 0 <= xi <= 63".into());
    for k in 0..=2u64 {
        let term = binomial(6, k) * binomial(127 - k * 64 + 5, 5);
        line(w, format!("    k={k}: {}C(6,{k}) C({},5) = {}", if k % 2 == 1 { "-" } else { "+" }, 127 - k * 64 + 5, Magnitude::exact(term).grouped().unwrap_or_default()));
    }
    line(w, format!("  spreads = {}", spreads.grouped().unwrap_or_default()));
    line(w, format!("  natures: {NATURE_PAIRS} pairs, {} effect-distinct", effective_natures()));
    let stats = Magnitude::exact(stat_configurations());
    line(w, format!("  stat configurations = 21 * 246,774,528 = {} ({})", stats.grouped().unwrap_or_default(), stats.sci(4)));
    line(w, String::new());

    line(w, "Turn branching".into());
    line(w, format!("  move outcomes = {DAMAGE_ROLLS} rolls * {OUTCOME_CLASSES} classes = {MOVE_OUTCOMES}"));
    let with = slot_outcomes(3, 4, 2, true);
    let without = slot_outcomes(3, 4, 2, false);
    line(w, format!("  with tera:    2 * 80 * 3 moves * 4 targets + 2 switches = {with}"));
    line(w, format!("  without tera: 80 * 3 * 4 + 2 = {without}"));
    let b = turn_branching(with, without);
    line(w, format!("  per turn: {with}^2 * {without}^2 = {} = {}", b.grouped().unwrap_or_default(), b.sci(4)));
    line(w, String::new());

    line(w, "Information sets".into());
    let rev = info_set_size(6, false);
    let hid = info_set_size(6, true);
    line(w, format!("  all four picks revealed: (21 * 246,774,528)^6 = {} ({} digits)", rev.sci(4), rev.digits().unwrap_or(0)));
    line(w, format!("  back pair hidden: C(4,2) * that = 6 * {} = {}", rev.sci(4), hid.sci(4)));
    line(w, format!("  variant with exponent 4: {}", info_set_size(4, false).sci(4)));
    line(w, String::new());

    line(w, "Team configurations".into());
    let (per_p, team_p) = config_space(&ConfigParams::rounded());
    let (per_x, team_x) = config_space(&ConfigParams::exact());
    line(w, format!("  C(100,4) = {}", Magnitude::exact(binomial(100, 4)).grouped().unwrap_or_default()));
    line(w, format!("  per battler: C(100,4) * 3 * 223 * 2 * 19 * 5.182e9 = {}", per_p.sci(4)));
    line(w, format!("  C(750,6) = {}", Magnitude::exact(binomial(750, 6)).sci(4)));
    line(w, format!("  team: C(750,6) * ({})^6 = {}", per_p.sci(4), team_p.sci(4)));
    line(w, format!("  with the unrounded stat count: per battler {}, team {}", per_x.sci(4), team_x.sci(4)));
    line(w, format!("  team preview decisions: C(6,2) * C(4,2) = {}", preview_decisions(6, 4, 2)));
    line(w, String::new());

    line(w, "Key figures".into());
    for f in key_figures() {
        let _ = writeln!(w, "  {:<24} {}", f.label, f.value);
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_figures_match_reference_values() {
        let got: Vec<(&str, String)> = key_figures().into_iter().map(|f| (f.label, f.value)).collect();
        let want = [
            ("ev_spreads", "246774528"),
            ("slot_outcomes_tera", "1922"),
            ("slot_outcomes_no_tera", "962"),
            ("turn_branching", "3.419e12"),
            ("effective_natures", "21"),
            ("info_set_revealed", "1.937e58"),
            ("info_set_hidden_bench", "1.162e59"),
            ("per_battler_configs", "5.166e20"),
            ("team_configs", "4.604e138"),
            ("preview_decisions", "90"),
            ("starcraft", "81"),
            ("dota_single_pool", "4.85e16"),
        ];
        for ((l, v), (wl, wv)) in got.iter().zip(want) {
            assert_eq!((*l, v.as_str()), (wl, wv));
        }
    }
}
