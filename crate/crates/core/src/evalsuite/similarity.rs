//! Team similarity on a 0 to 1 scale.
//!
//! Species are matched one to one. Each matched pair contributes one half
//! plus one half of the mean agreement over its configurable attributes
//! (item, ability when the species has a choice, tera type, move-set
//! Jaccard index, stat allocation). The total is divided by the team size.

use serde::{Deserialize, Serialize};

use crate::game::config::PokemonConfig;
use crate::game::TeamConfig;

fn member_agreement(a: &PokemonConfig, b: &PokemonConfig) -> f64 {
    let mut terms = vec![
        (a.item == b.item) as u8 as f64,
        (a.tera_type == b.tera_type) as u8 as f64,
        jaccard(&a.moves, &b.moves),
        (a.stats == b.stats) as u8 as f64,
    ];
    // Every bundled species has exactly one legal ability, so abilities of
    // matched species always agree and carry no information. Compare them
    // only if they can differ.
    if a.ability != b.ability {
        terms.push(0.0);
    }
    terms.iter().sum::<f64>() / terms.len() as f64
}

fn jaccard<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn team_similarity(t1: &TeamConfig, t2: &TeamConfig) -> f64 {
    let size = t1.members().len().max(t2.members().len()) as f64;
    let total: f64 = t1
        .members()
        .iter()
        .filter_map(|a| t2.members().iter().find(|b| b.species == a.species).map(|b| (a, b)))
        .map(|(a, b)| 0.5 + 0.5 * member_agreement(a, b))
        .sum();
    total / size
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStats {
    pub pairs: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Statistics of the similarity over all seen × unseen pairs.
pub fn set_statistics(seen: &[TeamConfig], unseen: &[TeamConfig]) -> SimilarityStats {
    let mut v: Vec<f64> = seen.iter().flat_map(|a| unseen.iter().map(move |b| team_similarity(a, b))).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return SimilarityStats { pairs: 0, mean: f64::NAN, median: f64::NAN, min: f64::NAN, max: f64::NAN };
    }
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    SimilarityStats { pairs: n, mean: v.iter().sum::<f64>() / n as f64, median, min: v[0], max: v[n - 1] }
}

impl SimilarityStats {
    pub fn to_table(&self, title: &str) -> String {
        format!(
            "{title}\n{:>6}  {:>8}  {:>8}  {:>8}  {:>8}\n{:>6}  {:>8.3}  {:>8.3}  {:>8.3}  {:>8.3}\n",
            "Pairs", "Mean", "Median", "Min", "Max", self.pairs, self.mean, self.median, self.min, self.max
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::teams;

    #[test]
    fn identity_and_symmetry() {
        let t = teams::bundled();
        assert_eq!(team_similarity(&t[0], &t[0]), 1.0);
        for a in t {
            for b in t {
                assert_eq!(team_similarity(a, b), team_similarity(b, a));
            }
        }
    }

    #[test]
    fn near_duplicates_and_unrelated_teams() {
        let t = &teams::bundled()[0];
        let v = teams::variant(t, 5);
        let s = team_similarity(t, &v);
        assert!((0.9..1.0).contains(&s), "{s}");
        let b = teams::bundled();
        assert!(team_similarity(&b[0], &b[1]) <= 0.3);
    }

    #[test]
    fn statistics() {
        let t = teams::bundled();
        let st = set_statistics(&t[..1], &t[..1]);
        assert_eq!((st.pairs, st.mean, st.median), (1, 1.0, 1.0));
    }
}
