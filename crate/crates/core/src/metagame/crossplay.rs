//! Cross-play estimation with paired seeds and normal-approximation
//! confidence intervals.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{MetaError, PayoffMatrix};
use crate::agents::{play_game, Policy};
use crate::game::{GameError, GameOptions, Player, TeamConfig};
use crate::seeds;

/// 95% normal-approximation halfwidth for a proportion.
pub fn halfwidth(n: u64, p: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone, Debug)]
pub struct CrossplaySpec {
    pub teams: Vec<Arc<TeamConfig>>,
    pub n_games: u64,
    pub seed: u64,
    pub options: GameOptions,
}

#[derive(Clone, Debug)]
pub struct Crossplay {
    pub matrix: PayoffMatrix,
    pub halfwidth: Vec<Vec<f64>>,
}

/// Wins of `a` (draws count one half) over `n` games against `b`.
///
/// `draw(game_seed)` returns `[team of a, team of b]`. Seats alternate: `a`
/// is player one in even-numbered games. Game `k` uses seed
/// `derive(seed, k)`, so the same schedule is replayed for every pairing.
pub fn head_to_head<F>(a: &dyn Policy, b: &dyn Policy, draw: F, n: u64, seed: u64, options: &GameOptions) -> Result<f64, GameError>
where
    F: Fn(u64) -> Result<[Arc<TeamConfig>; 2], GameError> + Sync,
{
    let scores: Result<Vec<f64>, GameError> = (0..n)
        .into_par_iter()
        .map(|k| {
            let gs = seeds::derive(seed, k);
            let [ta, tb] = draw(gs)?;
            let rec = if k % 2 == 0 {
                play_game(a, b, [ta, tb], options.clone(), gs)?
            } else {
                play_game(b, a, [tb, ta], options.clone(), gs)?
            };
            let me = if k % 2 == 0 { Player::P1 } else { Player::P2 };
            Ok((rec.reward(me) + 1.0) / 2.0)
        })
        .collect();
    Ok(scores?.iter().sum())
}

/// Uniform team pair for a game seed, honouring the mirror-match toggle.
pub fn uniform_pair(teams: &[Arc<TeamConfig>], options: &GameOptions, game_seed: u64) -> Result<[Arc<TeamConfig>; 2], GameError> {
    if teams.is_empty() {
        return Err(GameError::Config("empty team set".into()));
    }
    if options.disable_mirror_matches && teams.len() < 2 {
        return Err(GameError::Config("mirror matches are disabled but only one team is available".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(game_seed, 0x7ea));
    loop {
        let i = rng.random_range(0..teams.len());
        let j = rng.random_range(0..teams.len());
        if !(options.disable_mirror_matches && teams[i].id() == teams[j].id()) {
            return Ok([teams[i].clone(), teams[j].clone()]);
        }
    }
}

/// Estimate the full win-rate matrix. Each unordered pair plays `n_games`;
/// the transposed entry is its complement.
pub fn estimate_crossplay(pool: &[&dyn Policy], spec: &CrossplaySpec) -> Result<Crossplay, MetaError> {
    if pool.is_empty() {
        return Err(MetaError::Config("empty policy pool".into()));
    }
    if spec.teams.is_empty() {
        return Err(MetaError::Config("empty team set".into()));
    }
    if spec.n_games == 0 {
        return Err(MetaError::Config("n_games must be at least 1".into()));
    }
    let n = pool.len();
    let mut ids: Vec<String> = Vec::with_capacity(n);
    for p in pool {
        let base = p.name();
        let mut id = base.clone();
        let mut k = 2;
        while ids.contains(&id) {
            id = format!("{base}#{k}");
            k += 1;
        }
        ids.push(id.replace(char::is_whitespace, "_"));
    }
    let mut matrix = PayoffMatrix::new(ids);
    matrix.seed = Some(spec.seed);
    let mut hw = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let draw = |gs| uniform_pair(&spec.teams, &spec.options, gs);
            let wins = head_to_head(pool[i], pool[j], draw, spec.n_games, spec.seed, &spec.options)?;
            let p = wins / spec.n_games as f64;
            matrix.win[i][j] = p;
            matrix.win[j][i] = 1.0 - p;
            matrix.games[i][j] = spec.n_games;
            matrix.games[j][i] = spec.n_games;
            hw[i][j] = halfwidth(spec.n_games, p);
            hw[j][i] = hw[i][j];
        }
    }
    Ok(Crossplay { matrix, halfwidth: hw })
}
