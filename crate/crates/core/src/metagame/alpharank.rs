//! Single-population Alpha-Rank over a win-rate matrix.
//!
//! States are monomorphic populations. From resident `i` a mutant `j`
//! arises with probability `1/(n-1)` and fixes with the Moran fixation
//! probability under logistic selection of intensity `alpha`. A mutation
//! floor `eps` mixes in neutral drift so the chain is irreducible.

use serde::{Deserialize, Serialize};

use super::{MetaError, MetaKind, MetaStrategy, PayoffMatrix, Ranking};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRankParams {
    pub alpha: f64,
    pub population: usize,
    /// Defaults to `1/n²` when unset.
    pub epsilon: Option<f64>,
}

impl Default for AlphaRankParams {
    fn default() -> Self {
        AlphaRankParams { alpha: 10.0, population: 50, epsilon: None }
    }
}

/// Intensities tried by [`alpha_sweep`].
pub const DEFAULT_ALPHAS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

/// Residual bound for accepting a stationary vector.
pub const MIX_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaRankResult {
    pub params: AlphaRankParams,
    pub stationary: MetaStrategy,
    pub ranking: Ranking,
    /// Row-stochastic transition matrix of the chain.
    pub transition: Vec<Vec<f64>>,
    /// `‖πM − π‖∞`.
    pub residual: f64,
}

/// Moran fixation probability of a single `mutant` among `resident`s.
pub fn fixation(win: &[Vec<f64>], resident: usize, mutant: usize, alpha: f64, m: usize) -> f64 {
    let (i, j) = (resident, mutant);
    let mf = (m - 1) as f64;
    let mut log_terms = Vec::with_capacity(m);
    let mut acc = 0.0;
    log_terms.push(0.0);
    for k in 1..m {
        let kf = k as f64;
        let f_mut = ((kf - 1.0) * win[j][j] + (m as f64 - kf) * win[j][i]) / mf;
        let f_res = (kf * win[i][j] + (m as f64 - kf - 1.0) * win[i][i]) / mf;
        acc -= alpha * (f_mut - f_res);
        log_terms.push(acc);
    }
    let top = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + log_terms.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    (-lse).exp()
}

pub fn transition_matrix(win: &[Vec<f64>], alpha: f64, m: usize, eps: f64) -> Vec<Vec<f64>> {
    let n = win.len();
    let neutral = 1.0 / m as f64;
    let eta = 1.0 / (n - 1) as f64;
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut out = 0.0;
        for j in 0..n {
            if i != j {
                t[i][j] = eta * ((1.0 - eps) * fixation(win, i, j, alpha, m) + eps * neutral);
                out += t[i][j];
            }
        }
        t[i][i] = 1.0 - out;
    }
    t
}

/// Stationary row vector of a stochastic matrix by a direct linear solve of
/// `π(M − I) = 0` with the normalization replacing the last equation.
pub fn stationary(t: &[Vec<f64>]) -> Result<Vec<f64>, MetaError> {
    let n = t.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let mut row: Vec<f64> = (0..n).map(|c| t[c][r] - if r == c { 1.0 } else { 0.0 }).collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];
    let mut x = solve(a.clone())?;
    // One step of iterative refinement.
    let resid: Vec<f64> = a.iter().map(|row| row[n] - (0..n).map(|c| row[c] * x[c]).sum::<f64>()).collect();
    let mut ra = a;
    for (row, r) in ra.iter_mut().zip(&resid) {
        row[n] = *r;
    }
    let dx = solve(ra)?;
    for (v, d) in x.iter_mut().zip(dx) {
        *v = (*v + d).max(0.0);
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    Ok(x)
}

fn solve(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>, MetaError> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).expect("non-empty");
        if a[piv][col].abs() < 1e-300 {
            return Err(MetaError::Convergence { residual: f64::INFINITY, best: vec![1.0 / n as f64; n] });
        }
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    Ok(x)
}

pub fn residual(pi: &[f64], t: &[Vec<f64>]) -> f64 {
    (0..pi.len())
        .map(|j| ((0..pi.len()).map(|i| pi[i] * t[i][j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max)
}

pub fn alpha_rank(matrix: &PayoffMatrix, params: AlphaRankParams) -> Result<AlphaRankResult, MetaError> {
    matrix.validate()?;
    let n = matrix.len();
    if n < 2 {
        return Err(MetaError::Input("Alpha-Rank needs at least two policies".into()));
    }
    let eps = params.epsilon.unwrap_or(1.0 / (n * n) as f64);
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(MetaError::Input("alpha must be positive".into()));
    }
    if params.population < 2 {
        return Err(MetaError::Input("population size must be at least 2".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MetaError::Input("mutation rate must lie in (0, 1)".into()));
    }
    let t = transition_matrix(&matrix.win, params.alpha, params.population, eps);
    let pi = stationary(&t)?;
    let res = residual(&pi, &t);
    if !(res < MIX_TOL) || pi.iter().any(|p| !p.is_finite()) {
        return Err(MetaError::Convergence { residual: res, best: pi });
    }
    Ok(AlphaRankResult {
        params: AlphaRankParams { epsilon: Some(eps), ..params },
        ranking: Ranking::from_scores(&matrix.ids, &pi),
        stationary: MetaStrategy { probs: pi, kind: MetaKind::AlpharankStationary },
        transition: t,
        residual: res,
    })
}

/// Results for each intensity and the index of the primary one: the
/// largest alpha whose chain still produced an accurate stationary vector.
pub fn alpha_sweep(
    matrix: &PayoffMatrix,
    population: usize,
    epsilon: Option<f64>,
    alphas: &[f64],
) -> (Vec<Result<AlphaRankResult, MetaError>>, Option<usize>) {
    let results: Vec<_> = alphas.iter().map(|&alpha| alpha_rank(matrix, AlphaRankParams { alpha, population, epsilon })).collect();
    let primary = (0..results.len())
        .filter(|&i| results[i].is_ok())
        .max_by(|&a, &b| alphas[a].total_cmp(&alphas[b]));
    (results, primary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn neutral_fixation_is_one_over_m() {
        let w = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        assert!((fixation(&w, 0, 1, 10.0, 50) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn transitive_order() {
        let w = vec![vec![0.5, 0.9, 0.9], vec![0.1, 0.5, 0.9], vec![0.1, 0.1, 0.5]];
        let m = PayoffMatrix::from_rows(vec!["A".into(), "B".into(), "C".into()], w).unwrap();
        let r = alpha_rank(&m, AlphaRankParams::default()).unwrap();
        assert_eq!(r.ranking.ids(), ["A", "B", "C"]);
    }

    #[test]
    fn cyclic_is_uniform() {
        let w = vec![vec![0.5, 0.0, 1.0], vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.5]];
        let r = alpha_rank(&PayoffMatrix::from_rows(ids(3), w).unwrap(), AlphaRankParams::default()).unwrap();
        assert!(r.stationary.probs.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-6));
    }

    #[test]
    fn sweep_picks_largest_alpha() {
        let w = vec![vec![0.5, 0.7], vec![0.3, 0.5]];
        let (res, primary) = alpha_sweep(&PayoffMatrix::from_rows(ids(2), w).unwrap(), 50, None, &DEFAULT_ALPHAS);
        assert_eq!(res.len(), 4);
        assert_eq!(primary, Some(3));
    }

    #[test]
    fn invalid_parameters() {
        let m = PayoffMatrix::from_rows(ids(2), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let bad = AlphaRankParams { alpha: -1.0, ..AlphaRankParams::default() };
        assert!(matches!(alpha_rank(&m, bad), Err(MetaError::Input(_))));
    }
}
