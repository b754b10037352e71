//! Zero-sum matrix games solved exactly by linear programming.
//!
//! The payoffs are shifted to be positive and the column player's program
//! `max 1ᵀv s.t. Bv ≤ 1, v ≥ 0` is solved with a dense tableau simplex under
//! Bland's rule. The row strategy is read from the optimal dual prices.

use super::{MetaError, MetaKind, MetaStrategy};

#[derive(Clone, Debug, PartialEq)]
pub struct NashSolution {
    /// Maximin strategy for the row player.
    pub row: MetaStrategy,
    /// Minimax strategy for the column player.
    pub col: Vec<f64>,
    pub value: f64,
    /// Best-response gap `max_i (Ay)_i - min_j (xᵀA)_j`; zero at equilibrium.
    pub gap: f64,
}

const EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

/// Solve `max_x min_j (xᵀA)_j` for a square payoff matrix `a`.
///
/// Returns a convergence error if the certificate gap exceeds `tol`.
pub fn solve_zero_sum_nash(a: &[Vec<f64>], tol: f64) -> Result<NashSolution, MetaError> {
    let n = a.len();
    if n == 0 {
        return Err(MetaError::Input("empty payoff matrix".into()));
    }
    if a.iter().any(|r| r.len() != n) {
        return Err(MetaError::Input("payoff matrix must be square".into()));
    }
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(MetaError::Input("payoff matrix has non-finite entries".into()));
    }
    let min = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    // Tableau rows 0..n are constraints, row n is the objective.
    let width = 2 * n + 1;
    let mut t = vec![vec![0.0; width]; n + 1];
    for i in 0..n {
        for j in 0..n {
            t[i][j] = a[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][2 * n] = 1.0;
    }
    for j in 0..n {
        t[n][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..2 * n).collect();

    let mut pivots = 0;
    while let Some(enter) = (0..2 * n).find(|&j| t[n][j] < -EPS) {
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(MetaError::Convergence { residual: f64::INFINITY, best: vec![1.0 / n as f64; n] });
        }
        let mut leave: Option<usize> = None;
        for i in 0..n {
            if t[i][enter] > EPS {
                let r = t[i][2 * n] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let rl = t[l][2 * n] / t[l][enter];
                        if r < rl - EPS || ((r - rl).abs() <= EPS && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        // Bounded because every column of B is strictly positive.
        let leave = leave.expect("positive payoffs keep the program bounded");
        let p = t[leave][enter];
        for x in &mut t[leave] {
            *x /= p;
        }
        let prow = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave {
                let f = row[enter];
                if f != 0.0 {
                    for (x, &y) in row.iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                }
            }
        }
        basis[leave] = enter;
    }

    let mut v = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            v[b] = t[i][2 * n];
        }
    }
    let u: Vec<f64> = (0..n).map(|i| t[n][n + i].max(0.0)).collect();
    let row = normalize(u);
    let col = normalize(v);
    let lower = (0..n).map(|j| (0..n).map(|i| row[i] * a[i][j]).sum::<f64>()).fold(f64::INFINITY, f64::min);
    let upper = (0..n).map(|i| (0..n).map(|j| a[i][j] * col[j]).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
    let gap = upper - lower;
    if gap > tol {
        return Err(MetaError::Convergence { residual: gap, best: row });
    }
    Ok(NashSolution { value: 0.5 * (upper + lower), row: MetaStrategy { probs: row, kind: MetaKind::Nash }, col, gap })
}

fn normalize(mut x: Vec<f64>) -> Vec<f64> {
    for v in &mut x {
        if *v < EPS {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rock_paper_scissors_is_uniform() {
        let a = vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]];
        let s = solve_zero_sum_nash(&a, 1e-9).unwrap();
        assert!(s.row.probs.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-9));
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn dominant_strategy() {
        let s = solve_zero_sum_nash(&[vec![0.0, 1.0], vec![-1.0, 0.0]], 1e-9).unwrap();
        assert_eq!(s.row.probs, vec![1.0, 0.0]);
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(solve_zero_sum_nash(&[], 1e-9), Err(MetaError::Input(_))));
        assert!(matches!(solve_zero_sum_nash(&[vec![1.0, 2.0]], 1e-9), Err(MetaError::Input(_))));
        assert!(matches!(solve_zero_sum_nash(&[vec![f64::NAN]], 1e-9), Err(MetaError::Input(_))));
    }
}
