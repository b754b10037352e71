//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls the routine it checks.

#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arena::agents::{Arch, Network, RandomPlayer};
use arena::game::{teams, GameOptions};
use arena::learn::ppo::{minibatch_loss_grad, PpoDiagnostics};
use arena::learn::{collect_rollouts, Hyperparameters, OpponentSampler, TeamSampler};

pub mod legality;

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// Indifference solve on supports: weights over `support` making the payoff
/// against every index of `other` equal. `pay(s, o)` is the payoff.
fn indifferent(support: &[usize], other: &[usize], pay: impl Fn(usize, usize) -> f64) -> Option<(Vec<f64>, f64)> {
    let k = support.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (r, &o) in other.iter().enumerate() {
        for (c, &s) in support.iter().enumerate() {
            a[r][c] = pay(s, o);
        }
        a[r][k] = -1.0;
    }
    for c in 0..k {
        a[k][c] = 1.0;
    }
    b[k] = 1.0;
    let x = solve_linear(a, b)?;
    let v = x[k];
    Some((x[..k].to_vec(), v))
}

/// Game value of the zero-sum matrix `a` (row maximizes) by support
/// enumeration over equal-size supports.
pub fn support_enumeration_value(a: &[Vec<f64>]) -> Option<f64> {
    let n = a.len();
    let m = a[0].len();
    for k in 1..=n.min(m) {
        for rows in subsets(n, k) {
            for cols in subsets(m, k) {
                let Some((xs, v)) = indifferent(&rows, &cols, |i, j| a[i][j]) else { continue };
                let Some((ys, w)) = indifferent(&cols, &rows, |j, i| a[i][j]) else { continue };
                if xs.iter().chain(&ys).any(|&p| p < -1e-9) || (v - w).abs() > 1e-7 {
                    continue;
                }
                let mut x = vec![0.0; n];
                let mut y = vec![0.0; m];
                rows.iter().zip(&xs).for_each(|(&i, &p)| x[i] = p);
                cols.iter().zip(&ys).for_each(|(&j, &p)| y[j] = p);
                let col_ok = (0..m).all(|j| (0..n).map(|i| x[i] * a[i][j]).sum::<f64>() >= v - 1e-7);
                let row_ok = (0..n).all(|i| (0..m).map(|j| a[i][j] * y[j]).sum::<f64>() <= v + 1e-7);
                if col_ok && row_ok {
                    return Some(v);
                }
            }
        }
    }
    None
}

pub fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = -v;
        }
    }
    a
}

/// Random win-rate matrix: `w[j][i] = 1 - w[i][j]`, diagonal one half.
pub fn random_win_matrix(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.5; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.02..0.98);
            w[i][j] = v;
            w[j][i] = 1.0 - v;
        }
    }
    w
}

/// Stationary distribution of row-stochastic `t` from `π(T - I) = 0` with
/// the last equation replaced by `Σπ = 1`.
pub fn direct_stationary(t: &[Vec<f64>]) -> Vec<f64> {
    let n = t.len();
    let mut a = vec![vec![0.0; n]; n];
    for (r, row) in a.iter_mut().enumerate().take(n - 1) {
        for c in 0..n {
            row[c] = t[c][r] - if c == r { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    solve_linear(a, b).expect("irreducible chains have a unique stationary vector")
}

/// Ways to write `total` as an ordered sum of `parts` integers in `0..=cap`.
pub fn dp_compositions(total: usize, parts: usize, cap: usize) -> u128 {
    let mut ways = vec![0u128; total + 1];
    ways[0] = 1;
    for _ in 0..parts {
        let mut next = vec![0u128; total + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for v in 0..=cap.min(total - s) {
                next[s + v] += w;
            }
        }
        ways = next;
    }
    ways[total]
}

/// Largest relative error `‖g − fd‖ / max(‖g‖, ‖fd‖)` of the PPO minibatch
/// gradient against central differences, over `batches` minibatches of a
/// real rollout. Stored log-probabilities are jittered so some ratios clip.
pub fn ppo_gradient_check(seed: u64, batches: usize) -> f64 {
    let actor = Network::init(Arch::actor(1, 6, 8), seed);
    let critic = Network::init(Arch::critic(1, 6, 8), seed + 1000);
    let ts = TeamSampler::new(vec![Arc::new(teams::bundled()[seed as usize % 4].clone())], GameOptions::default());
    let sampler = OpponentSampler::fixed(Arc::new(RandomPlayer));
    let mb = 6;
    let batch = collect_rollouts(&actor, &critic, &sampler, &ts, mb * batches, seed).expect("rollouts run");
    let hyper = Hyperparameters { entropy_coef: 0.01, ..Hyperparameters::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..batches {
        let mut trs: Vec<_> = batch.transitions[k * mb..(k + 1) * mb].to_vec();
        for t in &mut trs {
            t.logp += rng.random_range(-0.3..0.3);
        }
        let refs: Vec<_> = trs.iter().collect();
        let adv: Vec<f64> = (0..mb).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ret: Vec<f64> = (0..mb).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |a: &Network, c: &Network| {
            let mut ga = vec![0.0; a.params.len()];
            let mut gc = vec![0.0; c.params.len()];
            let l = minibatch_loss_grad(a, c, &refs, &adv, &ret, &hyper, &mut ga, &mut gc, &mut PpoDiagnostics::default());
            (l, ga, gc)
        };
        let (_, ga, gc) = loss(&actor, &critic);
        // Coordinates with signal plus random ones.
        let mut coords: Vec<(bool, usize)> = Vec::new();
        for (is_actor, g) in [(true, &ga), (false, &gc)] {
            let mut idx: Vec<usize> = (0..g.len()).collect();
            idx.sort_by(|&i, &j| g[j].abs().total_cmp(&g[i].abs()));
            coords.extend(idx.iter().take(20).map(|&i| (is_actor, i)));
            coords.extend((0..10).map(|_| (is_actor, rng.random_range(0..g.len()))));
        }
        let h = 1e-6;
        let (mut num, mut den_g, mut den_fd) = (0.0, 0.0, 0.0);
        for (is_actor, i) in coords {
            let (mut a1, mut c1, mut a2, mut c2) = (actor.clone(), critic.clone(), actor.clone(), critic.clone());
            if is_actor {
                a1.params[i] += h;
                a2.params[i] -= h;
            } else {
                c1.params[i] += h;
                c2.params[i] -= h;
            }
            let fd = (loss(&a1, &c1).0 - loss(&a2, &c2).0) / (2.0 * h);
            let g = if is_actor { ga[i] } else { gc[i] };
            num += (g - fd) * (g - fd);
            den_g += g * g;
            den_fd += fd * fd;
        }
        let rel = num.sqrt() / den_g.sqrt().max(den_fd.sqrt()).max(1e-12);
        worst = worst.max(rel);
    }
    worst
}
