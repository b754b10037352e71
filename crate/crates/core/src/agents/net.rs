//! Compact differentiable encoder with analytic backpropagation.
//!
//! Each observation row is embedded by a shared sparse affine map plus a
//! per-frame offset and squashed with `tanh`. The pooled representation is
//! the mean over all rows concatenated with the embeddings of the four active
//! battlers in the newest frame. Two `tanh` layers follow, then a linear head.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::AgentError;
use crate::game::observe::{Layout, ROWS_PER_FRAME};
use crate::game::{JointAction, Observation, Slot, NUM_ACTIONS};

/// Architecture descriptor. Its hash is stored in checkpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arch {
    pub row_dim: usize,
    pub n_frames: usize,
    /// Per-row embedding width.
    pub embed: usize,
    pub hidden: usize,
    /// Output width: two 107-logit heads for actors, 1 for critics.
    pub out: usize,
}

/// Number of pooled vectors: mean plus four active battlers.
const POOLED: usize = 5;

#[derive(Clone, Copy, Debug)]
struct Offsets {
    we: usize,
    be: usize,
    pos: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    wo: usize,
    bo: usize,
    end: usize,
}

impl Arch {
    pub fn actor(n_frames: usize, embed: usize, hidden: usize) -> Arch {
        Arch { row_dim: Layout::bundled().row_dim(), n_frames, embed, hidden, out: 2 * NUM_ACTIONS }
    }

    pub fn critic(n_frames: usize, embed: usize, hidden: usize) -> Arch {
        Arch { out: 1, ..Arch::actor(n_frames, embed, hidden) }
    }

    pub fn rows(&self) -> usize {
        self.n_frames * ROWS_PER_FRAME
    }

    fn offsets(&self) -> Offsets {
        let (e, h, d) = (self.embed, self.hidden, self.row_dim);
        let we = 0;
        let be = we + d * e;
        let pos = be + e;
        let w1 = pos + self.n_frames * e;
        let b1 = w1 + h * POOLED * e;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let wo = b2 + h;
        let bo = wo + self.out * h;
        Offsets { we, be, pos, w1, b1, w2, b2, wo, bo, end: bo + self.out }
    }

    pub fn n_params(&self) -> usize {
        self.offsets().end
    }

    /// Hex SHA-256 of the canonical JSON descriptor.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("arch serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Network input: sparse rows plus the row indices of the four active
/// battlers (own a, own b, opponent a, opponent b) in the newest frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedObs {
    pub rows: Vec<Vec<(u16, f32)>>,
    pub active: [Option<u16>; 4],
    pub legal: Vec<JointAction>,
}

impl EncodedObs {
    pub fn from_observation(obs: &Observation) -> EncodedObs {
        let newest = obs.tensor.rows.len().saturating_sub(ROWS_PER_FRAME);
        let mut active = [None; 4];
        for (side, base) in [(0usize, 0usize), (1, 6)] {
            for slot in Slot::BOTH {
                if let Some(m) = obs.view.active(side, slot) {
                    active[side * 2 + slot.index()] = Some((newest + base + m.member as usize) as u16);
                }
            }
        }
        EncodedObs { rows: obs.tensor.rows.clone(), active, legal: obs.legal.clone() }
    }

    pub fn legal_index(&self, a: JointAction) -> Option<usize> {
        self.legal.iter().position(|&j| j == a)
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Clone, Debug, Default)]
pub struct Cache {
    h: Vec<f64>,
    z: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    pub out: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub arch: Arch,
    pub params: Vec<f64>,
}

impl Network {
    pub fn zeros(arch: Arch) -> Network {
        let n = arch.n_params();
        Network { arch, params: vec![0.0; n] }
    }

    /// Seeded initialization; output weights start small so the initial
    /// policy is close to uniform.
    pub fn init(arch: Arch, seed: u64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = arch.offsets();
        let mut p = vec![0.0; o.end];
        let mut fill = |range: std::ops::Range<usize>, scale: f64| {
            for x in &mut p[range] {
                *x = rng.random_range(-scale..scale);
            }
        };
        let (e, h) = (arch.embed, arch.hidden);
        fill(o.we..o.be, (3.0f64 / 24.0).sqrt());
        fill(o.pos..o.w1, 0.1);
        fill(o.w1..o.b1, (3.0 / (POOLED * e) as f64).sqrt());
        fill(o.w2..o.b2, (3.0 / h as f64).sqrt());
        fill(o.wo..o.bo, 0.01 * (3.0 / h as f64).sqrt());
        Network { arch, params: p }
    }

    fn check(&self, input: &EncodedObs) -> Result<(), AgentError> {
        if input.rows.len() != self.arch.rows() {
            return Err(AgentError::Arch(format!(
                "observation has {} rows, network expects {}",
                input.rows.len(),
                self.arch.rows()
            )));
        }
        if self.params.len() != self.arch.n_params() {
            return Err(AgentError::Arch("parameter vector length does not match the descriptor".into()));
        }
        Ok(())
    }

    pub fn forward(&self, input: &EncodedObs) -> Result<Cache, AgentError> {
        self.check(input)?;
        Ok(forward(&self.arch, &self.params, input))
    }
}

fn tanh_inplace(v: &mut [f64]) {
    for x in v {
        *x = x.tanh();
    }
}

fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let n_in = x.len();
    for (o, y) in out.iter_mut().enumerate() {
        let row = &w[o * n_in..(o + 1) * n_in];
        *y = b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Forward pass with a raw parameter slice.
pub fn forward(arch: &Arch, p: &[f64], input: &EncodedObs) -> Cache {
    let o = arch.offsets();
    let (e, hd) = (arch.embed, arch.hidden);
    let r_n = arch.rows();
    let mut h = vec![0.0; r_n * e];
    for (r, row) in input.rows.iter().enumerate() {
        let frame = r / ROWS_PER_FRAME;
        let hr = &mut h[r * e..(r + 1) * e];
        let pos = &p[o.pos + frame * e..o.pos + (frame + 1) * e];
        for k in 0..e {
            hr[k] = p[o.be + k] + pos[k];
        }
        for &(i, v) in row {
            let w = &p[o.we + i as usize * e..o.we + (i as usize + 1) * e];
            let v = v as f64;
            for k in 0..e {
                hr[k] += v * w[k];
            }
        }
        tanh_inplace(hr);
    }
    let mut z = vec![0.0; POOLED * e];
    for r in 0..r_n {
        for k in 0..e {
            z[k] += h[r * e + k];
        }
    }
    for zk in &mut z[..e] {
        *zk /= r_n as f64;
    }
    for (j, act) in input.active.iter().enumerate() {
        if let Some(r) = *act {
            let r = r as usize;
            z[(j + 1) * e..(j + 2) * e].copy_from_slice(&h[r * e..(r + 1) * e]);
        }
    }
    let mut a1 = vec![0.0; hd];
    affine(&p[o.w1..o.b1], &p[o.b1..o.w2], &z, &mut a1);
    tanh_inplace(&mut a1);
    let mut a2 = vec![0.0; hd];
    affine(&p[o.w2..o.b2], &p[o.b2..o.wo], &a1, &mut a2);
    tanh_inplace(&mut a2);
    let mut out = vec![0.0; arch.out];
    affine(&p[o.wo..o.bo], &p[o.bo..o.end], &a2, &mut out);
    Cache { h, z, a1, a2, out }
}

/// Accumulate `d_out · ∂out/∂params` into `grad`.
pub fn backward(arch: &Arch, p: &[f64], input: &EncodedObs, c: &Cache, d_out: &[f64], grad: &mut [f64]) {
    let o = arch.offsets();
    let (e, hd) = (arch.embed, arch.hidden);
    let r_n = arch.rows();

    let mut d_a2 = vec![0.0; hd];
    for (k, &g) in d_out.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        grad[o.bo + k] += g;
        let w = &p[o.wo + k * hd..o.wo + (k + 1) * hd];
        let gw = &mut grad[o.wo + k * hd..o.wo + (k + 1) * hd];
        for j in 0..hd {
            gw[j] += g * c.a2[j];
            d_a2[j] += g * w[j];
        }
    }
    let d_pre2: Vec<f64> = d_a2.iter().zip(&c.a2).map(|(d, a)| d * (1.0 - a * a)).collect();
    let mut d_a1 = vec![0.0; hd];
    for (k, &g) in d_pre2.iter().enumerate() {
        grad[o.b2 + k] += g;
        let w = &p[o.w2 + k * hd..o.w2 + (k + 1) * hd];
        let gw = &mut grad[o.w2 + k * hd..o.w2 + (k + 1) * hd];
        for j in 0..hd {
            gw[j] += g * c.a1[j];
            d_a1[j] += g * w[j];
        }
    }
    let d_pre1: Vec<f64> = d_a1.iter().zip(&c.a1).map(|(d, a)| d * (1.0 - a * a)).collect();
    let zn = POOLED * e;
    let mut d_z = vec![0.0; zn];
    for (k, &g) in d_pre1.iter().enumerate() {
        grad[o.b1 + k] += g;
        let w = &p[o.w1 + k * zn..o.w1 + (k + 1) * zn];
        let gw = &mut grad[o.w1 + k * zn..o.w1 + (k + 1) * zn];
        for j in 0..zn {
            gw[j] += g * c.z[j];
            d_z[j] += g * w[j];
        }
    }
    let mut d_h = vec![0.0; r_n * e];
    for r in 0..r_n {
        for k in 0..e {
            d_h[r * e + k] = d_z[k] / r_n as f64;
        }
    }
    for (j, act) in input.active.iter().enumerate() {
        if let Some(r) = *act {
            let r = r as usize;
            for k in 0..e {
                d_h[r * e + k] += d_z[(j + 1) * e + k];
            }
        }
    }
    for (r, row) in input.rows.iter().enumerate() {
        let frame = r / ROWS_PER_FRAME;
        let mut d_pre = [0.0f64; 256];
        let d_pre = &mut d_pre[..e];
        for k in 0..e {
            let hv = c.h[r * e + k];
            d_pre[k] = d_h[r * e + k] * (1.0 - hv * hv);
            grad[o.be + k] += d_pre[k];
            grad[o.pos + frame * e + k] += d_pre[k];
        }
        for &(i, v) in row {
            let v = v as f64;
            let gw = &mut grad[o.we + i as usize * e..o.we + (i as usize + 1) * e];
            for k in 0..e {
                gw[k] += v * d_pre[k];
            }
        }
    }
}

/// Log-probabilities of each legal joint action from the two logit heads.
pub fn joint_log_probs(out: &[f64], legal: &[JointAction]) -> Vec<f64> {
    let scores: Vec<f64> = legal
        .iter()
        .map(|j| out[j.a.0 as usize] + out[NUM_ACTIONS + j.b.0 as usize])
        .collect();
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
    scores.into_iter().map(|s| s - lse).collect()
}

/// Add `coef · ∂ log π(legal[k]) / ∂out` to `d_out`.
pub fn add_logp_grad(legal: &[JointAction], logp: &[f64], k: usize, coef: f64, d_out: &mut [f64]) {
    let j = legal[k];
    d_out[j.a.0 as usize] += coef;
    d_out[NUM_ACTIONS + j.b.0 as usize] += coef;
    for (jj, lp) in legal.iter().zip(logp) {
        let p = lp.exp();
        d_out[jj.a.0 as usize] -= coef * p;
        d_out[NUM_ACTIONS + jj.b.0 as usize] -= coef * p;
    }
}

/// Entropy of the joint distribution.
pub fn entropy(logp: &[f64]) -> f64 {
    -logp.iter().map(|&l| l.exp() * l).sum::<f64>()
}

/// Add `coef · ∂H/∂out` to `d_out`.
pub fn add_entropy_grad(legal: &[JointAction], logp: &[f64], coef: f64, d_out: &mut [f64]) {
    let h = entropy(logp);
    for (j, &l) in legal.iter().zip(logp) {
        let g = -l.exp() * (l + h) * coef;
        d_out[j.a.0 as usize] += g;
        d_out[NUM_ACTIONS + j.b.0 as usize] += g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{start_battle, teams, GameOptions, Player};
    use std::sync::Arc;

    fn sample_obs() -> EncodedObs {
        let t = teams::bundled();
        let opts = GameOptions { skip_team_preview: true, ..GameOptions::default() };
        let s = start_battle([Arc::new(t[0].clone()), Arc::new(t[2].clone())], opts, 4).unwrap();
        EncodedObs::from_observation(&Observation::single(&s, Player::P1))
    }

    #[test]
    fn zero_parameters_give_uniform_joint() {
        let net = Network::zeros(Arch::actor(1, 8, 8));
        let x = sample_obs();
        let c = net.forward(&x).unwrap();
        let lp = joint_log_probs(&c.out, &x.legal);
        let u = -(x.legal.len() as f64).ln();
        assert!(lp.iter().all(|&l| (l - u).abs() < 1e-12));
    }

    #[test]
    fn joint_probabilities_sum_to_one() {
        let net = Network::init(Arch::actor(1, 8, 8), 1);
        let x = sample_obs();
        let c = net.forward(&x).unwrap();
        let lp = joint_log_probs(&c.out, &x.legal);
        assert!((lp.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn row_count_mismatch_is_an_arch_error() {
        let net = Network::zeros(Arch::actor(2, 4, 4));
        assert!(matches!(net.forward(&sample_obs()), Err(AgentError::Arch(_))));
    }

    #[test]
    fn entropy_gradient_matches_finite_differences() {
        let net = Network::init(Arch::actor(1, 6, 6), 2);
        let x = sample_obs();
        let c = net.forward(&x).unwrap();
        let mut d = vec![0.0; net.arch.out];
        add_entropy_grad(&x.legal, &joint_log_probs(&c.out, &x.legal), 1.0, &mut d);
        for k in [x.legal[0].a.0 as usize, NUM_ACTIONS + x.legal[1].b.0 as usize] {
            let mut up = c.out.clone();
            up[k] += 1e-6;
            let mut dn = c.out.clone();
            dn[k] -= 1e-6;
            let fd = (entropy(&joint_log_probs(&up, &x.legal)) - entropy(&joint_log_probs(&dn, &x.legal))) / 2e-6;
            assert!((fd - d[k]).abs() < 1e-6, "{fd} vs {}", d[k]);
        }
    }
}
