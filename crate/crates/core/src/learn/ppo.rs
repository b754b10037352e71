//! Generalized advantage estimation and the clipped PPO update.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::{clip_global_norm, Adam};
use super::rollout::{RolloutBatch, Transition};
use super::{Hyperparameters, LearnError};
use crate::agents::net::{add_entropy_grad, add_logp_grad, backward, entropy, forward, joint_log_probs};
use crate::agents::Network;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PpoDiagnostics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
}

/// Advantages and value targets for every transition of `batch`.
pub fn gae(batch: &RolloutBatch, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len();
    let mut adv = vec![0.0; n];
    for ep in &batch.episodes {
        let mut next_value = ep.bootstrap.unwrap_or(0.0);
        let mut next_adv = 0.0;
        for t in (ep.start..ep.start + ep.len).rev() {
            let tr = &batch.transitions[t];
            let live = if tr.done { 0.0 } else { 1.0 };
            let delta = tr.reward + gamma * next_value * live - tr.value;
            next_adv = delta + gamma * lambda * live * next_adv;
            adv[t] = next_adv;
            next_value = tr.value;
        }
    }
    let ret = adv.iter().zip(&batch.transitions).map(|(a, t)| a + t.value).collect();
    (adv, ret)
}

/// Per-sample clipped surrogate `min(rA, clip(r, 1±ε)A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

/// Optimizer state for one actor-critic learner.
#[derive(Clone, Debug)]
pub struct Optimizers {
    pub actor: Adam,
    pub critic: Adam,
}

impl Optimizers {
    pub fn new(actor: &Network, critic: &Network, lr: f64) -> Optimizers {
        Optimizers { actor: Adam::new(actor.params.len(), lr), critic: Adam::new(critic.params.len(), lr) }
    }
}

/// Loss of one minibatch, with its gradient added to `ga` (actor) and `gc`
/// (critic). `adv` are the advantages as used, after any standardization.
/// `diag` receives unnormalized per-sample sums.
#[allow(clippy::too_many_arguments)]
pub fn minibatch_loss_grad(
    actor: &Network,
    critic: &Network,
    trs: &[&Transition],
    adv: &[f64],
    ret: &[f64],
    hyper: &Hyperparameters,
    ga: &mut [f64],
    gc: &mut [f64],
    diag: &mut PpoDiagnostics,
) -> f64 {
    let b = trs.len() as f64;
    let mut loss = 0.0;
    let mut d_out = vec![0.0; actor.arch.out];
    for ((tr, &a), &target) in trs.iter().zip(adv).zip(ret) {
        let cache = forward(&actor.arch, &actor.params, &tr.obs);
        let lp = joint_log_probs(&cache.out, &tr.obs.legal);
        let ratio = (lp[tr.action] - tr.logp).exp();
        let clipped = ratio.clamp(1.0 - hyper.clip_range, 1.0 + hyper.clip_range);
        let surrogate = clipped_surrogate(ratio, a, hyper.clip_range);
        let h = entropy(&lp);
        diag.policy_loss -= surrogate;
        diag.entropy += h;
        diag.approx_kl += tr.logp - lp[tr.action];
        if (ratio - 1.0).abs() > hyper.clip_range {
            diag.clip_fraction += 1.0;
        }
        d_out.iter_mut().for_each(|x| *x = 0.0);
        if ratio * a <= clipped * a && a != 0.0 {
            add_logp_grad(&tr.obs.legal, &lp, tr.action, -ratio * a / b, &mut d_out);
        }
        if hyper.entropy_coef > 0.0 {
            add_entropy_grad(&tr.obs.legal, &lp, -hyper.entropy_coef / b, &mut d_out);
        }
        backward(&actor.arch, &actor.params, &tr.obs, &cache, &d_out, ga);

        let vc = forward(&critic.arch, &critic.params, &tr.obs);
        let err = vc.out[0] - target;
        diag.value_loss += err * err;
        backward(&critic.arch, &critic.params, &tr.obs, &vc, &[hyper.value_coef * 2.0 * err / b], gc);
        loss += (-surrogate - hyper.entropy_coef * h + hyper.value_coef * err * err) / b;
    }
    loss
}

/// `n_epochs` passes of minibatch updates over `batch`.
pub fn ppo_update(
    actor: &mut Network,
    critic: &mut Network,
    opt: &mut Optimizers,
    batch: &RolloutBatch,
    hyper: &Hyperparameters,
    seed: u64,
    update: u64,
) -> Result<PpoDiagnostics, LearnError> {
    hyper.validate()?;
    if batch.is_empty() {
        return Err(LearnError::Data("empty rollout batch".into()));
    }
    let (adv, ret) = gae(batch, hyper.gamma, hyper.gae_lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut diag = PpoDiagnostics::default();
    let mut n_mb = 0.0;
    let mut n_samples = 0.0;
    let mut ga = vec![0.0; actor.params.len()];
    let mut gc = vec![0.0; critic.params.len()];
    for _ in 0..hyper.n_epochs {
        order.shuffle(&mut rng);
        for mb in order.chunks(hyper.batch_size) {
            ga.iter_mut().for_each(|x| *x = 0.0);
            gc.iter_mut().for_each(|x| *x = 0.0);
            let b = mb.len() as f64;
            let (mean, std) = if hyper.normalize_advantage && mb.len() > 1 {
                let m = mb.iter().map(|&i| adv[i]).sum::<f64>() / b;
                let v = mb.iter().map(|&i| (adv[i] - m).powi(2)).sum::<f64>() / (b - 1.0);
                (m, v.sqrt())
            } else {
                (0.0, 1.0)
            };
            let trs: Vec<&Transition> = mb.iter().map(|&i| &batch.transitions[i]).collect();
            let a: Vec<f64> = mb
                .iter()
                .map(|&i| if hyper.normalize_advantage && mb.len() > 1 { (adv[i] - mean) / (std + 1e-8) } else { adv[i] })
                .collect();
            let r: Vec<f64> = mb.iter().map(|&i| ret[i]).collect();
            minibatch_loss_grad(actor, critic, &trs, &a, &r, hyper, &mut ga, &mut gc, &mut diag);
            n_samples += b;
            n_mb += 1.0;
            diag.grad_norm += clip_global_norm(&mut [&mut ga, &mut gc], hyper.max_grad_norm);
            if !(diag.policy_loss.is_finite() && diag.value_loss.is_finite() && diag.grad_norm.is_finite()) {
                return Err(LearnError::NonFinite { update, diagnostics: diag });
            }
            opt.actor.step(&mut actor.params, &ga);
            opt.critic.step(&mut critic.params, &gc);
        }
    }
    diag.policy_loss /= n_samples;
    diag.value_loss /= n_samples;
    diag.entropy /= n_samples;
    diag.approx_kl /= n_samples;
    diag.clip_fraction /= n_samples;
    diag.grad_norm /= n_mb;
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::net::EncodedObs;
    use crate::agents::Arch;
    use crate::game::Player;
    use crate::learn::rollout::{Choice, EpisodeInfo, Transition};

    fn tr(value: f64, reward: f64, done: bool) -> Transition {
        Transition { obs: EncodedObs { rows: vec![], active: [None; 4], legal: vec![] }, action: 0, logp: 0.0, value, reward, done }
    }

    fn episode(trs: Vec<Transition>, bootstrap: Option<f64>) -> RolloutBatch {
        let len = trs.len();
        RolloutBatch {
            transitions: trs,
            episodes: vec![EpisodeInfo { seed: 0, opponent: Choice::Learner, learner: Player::P1, reward: 1.0, start: 0, len, bootstrap }],
        }
    }

    #[test]
    fn monte_carlo_limit() {
        let b = episode(vec![tr(0.2, 0.0, false), tr(-0.1, 0.0, false), tr(0.5, 1.0, true)], None);
        let (adv, ret) = gae(&b, 1.0, 1.0);
        for (a, t) in adv.iter().zip(&b.transitions) {
            assert!((a - (1.0 - t.value)).abs() < 1e-12);
        }
        assert!(ret.iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn td_limit_and_bootstrap() {
        let b = episode(vec![tr(0.2, 0.0, false), tr(-0.1, 0.0, false)], Some(0.7));
        let (adv, _) = gae(&b, 1.0, 0.0);
        assert!((adv[0] - (-0.1 - 0.2)).abs() < 1e-12);
        assert!((adv[1] - (0.7 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn surrogate_clips_at_upper_bound() {
        assert!((clipped_surrogate(1.5, 2.0, 0.2) - 1.2 * 2.0).abs() < 1e-12);
        assert!((clipped_surrogate(0.5, -1.0, 0.2) - (-0.8)).abs() < 1e-12);
        assert_eq!(clipped_surrogate(1.1, 1.0, 0.2), 1.1);
    }

    #[test]
    fn zero_advantage_leaves_actor_unchanged() {
        let t = crate::game::teams::bundled();
        let s = crate::game::start_battle(
            [std::sync::Arc::new(t[0].clone()), std::sync::Arc::new(t[1].clone())],
            crate::game::GameOptions::default(),
            1,
        )
        .unwrap();
        let x = EncodedObs::from_observation(&crate::game::Observation::single(&s, Player::P1));
        let mut actor = Network::init(Arch::actor(1, 4, 4), 1);
        let mut critic = Network::zeros(Arch::critic(1, 4, 4));
        // Value 0 and reward 0 at the terminal step give zero advantage.
        let mut t0 = tr(0.0, 0.0, true);
        t0.obs = x;
        let lp = joint_log_probs(&forward(&actor.arch, &actor.params, &t0.obs).out, &t0.obs.legal);
        t0.logp = lp[0];
        let b = episode(vec![t0.clone(), t0], None);
        let before = actor.params.clone();
        let h = Hyperparameters { entropy_coef: 0.0, learning_rate: 1e-2, ..Hyperparameters::default() };
        let mut opt = Optimizers::new(&actor, &critic, h.learning_rate);
        let d = ppo_update(&mut actor, &mut critic, &mut opt, &b, &h, 0, 0).unwrap();
        assert_eq!(actor.params, before);
        assert!(d.approx_kl.abs() < 1e-12);
    }
}
