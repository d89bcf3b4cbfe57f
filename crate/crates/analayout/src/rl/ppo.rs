//! Clipped-surrogate policy optimization on collected rollouts, with
//! generalized advantage estimation, minibatched epochs and persistent Adam
//! state.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rl::net::{log_softmax, Adam, PolicyNet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoConfig {
    pub clip_ratio: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub epochs_per_update: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub entropy_coeff: f64,
    pub value_coeff: f64,
    pub normalize_advantage: bool,
    pub steps_per_episode: usize,
    pub episodes: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_ratio: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            epochs_per_update: 10,
            minibatch: 64,
            learning_rate: 3e-4,
            entropy_coeff: 0.01,
            value_coeff: 0.5,
            normalize_advantage: true,
            steps_per_episode: 128,
            episodes: 100,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) {
        assert!(self.clip_ratio > 0.0 && self.clip_ratio < 1.0);
        assert!(self.discount > 0.0 && self.discount <= 1.0);
        assert!((0.0..=1.0).contains(&self.gae_lambda));
        assert!(self.epochs_per_update >= 1 && self.minibatch >= 1);
        assert!(self.steps_per_episode >= 1);
    }
}

/// One on-policy batch of transitions.
#[derive(Debug, Clone, Default)]
pub struct Rollout {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
}

impl Rollout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        obs: Vec<f64>,
        action: usize,
        log_prob: f64,
        reward: f64,
        value: f64,
        done: bool,
    ) {
        self.obs.push(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        self.dones.push(done);
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn clear(&mut self) {
        self.obs.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.rewards.clear();
        self.values.clear();
        self.dones.clear();
    }
}

/// Generalized advantage estimation. `bootstrap` is the value of the state
/// after the last transition; it is ignored past `done` boundaries.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    discount: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut gae = 0.0;
    for i in (0..n).rev() {
        let (next_value, carry) = if dones[i] {
            (0.0, 0.0)
        } else if i + 1 == n {
            (bootstrap, 0.0)
        } else {
            (values[i + 1], 1.0)
        };
        let delta = rewards[i] + discount * next_value - values[i];
        gae = delta + discount * lambda * carry * gae;
        advantages[i] = gae;
    }
    let returns = advantages
        .iter()
        .zip(values)
        .map(|(a, v)| a + v)
        .collect();
    (advantages, returns)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PpoLosses {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub total: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Loss and analytic gradients over one minibatch. The scalar part is what
/// a finite-difference probe of the parameters should reproduce.
pub fn ppo_loss_and_grads(
    policy: &PolicyNet,
    obs: &[Vec<f64>],
    actions: &[usize],
    old_log_probs: &[f64],
    advantages: &[f64],
    returns: &[f64],
    cfg: &PpoConfig,
) -> (PpoLosses, Vec<f64>, Vec<f64>) {
    let batch = obs.len() as f64;
    let mut grads_actor = vec![0.0; policy.actor.param_count()];
    let mut grads_critic = vec![0.0; policy.critic.param_count()];
    let mut losses = PpoLosses::default();

    for i in 0..obs.len() {
        let (logits, actor_trace) = policy.actor.forward_trace(&obs[i]);
        let logp = log_softmax(&logits);
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let a = actions[i];
        let ratio = (logp[a] - old_log_probs[i]).exp();
        let adv = advantages[i];

        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio) * adv;
        let surrogate = unclipped.min(clipped);
        losses.policy += -surrogate / batch;
        losses.approx_kl += (old_log_probs[i] - logp[a]) / batch;
        if ratio < 1.0 - cfg.clip_ratio || ratio > 1.0 + cfg.clip_ratio {
            losses.clip_fraction += 1.0 / batch;
        }

        let entropy: f64 = -probs
            .iter()
            .zip(&logp)
            .map(|(p, l)| if *p > 0.0 { p * l } else { 0.0 })
            .sum::<f64>();
        losses.entropy += entropy / batch;

        // d(-surrogate)/d logp[a]; zero when the clipped branch is active,
        // which only happens with the ratio outside the clip window.
        let d_logp_a = if unclipped <= clipped {
            -ratio * adv / batch
        } else {
            0.0
        };
        // d logp[a]/d logits = onehot - probs; entropy adds p_k (logp_k + H).
        let mut d_logits = vec![0.0; logits.len()];
        for k in 0..logits.len() {
            let onehot = if k == a { 1.0 } else { 0.0 };
            d_logits[k] = d_logp_a * (onehot - probs[k])
                + cfg.entropy_coeff * probs[k] * (logp[k] + entropy) / batch;
        }
        policy.actor.backward(&actor_trace, &d_logits, &mut grads_actor);

        let (value_out, critic_trace) = policy.critic.forward_trace(&obs[i]);
        let err = returns[i] - value_out[0];
        losses.value += err * err / batch;
        let d_value = [-2.0 * err * cfg.value_coeff / batch];
        policy
            .critic
            .backward(&critic_trace, &d_value, &mut grads_critic);
    }

    losses.total =
        losses.policy + cfg.value_coeff * losses.value - cfg.entropy_coeff * losses.entropy;
    (losses, grads_actor, grads_critic)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PpoReport {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub minibatches: usize,
}

/// Owns the optimizer state across updates.
pub struct PpoUpdater {
    adam_actor: Adam,
    adam_critic: Adam,
}

impl PpoUpdater {
    pub fn new(policy: &PolicyNet, cfg: &PpoConfig) -> Self {
        Self {
            adam_actor: Adam::new(cfg.learning_rate, policy.actor.param_count()),
            adam_critic: Adam::new(cfg.learning_rate, policy.critic.param_count()),
        }
    }

    /// Runs `epochs_per_update` passes of shuffled minibatches over the
    /// rollout and applies Adam steps in place.
    pub fn update<R: Rng>(
        &mut self,
        policy: &mut PolicyNet,
        rollout: &Rollout,
        cfg: &PpoConfig,
        rng: &mut R,
    ) -> Result<PpoReport> {
        cfg.validate();
        assert!(!rollout.is_empty(), "empty rollout");
        let (advantages, returns) = compute_gae(
            &rollout.rewards,
            &rollout.values,
            &rollout.dones,
            0.0,
            cfg.discount,
            cfg.gae_lambda,
        );

        let n = rollout.len();
        let mut indices: Vec<usize> = (0..n).collect();
        let mut report = PpoReport::default();
        for _ in 0..cfg.epochs_per_update {
            indices.shuffle(rng);
            for chunk in indices.chunks(cfg.minibatch) {
                let obs: Vec<Vec<f64>> = chunk.iter().map(|&i| rollout.obs[i].clone()).collect();
                let actions: Vec<usize> = chunk.iter().map(|&i| rollout.actions[i]).collect();
                let old_logp: Vec<f64> = chunk.iter().map(|&i| rollout.log_probs[i]).collect();
                let rets: Vec<f64> = chunk.iter().map(|&i| returns[i]).collect();
                let mut advs: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
                if cfg.normalize_advantage && advs.len() > 1 {
                    let mean = advs.iter().sum::<f64>() / advs.len() as f64;
                    let var = advs.iter().map(|a| (a - mean).powi(2)).sum::<f64>()
                        / advs.len() as f64;
                    let std = var.sqrt() + 1e-8;
                    for a in &mut advs {
                        *a = (*a - mean) / std;
                    }
                }

                let (losses, ga, gc) = ppo_loss_and_grads(
                    policy, &obs, &actions, &old_logp, &advs, &rets, cfg,
                );
                if !losses.total.is_finite() {
                    return Err(Error::TrainingDiverged(format!(
                        "policy {:.3e}, value {:.3e}, entropy {:.3e}",
                        losses.policy, losses.value, losses.entropy
                    )));
                }
                self.adam_actor.step(&mut policy.actor.params, &ga);
                self.adam_critic.step(&mut policy.critic.params, &gc);

                report.policy_loss += losses.policy;
                report.value_loss += losses.value;
                report.entropy += losses.entropy;
                report.approx_kl += losses.approx_kl;
                report.clip_fraction += losses.clip_fraction;
                report.minibatches += 1;
            }
        }
        let k = report.minibatches.max(1) as f64;
        report.policy_loss /= k;
        report.value_loss /= k;
        report.entropy /= k;
        report.approx_kl /= k;
        report.clip_fraction /= k;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type ToyBatch = (Vec<Vec<f64>>, Vec<usize>, Vec<f64>, Vec<f64>, Vec<f64>);

    fn toy_batch(policy: &PolicyNet, rng: &mut ChaCha8Rng, n: usize) -> ToyBatch {
        use rand::Rng as _;
        let mut obs = Vec::new();
        let mut actions = Vec::new();
        let mut old_logp = Vec::new();
        let mut advantages = Vec::new();
        let mut returns = Vec::new();
        for _ in 0..n {
            let o: Vec<f64> = (0..policy.obs_dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let (a, lp, _) = policy.act(&o, rng);
            obs.push(o);
            actions.push(a);
            // Perturbed old log-probs move ratios off 1 without pinning any
            // of them exactly onto the clip boundary.
            old_logp.push(lp + rng.random_range(-0.3..0.3));
            advantages.push(rng.random_range(-2.0..2.0));
            returns.push(rng.random_range(-1.0..1.0));
        }
        (obs, actions, old_logp, advantages, returns)
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let policy = PolicyNet::with_sizes(3, 2, &[4], &[4], &mut rng);
        let cfg = PpoConfig::default();
        let (obs, actions, old_logp, advantages, returns) = toy_batch(&policy, &mut rng, 12);

        let loss_of = |p: &PolicyNet| {
            ppo_loss_and_grads(p, &obs, &actions, &old_logp, &advantages, &returns, &cfg)
                .0
                .total
        };
        let (_, ga, gc) = ppo_loss_and_grads(
            &policy, &obs, &actions, &old_logp, &advantages, &returns, &cfg,
        );

        let h = 1e-6;
        let mut max_rel = 0.0f64;
        for i in 0..policy.actor.param_count() {
            let mut plus = policy.clone();
            plus.actor.params[i] += h;
            let mut minus = policy.clone();
            minus.actor.params[i] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let denom = ga[i].abs().max(fd.abs()).max(1e-6);
            max_rel = max_rel.max((ga[i] - fd).abs() / denom);
        }
        for i in 0..policy.critic.param_count() {
            let mut plus = policy.clone();
            plus.critic.params[i] += h;
            let mut minus = policy.clone();
            minus.critic.params[i] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let denom = gc[i].abs().max(fd.abs()).max(1e-6);
            max_rel = max_rel.max((gc[i] - fd).abs() / denom);
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn zero_advantages_leave_actor_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut policy = PolicyNet::with_sizes(3, 2, &[8, 8], &[8], &mut rng);
        let cfg = PpoConfig {
            entropy_coeff: 0.0,
            minibatch: 4,
            epochs_per_update: 3,
            ..PpoConfig::default()
        };
        let before = policy.actor.params.clone();

        let mut rollout = Rollout::new();
        for _ in 0..16 {
            use rand::Rng as _;
            let o: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, lp, _) = policy.act(&o, &mut rng);
            // Reward exactly equal to the value estimate with gamma*lambda
            // telescoping disabled by done=true gives zero advantage.
            let v = policy.value(&o);
            rollout.push(o, a, lp, v, v, true);
        }
        let mut updater = PpoUpdater::new(&policy, &cfg);
        updater.update(&mut policy, &rollout, &cfg, &mut rng).unwrap();
        assert_eq!(policy.actor.params, before);
        // The critic is still free to move; only the policy gradient vanishes.
    }

    #[test]
    fn clipped_samples_contribute_no_actor_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let policy = PolicyNet::with_sizes(2, 2, &[4], &[4], &mut rng);
        let cfg = PpoConfig {
            entropy_coeff: 0.0,
            ..PpoConfig::default()
        };
        let obs = vec![vec![0.3, -0.2]];
        let lp = policy.log_probs(&obs[0]);
        // ratio = 1.4 with positive advantage: min() picks the clipped branch.
        let (losses, ga, _) = ppo_loss_and_grads(
            &policy,
            &obs,
            &[0],
            &[lp[0] - 1.4f64.ln()],
            &[1.0],
            &[0.0],
            &cfg,
        );
        assert!(losses.clip_fraction > 0.99);
        assert!(ga.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn gae_matches_direct_recursion_on_short_episode() {
        let rewards = [1.0, 0.5, -0.25];
        let values = [0.2, 0.1, 0.0];
        let dones = [false, false, true];
        let (adv, ret) = compute_gae(&rewards, &values, &dones, 123.0, 0.9, 0.8);
        let d2 = -0.25 - 0.0;
        let d1 = 0.5 + 0.9 * 0.0 - 0.1;
        let d0 = 1.0 + 0.9 * 0.1 - 0.2;
        let a2 = d2;
        let a1 = d1 + 0.9 * 0.8 * a2;
        let a0 = d0 + 0.9 * 0.8 * a1;
        assert!((adv[2] - a2).abs() < 1e-12);
        assert!((adv[1] - a1).abs() < 1e-12);
        assert!((adv[0] - a0).abs() < 1e-12);
        assert!((ret[0] - (a0 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn bandit_policy_learns_the_rewarding_arm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut policy = PolicyNet::with_sizes(1, 2, &[8], &[8], &mut rng);
        let cfg = PpoConfig {
            learning_rate: 1e-2,
            minibatch: 64,
            epochs_per_update: 4,
            steps_per_episode: 64,
            ..PpoConfig::default()
        };
        let mut updater = PpoUpdater::new(&policy, &cfg);
        for _ in 0..200 {
            let mut rollout = Rollout::new();
            for _ in 0..64 {
                let obs = vec![1.0];
                let (a, lp, v) = policy.act(&obs, &mut rng);
                let reward = if a == 0 { 1.0 } else { 0.0 };
                rollout.push(obs, a, lp, reward, v, true);
            }
            updater.update(&mut policy, &rollout, &cfg, &mut rng).unwrap();
        }
        let p = crate::rl::net::softmax(&policy.actor.forward(&[1.0]));
        assert!(p[0] > 0.95, "P(arm 0) = {}", p[0]);
    }

    #[test]
    fn non_finite_loss_aborts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut policy = PolicyNet::with_sizes(1, 2, &[4], &[4], &mut rng);
        let cfg = PpoConfig::default();
        let mut rollout = Rollout::new();
        let (a, lp, v) = policy.act(&[1.0], &mut rng);
        rollout.push(vec![1.0], a, lp, f64::NAN, v, true);
        let mut updater = PpoUpdater::new(&policy, &cfg);
        assert!(matches!(
            updater.update(&mut policy, &rollout, &cfg, &mut rng),
            Err(Error::TrainingDiverged(_))
        ));
    }
}
