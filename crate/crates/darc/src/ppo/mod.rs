//! Self-contained PPO for continuous actions: a tanh-squashed Gaussian
//! policy over a small feedforward mean network, a value network trained on
//! GAE returns, clipped-surrogate updates, and per-tensor Adam. Gradients
//! are hand-derived; see [`mlp`] for the reverse-mode core.

pub mod adam;
pub mod mlp;
pub mod pointmass;

pub use adam::AdamState;
pub use mlp::{Mlp, MlpCache, MlpGrads};

use crate::error::{Error, Result};
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Pre-squash draws are clamped here so tanh never saturates to exactly 1.
const PRE_SQUASH_LIMIT: f64 = 9.0;
/// Guard inside the squash correction log.
const SQUASH_EPS: f64 = 1e-6;

const LN_2PI: f64 = 1.8378770664093453;

/// Hyperparameters of the PPO stage.
#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub clip_epsilon: f64,
    /// RL discount over policy decisions.
    pub discount: f64,
    pub gae_lambda: f64,
    pub epochs_per_update: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub minibatch_size: usize,
    pub entropy_coef: f64,
    /// Transitions per update batch.
    pub buffer_capacity: usize,
    /// Width of the two hidden layers of actor and critic.
    pub hidden_width: usize,
    /// Initial standard deviation of the pre-squash Gaussian.
    pub init_std: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_epsilon: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            epochs_per_update: 100,
            actor_lr: 1e-3,
            critic_lr: 1e-4,
            minibatch_size: 250,
            entropy_coef: 0.0,
            buffer_capacity: 2000,
            hidden_width: 64,
            init_std: 0.5,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_epsilon > 0.0) {
            return Err(Error::Config("clip_epsilon must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::Config("discount must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::Config("gae_lambda must lie in [0, 1]".into()));
        }
        if self.epochs_per_update == 0 || self.minibatch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::Config(
                "epochs, minibatch size, and buffer capacity must be positive".into(),
            ));
        }
        if self.hidden_width == 0 {
            return Err(Error::Config("hidden width must be positive".into()));
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if !(self.init_std > 0.0) {
            return Err(Error::Config("init_std must be positive".into()));
        }
        Ok(())
    }
}

/// Gaussian policy: a state-dependent mean network and a state-independent
/// log standard deviation, squashed through tanh into (-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub mean_net: Mlp,
    pub log_std: DVector<f64>,
}

/// One stochastic draw: the squashed action, the pre-squash Gaussian sample
/// the update step needs, and the squash-corrected log density.
#[derive(Debug, Clone)]
pub struct SampledAction {
    pub action: DVector<f64>,
    pub pre_squash: DVector<f64>,
    pub log_prob: f64,
}

/// Squash-corrected log density of a stored draw under (possibly new)
/// parameters: Gaussian log density at the pre-squash point minus
/// `sum log(1 - a^2 + eps)`.
pub fn squashed_log_prob(
    mean: &DVector<f64>,
    log_std: &DVector<f64>,
    pre_squash: &DVector<f64>,
    action: &DVector<f64>,
) -> f64 {
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let sigma = log_std[i].exp();
        let zscore = (pre_squash[i] - mean[i]) / sigma;
        lp += -0.5 * zscore * zscore - log_std[i] - 0.5 * LN_2PI;
        lp -= (1.0 - action[i] * action[i] + SQUASH_EPS).ln();
    }
    lp
}

impl GaussianPolicy {
    pub fn new(
        input_dim: usize,
        action_dim: usize,
        hidden_width: usize,
        init_std: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let mean_net = Mlp::new(&[input_dim, hidden_width, hidden_width, action_dim], rng)?;
        Ok(Self {
            mean_net,
            log_std: DVector::from_element(action_dim, init_std.ln()),
        })
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean_net.input_dim()
    }

    /// Draws an action; every component of the result lies strictly inside
    /// (-1, 1).
    pub fn sample_action(
        &self,
        state: &DVector<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<SampledAction> {
        let mean = self.mean_net.forward(state)?;
        let mut pre_squash = DVector::zeros(mean.len());
        for i in 0..mean.len() {
            let noise: f64 = StandardNormal.sample(rng);
            let z = mean[i] + self.log_std[i].exp() * noise;
            pre_squash[i] = z.clamp(-PRE_SQUASH_LIMIT, PRE_SQUASH_LIMIT);
        }
        let action = pre_squash.map(f64::tanh);
        let log_prob = squashed_log_prob(&mean, &self.log_std, &pre_squash, &action);
        Ok(SampledAction {
            action,
            pre_squash,
            log_prob,
        })
    }

    /// Deterministic action: the squashed mean.
    pub fn act_mean(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.mean_net.forward(state)?.map(f64::tanh))
    }
}

/// One policy decision and its outcome.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: DVector<f64>,
    pub action: DVector<f64>,
    pub pre_squash: DVector<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// On-policy rollout storage; an update runs once the buffer has filled and
/// empties it again.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    transitions: Vec<Transition>,
    capacity: usize,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            transitions: Vec::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, transition: Transition) {
        self.transitions.push(transition);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Full means ready for an update. Whole episodes are pushed atomically,
    /// so the length may slightly exceed the capacity.
    pub fn is_full(&self) -> bool {
        self.len() >= self.capacity
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
    }
}

/// Generalized advantage estimation over the buffer, backward in time with
/// resets at episode ends. Returns `(normalized advantages, returns)` where
/// the returns use the raw advantages.
pub fn compute_advantages(
    transitions: &[Transition],
    discount: f64,
    gae_lambda: f64,
    last_value: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if transitions.is_empty() {
        return Err(Error::Contract("advantage computation on an empty buffer".into()));
    }
    let n = transitions.len();
    let mut advantages = vec![0.0; n];
    let mut returns = vec![0.0; n];
    let mut gae = 0.0;
    for t in (0..n).rev() {
        let tr = &transitions[t];
        let next_value = if tr.done {
            0.0
        } else if t + 1 < n {
            transitions[t + 1].value
        } else {
            last_value
        };
        let mask = if tr.done { 0.0 } else { 1.0 };
        let delta = tr.reward + discount * next_value - tr.value;
        gae = delta + discount * gae_lambda * mask * gae;
        advantages[t] = gae;
        returns[t] = gae + tr.value;
    }

    let mean = advantages.iter().sum::<f64>() / n as f64;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    if std > 1e-12 {
        for a in &mut advantages {
            *a = (*a - mean) / std;
        }
    } else {
        for a in &mut advantages {
            *a -= mean;
        }
    }
    Ok((advantages, returns))
}

/// Per-tensor Adam accumulators for the actor (mean net + log_std) and the
/// critic.
#[derive(Debug, Clone)]
pub struct PpoOptimState {
    actor: Vec<AdamState>,
    log_std: AdamState,
    critic: Vec<AdamState>,
}

impl PpoOptimState {
    pub fn new(policy: &GaussianPolicy, value_fn: &Mlp) -> Self {
        let tensor_states = |net: &Mlp| -> Vec<AdamState> {
            net.weights()
                .iter()
                .map(|w| AdamState::new(w.len()))
                .chain(net.biases().iter().map(|b| AdamState::new(b.len())))
                .collect()
        };
        Self {
            actor: tensor_states(&policy.mean_net),
            log_std: AdamState::new(policy.log_std.len()),
            critic: tensor_states(value_fn),
        }
    }
}

/// Summary of one PPO update.
#[derive(Debug, Clone)]
pub struct UpdateDiagnostics {
    pub transitions: usize,
    pub episodes: usize,
    /// Mean total reward of the complete episodes in the batch.
    pub mean_return: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

fn apply_grads(net: &mut Mlp, grads: &MlpGrads, states: &mut [AdamState], lr: f64) -> Result<()> {
    let flat: Vec<&[f64]> = Mlp::grads_flat(grads).collect();
    for ((param, grad), state) in net.params_mut().zip(flat).zip(states.iter_mut()) {
        state.step(param, grad, lr)?;
    }
    Ok(())
}

/// One full PPO update over the buffer: `epochs_per_update` passes of
/// shuffled minibatches maximizing the clipped surrogate, a squared-error
/// value fit to the GAE returns, then the buffer is cleared.
pub fn ppo_update(
    policy: &mut GaussianPolicy,
    value_fn: &mut Mlp,
    buffer: &mut RolloutBuffer,
    config: &PpoConfig,
    opt: &mut PpoOptimState,
    rng: &mut ChaCha8Rng,
) -> Result<UpdateDiagnostics> {
    config.validate()?;
    if !buffer.is_full() {
        return Err(Error::Contract(format!(
            "update requires a full buffer ({} of {})",
            buffer.len(),
            buffer.capacity()
        )));
    }
    let transitions = buffer.transitions();
    let n = transitions.len();
    let (advantages, returns) =
        compute_advantages(transitions, config.discount, config.gae_lambda, 0.0)?;

    // Episode statistics before the update.
    let mut episodes = 0usize;
    let mut total = 0.0;
    let mut running = 0.0;
    for tr in transitions {
        running += tr.reward;
        if tr.done {
            episodes += 1;
            total += running;
            running = 0.0;
        }
    }
    let mean_return = if episodes > 0 { total / episodes as f64 } else { running };

    let mut indices: Vec<usize> = (0..n).collect();
    let mut actor_loss_sum = 0.0;
    let mut critic_loss_sum = 0.0;
    let mut clip_count = 0usize;
    let mut kl_sum = 0.0;
    let mut loss_terms = 0usize;

    for _epoch in 0..config.epochs_per_update {
        indices.shuffle(rng);
        for batch in indices.chunks(config.minibatch_size) {
            let mut actor_grads = MlpGrads::zeros_like(&policy.mean_net);
            let mut log_std_grad = DVector::zeros(policy.log_std.len());
            let mut critic_grads = MlpGrads::zeros_like(value_fn);
            let mut batch_actor_loss = 0.0;
            let mut batch_critic_loss = 0.0;
            let scale = 1.0 / batch.len() as f64;

            for &i in batch {
                let tr = &transitions[i];
                let adv = advantages[i];

                let (mean, cache) = policy.mean_net.eval(&tr.state)?;
                let new_lp =
                    squashed_log_prob(&mean, &policy.log_std, &tr.pre_squash, &tr.action);
                let ratio = (new_lp - tr.log_prob).exp();
                let clipped =
                    ratio.clamp(1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon);
                let surr1 = ratio * adv;
                let surr2 = clipped * adv;
                batch_actor_loss -= surr1.min(surr2);
                kl_sum += tr.log_prob - new_lp;
                if surr1 > surr2 {
                    clip_count += 1;
                } else {
                    // Gradient flows through the unclipped branch only.
                    let coeff = -adv * ratio * scale;
                    let mut d_mean = DVector::zeros(mean.len());
                    for j in 0..mean.len() {
                        let sigma = policy.log_std[j].exp();
                        let zscore = (tr.pre_squash[j] - mean[j]) / sigma;
                        d_mean[j] = coeff * zscore / sigma;
                        log_std_grad[j] += coeff * (zscore * zscore - 1.0);
                    }
                    actor_grads.add_assign(&policy.mean_net.grad(&cache, &d_mean)?);
                }
                // Entropy regularization only moves log_std: the Gaussian
                // entropy is mean-independent.
                for j in 0..policy.log_std.len() {
                    log_std_grad[j] -= config.entropy_coef * scale;
                }

                let (v, vcache) = value_fn.eval(&tr.state)?;
                let err = v[0] - returns[i];
                batch_critic_loss += err * err;
                let d_v = DVector::from_element(1, 2.0 * err * scale);
                critic_grads.add_assign(&value_fn.grad(&vcache, &d_v)?);
                loss_terms += 1;
            }

            let batch_actor_loss = batch_actor_loss * scale;
            let batch_critic_loss = batch_critic_loss * scale;
            if !batch_actor_loss.is_finite() || !batch_critic_loss.is_finite() {
                return Err(Error::AbortedUpdate(format!(
                    "actor loss {batch_actor_loss}, critic loss {batch_critic_loss}"
                )));
            }
            actor_loss_sum += batch_actor_loss;
            critic_loss_sum += batch_critic_loss;

            apply_grads(&mut policy.mean_net, &actor_grads, &mut opt.actor, config.actor_lr)?;
            opt.log_std.step(
                policy.log_std.as_mut_slice(),
                log_std_grad.as_slice(),
                config.actor_lr,
            )?;
            for v in policy.log_std.iter_mut() {
                *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
            }
            apply_grads(value_fn, &critic_grads, &mut opt.critic, config.critic_lr)?;
        }
    }

    let batches = config.epochs_per_update as f64 * (n as f64 / config.minibatch_size as f64).ceil();
    buffer.clear();
    Ok(UpdateDiagnostics {
        transitions: n,
        episodes,
        mean_return,
        actor_loss: actor_loss_sum / batches,
        critic_loss: critic_loss_sum / batches,
        clip_fraction: clip_count as f64 / loss_terms as f64,
        approx_kl: kl_sum / loss_terms as f64,
    })
}
