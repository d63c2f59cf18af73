//! A 2-D point-mass task used as a self-contained convergence check for the
//! PPO machinery: accelerate toward the origin, reward rises as you close in.

use super::{
    ppo_update, GaussianPolicy, Mlp, PpoConfig, PpoOptimState, RolloutBuffer, Transition,
};
use crate::error::Result;
use nalgebra::{DVector, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const OBS_DIM: usize = 4;
pub const ACTION_DIM: usize = 2;
pub const HORIZON: usize = 50;

/// Point mass with velocity drag; actions are bounded accelerations.
pub struct PointMassEnv {
    pos: Vector2<f64>,
    vel: Vector2<f64>,
    steps: usize,
}

impl PointMassEnv {
    pub fn reset(rng: &mut ChaCha8Rng) -> Self {
        let pos = Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        Self {
            pos,
            vel: Vector2::zeros(),
            steps: 0,
        }
    }

    pub fn observe(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.pos[0], self.pos[1], self.vel[0], self.vel[1]])
    }

    /// Applies a bounded acceleration and returns the reward, which peaks at
    /// 1 on the origin.
    pub fn step(&mut self, action: &DVector<f64>) -> f64 {
        let a = Vector2::new(action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0));
        self.vel = self.vel * 0.9 + a * 0.15;
        self.pos += self.vel * 0.1;
        self.steps += 1;
        (-3.0 * self.pos.norm()).exp()
    }

    pub fn done(&self) -> bool {
        self.steps >= HORIZON
    }
}

/// A scaled-down configuration that converges in seconds.
pub fn smoke_config() -> PpoConfig {
    PpoConfig {
        buffer_capacity: 500,
        epochs_per_update: 10,
        minibatch_size: 125,
        hidden_width: 32,
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        ..PpoConfig::default()
    }
}

/// Trains a fresh agent for `updates` PPO updates and returns every episode
/// return in collection order.
pub fn run_training(config: &PpoConfig, updates: usize, seed: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let mut init_rng = crate::rng::rng_from(seed, "pointmass.init");
    let mut rollout_rng = crate::rng::rng_from(seed, "pointmass.rollout");
    let mut update_rng = crate::rng::rng_from(seed, "pointmass.update");

    let mut policy = GaussianPolicy::new(
        OBS_DIM,
        ACTION_DIM,
        config.hidden_width,
        config.init_std,
        &mut init_rng,
    )?;
    let mut value_fn = Mlp::new(
        &[OBS_DIM, config.hidden_width, config.hidden_width, 1],
        &mut init_rng,
    )?;
    let mut opt = PpoOptimState::new(&policy, &value_fn);
    let mut buffer = RolloutBuffer::new(config.buffer_capacity);

    let mut episode_returns = Vec::new();
    for _ in 0..updates {
        while !buffer.is_full() {
            let mut env = PointMassEnv::reset(&mut rollout_rng);
            let mut episode_return = 0.0;
            while !env.done() {
                let state = env.observe();
                let sampled = policy.sample_action(&state, &mut rollout_rng)?;
                let value = value_fn.forward(&state)?[0];
                let reward = env.step(&sampled.action);
                episode_return += reward;
                buffer.push(Transition {
                    state,
                    action: sampled.action,
                    pre_squash: sampled.pre_squash,
                    log_prob: sampled.log_prob,
                    reward,
                    value,
                    done: env.done(),
                });
            }
            episode_returns.push(episode_return);
        }
        ppo_update(
            &mut policy,
            &mut value_fn,
            &mut buffer,
            config,
            &mut opt,
            &mut update_rng,
        )?;
    }
    Ok(episode_returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_reward_peaks_at_origin() {
        let mut rng = crate::rng::rng_from(0, "pointmass-test");
        let mut env = PointMassEnv::reset(&mut rng);
        env.pos = Vector2::zeros();
        let r = env.step(&DVector::zeros(2));
        assert!(r > 0.99);
        env.pos = Vector2::new(1.0, 0.0);
        env.vel = Vector2::zeros();
        let far = env.step(&DVector::zeros(2));
        assert!(far < r);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = smoke_config();
        let a = run_training(&cfg, 2, 5).unwrap();
        let b = run_training(&cfg, 2, 5).unwrap();
        assert_eq!(a, b);
    }
}
