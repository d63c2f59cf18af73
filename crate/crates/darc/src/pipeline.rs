//! Two-stage training and evaluation around the frozen reservoir.
//!
//! Stage 1 drives the reservoir with recorded demonstration streams and fits
//! the linear readout once by ridge regression. Stage 2 trains a PPO policy
//! that emits the context every `k` environment steps; the reservoir and
//! readout stay frozen, which a digest check enforces. Episodes can run in
//! three modes: the plain readout with the true target as context (CESN),
//! the policy-modulated reservoir (DARC), or the policy driving joint
//! torques directly with no reservoir (the PPO baseline).

use crate::arm::{self, check_collision, dynamics_step, end_effector, ArmParams, Obstacle};
use crate::demos::DemoDataset;
use crate::error::{Error, Result};
use crate::io;
use crate::ppo::{
    ppo_update, GaussianPolicy, Mlp, PpoConfig, PpoOptimState, RolloutBuffer, Transition,
};
use crate::reservoir::{
    init_reservoir, readout, reservoir_step, ridge_fit, ReadoutWeights, ReservoirConfig,
    ReservoirState, ReservoirWeights, TrainingBatch,
};
use crate::rewards::{
    reward_params_for, running_reward, terminal_reward, RewardParams, TaskKind,
};
use nalgebra::{DMatrix, DVector, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Half-width of the workspace box the policy's actions map onto, meters.
pub const CONTEXT_HALF_WIDTH: f64 = 0.21;

/// The moving-target circle of the tracking task.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePath {
    pub center: Vector2<f64>,
    pub radius: f64,
}

impl Default for CirclePath {
    fn default() -> Self {
        Self {
            center: Vector2::new(0.0, 0.11),
            radius: 0.07,
        }
    }
}

/// Task geometry and timing: horizon, context period, optional obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub horizon: usize,
    /// Environment steps each policy-emitted context is held.
    pub context_period: usize,
    pub obstacle: Option<Obstacle>,
    pub terminate_on_collision: bool,
    pub circle: CirclePath,
}

impl TaskSpec {
    pub fn for_kind(kind: TaskKind) -> Self {
        let (horizon, context_period, obstacle) = match kind {
            TaskKind::Reach => (50, 25, None),
            TaskKind::ReachObstacle => (100, 5, Some(Obstacle::default())),
            TaskKind::CircleTrack => (300, 5, Some(Obstacle::default())),
        };
        Self {
            kind,
            horizon,
            context_period,
            obstacle,
            terminate_on_collision: false,
            circle: CirclePath::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.context_period == 0 {
            return Err(Error::Config("horizon and context period must be positive".into()));
        }
        if let Some(o) = &self.obstacle {
            o.validate()?;
        }
        Ok(())
    }
}

/// Point on the circular path at step `t`, one full counterclockwise
/// revolution over the horizon starting at angle zero.
pub fn circular_target(t: usize, circle: &CirclePath, horizon: usize) -> Result<Vector2<f64>> {
    if t >= horizon {
        return Err(Error::Contract(format!(
            "circle step {t} outside horizon {horizon}"
        )));
    }
    let theta = 2.0 * std::f64::consts::PI * t as f64 / horizon as f64;
    Ok(circle.center + Vector2::new(circle.radius * theta.cos(), circle.radius * theta.sin()))
}

/// Maps a policy action in `[-1, 1]^2` onto workspace coordinates.
pub fn action_to_context(action: &DVector<f64>) -> Result<Vector2<f64>> {
    if action.len() != 2 {
        return Err(Error::DimensionMismatch {
            context: "context action",
            expected: 2,
            actual: action.len(),
        });
    }
    if action.iter().any(|a| a.abs() > 1.0) {
        return Err(Error::Contract(format!(
            "action ({}, {}) outside [-1, 1]",
            action[0], action[1]
        )));
    }
    Ok(Vector2::new(
        CONTEXT_HALF_WIDTH * action[0],
        CONTEXT_HALF_WIDTH * action[1],
    ))
}

/// What the trained context policy drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyMode {
    /// Actions become reservoir context.
    Darc,
    /// Actions become joint torque commands; the reservoir is bypassed.
    TorqueBaseline,
}

/// Episode execution modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Cesn,
    Darc,
    PpoBaseline,
}

impl RunMode {
    pub fn name(&self) -> &'static str {
        match self {
            RunMode::Cesn => "cesn",
            RunMode::Darc => "darc",
            RunMode::PpoBaseline => "ppo",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cesn" => Ok(RunMode::Cesn),
            "darc" => Ok(RunMode::Darc),
            "ppo" => Ok(RunMode::PpoBaseline),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected cesn|darc|ppo)"
            ))),
        }
    }
}

/// Actor, critic, and bookkeeping from stage-2 training.
#[derive(Debug, Clone)]
pub struct PolicyBundle {
    pub actor: GaussianPolicy,
    pub critic: Mlp,
    pub mode: PolicyMode,
    /// When set, the reservoir activations are appended to the policy
    /// observation.
    pub append_reservoir_state: bool,
}

/// The trained artifact: frozen reservoir plus readout, the arm it expects,
/// and (after stage 2) the context policy.
#[derive(Debug, Clone)]
pub struct DarcModel {
    pub reservoir_config: ReservoirConfig,
    pub weights: ReservoirWeights,
    pub readout: ReadoutWeights,
    pub arm: ArmParams,
    pub context_period: usize,
    pub policy: Option<PolicyBundle>,
}

impl DarcModel {
    /// Fingerprint of the frozen stage-1 parameters (reservoir channels and
    /// readout). Stage 2 must leave it untouched.
    pub fn reservoir_digest(&self) -> String {
        frozen_digest(&self.weights, &self.readout)
    }
}

pub fn frozen_digest(weights: &ReservoirWeights, readout: &ReadoutWeights) -> String {
    let dims = [
        weights.w_x().nrows() as f64,
        weights.w_c().ncols() as f64,
        weights.w_f().map_or(0.0, |m| m.ncols() as f64),
        weights.w_u().map_or(0.0, |m| m.ncols() as f64),
        readout.w_out.nrows() as f64,
    ];
    io::digest_f64s(
        dims.iter()
            .chain(weights.w_x().iter())
            .chain(weights.w_c().iter())
            .chain(weights.w_f().into_iter().flatten())
            .chain(weights.w_u().into_iter().flatten())
            .chain(readout.w_out.iter()),
    )
}

/// Per-channel root-mean-square training error of the readout fit.
#[derive(Debug, Clone)]
pub struct Stage1Report {
    pub rmse: [f64; 4],
    pub columns: usize,
}

fn feedback_vectors(episode: &crate::demos::DemoEpisode) -> Vec<DVector<f64>> {
    episode
        .feedback
        .iter()
        .map(|f| DVector::from_row_slice(f))
        .collect()
}

/// Fits the readout from a demonstration dataset: every episode is replayed
/// through a zeroed reservoir, the augmented states are pooled into one
/// batch, and the ridge solve runs once.
pub fn train_stage1(
    dataset: &DemoDataset,
    config: &ReservoirConfig,
    arm_params: &ArmParams,
) -> Result<(DarcModel, Stage1Report)> {
    dataset.validate()?;
    config.validate()?;
    arm_params.validate()?;
    let task = dataset.metadata.task;
    let expect_feedback = task != TaskKind::Reach;
    if expect_feedback && config.n_feedback != 4 {
        return Err(Error::Config(format!(
            "task {} trains with the 4-channel feedback input, config has n_feedback={}",
            task.name(),
            config.n_feedback
        )));
    }
    if !expect_feedback && config.n_feedback != 0 {
        return Err(Error::Config(
            "the plain reaching task trains without feedback input".into(),
        ));
    }
    if config.n_context != 2 || config.n_output != 4 {
        return Err(Error::Config(
            "this pipeline uses a 2-d context and 4-d output".into(),
        ));
    }
    let expected_digest = crate::demos::arm_digest(arm_params);
    if dataset.metadata.arm_digest != expected_digest {
        return Err(Error::Config(format!(
            "dataset was collected with different arm parameters (digest {} vs {})",
            dataset.metadata.arm_digest, expected_digest
        )));
    }

    let weights = init_reservoir(config)?;
    let total: usize = dataset.episodes.iter().map(|e| e.len()).sum();
    let mut states = DMatrix::zeros(config.n_reservoir + 1, total);
    let mut targets = DMatrix::zeros(4, total);
    let mut col = 0;
    for episode in &dataset.episodes {
        let contexts: Vec<DVector<f64>> = episode
            .context
            .iter()
            .map(|c| DVector::from_row_slice(&[c[0], c[1]]))
            .collect();
        let feedbacks = expect_feedback.then(|| feedback_vectors(episode));
        let sequence = crate::reservoir::run_sequence(
            &weights,
            &ReservoirState::zeroed(config.n_reservoir),
            &contexts,
            feedbacks.as_deref(),
            None,
            config.leak_rate,
        )?;
        for (state, row) in sequence.iter().zip(&episode.trajectory) {
            states[(0, col)] = 1.0;
            states
                .view_mut((1, col), (config.n_reservoir, 1))
                .copy_from(&state.x);
            for (i, v) in row.iter().enumerate() {
                targets[(i, col)] = *v;
            }
            col += 1;
        }
    }

    let batch = TrainingBatch::new(states, targets)?;
    let fitted = ridge_fit(&batch, config.ridge_lambda)?;

    let residual = batch.targets() - &fitted.w_out * batch.states();
    let mut rmse = [0.0; 4];
    for (i, item) in rmse.iter_mut().enumerate() {
        *item = (residual.row(i).map(|v| v * v).sum() / total as f64).sqrt();
    }

    let model = DarcModel {
        reservoir_config: config.clone(),
        weights,
        readout: fitted,
        arm: arm_params.clone(),
        context_period: TaskSpec::for_kind(task).context_period,
        policy: None,
    };
    Ok((
        model,
        Stage1Report {
            rmse,
            columns: total,
        },
    ))
}

/// Episode goal: a fixed reach target or the moving circle.
#[derive(Debug, Clone)]
pub enum EpisodeGoal {
    Point(Vector2<f64>),
    Circle,
}

/// Per-episode evaluation row.
#[derive(Debug, Clone)]
pub struct EpisodeRow {
    pub target: Vector2<f64>,
    pub final_distance: f64,
    pub path_length: f64,
    pub success: bool,
    pub collisions: usize,
    pub radial_error: Option<f64>,
}

/// Everything one rollout produced.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    /// End-effector positions, `horizon + 1` points including the start.
    pub positions: Vec<Vector2<f64>>,
    /// Context injected at each step (policy-held or true target).
    pub contexts: Vec<Vector2<f64>>,
    /// Unit torque commands actually applied.
    pub torques: Vec<Vector2<f64>>,
    pub step_rewards: Vec<f64>,
    pub terminal_reward: f64,
    /// One transition per policy invocation (stochastic rollouts only).
    pub transitions: Vec<Transition>,
    pub row: EpisodeRow,
}

struct PendingInvocation {
    state: DVector<f64>,
    action: DVector<f64>,
    pre_squash: DVector<f64>,
    log_prob: f64,
    value: f64,
    reward: f64,
}

fn policy_observation(
    arm_params: &ArmParams,
    state: &arm::ArmState,
    desired: &Vector2<f64>,
    reservoir: Option<&ReservoirState>,
) -> DVector<f64> {
    let base = arm::observe(arm_params, state, desired);
    match reservoir {
        None => DVector::from_row_slice(base.as_slice()),
        Some(res) => {
            let mut v = DVector::zeros(12 + res.x.len());
            v.rows_mut(0, 12).copy_from_slice(base.as_slice());
            v.rows_mut(12, res.x.len()).copy_from(&res.x);
            v
        }
    }
}

fn rollout(
    model: &DarcModel,
    actor: Option<&GaussianPolicy>,
    critic: Option<&Mlp>,
    mode: RunMode,
    task: &TaskSpec,
    goal: &EpisodeGoal,
    rng: Option<&mut ChaCha8Rng>,
    params: &RewardParams,
    append_reservoir_state: bool,
) -> Result<EpisodeOutcome> {
    task.validate()?;
    let arm_params = &model.arm;
    let k = task.context_period;
    let horizon = task.horizon;
    let desired_at = |t: usize| -> Result<Vector2<f64>> {
        match goal {
            EpisodeGoal::Point(p) => Ok(*p),
            EpisodeGoal::Circle => circular_target(t, &task.circle, horizon),
        }
    };

    let mut arm_state = arm::reset(arm_params, &desired_at(0)?, None)?;
    let mut res_state = ReservoirState::zeroed(model.reservoir_config.n_reservoir);
    let uses_feedback = model.reservoir_config.n_feedback > 0;

    let mut positions = Vec::with_capacity(horizon + 1);
    positions.push(end_effector(arm_params, &arm_state.q));
    let mut contexts = Vec::with_capacity(horizon);
    let mut torques = Vec::with_capacity(horizon);
    let mut step_rewards = Vec::with_capacity(horizon);
    let mut transitions = Vec::new();
    let mut collisions = 0usize;

    let mut held_context = Vector2::zeros();
    let mut held_torque = DVector::zeros(2);
    let mut pending: Option<PendingInvocation> = None;
    let mut rng = rng;

    for t in 0..horizon {
        let desired = desired_at(t)?;

        if mode != RunMode::Cesn && t % k == 0 {
            let actor = actor.ok_or(Error::MissingPolicy(mode.name()))?;
            if let Some(p) = pending.take() {
                transitions.push(Transition {
                    state: p.state,
                    action: p.action,
                    pre_squash: p.pre_squash,
                    log_prob: p.log_prob,
                    reward: p.reward,
                    value: p.value,
                    done: false,
                });
            }
            let reservoir_obs =
                (append_reservoir_state && mode == RunMode::Darc).then_some(&res_state);
            let obs = policy_observation(arm_params, &arm_state, &desired, reservoir_obs);
            let (action, pre_squash, log_prob) = match rng.as_deref_mut() {
                Some(r) => {
                    let s = actor.sample_action(&obs, r)?;
                    (s.action, s.pre_squash, s.log_prob)
                }
                None => {
                    let a = actor.act_mean(&obs)?;
                    let z = a.map(|v| v.atanh());
                    (a, z, 0.0)
                }
            };
            let value = match critic {
                Some(v) => v.forward(&obs)?[0],
                None => 0.0,
            };
            match mode {
                RunMode::Darc => held_context = action_to_context(&action)?,
                RunMode::PpoBaseline => held_torque = action.clone(),
                RunMode::Cesn => unreachable!(),
            }
            pending = Some(PendingInvocation {
                state: obs,
                action,
                pre_squash,
                log_prob,
                value,
                reward: 0.0,
            });
        }

        let context = match mode {
            RunMode::Cesn => desired,
            RunMode::Darc => held_context,
            RunMode::PpoBaseline => Vector2::zeros(),
        };

        let torque = match mode {
            RunMode::PpoBaseline => Vector2::new(held_torque[0], held_torque[1]),
            _ => {
                let ctx_vec = DVector::from_row_slice(&[context[0], context[1]]);
                let feedback = uses_feedback.then(|| {
                    DVector::from_row_slice(&[
                        arm_state.q[0],
                        arm_state.q[1],
                        arm_state.dq[0],
                        arm_state.dq[1],
                    ])
                });
                res_state = reservoir_step(
                    &model.weights,
                    &res_state,
                    &ctx_vec,
                    feedback.as_ref(),
                    None,
                    model.reservoir_config.leak_rate,
                )?;
                let y = readout(&model.readout, &res_state)?;
                Vector2::new(y[2], y[3])
            }
        };

        arm_state = dynamics_step(arm_params, &arm_state, &torque)?;
        let tip = end_effector(arm_params, &arm_state.q);
        let collided = task
            .obstacle
            .as_ref()
            .is_some_and(|o| check_collision(arm_params, &arm_state, o));
        if collided {
            collisions += 1;
        }
        let reward = running_reward(&tip, &desired, collided, params);

        positions.push(tip);
        contexts.push(context);
        torques.push(torque);
        step_rewards.push(reward);
        if let Some(p) = pending.as_mut() {
            p.reward += reward;
        }

        if task.terminate_on_collision && collided {
            break;
        }
    }

    let steps_run = torques.len();
    let desired_traj: Option<Vec<Vector2<f64>>> = match goal {
        EpisodeGoal::Circle => Some(
            (0..steps_run)
                .map(|t| desired_at(t))
                .collect::<Result<_>>()?,
        ),
        EpisodeGoal::Point(_) => None,
    };
    let final_desired = desired_at(steps_run.saturating_sub(1))?;
    let final_distance = (positions[positions.len() - 1] - final_desired).norm();
    let reached = final_distance < params.reach_threshold;
    let terminal = terminal_reward(
        task.kind,
        reached,
        &positions,
        desired_traj.as_deref(),
        params,
    )?;

    if let Some(mut p) = pending.take() {
        p.reward += terminal;
        transitions.push(Transition {
            state: p.state,
            action: p.action,
            pre_squash: p.pre_squash,
            log_prob: p.log_prob,
            reward: p.reward,
            value: p.value,
            done: true,
        });
    }

    let radial_error = match goal {
        EpisodeGoal::Circle => Some(
            positions[1..]
                .iter()
                .map(|p| ((p - task.circle.center).norm() - task.circle.radius).abs())
                .sum::<f64>()
                / steps_run as f64,
        ),
        EpisodeGoal::Point(_) => None,
    };

    Ok(EpisodeOutcome {
        row: EpisodeRow {
            target: final_desired,
            final_distance,
            path_length: crate::rewards::path_length(&positions)?,
            success: final_distance < 0.01,
            collisions,
            radial_error,
        },
        positions,
        contexts,
        torques,
        step_rewards,
        terminal_reward: terminal,
        transitions,
    })
}

/// Runs one episode with the model's own policy (when the mode needs one).
/// Deterministic when `rng` is `None` (the policy mean is used).
pub fn run_episode(
    model: &DarcModel,
    mode: RunMode,
    task: &TaskSpec,
    goal: &EpisodeGoal,
    rng: Option<&mut ChaCha8Rng>,
    params: &RewardParams,
) -> Result<EpisodeOutcome> {
    let (actor, append) = match (mode, &model.policy) {
        (RunMode::Cesn, _) => (None, false),
        (_, Some(bundle)) => (Some(&bundle.actor), bundle.append_reservoir_state),
        (_, None) => return Err(Error::MissingPolicy(mode.name())),
    };
    rollout(model, actor, None, mode, task, goal, rng, params, append)
}

/// Stage-2 options.
#[derive(Debug, Clone)]
pub struct Stage2Config {
    pub episodes: usize,
    pub ppo: PpoConfig,
    pub seed: u64,
    pub policy_mode: PolicyMode,
    pub append_reservoir_state: bool,
}

impl Default for Stage2Config {
    fn default() -> Self {
        Self {
            episodes: 2000,
            ppo: PpoConfig::default(),
            seed: 0,
            policy_mode: PolicyMode::Darc,
            append_reservoir_state: false,
        }
    }
}

/// One learning-curve row per PPO update.
#[derive(Debug, Clone)]
pub struct UpdatePoint {
    pub update: usize,
    pub episodes_collected: usize,
    pub mean_return: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
}

/// Trains the context policy on the frozen reservoir. Episodes sample
/// targets uniformly from `targets` (ignored for the circle task). The
/// reservoir digest is checked on exit; any change is a hard failure.
pub fn train_stage2(
    model: &mut DarcModel,
    task: &TaskSpec,
    targets: &[Vector2<f64>],
    cfg: &Stage2Config,
) -> Result<Vec<UpdatePoint>> {
    task.validate()?;
    cfg.ppo.validate()?;
    if task.kind != TaskKind::CircleTrack && targets.is_empty() {
        return Err(Error::Config("stage-2 reach training needs targets".into()));
    }
    let digest_before = model.reservoir_digest();
    let params = reward_params_for(task.kind);

    let run_mode = match cfg.policy_mode {
        PolicyMode::Darc => RunMode::Darc,
        PolicyMode::TorqueBaseline => RunMode::PpoBaseline,
    };
    let append = cfg.append_reservoir_state && cfg.policy_mode == PolicyMode::Darc;
    let obs_dim = if append {
        12 + model.reservoir_config.n_reservoir
    } else {
        12
    };

    let mut init_rng = crate::rng::rng_from(cfg.seed, "stage2.init");
    let mut rollout_rng = crate::rng::rng_from(cfg.seed, "stage2.rollout");
    let mut update_rng = crate::rng::rng_from(cfg.seed, "stage2.update");

    let (mut actor, mut critic) = match model.policy.take() {
        Some(bundle) if bundle.mode == cfg.policy_mode => (bundle.actor, bundle.critic),
        _ => (
            GaussianPolicy::new(obs_dim, 2, cfg.ppo.hidden_width, cfg.ppo.init_std, &mut init_rng)?,
            Mlp::new(
                &[obs_dim, cfg.ppo.hidden_width, cfg.ppo.hidden_width, 1],
                &mut init_rng,
            )?,
        ),
    };
    let mut opt = PpoOptimState::new(&actor, &critic);
    let mut buffer = RolloutBuffer::new(cfg.ppo.buffer_capacity);
    let mut curve = Vec::new();
    let mut episodes_collected = 0usize;

    for _ in 0..cfg.episodes {
        let goal = match task.kind {
            TaskKind::CircleTrack => EpisodeGoal::Circle,
            _ => {
                let idx = rollout_rng.random_range(0..targets.len());
                EpisodeGoal::Point(targets[idx])
            }
        };
        let outcome = rollout(
            model,
            Some(&actor),
            Some(&critic),
            run_mode,
            task,
            &goal,
            Some(&mut rollout_rng),
            &params,
            append,
        )?;
        episodes_collected += 1;
        for tr in outcome.transitions {
            buffer.push(tr);
        }
        if buffer.is_full() {
            let diag = ppo_update(
                &mut actor,
                &mut critic,
                &mut buffer,
                &cfg.ppo,
                &mut opt,
                &mut update_rng,
            )?;
            curve.push(UpdatePoint {
                update: curve.len() + 1,
                episodes_collected,
                mean_return: diag.mean_return,
                actor_loss: diag.actor_loss,
                critic_loss: diag.critic_loss,
            });
        }
    }

    let digest_after = frozen_digest(&model.weights, &model.readout);
    if digest_after != digest_before {
        return Err(Error::DigestMismatch {
            before: digest_before,
            after: digest_after,
        });
    }
    model.policy = Some(PolicyBundle {
        actor,
        critic,
        mode: cfg.policy_mode,
        append_reservoir_state: append,
    });
    Ok(curve)
}

/// Aggregated evaluation over targets (or repeated circle runs).
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub mode: RunMode,
    pub task: TaskKind,
    pub rows: Vec<EpisodeRow>,
}

/// Sample mean and standard error.
pub fn mean_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl EvalReport {
    pub fn success_count(&self) -> usize {
        self.rows.iter().filter(|r| r.success).count()
    }

    pub fn total_collisions(&self) -> usize {
        self.rows.iter().map(|r| r.collisions).sum()
    }

    pub fn final_distance_stats(&self) -> (f64, f64) {
        let v: Vec<f64> = self.rows.iter().map(|r| r.final_distance).collect();
        mean_sem(&v)
    }

    pub fn path_length_stats(&self) -> (f64, f64) {
        let v: Vec<f64> = self.rows.iter().map(|r| r.path_length).collect();
        mean_sem(&v)
    }

    pub fn radial_error_stats(&self) -> Option<(f64, f64)> {
        let v: Vec<f64> = self.rows.iter().filter_map(|r| r.radial_error).collect();
        if v.is_empty() {
            None
        } else {
            Some(mean_sem(&v))
        }
    }

    /// Human-readable metrics block.
    pub fn summary_text(&self) -> String {
        let (fd, fd_sem) = self.final_distance_stats();
        let (pl, pl_sem) = self.path_length_stats();
        let mut s = format!(
            "mode {}  task {}\n  episodes           {}\n  successes (<1 cm)  {}\n  final distance     {:.4} ± {:.4} m\n  path length        {:.4} ± {:.4} m\n  collisions         {}\n",
            self.mode.name(),
            self.task.name(),
            self.rows.len(),
            self.success_count(),
            fd,
            fd_sem,
            pl,
            pl_sem,
            self.total_collisions(),
        );
        if let Some((re, re_sem)) = self.radial_error_stats() {
            s.push_str(&format!("  radial error       {:.4} ± {:.4} m\n", re, re_sem));
        }
        s
    }
}

/// Deterministic evaluation: `runs` repeats over every target (or `runs`
/// circle episodes), each rolled out with the policy mean.
pub fn evaluate(
    model: &DarcModel,
    mode: RunMode,
    task: &TaskSpec,
    targets: &[Vector2<f64>],
    runs: usize,
) -> Result<EvalReport> {
    let params = reward_params_for(task.kind);
    let goals: Vec<EpisodeGoal> = match task.kind {
        TaskKind::CircleTrack => (0..runs).map(|_| EpisodeGoal::Circle).collect(),
        _ => (0..runs)
            .flat_map(|_| targets.iter().map(|t| EpisodeGoal::Point(*t)))
            .collect(),
    };
    let rows: Vec<EpisodeRow> = goals
        .par_iter()
        .map(|goal| run_episode(model, mode, task, goal, None, &params).map(|o| o.row))
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        mode,
        task: task.kind,
        rows,
    })
}

/// The IK+PD demonstrator tracking the moving circle directly; the reference
/// controller the tracking task is compared against.
pub fn pd_circle_baseline(
    arm_params: &ArmParams,
    gains: &crate::demos::PdGains,
    circle: &CirclePath,
    horizon: usize,
) -> Result<Vec<Vector2<f64>>> {
    let start = circular_target(0, circle, horizon)?;
    let mut state = arm::reset(arm_params, &start, None)?;
    let mut positions = Vec::with_capacity(horizon + 1);
    positions.push(end_effector(arm_params, &state.q));
    for t in 0..horizon {
        let desired = circular_target(t, circle, horizon)?;
        let q_des = arm::inverse_kinematics(arm_params, &desired, 1.0)?;
        let u = Vector2::new(
            (gains.kp[0] * (q_des[0] - state.q[0]) - gains.kd[0] * state.dq[0])
                .clamp(-arm_params.torque_limit, arm_params.torque_limit),
            (gains.kp[1] * (q_des[1] - state.q[1]) - gains.kd[1] * state.dq[1])
                .clamp(-arm_params.torque_limit, arm_params.torque_limit),
        );
        state = dynamics_step(arm_params, &state, &u)?;
        positions.push(end_effector(arm_params, &state.q));
    }
    Ok(positions)
}

/// Mean `| |P - center| - radius |` over the post-step samples of a rollout.
pub fn mean_radial_error(positions: &[Vector2<f64>], circle: &CirclePath) -> f64 {
    positions
        .iter()
        .map(|p| ((p - circle.center).norm() - circle.radius).abs())
        .sum::<f64>()
        / positions.len() as f64
}
