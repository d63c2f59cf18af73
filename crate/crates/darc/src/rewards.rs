//! Shaped running reward, the two terminal reward forms, and the trajectory
//! metrics behind them.
//!
//! The running reward combines a distance term, a proximity bonus inside
//! 5 mm, and a flat collision penalty. Reach-style tasks pay a terminal
//! reward only on success and charge for path length; the tracking task pays
//! unconditionally and charges for mean tracking error.

use crate::error::{Error, Result};
use nalgebra::Vector2;

/// The three evaluation tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Reach,
    ReachObstacle,
    CircleTrack,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Reach => "reach",
            TaskKind::ReachObstacle => "obstacle",
            TaskKind::CircleTrack => "circle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "reach" => Ok(TaskKind::Reach),
            "obstacle" => Ok(TaskKind::ReachObstacle),
            "circle" => Ok(TaskKind::CircleTrack),
            other => Err(Error::Config(format!(
                "unknown task `{other}` (expected reach|obstacle|circle)"
            ))),
        }
    }
}

/// Coefficients of the shaped reward. The `_r`/`_len`/`_err` suffixes keep
/// these apart from the reservoir leak rate and the RL discount, which reuse
/// the same Greek letters elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardParams {
    /// Weight on the per-step distance to the desired point.
    pub alpha_r: f64,
    /// Weight on the proximity bonus.
    pub beta_r: f64,
    /// Terminal path-length charge (reach tasks).
    pub gamma_len: f64,
    /// Terminal tracking-error charge (circle task).
    pub eta_err: f64,
    /// Terminal constant.
    pub c_term: f64,
    /// Proximity-bonus threshold in meters.
    pub near_threshold: f64,
    /// Success threshold in meters for terminal gating.
    pub reach_threshold: f64,
    /// Flat penalty added on any step in collision.
    pub collision_penalty: f64,
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.near_threshold < self.reach_threshold) {
            return Err(Error::Config(
                "near_threshold must be smaller than reach_threshold".into(),
            ));
        }
        Ok(())
    }
}

/// Published coefficients for each task.
pub fn reward_params_for(task: TaskKind) -> RewardParams {
    let (alpha_r, beta_r, gamma_len, eta_err, c_term) = match task {
        TaskKind::Reach => (-1.0, 2.0, 100.0, 0.0, 100.0),
        TaskKind::ReachObstacle => (-0.5, 1.0, 100.0, 0.0, 100.0),
        TaskKind::CircleTrack => (-0.01, 0.01, 0.0, 100.0, 10.0),
    };
    RewardParams {
        alpha_r,
        beta_r,
        gamma_len,
        eta_err,
        c_term,
        near_threshold: 0.005,
        reach_threshold: 0.01,
        collision_penalty: -10.0,
    }
}

/// Per-step shaped reward: `alpha_r * r_d + beta_r * r_s + r_o` with
/// `r_d` the distance to the desired point, `r_s` the strict sub-5mm bonus
/// indicator, and `r_o` the collision penalty.
pub fn running_reward(
    p: &Vector2<f64>,
    p_desired: &Vector2<f64>,
    collided: bool,
    params: &RewardParams,
) -> f64 {
    let r_d = (p - p_desired).norm();
    let r_s = if r_d < params.near_threshold { 1.0 } else { 0.0 };
    let r_o = if collided { params.collision_penalty } else { 0.0 };
    params.alpha_r * r_d + params.beta_r * r_s + r_o
}

/// Total length of the polyline through the given points.
pub fn path_length(traj: &[Vector2<f64>]) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::Contract("path_length of an empty trajectory".into()));
    }
    Ok(traj.windows(2).map(|w| (w[1] - w[0]).norm()).sum())
}

/// Mean pointwise distance between two equally long trajectories.
pub fn avg_tracking_error(traj: &[Vector2<f64>], desired: &[Vector2<f64>]) -> Result<f64> {
    if traj.is_empty() || traj.len() != desired.len() {
        return Err(Error::Contract(format!(
            "avg_tracking_error needs equal non-empty lengths, got {} and {}",
            traj.len(),
            desired.len()
        )));
    }
    let total: f64 = traj
        .iter()
        .zip(desired)
        .map(|(a, b)| (a - b).norm())
        .sum();
    Ok(total / traj.len() as f64)
}

/// Terminal reward. Reach tasks pay `c - gamma_len * L` only when the target
/// was reached; the tracking task pays `c - eta_err * p_e` unconditionally.
pub fn terminal_reward(
    task: TaskKind,
    reached: bool,
    traj: &[Vector2<f64>],
    desired_traj: Option<&[Vector2<f64>]>,
    params: &RewardParams,
) -> Result<f64> {
    match task {
        TaskKind::Reach | TaskKind::ReachObstacle => {
            if desired_traj.is_some() {
                return Err(Error::Contract(
                    "reach tasks take no desired trajectory".into(),
                ));
            }
            if reached {
                Ok(params.c_term - params.gamma_len * path_length(traj)?)
            } else {
                Ok(0.0)
            }
        }
        TaskKind::CircleTrack => {
            let desired = desired_traj.ok_or_else(|| {
                Error::Contract("circle tracking requires the desired trajectory".into())
            })?;
            Ok(params.c_term - params.eta_err * avg_tracking_error(traj, desired)?)
        }
    }
}
