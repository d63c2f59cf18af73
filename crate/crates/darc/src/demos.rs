//! Demonstration collection for stage-1 training: an inverse-kinematics plus
//! PD feedback controller drives the arm to sampled targets, and each episode
//! records aligned context, trajectory, and feedback streams. Feedback noise
//! augmentation replicates episodes with bounded uniform noise on the joint
//! readings only.

use crate::arm::{
    self, check_collision, dynamics_step, end_effector, inverse_kinematics, ArmParams, ArmState,
    Obstacle,
};
use crate::error::{Error, Result};
use crate::io;
use crate::rewards::TaskKind;
use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Proportional and derivative gains of the demonstrator, in unit-command per
/// rad and per rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct PdGains {
    pub kp: Vector2<f64>,
    pub kd: Vector2<f64>,
}

impl Default for PdGains {
    fn default() -> Self {
        // Joint 2 runs much softer than joint 1: its effective inertia is
        // tiny, and a stiff discrete loop at 50 Hz chatters.
        Self {
            kp: Vector2::new(10.0, 6.0),
            kd: Vector2::new(0.5, 0.1),
        }
    }
}

impl PdGains {
    pub fn validate(&self) -> Result<()> {
        if self.kp.iter().chain(self.kd.iter()).any(|v| !(*v > 0.0)) {
            return Err(Error::Config("PD gains must be positive".into()));
        }
        Ok(())
    }
}

/// One recorded demonstration: per-step context (the target, constant within
/// the episode), trajectory `[pe_x, pe_y, u1, u2]`, and feedback
/// `[q1, q2, dq1, dq2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoEpisode {
    pub context: Vec<Vector2<f64>>,
    pub trajectory: Vec<[f64; 4]>,
    pub feedback: Vec<[f64; 4]>,
}

impl DemoEpisode {
    pub fn len(&self) -> usize {
        self.context.len()
    }

    pub fn is_empty(&self) -> bool {
        self.context.is_empty()
    }

    /// The episode's target (the constant context).
    pub fn target(&self) -> Vector2<f64> {
        self.context[0]
    }

    pub fn validate(&self) -> Result<()> {
        if self.context.is_empty() {
            return Err(Error::Contract("episode has no steps".into()));
        }
        if self.context.len() != self.trajectory.len() || self.context.len() != self.feedback.len()
        {
            return Err(Error::Contract(format!(
                "episode streams disagree: {} contexts, {} trajectory rows, {} feedback rows",
                self.context.len(),
                self.trajectory.len(),
                self.feedback.len()
            )));
        }
        if self.context.iter().any(|c| *c != self.context[0]) {
            return Err(Error::Contract("context varies within an episode".into()));
        }
        Ok(())
    }
}

/// Uniform noise half-widths per feedback channel, and how many noisy copies
/// to append per episode.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub half_widths: [f64; 4],
    pub copies: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            half_widths: [0.16, 0.11, 0.65, 0.37],
            copies: 10,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.half_widths.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("noise half-widths must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dataset provenance written to the metadata sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub task: TaskKind,
    pub seed: u64,
    pub arm_digest: String,
}

/// A set of demonstration episodes with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoDataset {
    pub episodes: Vec<DemoEpisode>,
    pub metadata: DatasetMeta,
}

impl DemoDataset {
    pub fn validate(&self) -> Result<()> {
        if self.episodes.is_empty() {
            return Err(Error::Contract("dataset has no episodes".into()));
        }
        let len = self.episodes[0].len();
        for (i, e) in self.episodes.iter().enumerate() {
            e.validate()?;
            if e.len() != len {
                return Err(Error::Contract(format!(
                    "episode {i} has {} steps, expected {len}",
                    e.len()
                )));
            }
        }
        Ok(())
    }

    /// Steps per episode (uniform across the dataset).
    pub fn horizon(&self) -> usize {
        self.episodes.first().map_or(0, DemoEpisode::len)
    }
}

/// Fingerprint of the arm parameters a dataset was collected with.
pub fn arm_digest(params: &ArmParams) -> String {
    let vals = [
        params.l1,
        params.l2,
        params.m1,
        params.m2,
        params.damping,
        params.dt,
        params.torque_gain,
        params.torque_limit,
        params.substeps as f64,
    ];
    io::digest_f64s(vals.iter())[..16].to_string()
}

/// Per-task collection plan: target count, episode horizon, and whether the
/// demonstrator must avoid the obstacle. The circle task reuses the obstacle
/// task's reaching dataset.
pub fn demo_plan(task: TaskKind) -> (usize, usize, bool) {
    match task {
        TaskKind::Reach => (50, 50, false),
        TaskKind::ReachObstacle | TaskKind::CircleTrack => (80, 100, true),
    }
}

fn pd_command(gains: &PdGains, q_des: &Vector2<f64>, state: &ArmState, limit: f64) -> Vector2<f64> {
    let u = Vector2::new(
        gains.kp[0] * (q_des[0] - state.q[0]) - gains.kd[0] * state.dq[0],
        gains.kp[1] * (q_des[1] - state.q[1]) - gains.kd[1] * state.dq[1],
    );
    Vector2::new(u[0].clamp(-limit, limit), u[1].clamp(-limit, limit))
}

struct EpisodeRecorder {
    context: Vec<Vector2<f64>>,
    trajectory: Vec<[f64; 4]>,
    feedback: Vec<[f64; 4]>,
    target: Vector2<f64>,
}

impl EpisodeRecorder {
    fn new(target: Vector2<f64>, horizon: usize) -> Self {
        Self {
            context: Vec::with_capacity(horizon),
            trajectory: Vec::with_capacity(horizon),
            feedback: Vec::with_capacity(horizon),
            target,
        }
    }

    fn record(&mut self, params: &ArmParams, state: &ArmState, u: &Vector2<f64>) {
        let tip = end_effector(params, &state.q);
        self.context.push(self.target);
        self.trajectory.push([tip[0], tip[1], u[0], u[1]]);
        self.feedback
            .push([state.q[0], state.q[1], state.dq[0], state.dq[1]]);
    }

    fn finish(self) -> DemoEpisode {
        DemoEpisode {
            context: self.context,
            trajectory: self.trajectory,
            feedback: self.feedback,
        }
    }
}

/// Runs the IK+PD demonstrator to a single target and records the episode.
/// Episodes whose final end-effector distance is 1 cm or more are rejected.
pub fn pd_demonstrate(
    params: &ArmParams,
    target: &Vector2<f64>,
    gains: &PdGains,
    horizon: usize,
) -> Result<DemoEpisode> {
    let q_des = inverse_kinematics(params, target, 1.0)?;
    let mut state = arm::reset(params, target, None)?;
    let mut rec = EpisodeRecorder::new(*target, horizon);
    for _ in 0..horizon {
        let u = pd_command(gains, &q_des, &state, params.torque_limit);
        rec.record(params, &state, &u);
        state = dynamics_step(params, &state, &u)?;
    }
    let final_distance = (end_effector(params, &state.q) - target).norm();
    if final_distance >= 0.01 {
        return Err(Error::RejectedDemo {
            final_distance,
            x: target[0],
            y: target[1],
        });
    }
    Ok(rec.finish())
}

/// Elbow branches whose static goal pose is collision-free for this target,
/// elbow-up first. Empty means the target cannot be held without touching
/// the obstacle and must be excluded.
pub fn clear_elbow_signs(
    params: &ArmParams,
    target: &Vector2<f64>,
    obstacle: &Obstacle,
) -> Vec<f64> {
    [1.0, -1.0]
        .into_iter()
        .filter(|sign| {
            inverse_kinematics(params, target, *sign).is_ok_and(|q| {
                !check_collision(params, &ArmState::at_rest(q), obstacle)
            })
        })
        .collect()
}

/// Shifts `angle` by whole turns to the representative closest to `anchor`.
fn wind_toward(angle: f64, anchor: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    angle + two_pi * ((anchor - angle) / two_pi).round()
}

/// One candidate motion plan for the obstacle demonstrator: an elbow branch,
/// a base-joint winding (the obstacle blocks the direct corridor for left
/// targets, so the long way around can be the only clear route), and an
/// optional via-point pushed off the obstacle.
struct DemoPlan {
    q_via: Option<Vector2<f64>>,
    q_target: Vector2<f64>,
}

fn candidate_plans(
    params: &ArmParams,
    target: &Vector2<f64>,
    obstacle: &Obstacle,
    attempt: u32,
) -> Vec<DemoPlan> {
    let mut plans = Vec::new();
    let push = obstacle.radius + 0.02 + 0.003 * attempt as f64;
    for sign in clear_elbow_signs(params, target, obstacle) {
        let q_principal = match inverse_kinematics(params, target, sign) {
            Ok(q) => q,
            Err(_) => continue,
        };
        let two_pi = 2.0 * std::f64::consts::PI;
        let windings = [0.0, -two_pi * q_principal[0].signum()];
        for winding in windings {
            let q_target = Vector2::new(q_principal[0] + winding, q_principal[1]);
            // Via-points perpendicular to the base-target line, both sides.
            let dir = target.normalize();
            let side = Vector2::new(-dir[1], dir[0]);
            let vias = [
                None,
                Some(obstacle.center + side * push),
                Some(obstacle.center - side * push),
            ];
            for via in vias {
                let q_via = via.and_then(|mut v| {
                    let max_r = params.reach() - 1e-3;
                    if v.norm() > max_r {
                        v = v.normalize() * max_r;
                    }
                    if v.norm() < 0.02 {
                        v = v.normalize() * 0.02;
                    }
                    inverse_kinematics(params, &v, sign).ok().map(|q| {
                        Vector2::new(wind_toward(q[0], q_target[0]), q[1])
                    })
                });
                if via.is_some() && q_via.is_none() {
                    continue;
                }
                plans.push(DemoPlan { q_via, q_target });
            }
        }
    }
    plans
}

fn run_plan(
    params: &ArmParams,
    target: &Vector2<f64>,
    gains: &PdGains,
    horizon: usize,
    obstacle: &Obstacle,
    plan: &DemoPlan,
) -> Result<DemoEpisode> {
    let switch_step = if plan.q_via.is_some() { horizon * 2 / 5 } else { 0 };
    let mut state = arm::reset(params, target, None)?;
    let mut rec = EpisodeRecorder::new(*target, horizon);
    for t in 0..horizon {
        let q_des = match &plan.q_via {
            Some(v) if t < switch_step => v,
            _ => &plan.q_target,
        };
        let u = pd_command(gains, q_des, &state, params.torque_limit);
        rec.record(params, &state, &u);
        state = dynamics_step(params, &state, &u)?;
        if check_collision(params, &state, obstacle) {
            return Err(Error::RejectedDemo {
                final_distance: f64::INFINITY,
                x: target[0],
                y: target[1],
            });
        }
    }
    let final_distance = (end_effector(params, &state.q) - target).norm();
    if final_distance >= 0.01 {
        return Err(Error::RejectedDemo {
            final_distance,
            x: target[0],
            y: target[1],
        });
    }
    Ok(rec.finish())
}

/// Obstacle-aware demonstrator. Tries candidate plans (elbow branch, base
/// winding, via-point side) in a fixed order and returns the first episode
/// that stays collision-free and ends within 1 cm; `attempt` widens the
/// via-point push for retries.
pub fn pd_demonstrate_avoiding(
    params: &ArmParams,
    target: &Vector2<f64>,
    gains: &PdGains,
    horizon: usize,
    obstacle: &Obstacle,
    attempt: u32,
) -> Result<DemoEpisode> {
    inverse_kinematics(params, target, 1.0)?;
    let plans = candidate_plans(params, target, obstacle, attempt);
    let mut last_err = Error::RejectedDemo {
        final_distance: f64::INFINITY,
        x: target[0],
        y: target[1],
    };
    for plan in &plans {
        match run_plan(params, target, gains, horizon, obstacle, plan) {
            Ok(episode) => return Ok(episode),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Training annulus bounds in meters.
pub const TRAIN_RADIUS: (f64, f64) = (0.10, 0.18);
/// Extrapolated evaluation shell in meters, disjoint from the annulus.
pub const EVAL_RADIUS: (f64, f64) = (0.18, 0.195);

fn sample_annulus(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Vector2<f64> {
    // Area-uniform radius.
    let u: f64 = rng.random_range(0.0..1.0);
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Vector2::new(r * a.cos(), r * a.sin())
}

fn excluded(params: &ArmParams, p: &Vector2<f64>, obstacle: Option<&Obstacle>) -> bool {
    obstacle.is_some_and(|o| {
        // Targets whose goal pose clears the obstacle by under 3 mm are not
        // worth demonstrating; no controller should hold a grazing pose.
        let inflated = Obstacle {
            radius: o.radius + 0.003,
            ..*o
        };
        (p - o.center).norm() < o.radius + 0.01
            || clear_elbow_signs(params, p, &inflated).is_empty()
    })
}

/// Samples training targets on the annulus. Obstacle tasks exclude a margin
/// around the obstacle (plus targets that cannot be held collision-free) and
/// bias three eighths of the points to its left, where reaching is hardest.
pub fn sample_training_targets(
    params: &ArmParams,
    task: TaskKind,
    obstacle: Option<&Obstacle>,
    count: usize,
    seed: u64,
) -> Vec<Vector2<f64>> {
    let mut rng = crate::rng::rng_from(seed, "targets.train");
    let obstacle = match task {
        TaskKind::Reach => None,
        _ => obstacle,
    };
    let left_quota = match task {
        TaskKind::Reach => 0,
        _ => count * 3 / 8,
    };
    let mut targets = Vec::with_capacity(count);
    while targets.len() < count {
        let p = sample_annulus(&mut rng, TRAIN_RADIUS.0, TRAIN_RADIUS.1);
        if excluded(params, &p, obstacle) {
            continue;
        }
        let want_left = targets.len() >= count - left_quota;
        if want_left && obstacle.is_some_and(|o| p[0] >= o.center[0]) {
            continue;
        }
        targets.push(p);
    }
    targets
}

/// Samples the 64 extrapolated evaluation targets on the shell just outside
/// the training annulus.
pub fn sample_eval_targets(
    params: &ArmParams,
    task: TaskKind,
    obstacle: Option<&Obstacle>,
    seed: u64,
) -> Vec<Vector2<f64>> {
    let mut rng = crate::rng::rng_from(seed, "targets.eval");
    let obstacle = match task {
        TaskKind::Reach => None,
        _ => obstacle,
    };
    let mut targets = Vec::with_capacity(64);
    while targets.len() < 64 {
        let u: f64 = rng.random_range(0.0..1.0);
        let r = EVAL_RADIUS.0 + u * (EVAL_RADIUS.1 - EVAL_RADIUS.0);
        if r <= EVAL_RADIUS.0 {
            continue;
        }
        let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let p = Vector2::new(r * a.cos(), r * a.sin());
        if excluded(params, &p, obstacle) {
            continue;
        }
        targets.push(p);
    }
    targets
}

/// Appends `copies` noisy replicas per episode: i.i.d. uniform noise within
/// the per-channel half-widths on the feedback stream only. Contexts and
/// trajectories are copied bit-exactly.
pub fn augment_noise(dataset: &DemoDataset, spec: &NoiseSpec, seed: u64) -> DemoDataset {
    let mut rng = crate::rng::rng_from(seed, "augment");
    let mut episodes = dataset.episodes.clone();
    for episode in &dataset.episodes {
        for _ in 0..spec.copies {
            let mut noisy = episode.clone();
            for row in &mut noisy.feedback {
                for (value, hw) in row.iter_mut().zip(spec.half_widths) {
                    if hw > 0.0 {
                        *value += rng.random_range(-hw..=hw);
                    }
                }
            }
            episodes.push(noisy);
        }
    }
    DemoDataset {
        episodes,
        metadata: dataset.metadata.clone(),
    }
}

const CSV_HEADER: [&str; 12] = [
    "episode", "t", "c_x", "c_y", "p_ex", "p_ey", "u1", "u2", "q1", "q2", "dq1", "dq2",
];

/// Writes the dataset CSV and its `<path>.meta` sidecar.
pub fn save_dataset(dataset: &DemoDataset, path: &Path) -> Result<()> {
    dataset.validate()?;
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    for (e, episode) in dataset.episodes.iter().enumerate() {
        for t in 0..episode.len() {
            let c = &episode.context[t];
            let tr = &episode.trajectory[t];
            let f = &episode.feedback[t];
            let fields: Vec<String> = [c[0], c[1], tr[0], tr[1], tr[2], tr[3], f[0], f[1], f[2], f[3]]
                .iter()
                .map(|v| io::fmt_f64(*v))
                .collect();
            writeln!(w, "{e},{t},{}", fields.join(","))?;
        }
    }
    w.flush()?;

    let meta = vec![
        ("task".to_string(), dataset.metadata.task.name().to_string()),
        ("seed".to_string(), dataset.metadata.seed.to_string()),
        ("arm_digest".to_string(), dataset.metadata.arm_digest.clone()),
        ("episodes".to_string(), dataset.episodes.len().to_string()),
        ("steps_per_episode".to_string(), dataset.horizon().to_string()),
    ];
    io::save_kv(&meta, &sidecar_path(path))?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    std::path::PathBuf::from(s)
}

/// Reads a dataset CSV and its sidecar back.
pub fn load_dataset(path: &Path) -> Result<DemoDataset> {
    use std::io::BufRead;
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "empty dataset file".into(),
        })??;
    for (i, (got, want)) in header.split(',').zip(CSV_HEADER).enumerate() {
        if got.trim() != want {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                message: format!("header column {} is `{}`, expected `{want}`", i + 1, got.trim()),
            });
        }
    }
    if header.split(',').count() != CSV_HEADER.len() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("expected {} header columns", CSV_HEADER.len()),
        });
    }

    let mut episodes: Vec<DemoEpisode> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                message: format!("expected 12 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                message: format!("bad float `{}`", s.trim()),
            })
        };
        let e: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: lineno,
            message: format!("bad episode index `{}`", fields[0].trim()),
        })?;
        if e == episodes.len() {
            episodes.push(DemoEpisode {
                context: Vec::new(),
                trajectory: Vec::new(),
                feedback: Vec::new(),
            });
        } else if e != episodes.len() - 1 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno,
                message: format!("episode index {e} out of order"),
            });
        }
        let episode = episodes.last_mut().expect("pushed above");
        episode
            .context
            .push(Vector2::new(parse(fields[2])?, parse(fields[3])?));
        episode.trajectory.push([
            parse(fields[4])?,
            parse(fields[5])?,
            parse(fields[6])?,
            parse(fields[7])?,
        ]);
        episode.feedback.push([
            parse(fields[8])?,
            parse(fields[9])?,
            parse(fields[10])?,
            parse(fields[11])?,
        ]);
    }

    let meta_pairs = io::load_kv(&sidecar_path(path))?;
    let get = |key: &str| -> Result<String> {
        meta_pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Parse {
                path: sidecar_path(path).display().to_string(),
                line: 0,
                message: format!("missing key `{key}`"),
            })
    };
    let metadata = DatasetMeta {
        task: TaskKind::parse(&get("task")?)?,
        seed: get("seed")?.parse().map_err(|_| Error::Parse {
            path: sidecar_path(path).display().to_string(),
            line: 0,
            message: "bad seed".into(),
        })?,
        arm_digest: get("arm_digest")?,
    };

    let dataset = DemoDataset { episodes, metadata };
    dataset.validate()?;
    Ok(dataset)
}
