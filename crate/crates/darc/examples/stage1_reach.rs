use darc::arm::*;
use darc::demos::*;
use darc::pipeline::*;
use darc::reservoir::ReservoirConfig;
use darc::rewards::{reward_params_for, TaskKind};
use darc::Vector2;
use rand::Rng;

fn sector_targets(count: usize, seed: u64, r_lo: f64, r_hi: f64) -> Vec<Vector2<f64>> {
    let mut rng = darc::rng::rng_from(seed, "targets.train");
    let mut v = Vec::new();
    while v.len() < count {
        let u: f64 = rng.random_range(0.0..1.0);
        let r = (r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo)).sqrt();
        let a = rng.random_range(-std::f64::consts::FRAC_PI_4..3.0 * std::f64::consts::FRAC_PI_4);
        v.push(Vector2::new(r * a.cos(), r * a.sin()));
    }
    v
}

fn minjerk_demo(arm: &ArmParams, target: &Vector2<f64>, kp: (f64,f64), kd: (f64,f64), horizon: usize) -> Option<DemoEpisode> {
    let q_des = inverse_kinematics(arm, target, 1.0).ok()?;
    let q0 = Vector2::new(HOME_POSE[0], HOME_POSE[1]);
    let mut state = ArmState::at_rest(q0);
    let t_move = horizon as f64 * 0.8;
    let mut context = Vec::new(); let mut trajectory = Vec::new(); let mut feedback = Vec::new();
    for t in 0..horizon {
        let tau = ((t as f64) / t_move).min(1.0);
        let s = 10.0*tau.powi(3) - 15.0*tau.powi(4) + 6.0*tau.powi(5);
        let sd = (30.0*tau.powi(2) - 60.0*tau.powi(3) + 30.0*tau.powi(4)) / (t_move * arm.dt);
        let q_ref = q0 + (q_des - q0) * s;
        let dq_ref = (q_des - q0) * sd;
        let u = Vector2::new(
            (kp.0*(q_ref[0]-state.q[0]) + kd.0*(dq_ref[0]-state.dq[0])).clamp(-1.0,1.0),
            (kp.1*(q_ref[1]-state.q[1]) + kd.1*(dq_ref[1]-state.dq[1])).clamp(-1.0,1.0));
        let tip = end_effector(arm, &state.q);
        context.push(*target);
        trajectory.push([tip[0], tip[1], u[0], u[1]]);
        feedback.push([state.q[0], state.q[1], state.dq[0], state.dq[1]]);
        state = dynamics_step(arm, &state, &u).ok()?;
    }
    ((end_effector(arm, &state.q) - target).norm() < 0.01).then_some(DemoEpisode { context, trajectory, feedback })
}

fn main() {
    let arm = ArmParams::default();
    let targets = sector_targets(50, std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(7), 0.10, 0.18);
    let eval = sector_targets(16, 1234, 0.181, 0.195);
    for (kp, kd) in [((10.0,6.0),(0.5,0.1))] {
        let eps: Option<Vec<_>> = targets.iter().map(|t| minjerk_demo(&arm, t, kp, kd, 50)).collect();
        let Some(episodes) = eps else { println!("kp={kp:?}: demo fail"); continue };
        let dataset = DemoDataset { episodes, metadata: DatasetMeta { task: TaskKind::Reach, seed: 7, arm_digest: arm_digest(&arm) } };
        let task = TaskSpec::for_kind(TaskKind::Reach);
        let params = reward_params_for(TaskKind::Reach);
        for seed in [11u64, 23, 57, 101] { for (n_r, leak, cs, lam) in [(300usize, 0.5, 1.5, 1e-8), (300, 0.5, 2.0, 1e-7)] {
            let cfg = ReservoirConfig { n_reservoir: n_r, n_feedback: 0, leak_rate: leak, context_scale: cs, ridge_lambda: lam, seed, ..ReservoirConfig::default() };
            let (model, report) = train_stage1(&dataset, &cfg, &arm).unwrap();
            let mut hits = 0; let mut worst: f64 = 0.0;
            for t in &targets {
                let o = run_episode(&model, RunMode::Cesn, &task, &EpisodeGoal::Point(*t), None, &params).unwrap();
                if o.row.success { hits += 1; } worst = worst.max(o.row.final_distance);
            }
            let mut ehits = 0; let mut esum = 0.0;
            for t in &eval {
                let o = run_episode(&model, RunMode::Cesn, &task, &EpisodeGoal::Point(*t), None, &params).unwrap();
                if o.row.success { ehits += 1; } esum += o.row.final_distance;
            }
            println!("kp={:?} n_r={n_r} leak={leak} cs={cs} lam={lam:.0e}: rmse=({:.1e},{:.1e}) train={hits}/50 worst={:.4} | ext {ehits}/16 fd={:.4}",
                kp, report.rmse[2], report.rmse[3], worst, esum/16.0);
        }
    }
}
