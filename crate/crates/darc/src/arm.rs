//! Analytic two-link planar arm: forward/inverse kinematics, torque-driven
//! rigid-body dynamics with uniform-rod inertia, circular-obstacle collision
//! checks, and the 12-dimensional policy observation.
//!
//! The arm moves in a horizontal plane, so there is no gravity term. Joints
//! are unlimited; collisions are detected but never resolved.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};

/// Physical constants of the arm and its actuation.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmParams {
    /// Link lengths in meters.
    pub l1: f64,
    pub l2: f64,
    /// Link masses in kilograms (uniform rods).
    pub m1: f64,
    pub m2: f64,
    /// Viscous joint damping, N·m·s/rad.
    pub damping: f64,
    /// Control step in seconds; one [`dynamics_step`] advances this long.
    pub dt: f64,
    /// Torque per unit command, N·m.
    pub torque_gain: f64,
    /// Unit-command clamp bound.
    pub torque_limit: f64,
    /// Internal integration substeps per control step. The damping-to-inertia
    /// ratio of these light links makes a bare 20 ms step too coarse.
    pub substeps: usize,
}

impl Default for ArmParams {
    fn default() -> Self {
        Self {
            l1: 0.1,
            l2: 0.1,
            m1: 0.05,
            m2: 0.05,
            damping: 0.01,
            dt: 0.02,
            torque_gain: 0.05,
            torque_limit: 1.0,
            substeps: 8,
        }
    }
}

impl ArmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l1", self.l1),
            ("l2", self.l2),
            ("m1", self.m1),
            ("m2", self.m2),
            ("dt", self.dt),
            ("torque_gain", self.torque_gain),
            ("torque_limit", self.torque_limit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("arm parameter {name} must be positive")));
            }
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::Config("arm damping must be non-negative".into()));
        }
        if self.substeps == 0 {
            return Err(Error::Config("arm substeps must be at least 1".into()));
        }
        Ok(())
    }

    /// Outer workspace radius.
    pub fn reach(&self) -> f64 {
        self.l1 + self.l2
    }
}

/// Default rest pose used by [`reset`].
pub const HOME_POSE: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_2];

/// Joint angles (rad) and velocities (rad/s). Dynamics run on unwrapped
/// angles; use [`ArmState::wrapped_angles`] when reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmState {
    pub q: Vector2<f64>,
    pub dq: Vector2<f64>,
}

impl ArmState {
    pub fn at_rest(q: Vector2<f64>) -> Self {
        Self {
            q,
            dq: Vector2::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.dq.iter()).all(|v| v.is_finite())
    }

    /// Angles mapped into (-pi, pi], for reporting only.
    pub fn wrapped_angles(&self) -> [f64; 2] {
        let wrap = |a: f64| {
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut w = a.rem_euclid(two_pi);
            if w > std::f64::consts::PI {
                w -= two_pi;
            }
            w
        };
        [wrap(self.q[0]), wrap(self.q[1])]
    }
}

/// A circular obstacle in the workspace plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center: Vector2<f64>,
    pub radius: f64,
}

impl Default for Obstacle {
    fn default() -> Self {
        Self {
            center: Vector2::new(0.0, 0.11),
            radius: 0.03,
        }
    }
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config("obstacle radius must be positive".into()));
        }
        if self.center.norm() <= self.radius {
            return Err(Error::Config(
                "obstacle must not contain the arm base".into(),
            ));
        }
        Ok(())
    }
}

/// The 12-vector seen by the context policy:
/// `[cos q1, cos q2, sin q1, sin q2, q1, q2, dq1, dq2, pt_x, pt_y, pe_x, pe_y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvObservation(pub [f64; 12]);

impl EnvObservation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Elbow and end-effector positions for the given joint angles.
pub fn forward_kinematics(params: &ArmParams, q: &Vector2<f64>) -> (Vector2<f64>, Vector2<f64>) {
    let elbow = Vector2::new(params.l1 * q[0].cos(), params.l1 * q[0].sin());
    let tip = elbow + Vector2::new(params.l2 * (q[0] + q[1]).cos(), params.l2 * (q[0] + q[1]).sin());
    (elbow, tip)
}

/// End-effector position only.
pub fn end_effector(params: &ArmParams, q: &Vector2<f64>) -> Vector2<f64> {
    forward_kinematics(params, q).1
}

/// Closed-form inverse kinematics. `elbow_sign` picks the +1 (elbow up) or
/// -1 branch of the two-solution family.
pub fn inverse_kinematics(
    params: &ArmParams,
    p: &Vector2<f64>,
    elbow_sign: f64,
) -> Result<Vector2<f64>> {
    let d2 = p.norm_squared();
    let cos_q2 = (d2 - params.l1 * params.l1 - params.l2 * params.l2)
        / (2.0 * params.l1 * params.l2);
    // Tiny numerical excursions past the workspace boundary are clamped;
    // anything larger is genuinely unreachable.
    if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&cos_q2) {
        return Err(Error::OutOfWorkspace { x: p[0], y: p[1] });
    }
    let q2 = elbow_sign.signum() * cos_q2.clamp(-1.0, 1.0).acos();
    let q1 = p[1].atan2(p[0])
        - (params.l2 * q2.sin()).atan2(params.l1 + params.l2 * q2.cos());
    Ok(Vector2::new(q1, q2))
}

/// Inertia matrix for uniform-rod links.
pub fn mass_matrix(params: &ArmParams, q: &Vector2<f64>) -> Matrix2<f64> {
    let lc1 = params.l1 / 2.0;
    let lc2 = params.l2 / 2.0;
    let i1 = params.m1 * params.l1 * params.l1 / 12.0;
    let i2 = params.m2 * params.l2 * params.l2 / 12.0;
    let c2 = q[1].cos();
    let m11 = params.m1 * lc1 * lc1
        + i1
        + params.m2 * (params.l1 * params.l1 + lc2 * lc2 + 2.0 * params.l1 * lc2 * c2)
        + i2;
    let m12 = params.m2 * (lc2 * lc2 + params.l1 * lc2 * c2) + i2;
    let m22 = params.m2 * lc2 * lc2 + i2;
    Matrix2::new(m11, m12, m12, m22)
}

/// Kinetic energy `0.5 dq^T M(q) dq`.
pub fn kinetic_energy(params: &ArmParams, state: &ArmState) -> f64 {
    0.5 * state.dq.dot(&(mass_matrix(params, &state.q) * state.dq))
}

/// Advances the arm one control step under a unit torque command.
///
/// The command is clamped to the torque limit, scaled by the torque gain, and
/// fed into the rigid-body equations. Integration is semi-implicit Euler
/// (velocity first, then position) over `substeps` internal steps. Viscous
/// damping enters the velocity update implicitly: at these inertias an
/// explicit damping term is unstable at practical step sizes.
pub fn dynamics_step(
    params: &ArmParams,
    state: &ArmState,
    torque_cmd: &Vector2<f64>,
) -> Result<ArmState> {
    if !state.is_finite() {
        return Err(Error::NonFiniteState);
    }
    let cmd = Vector2::new(
        torque_cmd[0].clamp(-params.torque_limit, params.torque_limit),
        torque_cmd[1].clamp(-params.torque_limit, params.torque_limit),
    );
    let tau = cmd * params.torque_gain;
    let h_step = params.dt / params.substeps as f64;

    let mut q = state.q;
    let mut dq = state.dq;
    for _ in 0..params.substeps {
        let m = mass_matrix(params, &q);
        let lc2 = params.l2 / 2.0;
        let h = params.m2 * params.l1 * lc2 * q[1].sin();
        let coriolis = Vector2::new(
            -h * (2.0 * dq[0] * dq[1] + dq[1] * dq[1]),
            h * dq[0] * dq[0],
        );
        // (M + h b I) dq' = M dq + h (tau - C dq)
        let lhs = m + Matrix2::identity() * (h_step * params.damping);
        let rhs = m * dq + (tau - coriolis) * h_step;
        let det = lhs[(0, 0)] * lhs[(1, 1)] - lhs[(0, 1)] * lhs[(1, 0)];
        dq = Vector2::new(
            (lhs[(1, 1)] * rhs[0] - lhs[(0, 1)] * rhs[1]) / det,
            (lhs[(0, 0)] * rhs[1] - lhs[(1, 0)] * rhs[0]) / det,
        );
        q += dq * h_step;
    }

    let next = ArmState { q, dq };
    if !next.is_finite() {
        return Err(Error::NonFiniteState);
    }
    Ok(next)
}

fn point_segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// True iff either link segment passes within the obstacle radius.
pub fn check_collision(params: &ArmParams, state: &ArmState, obstacle: &Obstacle) -> bool {
    let (elbow, tip) = forward_kinematics(params, &state.q);
    let base = Vector2::zeros();
    let d1 = point_segment_distance(&obstacle.center, &base, &elbow);
    let d2 = point_segment_distance(&obstacle.center, &elbow, &tip);
    d1.min(d2) < obstacle.radius
}

/// Builds the policy observation for the given state and target.
pub fn observe(params: &ArmParams, state: &ArmState, target: &Vector2<f64>) -> EnvObservation {
    let tip = end_effector(params, &state.q);
    EnvObservation([
        state.q[0].cos(),
        state.q[1].cos(),
        state.q[0].sin(),
        state.q[1].sin(),
        state.q[0],
        state.q[1],
        state.dq[0],
        state.dq[1],
        target[0],
        target[1],
        tip[0],
        tip[1],
    ])
}

/// Rest state at `initial_q` (or the home pose), after checking the target is
/// reachable.
pub fn reset(
    params: &ArmParams,
    target: &Vector2<f64>,
    initial_q: Option<Vector2<f64>>,
) -> Result<ArmState> {
    inverse_kinematics(params, target, 1.0)?;
    let q = initial_q.unwrap_or_else(|| Vector2::new(HOME_POSE[0], HOME_POSE[1]));
    Ok(ArmState::at_rest(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn params() -> ArmParams {
        ArmParams::default()
    }

    #[test]
    fn straight_arm_reaches_full_extension() {
        let p = params();
        let (elbow, tip) = forward_kinematics(&p, &Vector2::new(0.0, 0.0));
        assert_abs_diff_eq!(elbow, Vector2::new(p.l1, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(tip, Vector2::new(p.reach(), 0.0), epsilon = 1e-15);
    }

    #[test]
    fn rotated_straight_arm_points_up() {
        let p = params();
        let (_, tip) = forward_kinematics(&p, &Vector2::new(FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(tip, Vector2::new(0.0, p.reach()), epsilon = 1e-12);
    }

    // Complex-exponential route: tip = l1 e^{i q1} + l2 e^{i (q1+q2)}.
    #[test]
    fn fk_matches_complex_rotation_oracle() {
        let p = params();
        let q = Vector2::new(FRAC_PI_4, FRAC_PI_2);
        let (_, tip) = forward_kinematics(&p, &q);
        let (re1, im1) = (q[0].cos(), q[0].sin());
        let (re2, im2) = ((q[0] + q[1]).cos(), (q[0] + q[1]).sin());
        assert_abs_diff_eq!(tip[0], p.l1 * re1 + p.l2 * re2, epsilon = 1e-12);
        assert_abs_diff_eq!(tip[1], p.l1 * im1 + p.l2 * im2, epsilon = 1e-12);
    }

    #[test]
    fn ik_boundary_poses() {
        let p = params();
        let q = inverse_kinematics(&p, &Vector2::new(p.reach(), 0.0), 1.0).unwrap();
        assert_abs_diff_eq!(q, Vector2::new(0.0, 0.0), epsilon = 1e-7);
        let q = inverse_kinematics(&p, &Vector2::new(0.0, p.reach()), 1.0).unwrap();
        assert_abs_diff_eq!(q, Vector2::new(FRAC_PI_2, 0.0), epsilon = 1e-7);
    }

    #[test]
    fn ik_rejects_unreachable_targets() {
        let p = params();
        assert!(matches!(
            inverse_kinematics(&p, &Vector2::new(0.3, 0.0), 1.0),
            Err(Error::OutOfWorkspace { .. })
        ));
    }

    #[test]
    fn fk_ik_round_trip_both_branches() {
        let p = params();
        let mut rng = crate::rng::rng_from(0, "arm-ik-roundtrip");
        for _ in 0..1000 {
            let r = rng.random_range(0.02..p.reach() - 1e-4);
            let a = rng.random_range(-PI..PI);
            let target = Vector2::new(r * a.cos(), r * a.sin());
            for sign in [1.0, -1.0] {
                let q = inverse_kinematics(&p, &target, sign).unwrap();
                let tip = end_effector(&p, &q);
                assert!(
                    (tip - target).norm() < 1e-9,
                    "round trip failed at {target:?} sign {sign}"
                );
            }
        }
    }

    #[test]
    fn rest_state_with_zero_torque_stays_put() {
        let p = params();
        let state = ArmState::at_rest(Vector2::new(0.3, -0.8));
        let next = dynamics_step(&p, &state, &Vector2::zeros()).unwrap();
        assert_eq!(state, next);
    }

    // Independent energy route: per-link COM velocities and rotational terms
    // instead of the assembled mass matrix.
    fn energy_from_link_velocities(p: &ArmParams, state: &ArmState) -> f64 {
        let (q1, q2) = (state.q[0], state.q[1]);
        let (w1, w2) = (state.dq[0], state.dq[0] + state.dq[1]);
        let lc1 = p.l1 / 2.0;
        let lc2 = p.l2 / 2.0;
        let i1 = p.m1 * p.l1 * p.l1 / 12.0;
        let i2 = p.m2 * p.l2 * p.l2 / 12.0;
        let vc1 = Vector2::new(-lc1 * q1.sin() * w1, lc1 * q1.cos() * w1);
        let elbow_v = Vector2::new(-p.l1 * q1.sin() * w1, p.l1 * q1.cos() * w1);
        let vc2 = elbow_v
            + Vector2::new(-lc2 * (q1 + q2).sin() * w2, lc2 * (q1 + q2).cos() * w2);
        0.5 * p.m1 * vc1.norm_squared()
            + 0.5 * i1 * w1 * w1
            + 0.5 * p.m2 * vc2.norm_squared()
            + 0.5 * i2 * w2 * w2
    }

    #[test]
    fn mass_matrix_energy_matches_link_velocity_route() {
        let p = params();
        let mut rng = crate::rng::rng_from(1, "arm-energy");
        for _ in 0..50 {
            let state = ArmState {
                q: Vector2::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)),
                dq: Vector2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
            };
            let a = kinetic_energy(&p, &state);
            let b = energy_from_link_velocities(&p, &state);
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn undamped_energy_drift_stays_small() {
        let p = ArmParams {
            damping: 0.0,
            ..params()
        };
        let mut rng = crate::rng::rng_from(2, "arm-drift");
        for _ in 0..20 {
            let mut state = ArmState {
                q: Vector2::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)),
                dq: Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            };
            let e0 = kinetic_energy(&p, &state);
            if e0 < 1e-9 {
                continue;
            }
            let steps = (1.0 / p.dt) as usize;
            for _ in 0..steps {
                state = dynamics_step(&p, &state, &Vector2::zeros()).unwrap();
            }
            let e1 = kinetic_energy(&p, &state);
            assert!(
                (e1 - e0).abs() / e0 < 0.01,
                "energy drifted from {e0} to {e1}"
            );
        }
    }

    #[test]
    fn damped_energy_is_monotone_nonincreasing() {
        let p = params();
        let mut state = ArmState {
            q: Vector2::new(0.4, -1.2),
            dq: Vector2::new(2.0, -1.5),
        };
        let mut prev = kinetic_energy(&p, &state);
        for _ in 0..200 {
            state = dynamics_step(&p, &state, &Vector2::zeros()).unwrap();
            let e = kinetic_energy(&p, &state);
            assert!(e <= prev + 1e-15, "energy rose from {prev} to {e}");
            prev = e;
        }
    }

    // Schur complement of the inertia matrix is the effective single-joint
    // inertia when the other joint is free; q_dd = tau / I_eff at rest.
    // One undamped substep makes the finite difference exact.
    #[test]
    fn initial_acceleration_matches_effective_inertia() {
        let p = ArmParams {
            damping: 0.0,
            substeps: 1,
            ..params()
        };
        let q = Vector2::new(0.3, 0.7);
        let state = ArmState::at_rest(q);
        let m = mass_matrix(&p, &q);

        let cmd = Vector2::new(0.0, 0.4);
        let next = dynamics_step(&p, &state, &cmd).unwrap();
        let ddq2 = (next.dq[1] - state.dq[1]) / p.dt;
        let i_eff = m[(1, 1)] - m[(0, 1)] * m[(0, 1)] / m[(0, 0)];
        assert_abs_diff_eq!(ddq2, cmd[1] * p.torque_gain / i_eff, epsilon = 1e-6);

        let cmd = Vector2::new(-0.6, 0.0);
        let next = dynamics_step(&p, &state, &cmd).unwrap();
        let ddq1 = (next.dq[0] - state.dq[0]) / p.dt;
        let i_eff = m[(0, 0)] - m[(0, 1)] * m[(0, 1)] / m[(1, 1)];
        assert_abs_diff_eq!(ddq1, cmd[0] * p.torque_gain / i_eff, epsilon = 1e-6);
    }

    #[test]
    fn torque_commands_are_clamped() {
        let p = params();
        let state = ArmState::at_rest(Vector2::new(0.0, FRAC_PI_2));
        let a = dynamics_step(&p, &state, &Vector2::new(50.0, -50.0)).unwrap();
        let b = dynamics_step(&p, &state, &Vector2::new(p.torque_limit, -p.torque_limit)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let p = params();
        let state = ArmState {
            q: Vector2::new(f64::NAN, 0.0),
            dq: Vector2::zeros(),
        };
        assert!(matches!(
            dynamics_step(&p, &state, &Vector2::zeros()),
            Err(Error::NonFiniteState)
        ));
    }

    #[test]
    fn distant_obstacle_never_collides() {
        let p = params();
        let state = ArmState::at_rest(Vector2::new(0.2, 0.4));
        let obstacle = Obstacle {
            center: Vector2::new(1.0, 0.0),
            radius: 0.01,
        };
        assert!(!check_collision(&p, &state, &obstacle));
    }

    #[test]
    fn obstacle_on_end_effector_collides() {
        let p = params();
        let state = ArmState::at_rest(Vector2::new(0.2, 0.4));
        let obstacle = Obstacle {
            center: end_effector(&p, &state.q),
            radius: 0.005,
        };
        assert!(check_collision(&p, &state, &obstacle));
    }

    #[test]
    fn grazing_obstacle_flips_across_the_boundary() {
        let p = params();
        // Link 1 lies along the x axis; its midpoint is (l1/2, 0).
        let state = ArmState::at_rest(Vector2::new(0.0, FRAC_PI_2));
        let radius = 0.02;
        let offset = Vector2::new(p.l1 / 2.0, -radius);
        let outside = Obstacle {
            center: offset + Vector2::new(0.0, -1e-6),
            radius,
        };
        let inside = Obstacle {
            center: offset + Vector2::new(0.0, 1e-6),
            radius,
        };
        assert!(!check_collision(&p, &state, &outside));
        assert!(check_collision(&p, &state, &inside));
    }

    #[test]
    fn collision_check_agrees_with_dense_sampling() {
        let p = params();
        let mut rng = crate::rng::rng_from(3, "arm-collision");
        let samples = 1000;
        for _ in 0..200 {
            let state = ArmState::at_rest(Vector2::new(
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            ));
            let obstacle = Obstacle {
                center: Vector2::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)),
                radius: rng.random_range(0.01..0.05),
            };
            let (elbow, tip) = forward_kinematics(&p, &state.q);
            let base = Vector2::zeros();
            let mut min_dist = f64::INFINITY;
            for i in 0..=samples {
                let t = i as f64 / samples as f64;
                let p1 = base + (elbow - base) * t;
                let p2 = elbow + (tip - elbow) * t;
                min_dist = min_dist
                    .min((p1 - obstacle.center).norm())
                    .min((p2 - obstacle.center).norm());
            }
            let spacing = p.l1.max(p.l2) / samples as f64;
            // Within one sample spacing of the boundary either answer is fair.
            if (min_dist - obstacle.radius).abs() > spacing {
                assert_eq!(
                    check_collision(&p, &state, &obstacle),
                    min_dist < obstacle.radius
                );
            }
        }
    }

    #[test]
    fn observation_layout_and_consistency() {
        let p = params();
        let state = ArmState::at_rest(Vector2::new(0.0, 0.0));
        let obs = observe(&p, &state, &Vector2::new(0.1, 0.1));
        assert_eq!(
            obs.0,
            [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.1, p.reach(), 0.0]
        );

        let mut rng = crate::rng::rng_from(4, "arm-observe");
        for _ in 0..20 {
            let state = ArmState {
                q: Vector2::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)),
                dq: Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            };
            let target = Vector2::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
            let obs = observe(&p, &state, &target);
            assert_abs_diff_eq!(obs.0[0], obs.0[4].cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(obs.0[1], obs.0[5].cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(obs.0[2], obs.0[4].sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(obs.0[3], obs.0[5].sin(), epsilon = 1e-12);
            let tip = end_effector(&p, &state.q);
            assert_eq!(&obs.0[10..12], &[tip[0], tip[1]]);
        }
    }

    #[test]
    fn reset_contract() {
        let p = params();
        let target = Vector2::new(0.12, 0.05);
        let home = reset(&p, &target, None).unwrap();
        assert_eq!(home.q, Vector2::new(HOME_POSE[0], HOME_POSE[1]));
        assert_eq!(home.dq, Vector2::zeros());

        let custom = reset(&p, &target, Some(Vector2::new(0.4, 0.2))).unwrap();
        assert_eq!(custom.q, Vector2::new(0.4, 0.2));

        assert_eq!(reset(&p, &target, None).unwrap(), home);
        assert!(matches!(
            reset(&p, &Vector2::new(0.5, 0.5), None),
            Err(Error::OutOfWorkspace { .. })
        ));
    }

    #[test]
    fn angle_wrapping_is_reporting_only() {
        let state = ArmState::at_rest(Vector2::new(3.0 * PI, -2.5 * PI));
        let wrapped = state.wrapped_angles();
        assert_abs_diff_eq!(wrapped[0], PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrapped[1], -0.5 * PI, epsilon = 1e-12);
        assert_eq!(state.q[0], 3.0 * PI);
    }
}
