//! Desk-scale lever manipulation task.
//!
//! A planar three-link arm (the base joint is solved analytically with
//! [`base_yaw`]) reaches a lever handle and rotates the lever from a start
//! angle to a target angle. The eight observed features are
//! `q1, q2, q3, q4, dx, dz, theta_lever, theta_target`; actions are three
//! normalized joint increments plus a gripper command (`a4 ≥ 0` opens,
//! `a4 < 0` closes). Contact is kinematic: while the end-effector touches or
//! grips the handle, the lever follows the end-effector's angle about the
//! pivot.

mod episode;
pub mod kinematics;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use episode::{export_background, load_episodes, run_episodes, save_episodes, Episode, Step};
pub use kinematics::base_yaw;

use crate::error::{Error, Result};
use crate::feature::FeatureSpace;

pub const FEATURE_NAMES: [&str; 8] = ["q1", "q2", "q3", "q4", "dx", "dz", "theta_lever", "theta_target"];
pub const FEATURE_UNITS: [&str; 8] = ["rad", "rad", "rad", "m", "m", "m", "rad", "rad"];
pub const ACTION_NAMES: [&str; 4] = ["a1", "a2", "a3", "a4"];

/// Task angles are drawn from `[-TASK_RANGE, TASK_RANGE]`.
pub const TASK_RANGE: f64 = 1.0;
/// Minimum `|θ_start − θ_target|` of a task.
pub const MIN_SEPARATION: f64 = 0.4;
/// Success tolerance on the lever angle (rad).
pub const GOAL_TOLERANCE: f64 = 0.025;
/// Mechanical range of the lever (rad).
pub const LEVER_LIMIT: f64 = 1.5;
pub const MAX_EPISODE_STEPS: usize = 300;

pub fn feature_space() -> FeatureSpace {
    FeatureSpace::new(
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        FEATURE_UNITS.iter().map(|s| s.to_string()).collect(),
    )
    .expect("lever feature space is valid")
}

pub fn unit_of(name: &str) -> Option<&'static str> {
    FEATURE_NAMES.iter().position(|n| *n == name).map(|i| FEATURE_UNITS[i])
}

/// `0` once the lever is within [`GOAL_TOLERANCE`] of the target, `-1` otherwise.
pub fn sparse_reward(theta_lever: f64, theta_target: f64) -> f64 {
    if (theta_lever - theta_target).abs() < GOAL_TOLERANCE {
        0.0
    } else {
        -1.0
    }
}

pub fn is_valid_task(theta_start: f64, theta_target: f64) -> bool {
    (theta_start - theta_target).abs() > MIN_SEPARATION
        && theta_start.abs() <= TASK_RANGE
        && theta_target.abs() <= TASK_RANGE
}

/// Uniform start/target angles, redrawn until they are far enough apart.
pub fn sample_task<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let start = rng.random_range(-TASK_RANGE..=TASK_RANGE);
        let target = rng.random_range(-TASK_RANGE..=TASK_RANGE);
        if is_valid_task(start, target) {
            return (start, target);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeverState {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    /// Finger separation (m).
    pub q4: f64,
    /// Horizontal end-effector-to-handle offset (m).
    pub dx: f64,
    /// Vertical end-effector-to-handle offset (m).
    pub dz: f64,
    pub theta_lever: f64,
    pub theta_target: f64,
}

impl LeverState {
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.q1,
            self.q2,
            self.q3,
            self.q4,
            self.dx,
            self.dz,
            self.theta_lever,
            self.theta_target,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 8 {
            return Err(Error::Schema(format!("lever state has 8 features, got {}", v.len())));
        }
        Ok(Self {
            q1: v[0],
            q2: v[1],
            q3: v[2],
            q4: v[3],
            dx: v[4],
            dz: v[5],
            theta_lever: v[6],
            theta_target: v[7],
        })
    }

    pub fn joints(&self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }

    pub fn handle_distance(&self) -> f64 {
        self.dx.hypot(self.dz)
    }

    pub fn reward(&self) -> f64 {
        sparse_reward(self.theta_lever, self.theta_target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeverAction {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl LeverAction {
    /// Builds an action from a policy output, clamping each entry to `[-1, 1]`.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 4 {
            return Err(Error::Schema(format!("lever action has 4 entries, got {}", v.len())));
        }
        let c = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
        Ok(Self {
            a1: c(v[0]),
            a2: c(v[1]),
            a3: c(v[2]),
            a4: c(v[3]),
        })
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }

    pub fn opens_gripper(&self) -> bool {
        self.a4 >= 0.0
    }
}

/// Geometry and actuation constants of the simulated cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverConfig {
    /// Lever pivot `(x, y)` in the manipulator's inertial frame (m).
    pub lever_position: (f64, f64),
    /// Pivot height relative to the shoulder joint (m).
    pub pivot_height: f64,
    /// Pivot-to-handle distance (m).
    pub handle_length: f64,
    /// Joint increment for a unit action (rad).
    pub max_joint_step: f64,
    pub joint_limit: f64,
    pub q4_max: f64,
    /// Finger travel per step (m).
    pub gripper_speed: f64,
    /// Finger separation below which the gripper holds the handle (m).
    pub grasp_threshold: f64,
    /// Pushing contact distance (m).
    pub capture_radius: f64,
    /// Contact distance while the gripper is closed (m).
    pub grasp_radius: f64,
    pub home: [f64; 3],
}

impl Default for LeverConfig {
    fn default() -> Self {
        Self {
            lever_position: (0.22 * 0.3f64.cos(), 0.22 * 0.3f64.sin()),
            pivot_height: 0.0,
            handle_length: 0.08,
            max_joint_step: 0.05,
            joint_limit: 2.6,
            q4_max: 0.04,
            gripper_speed: 0.008,
            grasp_threshold: 0.01,
            capture_radius: 0.02,
            grasp_radius: 0.03,
            home: [0.0, 0.9, 0.9],
        }
    }
}

impl LeverConfig {
    /// Base yaw aiming the arm at the lever.
    pub fn base_yaw(&self) -> Result<f64> {
        base_yaw(self.lever_position.0, self.lever_position.1)
    }

    /// Pivot position `(x, z)` in the arm's plane.
    pub fn pivot(&self) -> (f64, f64) {
        (self.lever_position.0.hypot(self.lever_position.1), self.pivot_height)
    }

    /// Handle position `(x, z)` in the arm's plane for a lever angle.
    pub fn handle(&self, theta: f64) -> (f64, f64) {
        let (px, pz) = self.pivot();
        (
            px + self.handle_length * theta.sin(),
            pz + self.handle_length * theta.cos(),
        )
    }

    /// Angle of a point about the pivot, measured like the lever angle.
    pub fn angle_about_pivot(&self, x: f64, z: f64) -> f64 {
        let (px, pz) = self.pivot();
        (x - px).atan2(z - pz)
    }

    pub fn is_pushing(&self, s: &LeverState) -> bool {
        s.handle_distance() < self.capture_radius
    }

    pub fn is_grasping(&self, s: &LeverState) -> bool {
        s.q4 < self.grasp_threshold && s.handle_distance() < self.grasp_radius
    }

    /// Whether the lever follows the end-effector during the next step.
    pub fn in_contact(&self, s: &LeverState) -> bool {
        self.is_pushing(s) || self.is_grasping(s)
    }

    fn with_distances(&self, q: [f64; 3], q4: f64, theta_lever: f64, theta_target: f64) -> LeverState {
        let (ex, ez) = kinematics::forward(q);
        let (hx, hz) = self.handle(theta_lever);
        LeverState {
            q1: q[0],
            q2: q[1],
            q3: q[2],
            q4,
            dx: hx - ex,
            dz: hz - ez,
            theta_lever,
            theta_target,
        }
    }

    /// Arm at home with the gripper open.
    pub fn reset(&self, theta_start: f64, theta_target: f64) -> Result<LeverState> {
        if !(theta_start.abs() <= LEVER_LIMIT && theta_target.abs() <= LEVER_LIMIT) {
            return Err(Error::Domain(format!(
                "lever angles must lie in ±{LEVER_LIMIT} rad, got {theta_start} and {theta_target}"
            )));
        }
        Ok(self.with_distances(self.home, self.q4_max, theta_start, theta_target))
    }

    /// Advances one control step.
    pub fn step(&self, state: &LeverState, action: &LeverAction) -> LeverState {
        let contact = self.in_contact(state);
        let mut q = state.joints();
        let cmd = [action.a1, action.a2, action.a3];
        for k in 0..3 {
            let a = if cmd[k].is_nan() { 0.0 } else { cmd[k].clamp(-1.0, 1.0) };
            q[k] = (q[k] + a * self.max_joint_step).clamp(-self.joint_limit, self.joint_limit);
        }
        let q4 = if action.opens_gripper() || action.a4.is_nan() {
            state.q4 + self.gripper_speed
        } else {
            state.q4 - self.gripper_speed
        }
        .clamp(0.0, self.q4_max);
        let theta_lever = if contact {
            let (ex, ez) = kinematics::forward(q);
            self.angle_about_pivot(ex, ez).clamp(-LEVER_LIMIT, LEVER_LIMIT)
        } else {
            state.theta_lever
        };
        self.with_distances(q, q4, theta_lever, state.theta_target)
    }
}

/// [`LeverConfig::step`] with the default cell.
pub fn step(state: &LeverState, action: &LeverAction) -> LeverState {
    LeverConfig::default().step(state, action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reward_boundaries() {
        assert_eq!(sparse_reward(0.10, 0.13), -1.0);
        assert_eq!(sparse_reward(0.10, 0.12), 0.0);
        assert_eq!(sparse_reward(0.4, 0.4), 0.0);
        assert_eq!(sparse_reward(0.0, 0.025), -1.0);
    }

    #[test]
    fn task_acceptance() {
        assert!(!is_valid_task(0.1, 0.3));
        assert!(is_valid_task(-0.8, 0.5));
        let mut rng = crate::rng::stream(3, 0);
        for _ in 0..1000 {
            let (s, t) = sample_task(&mut rng);
            assert!(is_valid_task(s, t));
        }
    }

    #[test]
    fn zero_action_only_opens_gripper() {
        let cfg = LeverConfig::default();
        let mut s = cfg.reset(0.5, -0.2).unwrap();
        s.q4 = 0.01;
        let zero = LeverAction {
            a1: 0.0,
            a2: 0.0,
            a3: 0.0,
            a4: 0.0,
        };
        let next = cfg.step(&s, &zero);
        assert_eq!(next.joints(), s.joints());
        assert_eq!((next.dx, next.dz, next.theta_lever), (s.dx, s.dz, s.theta_lever));
        assert!((next.q4 - 0.018).abs() < 1e-15);
    }

    #[test]
    fn far_from_handle_lever_is_unchanged() {
        let cfg = LeverConfig::default();
        let s = cfg.reset(0.5, -0.2).unwrap();
        assert!(s.handle_distance() > cfg.grasp_radius);
        let a = LeverAction {
            a1: 1.0,
            a2: -1.0,
            a3: 1.0,
            a4: -1.0,
        };
        assert_eq!(cfg.step(&s, &a).theta_lever, 0.5);
    }

    #[test]
    fn yaw_matches_lever_placement() {
        assert!((LeverConfig::default().base_yaw().unwrap() - 0.3).abs() < 1e-15);
    }

    fn arb_state() -> impl Strategy<Value = LeverState> {
        (
            -2.6..2.6f64,
            -2.6..2.6f64,
            -2.6..2.6f64,
            0.0..0.04f64,
            -1.5..1.5f64,
            -1.0..1.0f64,
        )
            .prop_map(|(q1, q2, q3, q4, tl, tt)| LeverConfig::default().with_distances([q1, q2, q3], q4, tl, tt))
    }

    proptest! {
        #[test]
        fn step_preserves_invariants(s in arb_state(), a in prop::array::uniform4(-3.0..3.0f64)) {
            let cfg = LeverConfig::default();
            let action = LeverAction { a1: a[0], a2: a[1], a3: a[2], a4: a[3] };
            let next = cfg.step(&s, &action);
            prop_assert!(next.to_array().iter().all(|v| v.is_finite()));
            prop_assert!(next.theta_lever.abs() <= LEVER_LIMIT);
            prop_assert!((0.0..=cfg.q4_max).contains(&next.q4));
            prop_assert_eq!(next.theta_target, s.theta_target);
            if !cfg.in_contact(&s) {
                prop_assert_eq!(next.theta_lever, s.theta_lever);
            }
        }
    }
}
