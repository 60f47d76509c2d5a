use super::PolicyModel;
use crate::lever::{kinematics, LeverConfig, ACTION_NAMES};

/// Hand-written lever controller standing in for a trained actor.
///
/// Far from the handle it opens the gripper and drives the end-effector onto
/// the handle. Once there it closes the gripper, holds position until the
/// fingers are shut, then walks the end-effector along the handle circle
/// toward `theta_target`, at most `max_arc_step` rad per step. Joint increments come from a damped least-squares inverse of the
/// arm Jacobian and are scaled uniformly into `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct ScriptedLeverPolicy {
    config: LeverConfig,
    engage_distance: f64,
    max_arc_step: f64,
    damping: f64,
}

pub fn scripted_lever_policy() -> ScriptedLeverPolicy {
    ScriptedLeverPolicy::new(LeverConfig::default())
}

impl ScriptedLeverPolicy {
    pub fn new(config: LeverConfig) -> Self {
        Self {
            config,
            engage_distance: 0.012,
            max_arc_step: 0.08,
            damping: 0.02,
        }
    }

    pub fn config(&self) -> &LeverConfig {
        &self.config
    }

    fn engaged(&self, q4: f64, dist: f64) -> bool {
        dist < self.engage_distance || (q4 < self.config.grasp_threshold && dist < self.config.grasp_radius)
    }
}

impl PolicyModel for ScriptedLeverPolicy {
    fn input_dim(&self) -> usize {
        8
    }

    fn output_dim(&self) -> usize {
        4
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        let q = [x[0], x[1], x[2]];
        let (q4, dx, dz, theta_lever, theta_target) = (x[3], x[4], x[5], x[6], x[7]);
        let dist = dx.hypot(dz);
        let engaged = self.engaged(q4, dist);

        let (hx, hz) = self.config.handle(theta_lever);
        let (ex, ez) = (hx - dx, hz - dz);
        let holding = q4 < self.config.grasp_threshold;
        let (tx, tz) = if engaged && holding {
            let step = (theta_target - theta_lever).clamp(-self.max_arc_step, self.max_arc_step);
            self.config.handle(theta_lever + step)
        } else {
            (hx, hz)
        };

        let dq = kinematics::dls_step(q, (tx - ex, tz - ez), self.damping);
        let mut a: Vec<f64> = dq.iter().map(|v| v / self.config.max_joint_step).collect();
        let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 1.0 {
            a.iter_mut().for_each(|v| *v /= peak);
        }
        for k in 0..3 {
            out[k] = if a[k].is_finite() { a[k].clamp(-1.0, 1.0) } else { 0.0 };
        }
        out[3] = if engaged { -1.0 } else { 1.0 };
    }

    fn output_names(&self) -> Vec<String> {
        ACTION_NAMES.iter().map(|s| s.to_string()).collect()
    }
}
