use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{feature_space, sample_task, LeverAction, LeverConfig, LeverState, MAX_EPISODE_STEPS};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::PolicyModel;
use crate::rng;
use crate::sampler::BackgroundDataset;

/// One recorded control step: the observed state, the policy's action and
/// the reward of that state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: LeverState,
    pub action: LeverAction,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: u32,
    pub theta_start: f64,
    pub theta_target: f64,
    pub steps: Vec<Step>,
    pub terminal_reward_reached: bool,
}

impl Episode {
    /// First step at which the gripper holds the handle.
    pub fn grasp_step(&self, config: &LeverConfig) -> Option<usize> {
        self.steps.iter().position(|s| config.is_grasping(&s.state))
    }

    /// Middle step among those where the lever moves during the step.
    pub fn moving_step(&self) -> Option<usize> {
        let moving: Vec<usize> = self
            .steps
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].state.theta_lever != w[1].state.theta_lever)
            .map(|(t, _)| t)
            .collect();
        moving.get(moving.len() / 2).copied()
    }
}

/// Rolls out `policy` on `count` sampled tasks, ids `1..=count`.
///
/// Task `id` is drawn from its own RNG stream, so episodes can be generated
/// in parallel and are identical for a given seed. Each episode stops when
/// the sparse reward reaches 0 or after [`MAX_EPISODE_STEPS`] actions; the
/// final state is recorded together with the action the policy would take.
pub fn run_episodes(
    policy: &dyn PolicyModel,
    config: &LeverConfig,
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Episode>> {
    if count == 0 {
        return Err(Error::Config("at least one episode is required".into()));
    }
    if policy.input_dim() != 8 || policy.output_dim() != 4 {
        return Err(Error::Schema(format!(
            "lever policy must map 8 features to 4 actions, got {} -> {}",
            policy.input_dim(),
            policy.output_dim()
        )));
    }
    let ids: Vec<u32> = (1..=count as u32).collect();
    exec.try_map(&ids, |&id| {
        let mut rng = rng::stream(seed, rng::EPISODE_STREAM_BASE + u64::from(id));
        let (theta_start, theta_target) = sample_task(&mut rng);
        rollout(policy, config, id, theta_start, theta_target)
    })
}

fn rollout(
    policy: &dyn PolicyModel,
    config: &LeverConfig,
    id: u32,
    theta_start: f64,
    theta_target: f64,
) -> Result<Episode> {
    let mut state = config.reset(theta_start, theta_target)?;
    let mut steps = Vec::new();
    let mut out = [0.0; 4];
    let mut reached = false;
    for t in 0..=MAX_EPISODE_STEPS {
        policy.evaluate_into(&state.to_array(), &mut out);
        let action = LeverAction::from_slice(&out)?;
        let reward = state.reward();
        steps.push(Step { state, action, reward });
        if reward == 0.0 {
            reached = true;
            break;
        }
        if t == MAX_EPISODE_STEPS {
            break;
        }
        state = config.step(&state, &action);
    }
    Ok(Episode {
        id,
        theta_start,
        theta_target,
        steps,
        terminal_reward_reached: reached,
    })
}

/// Collects every state of the episodes not in `holdout` and, when `path` is
/// given, writes them as CSV.
pub fn export_background(episodes: &[Episode], holdout: &[u32], path: Option<&Path>) -> Result<BackgroundDataset> {
    if let Some(id) = holdout.iter().find(|id| !episodes.iter().any(|e| e.id == **id)) {
        return Err(Error::Config(format!("held-out episode {id} does not exist")));
    }
    let kept: Vec<&Episode> = episodes.iter().filter(|e| !holdout.contains(&e.id)).collect();
    let rows: Vec<Vec<f64>> = kept
        .iter()
        .flat_map(|e| e.steps.iter().map(|s| s.state.to_array().to_vec()))
        .collect();
    if rows.is_empty() {
        return Err(Error::Data("no background rows remain after the hold-out".into()));
    }
    let dataset = BackgroundDataset::new(feature_space(), rows, kept.iter().map(|e| e.id).collect())?;
    if let Some(path) = path {
        dataset.to_csv(path)?;
    }
    Ok(dataset)
}

pub fn save_episodes(path: impl AsRef<Path>, episodes: &[Episode]) -> Result<()> {
    let text = serde_json::to_string_pretty(episodes)?;
    crate::report::write_atomic(path.as_ref(), text.as_bytes())
}

pub fn load_episodes(path: impl AsRef<Path>) -> Result<Vec<Episode>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}
