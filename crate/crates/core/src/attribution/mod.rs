//! Shapley attribution over arbitrary characteristic functions.

mod cache;
mod coalition;
mod exact;
mod explanation;
mod game;
mod kernel;
mod weights;

use serde::{Deserialize, Serialize};

pub use cache::CharacteristicCache;
pub use coalition::{Coalition, MAX_WIDTH};
pub use exact::{exact_shapley, exact_shapley_cached, ENUMERATION_LIMIT};
pub use explanation::{Estimator, Explanation, KernelBudget, Method};
pub use game::{CoalitionValue, FnGame, Game};
pub use kernel::{kernel_coalitions, kernel_shapley, kernel_shapley_cached};
pub use weights::{kernel_weight, shapley_weight};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::PolicyModel;
use crate::sampler::{SampledGame, ValueSampler};

/// Raw output of an estimator, before instance metadata is attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub base_values: Vec<f64>,
    /// `output_dim × N`
    pub phi: Vec<Vec<f64>>,
    pub phi_sigma: Vec<Vec<f64>>,
    pub prediction: Vec<f64>,
    pub sigma_mc: Vec<f64>,
    pub coalitions_evaluated: usize,
}

/// Explains `model` at `x_star` with the characteristic function estimated by `sampler`.
///
/// All outputs share one coalition cache. The result is a pure function of
/// the sampler's seed and sample count, the estimator, and the inputs.
pub fn explain_instance(
    model: &dyn PolicyModel,
    x_star: &[f64],
    sampler: &ValueSampler,
    estimator: Estimator,
    exec: Execution,
) -> Result<Explanation> {
    let n = sampler.feature_space().len();
    if model.input_dim() != n {
        return Err(Error::Schema(format!(
            "model expects {} inputs but the background data has {n} features",
            model.input_dim()
        )));
    }
    if x_star.len() != n {
        return Err(Error::Schema(format!(
            "instance has {} values for {n} features",
            x_star.len()
        )));
    }
    if x_star.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("instance contains non-finite values".into()));
    }
    let game = SampledGame::new(model, x_star, sampler);
    let attribution = match estimator {
        Estimator::Exact => exact_shapley(&game, exec)?,
        Estimator::Kernel(budget) => kernel_shapley(&game, budget, sampler.seed(), exec)?,
    };
    Ok(Explanation {
        method: sampler.method(),
        estimator,
        feature_names: sampler.feature_space().names().to_vec(),
        instance: x_star.to_vec(),
        base_values: attribution.base_values,
        phi: attribution.phi,
        phi_sigma: attribution.phi_sigma,
        prediction: attribution.prediction,
        sigma_mc: attribution.sigma_mc,
        mc_samples: sampler.mc_samples(),
        seed: sampler.seed(),
        coalitions_evaluated: attribution.coalitions_evaluated,
    })
}

/// Wraps a pure game's attribution as an [`Explanation`] with no instance.
pub fn explain_game<G: Game + ?Sized>(
    game: &G,
    estimator: Estimator,
    seed: u64,
    exec: Execution,
) -> Result<Explanation> {
    let attribution = match estimator {
        Estimator::Exact => exact_shapley(game, exec)?,
        Estimator::Kernel(budget) => kernel_shapley(game, budget, seed, exec)?,
    };
    Ok(Explanation {
        method: Method::ExactGame,
        estimator,
        feature_names: game.player_names(),
        instance: Vec::new(),
        base_values: attribution.base_values,
        phi: attribution.phi,
        phi_sigma: attribution.phi_sigma,
        prediction: attribution.prediction,
        sigma_mc: attribution.sigma_mc,
        mc_samples: 0,
        seed,
        coalitions_evaluated: attribution.coalitions_evaluated,
    })
}
