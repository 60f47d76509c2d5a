//! Shapley-value feature attribution for deterministic multi-output models.
//!
//! The crate computes marginal, conditional (Gaussian) and causal
//! (interventional) Shapley values over a background dataset, and ships a
//! small planar lever-manipulation environment whose scripted controller
//! produces the correlated state data those explanations are run on.
//!
//! Layout:
//!  - [`attribution`]: coalitions, exact enumeration, constrained KernelSHAP
//!    regression, and [`attribution::explain_instance`].
//!  - [`sampler`]: background data, Gaussian fitting/conditioning, causal
//!    orderings and the three characteristic-function estimators.
//!  - [`model`]: the [`model::PolicyModel`] trait, JSON-backed MLPs, linear
//!    models and the scripted lever controller.
//!  - [`lever`]: the lever task (kinematics, dynamics, reward, episodes).
//!  - [`report`]: JSON reports, force-plot SVGs and report comparison.
//!
//! Coalition evaluation runs on rayon when the `parallel` feature is enabled
//! (the default); results are identical to the sequential path because every
//! coalition draws from its own RNG stream keyed by `(seed, mask)`.

#![allow(clippy::needless_range_loop)]

pub mod attribution;
pub mod error;
pub mod exec;
pub mod feature;
pub mod lever;
pub mod lsq;
pub mod model;
pub mod report;
pub mod rng;
pub mod sampler;

pub use attribution::{
    exact_shapley, explain_instance, kernel_shapley, shapley_weight, CharacteristicCache, Coalition, CoalitionValue,
    Estimator, Explanation, FnGame, Game, KernelBudget, Method,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use feature::FeatureSpace;
pub use model::PolicyModel;
pub use sampler::{BackgroundDataset, CausalOrdering, GaussianModel, SamplerKind, ValueSampler};
