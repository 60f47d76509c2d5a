//! Explanation reports: JSON documents, force-plot SVGs and comparisons.

mod compare;
mod config;
mod forceplot;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use compare::{compare, default_groups, Comparison, FeatureGroup, GroupDelta};
pub use config::{parse_methods, InstanceSelector, ModelSource, ReportConfig};
pub use forceplot::{render_force_plot, FORCE_PLOT_WIDTH, PLOT_LEFT, PLOT_WIDTH};

use crate::attribution::{explain_instance, Explanation, Method};
use crate::error::{Error, Result};
use crate::lever::{load_episodes, LeverConfig};
use crate::sampler::{fit_gaussian_default, BackgroundDataset, OrderingConfig, ValueSampler};

/// One explanation as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub explanation: Explanation,
    pub output_names: Vec<String>,
    /// Human-readable description of where the instance came from.
    pub instance_label: String,
    /// Distance of the instance from the fitted background Gaussian.
    pub mahalanobis: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    pub fn method(&self) -> Method {
        self.explanation.method
    }
}

/// Files produced for one method.
#[derive(Debug, Clone)]
pub struct ReportArtifacts {
    pub report: Report,
    pub json_path: PathBuf,
    pub svg_path: PathBuf,
}

/// Runs every requested method on the same instance and seed and writes
/// `report_<method>.json` and `forceplot_<method>.svg` into the output directory.
pub fn explain(config: &ReportConfig) -> Result<Vec<ReportArtifacts>> {
    if config.methods.is_empty() {
        return Err(Error::Config("at least one method is required".into()));
    }
    if config.methods.contains(&Method::ExactGame) {
        return Err(Error::Config("`exact-game` is not a sampling method".into()));
    }
    let dataset = BackgroundDataset::from_csv(&config.dataset)?;
    let model = config.model.load()?;
    let features = dataset.feature_space().clone();
    if model.input_dim() != features.len() {
        return Err(Error::Schema(format!(
            "model takes {} inputs, dataset has {} features",
            model.input_dim(),
            features.len()
        )));
    }
    let ordering = match &config.ordering {
        Some(path) => Some(OrderingConfig::load(path)?.resolve(&features)?),
        None => None,
    };
    if config.methods.contains(&Method::Causal) && ordering.is_none() {
        return Err(Error::Config("the causal method needs --ordering".into()));
    }
    let (instance, label) = resolve_instance(config, features.len())?;
    let mahalanobis = fit_gaussian_default(&dataset)?.mahalanobis(&instance).ok();

    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut out = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let sampler = match method {
            Method::Marginal => ValueSampler::marginal(dataset.clone(), config.mc_samples, config.seed)?,
            Method::Conditional => ValueSampler::conditional(dataset.clone(), config.mc_samples, config.seed)?,
            Method::Causal => ValueSampler::causal(
                dataset.clone(),
                ordering.clone().expect("checked above"),
                config.mc_samples,
                config.seed,
            )?,
            Method::ExactGame => unreachable!(),
        };
        let explanation = explain_instance(model.as_ref(), &instance, &sampler, config.estimator, config.exec)?;
        let report = Report {
            explanation,
            output_names: model.output_names(),
            instance_label: label.clone(),
            mahalanobis,
        };
        let json_path = config.out_dir.join(format!("report_{method}.json"));
        let svg_path = config.out_dir.join(format!("forceplot_{method}.svg"));
        write_atomic(&json_path, report.to_json()?.as_bytes())?;
        write_atomic(&svg_path, render_force_plot(&report).as_bytes())?;
        out.push(ReportArtifacts {
            report,
            json_path,
            svg_path,
        });
    }
    Ok(out)
}

fn resolve_instance(config: &ReportConfig, n: usize) -> Result<(Vec<f64>, String)> {
    let (values, label) = match &config.instance {
        InstanceSelector::Inline(v) => (v.clone(), "inline".to_string()),
        selector => {
            let path = config.episodes_path();
            let episodes = load_episodes(&path)?;
            let lever = LeverConfig::default();
            let episode_id = selector.episode().expect("non-inline selector has an episode");
            let episode = episodes
                .iter()
                .find(|e| e.id == episode_id)
                .ok_or_else(|| Error::Config(format!("episode {episode_id} not found in {}", path.display())))?;
            let step = match selector {
                InstanceSelector::Step { step, .. } => Some(*step),
                InstanceSelector::Grasp { .. } => episode.grasp_step(&lever),
                InstanceSelector::Moving { .. } => episode.moving_step(),
                InstanceSelector::Inline(_) => unreachable!(),
            }
            .ok_or_else(|| Error::Config(format!("episode {episode_id} has no {selector} event")))?;
            let s = episode.steps.get(step).ok_or_else(|| {
                Error::Config(format!(
                    "episode {episode_id} has {} steps, step {step} requested",
                    episode.steps.len()
                ))
            })?;
            (
                s.state.to_array().to_vec(),
                format!("episode {episode_id} step {step} ({selector})"),
            )
        }
    };
    if values.len() != n {
        return Err(Error::Schema(format!(
            "instance has {} values for {n} features",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("instance contains non-finite values".into()));
    }
    Ok((values, label))
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", file_name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
