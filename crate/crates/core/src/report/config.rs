use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::attribution::{Estimator, Method};
use crate::error::{Error, Result as CrateResult};
use crate::exec::Execution;
use crate::model::PolicyModel;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    /// `builtin:scripted`
    Scripted,
    /// Path to an MLP weights file.
    Mlp(PathBuf),
}

impl FromStr for ModelSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("builtin:") {
            Some("scripted") => Ok(ModelSource::Scripted),
            Some(other) => Err(Error::Config(format!("unknown builtin model `{other}`"))),
            None if s.is_empty() => Err(Error::Config("empty model path".into())),
            None => Ok(ModelSource::Mlp(PathBuf::from(s))),
        }
    }
}

impl ModelSource {
    pub fn load(&self) -> CrateResult<Box<dyn PolicyModel>> {
        match self {
            ModelSource::Scripted => Ok(Box::new(crate::model::scripted_lever_policy())),
            ModelSource::Mlp(path) => Ok(Box::new(crate::model::load_mlp(path)?)),
        }
    }
}

/// Which state to explain.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSelector {
    /// `EP:STEP`, optionally written `epEP:STEP`.
    Step { episode: u32, step: usize },
    /// `grasp:EP`, the first step where the gripper holds the handle.
    Grasp { episode: u32 },
    /// `move:EP`, the middle step of the lever's motion.
    Moving { episode: u32 },
    /// `inline:v1,...,vN`
    Inline(Vec<f64>),
}

impl InstanceSelector {
    pub fn episode(&self) -> Option<u32> {
        match self {
            InstanceSelector::Step { episode, .. }
            | InstanceSelector::Grasp { episode }
            | InstanceSelector::Moving { episode } => Some(*episode),
            InstanceSelector::Inline(_) => None,
        }
    }
}

impl fmt::Display for InstanceSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSelector::Step { episode, step } => write!(f, "{episode}:{step}"),
            InstanceSelector::Grasp { episode } => write!(f, "grasp:{episode}"),
            InstanceSelector::Moving { episode } => write!(f, "move:{episode}"),
            InstanceSelector::Inline(v) => {
                write!(f, "inline:")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x:?}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for InstanceSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Config(format!("cannot parse instance selector `{s}`"));
        let (head, tail) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "inline" => {
                let values = tail
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(InstanceSelector::Inline(values))
            }
            "grasp" => Ok(InstanceSelector::Grasp {
                episode: tail.parse().map_err(|_| bad())?,
            }),
            "move" => Ok(InstanceSelector::Moving {
                episode: tail.parse().map_err(|_| bad())?,
            }),
            ep => Ok(InstanceSelector::Step {
                episode: ep.strip_prefix("ep").unwrap_or(ep).parse().map_err(|_| bad())?,
                step: tail.parse().map_err(|_| bad())?,
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub dataset: PathBuf,
    pub ordering: Option<PathBuf>,
    pub model: ModelSource,
    pub instance: InstanceSelector,
    /// Episode log used by episode selectors; defaults to `episodes.json`
    /// next to the dataset.
    pub episodes: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub estimator: Estimator,
    pub mc_samples: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub exec: Execution,
}

impl ReportConfig {
    pub fn episodes_path(&self) -> PathBuf {
        self.episodes.clone().unwrap_or_else(|| {
            self.dataset
                .parent()
                .map(|p| p.join("episodes.json"))
                .unwrap_or_else(|| PathBuf::from("episodes.json"))
        })
    }
}

/// Comma-separated method list.
pub fn parse_methods(s: &str) -> Result<Vec<Method>, Error> {
    let methods: Vec<Method> = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods given".into()));
    }
    Ok(methods)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(
            "1:40".parse::<InstanceSelector>().unwrap(),
            InstanceSelector::Step { episode: 1, step: 40 }
        );
        assert_eq!(
            "ep2:7".parse::<InstanceSelector>().unwrap(),
            InstanceSelector::Step { episode: 2, step: 7 }
        );
        assert_eq!(
            "grasp:3".parse::<InstanceSelector>().unwrap(),
            InstanceSelector::Grasp { episode: 3 }
        );
        assert_eq!(
            "move:1".parse::<InstanceSelector>().unwrap(),
            InstanceSelector::Moving { episode: 1 }
        );
        assert_eq!(
            "inline:1,2.5,-3".parse::<InstanceSelector>().unwrap(),
            InstanceSelector::Inline(vec![1.0, 2.5, -3.0])
        );
        assert!("inline:1,x".parse::<InstanceSelector>().is_err());
        assert!("ep".parse::<InstanceSelector>().is_err());
        assert!("a:b".parse::<InstanceSelector>().is_err());
    }

    #[test]
    fn models_and_methods() {
        assert_eq!(
            "builtin:scripted".parse::<ModelSource>().unwrap(),
            ModelSource::Scripted
        );
        assert!("builtin:actor".parse::<ModelSource>().is_err());
        assert_eq!(
            parse_methods("causal,marginal").unwrap(),
            vec![Method::Causal, Method::Marginal]
        );
        assert!(parse_methods("causal,kernel").is_err());
    }
}
