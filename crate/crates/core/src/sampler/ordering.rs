use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature::FeatureSpace;

/// Default ordering for the lever task: target angle, joints, gripper and
/// end-effector distances, lever angle; all components mutually interacting.
pub const LEVER_ORDERING_JSON: &str = include_str!("../../../../configs/lever_ordering.json");

/// Ordered partition of the features into chain components.
///
/// Each component is causally downstream of every earlier one. `confounded[j]`
/// says whether dependence inside component `j` comes from a hidden common
/// cause (true) or from mutual interaction (false); it only matters when an
/// intervention splits the component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalOrdering {
    components: Vec<Vec<usize>>,
    confounded: Vec<bool>,
    n_features: usize,
}

impl CausalOrdering {
    pub fn new(components: Vec<Vec<usize>>, confounded: Vec<bool>, n_features: usize) -> Result<Self> {
        if components.len() != confounded.len() {
            return Err(Error::Config(format!(
                "{} components but {} confounding flags",
                components.len(),
                confounded.len()
            )));
        }
        let mut seen = vec![false; n_features];
        for (j, comp) in components.iter().enumerate() {
            if comp.is_empty() {
                return Err(Error::Config(format!("component {j} is empty")));
            }
            for &i in comp {
                if i >= n_features {
                    return Err(Error::Schema(format!(
                        "component {j} references feature {i} of {n_features}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Config(format!("feature {i} appears twice in the ordering")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("feature {i} is missing from the ordering")));
        }
        Ok(Self {
            components,
            confounded,
            n_features,
        })
    }

    /// One component holding every feature.
    pub fn single(n_features: usize, confounded: bool) -> Result<Self> {
        Self::new(vec![(0..n_features).collect()], vec![confounded], n_features)
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn confounded(&self) -> &[bool] {
        &self.confounded
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn to_config(&self, features: &FeatureSpace) -> OrderingConfig {
        OrderingConfig {
            ordering: self
                .components
                .iter()
                .map(|c| c.iter().map(|&i| features.names()[i].clone()).collect())
                .collect(),
            confounding: self.confounded.clone(),
        }
    }
}

/// On-disk form of a causal ordering, with features referenced by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingConfig {
    pub ordering: Vec<Vec<String>>,
    pub confounding: Vec<bool>,
}

impl OrderingConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("ordering config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn lever_default() -> Self {
        Self::from_json(LEVER_ORDERING_JSON).expect("bundled ordering parses")
    }

    /// Resolves names against `features`.
    pub fn resolve(&self, features: &FeatureSpace) -> Result<CausalOrdering> {
        let components = self
            .ordering
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|name| {
                        features
                            .index_of(name)
                            .ok_or_else(|| Error::Schema(format!("ordering names unknown feature `{name}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CausalOrdering::new(components, self.confounding.clone(), features.len())
    }
}
