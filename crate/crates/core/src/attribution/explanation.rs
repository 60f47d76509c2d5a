use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How `v(S)` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Marginal,
    Conditional,
    Causal,
    ExactGame,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Marginal => "marginal",
            Method::Conditional => "conditional",
            Method::Causal => "causal",
            Method::ExactGame => "exact-game",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "marginal" => Ok(Method::Marginal),
            "conditional" => Ok(Method::Conditional),
            "causal" => Ok(Method::Causal),
            "exact-game" => Ok(Method::ExactGame),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Number of coalitions used by the kernel regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelBudget {
    /// Every non-trivial coalition.
    All,
    /// This many coalitions in total, counting the empty and full coalitions.
    Sampled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Enumerate all `2^N` coalitions.
    Exact,
    /// Equality-constrained KernelSHAP regression.
    Kernel(KernelBudget),
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::Kernel(_) => "kernel",
        }
    }
}

/// Shapley decomposition of one or more outputs.
///
/// `phi[k][i]` is feature `i`'s contribution to output `k`, so
/// `base_values[k] + Σ_i phi[k][i] == prediction[k]` up to the estimator's
/// tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub method: Method,
    pub estimator: Estimator,
    pub feature_names: Vec<String>,
    pub instance: Vec<f64>,
    pub base_values: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    /// Conservative standard error of each attribution.
    pub phi_sigma: Vec<Vec<f64>>,
    /// `v(full)`, i.e. `f(x*)` for sampled games.
    pub prediction: Vec<f64>,
    /// Per output, the sum of the Monte Carlo standard errors of every
    /// evaluated coalition.
    pub sigma_mc: Vec<f64>,
    pub mc_samples: usize,
    pub seed: u64,
    pub coalitions_evaluated: usize,
}

impl Explanation {
    pub fn output_dim(&self) -> usize {
        self.base_values.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// `base + Σφ − prediction` for output `k`.
    pub fn additivity_residual(&self, k: usize) -> f64 {
        self.base_values[k] + self.phi[k].iter().sum::<f64>() - self.prediction[k]
    }

    /// Additivity bound for output `k`: `4 σ_MC` plus float round-off.
    pub fn additivity_tolerance(&self, k: usize) -> f64 {
        let scale = self.prediction[k].abs().max(self.base_values[k].abs()).max(1.0);
        4.0 * self.sigma_mc[k] + 1e-12 * scale * (self.n_features() as f64 + 1.0)
    }

    pub fn is_additive(&self) -> bool {
        (0..self.output_dim()).all(|k| self.additivity_residual(k).abs() <= self.additivity_tolerance(k))
    }
}
