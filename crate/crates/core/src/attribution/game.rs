use serde::{Deserialize, Serialize};

use super::coalition::Coalition;
use crate::error::Result;

/// Value of one coalition: a per-output vector plus the Monte Carlo standard
/// error of each component (zero for exactly known values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionValue {
    pub value: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl CoalitionValue {
    pub fn exact(value: Vec<f64>) -> Self {
        let sigma = vec![0.0; value.len()];
        Self { value, sigma }
    }

    pub fn output_dim(&self) -> usize {
        self.value.len()
    }
}

/// A cooperative game with vector-valued payoffs: the characteristic function `v(S)`.
pub trait Game: Sync {
    fn n_players(&self) -> usize;

    fn output_dim(&self) -> usize;

    fn value(&self, coalition: Coalition) -> Result<CoalitionValue>;

    fn player_names(&self) -> Vec<String> {
        (0..self.n_players()).map(|i| format!("x{i}")).collect()
    }
}

/// Game defined by a closure returning exact values.
pub struct FnGame<F> {
    n: usize,
    output_dim: usize,
    f: F,
}

impl<F> FnGame<F>
where
    F: Fn(Coalition) -> Vec<f64> + Sync,
{
    pub fn new(n: usize, output_dim: usize, f: F) -> Self {
        Self { n, output_dim, f }
    }
}

impl<F> Game for FnGame<F>
where
    F: Fn(Coalition) -> Vec<f64> + Sync,
{
    fn n_players(&self) -> usize {
        self.n
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn value(&self, coalition: Coalition) -> Result<CoalitionValue> {
        Ok(CoalitionValue::exact((self.f)(coalition)))
    }
}
