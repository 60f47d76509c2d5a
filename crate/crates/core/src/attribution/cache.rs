use std::collections::HashMap;

use super::coalition::Coalition;
use super::game::{CoalitionValue, Game};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Memoized characteristic function, shared across all model outputs.
///
/// A key may be written more than once as long as every write stores the
/// same vector; a divergent write is rejected.
#[derive(Debug, Clone)]
pub struct CharacteristicCache {
    n_players: usize,
    output_dim: usize,
    table: HashMap<Coalition, CoalitionValue>,
}

impl CharacteristicCache {
    pub fn new(n_players: usize, output_dim: usize) -> Self {
        Self {
            n_players,
            output_dim,
            table: HashMap::new(),
        }
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, s: Coalition) -> Option<&CoalitionValue> {
        self.table.get(&s)
    }

    pub(crate) fn require(&self, s: Coalition) -> Result<&CoalitionValue> {
        self.get(s)
            .ok_or_else(|| Error::Estimation(format!("coalition {s:?} was never evaluated")))
    }

    pub fn insert(&mut self, s: Coalition, v: CoalitionValue) -> Result<()> {
        if s.width() != self.n_players {
            return Err(Error::Schema(format!(
                "coalition width {} does not match {} players",
                s.width(),
                self.n_players
            )));
        }
        if v.value.len() != self.output_dim || v.sigma.len() != self.output_dim {
            return Err(Error::Schema(format!(
                "coalition {s:?} produced {} values for {} outputs",
                v.value.len(),
                self.output_dim
            )));
        }
        if let Some(old) = self.table.get(&s) {
            if old != &v {
                return Err(Error::Numeric(format!("divergent values stored for coalition {s:?}")));
            }
            return Ok(());
        }
        self.table.insert(s, v);
        Ok(())
    }

    /// Evaluates every coalition in `coalitions` that is not cached yet.
    pub fn fill<G: Game + ?Sized>(&mut self, game: &G, coalitions: &[Coalition], exec: Execution) -> Result<()> {
        let missing: Vec<Coalition> = coalitions
            .iter()
            .copied()
            .filter(|s| !self.table.contains_key(s))
            .collect();
        let values = exec.try_map(&missing, |&s| game.value(s))?;
        for (s, v) in missing.into_iter().zip(values) {
            self.insert(s, v)?;
        }
        Ok(())
    }

    /// Builds the cache of a linear combination `Σ c_k v_k` over the keys
    /// present in every input; standard errors combine as `Σ |c_k| σ_k`.
    pub fn linear_combination(parts: &[(f64, &CharacteristicCache)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::Domain("empty linear combination".into()))?;
        let mut out = Self::new(first.n_players, first.output_dim);
        for &s in first.table.keys() {
            let mut value = vec![0.0; first.output_dim];
            let mut sigma = vec![0.0; first.output_dim];
            for (c, cache) in parts {
                if cache.n_players != first.n_players || cache.output_dim != first.output_dim {
                    return Err(Error::Schema("caches have different shapes".into()));
                }
                let Some(v) = cache.get(s) else {
                    return Err(Error::Schema(format!("coalition {s:?} missing from a cache")));
                };
                for k in 0..first.output_dim {
                    value[k] += c * v.value[k];
                    sigma[k] += c.abs() * v.sigma[k];
                }
            }
            out.table.insert(s, CoalitionValue { value, sigma });
        }
        Ok(out)
    }
}
