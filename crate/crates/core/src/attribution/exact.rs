use super::cache::CharacteristicCache;
use super::coalition::{full_mask, Coalition};
use super::game::Game;
use super::weights::shapley_weight;
use super::Attribution;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Largest game solved by full enumeration.
pub const ENUMERATION_LIMIT: usize = 20;

pub(crate) fn check_enumerable(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("a game needs at least one player".into()));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

pub(crate) fn all_coalitions(n: usize) -> Vec<Coalition> {
    (0..=full_mask(n)).map(|m| Coalition::from_parts(m, n)).collect()
}

/// Shapley values of `game` by enumerating all `2^N` coalitions.
pub fn exact_shapley<G: Game + ?Sized>(game: &G, exec: Execution) -> Result<Attribution> {
    let n = game.n_players();
    check_enumerable(n)?;
    let mut cache = CharacteristicCache::new(n, game.output_dim());
    cache.fill(game, &all_coalitions(n), exec)?;
    exact_shapley_cached(&cache)
}

/// Shapley values from a cache holding every coalition.
pub fn exact_shapley_cached(cache: &CharacteristicCache) -> Result<Attribution> {
    let n = cache.n_players();
    check_enumerable(n)?;
    let dim = cache.output_dim();
    let size = 1usize << n;

    // dense lookup, indexed by mask
    let mut values = Vec::with_capacity(size);
    for mask in 0..size as u32 {
        values.push(cache.require(Coalition::from_parts(mask, n))?);
    }
    let weights: Vec<f64> = (0..n).map(|s| shapley_weight(s, n)).collect::<Result<_>>()?;

    let mut phi = vec![vec![0.0; n]; dim];
    let mut phi_sigma = vec![vec![0.0; n]; dim];
    for i in 0..n {
        let bit = 1u32 << i;
        for mask in 0..size as u32 {
            if mask & bit != 0 {
                continue;
            }
            let w = weights[mask.count_ones() as usize];
            let without = values[mask as usize];
            let with = values[(mask | bit) as usize];
            for k in 0..dim {
                phi[k][i] += w * (with.value[k] - without.value[k]);
                phi_sigma[k][i] += w * (with.sigma[k] + without.sigma[k]);
            }
        }
    }

    let empty = values[0];
    let full = values[size - 1];
    let mut sigma_mc = vec![0.0; dim];
    for v in &values {
        for k in 0..dim {
            sigma_mc[k] += v.sigma[k];
        }
    }
    Ok(Attribution {
        base_values: empty.value.clone(),
        phi,
        phi_sigma,
        prediction: full.value.clone(),
        sigma_mc,
        coalitions_evaluated: size,
    })
}
