use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;

use super::cache::CharacteristicCache;
use super::coalition::{full_mask, Coalition};
use super::exact::check_enumerable;
use super::explanation::KernelBudget;
use super::game::Game;
use super::weights::kernel_weight;
use super::Attribution;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lsq::ConstrainedLeastSquares;
use crate::rng;

/// Non-trivial coalitions used by the kernel regression for `n` players.
///
/// With [`KernelBudget::Sampled`], sizes are drawn with probability
/// proportional to their total kernel mass `(N−1) / (s (N−s))` and members
/// uniformly within the size; duplicates are rejected. The result is sorted
/// by mask so downstream work is independent of draw order.
pub fn kernel_coalitions(n: usize, budget: KernelBudget, seed: u64) -> Result<Vec<Coalition>> {
    check_enumerable(n)?;
    if n < 2 {
        return Err(Error::Domain("kernel regression needs at least two features".into()));
    }
    let nontrivial = (1u64 << n) - 2;
    let wanted = match budget {
        KernelBudget::All => nontrivial,
        KernelBudget::Sampled(b) => {
            if b < n + 2 {
                return Err(Error::Config(format!(
                    "coalition budget {b} is below the minimum N+2 = {}",
                    n + 2
                )));
            }
            (b as u64 - 2).min(nontrivial)
        }
    };
    if wanted == nontrivial {
        return Ok((1..full_mask(n)).map(|m| Coalition::from_parts(m, n)).collect());
    }

    let size_mass: Vec<f64> = (1..n).map(|s| (n - 1) as f64 / (s * (n - s)) as f64).collect();
    let total_mass: f64 = size_mass.iter().sum();
    let mut rng = rng::stream(seed, rng::KERNEL_COALITION_STREAM);
    let mut chosen = BTreeSet::new();
    let max_attempts = 1000 * wanted as usize + 10_000;
    let mut attempts = 0;
    while (chosen.len() as u64) < wanted {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Estimation(format!(
                "could not draw {wanted} distinct coalitions; use the full enumeration budget"
            )));
        }
        let mut u = rng.random::<f64>() * total_mass;
        let mut size = n - 1;
        for (k, m) in size_mass.iter().enumerate() {
            if u < *m {
                size = k + 1;
                break;
            }
            u -= m;
        }
        let mask = index::sample(&mut rng, n, size)
            .into_iter()
            .fold(0u32, |acc, i| acc | (1 << i));
        chosen.insert(mask);
    }
    Ok(chosen.into_iter().map(|m| Coalition::from_parts(m, n)).collect())
}

/// KernelSHAP: Shapley values as the solution of an equality-constrained
/// weighted regression of `v(S) − v(∅)` on coalition indicators.
pub fn kernel_shapley<G: Game + ?Sized>(
    game: &G,
    budget: KernelBudget,
    seed: u64,
    exec: Execution,
) -> Result<Attribution> {
    let n = game.n_players();
    let coalitions = kernel_coalitions(n, budget, seed)?;
    let mut needed = coalitions.clone();
    needed.push(Coalition::from_parts(0, n));
    needed.push(Coalition::from_parts(full_mask(n), n));
    let mut cache = CharacteristicCache::new(n, game.output_dim());
    cache.fill(game, &needed, exec)?;
    kernel_shapley_cached(&cache, &coalitions)
}

/// Kernel regression over `coalitions` using values already in `cache`
/// (which must also hold the empty and full coalitions).
///
/// The intercept is pinned to `v(∅)` and the coefficient sum to
/// `v(full) − v(∅)`, so additivity holds by construction.
pub fn kernel_shapley_cached(cache: &CharacteristicCache, coalitions: &[Coalition]) -> Result<Attribution> {
    let n = cache.n_players();
    let dim = cache.output_dim();
    check_enumerable(n)?;
    if n < 2 {
        return Err(Error::Domain("kernel regression needs at least two features".into()));
    }
    let empty = cache.require(Coalition::from_parts(0, n))?;
    let full = cache.require(Coalition::from_parts(full_mask(n), n))?;

    let rows = coalitions.len();
    let mut design = DMatrix::zeros(rows, n);
    let mut weights = Vec::with_capacity(rows);
    let mut y = DMatrix::zeros(rows, dim);
    let mut row_sigma = Vec::with_capacity(rows);
    for (r, &s) in coalitions.iter().enumerate() {
        if s.width() != n || s.is_empty() || s.is_full() {
            return Err(Error::Estimation(format!(
                "coalition {s:?} cannot be used as a regression row"
            )));
        }
        for i in s.members() {
            design[(r, i)] = 1.0;
        }
        weights.push(kernel_weight(s.len(), n)?);
        let v = cache.require(s)?;
        for k in 0..dim {
            y[(r, k)] = v.value[k] - empty.value[k];
        }
        row_sigma.push(&v.sigma);
    }
    let solver = ConstrainedLeastSquares::new(&design, &weights, &vec![1.0; n])?;
    let delta: Vec<f64> = (0..dim).map(|k| full.value[k] - empty.value[k]).collect();
    let beta = solver.solve(&y, &delta)?;

    // φ = G (v_S − v∅) + h (v_full − v∅); propagate |coefficients| · σ
    let gain = solver.gain();
    let offset = solver.offset();
    let mut phi = vec![vec![0.0; n]; dim];
    let mut phi_sigma = vec![vec![0.0; n]; dim];
    for i in 0..n {
        let gain_sum: f64 = gain.row(i).iter().sum();
        let empty_coef = (gain_sum + offset[i]).abs();
        let full_coef = offset[i].abs();
        for k in 0..dim {
            phi[k][i] = beta[(i, k)];
            let rows_part: f64 = (0..rows).map(|r| gain[(i, r)].abs() * row_sigma[r][k]).sum();
            phi_sigma[k][i] = rows_part + empty_coef * empty.sigma[k] + full_coef * full.sigma[k];
        }
    }
    let mut sigma_mc: Vec<f64> = (0..dim).map(|k| empty.sigma[k] + full.sigma[k]).collect();
    for s in &row_sigma {
        for k in 0..dim {
            sigma_mc[k] += s[k];
        }
    }
    Ok(Attribution {
        base_values: empty.value.clone(),
        phi,
        phi_sigma,
        prediction: full.value.clone(),
        sigma_mc,
        coalitions_evaluated: rows + 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::{exact_shapley, FnGame};

    #[test]
    fn additive_game_full_budget() {
        let w = [2.0, 3.0];
        let game = FnGame::new(2, 1, |s| vec![s.members().map(|i| w[i]).sum()]);
        let a = kernel_shapley(&game, KernelBudget::All, 0, Execution::Sequential).unwrap();
        assert!((a.phi[0][0] - 2.0).abs() < 1e-8);
        assert!((a.phi[0][1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn sampled_budget_keeps_efficiency() {
        let game = FnGame::new(8, 2, |s| {
            let m = s.mask() as f64;
            vec![(m * 0.37).sin() * 3.0, (m * 0.11).cos() + s.len() as f64]
        });
        let a = kernel_shapley(&game, KernelBudget::Sampled(64), 9, Execution::Parallel).unwrap();
        assert_eq!(a.coalitions_evaluated, 64);
        for k in 0..2 {
            let total: f64 = a.phi[k].iter().sum();
            assert!((a.base_values[k] + total - a.prediction[k]).abs() < 1e-12);
        }
        let b = kernel_shapley(&game, KernelBudget::Sampled(64), 9, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_below_minimum_is_rejected() {
        assert!(kernel_coalitions(8, KernelBudget::Sampled(9), 0).is_err());
        assert!(kernel_coalitions(1, KernelBudget::All, 0).is_err());
    }

    #[test]
    fn oversized_budget_enumerates() {
        let c = kernel_coalitions(4, KernelBudget::Sampled(1000), 0).unwrap();
        assert_eq!(c.len(), 14);
    }

    #[test]
    fn full_budget_matches_exact_on_small_game() {
        let game = FnGame::new(3, 1, |s| {
            vec![[0.0, 1.0, 2.0, 4.0, -1.0, 0.5, 3.0, 7.0][s.mask() as usize]]
        });
        let k = kernel_shapley(&game, KernelBudget::All, 0, Execution::Sequential).unwrap();
        let e = exact_shapley(&game, Execution::Sequential).unwrap();
        for i in 0..3 {
            assert!((k.phi[0][i] - e.phi[0][i]).abs() < 1e-10);
        }
    }
}
