#![allow(clippy::needless_range_loop)]

use causal_shap::attribution::{explain_instance, Coalition, Estimator};
use causal_shap::model::{FnModel, LinearModel};
use causal_shap::sampler::{fit_gaussian_default, BackgroundDataset, CausalOrdering, ValueSampler};
use causal_shap::{Execution, FeatureSpace, PolicyModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Rows of `mean + L z` with `z ~ N(0, I)`.
fn gaussian_rows(mean: &[f64], l: &DMatrix<f64>, r: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mean.len();
    (0..r)
        .map(|_| {
            let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = l * z;
            (0..n).map(|i| mean[i] + x[i]).collect()
        })
        .collect()
}

fn dataset(rows: Vec<Vec<f64>>) -> BackgroundDataset {
    let n = rows[0].len();
    BackgroundDataset::new(FeatureSpace::anonymous(n).unwrap(), rows, vec![]).unwrap()
}

fn moments(rows: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let (r, n) = (rows.len(), rows[0].len());
    let mean: Vec<f64> = (0..n)
        .map(|j| rows.iter().map(|x| x[j]).sum::<f64>() / r as f64)
        .collect();
    let cov = DMatrix::from_fn(n, n, |a, b| {
        rows.iter().map(|x| (x[a] - mean[a]) * (x[b] - mean[b])).sum::<f64>() / (r - 1) as f64
    });
    (mean, cov)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn chain_scm_separates_direct_and_indirect_effects() {
    // x1 ~ N(0,1), x2 = 0.8 x1 + ε, f = x2
    let l = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.8, 0.6]);
    let rows = gaussian_rows(&[0.0, 0.0], &l, 20_000, 1);
    let (mean, cov) = moments(&rows);
    let ds = dataset(rows);
    let model = LinearModel::single(vec![0.0, 1.0], 0.0);
    let x = [1.0, 0.9];
    let ordering = CausalOrdering::new(vec![vec![0], vec![1]], vec![false, false], 2).unwrap();

    let marginal = ValueSampler::marginal(ds.clone(), 10_000, 5).unwrap();
    let causal = ValueSampler::causal(ds, ordering, 10_000, 5).unwrap();
    let em = explain_instance(&model, &x, &marginal, Estimator::Exact, Execution::Parallel).unwrap();
    let ec = explain_instance(&model, &x, &causal, Estimator::Exact, Execution::Parallel).unwrap();

    let indirect = 0.5 * cov[(0, 1)] / cov[(0, 0)] * (x[0] - mean[0]);
    assert!(close(em.phi[0][0], 0.0, 4.0 * em.phi_sigma[0][0]), "{:?}", em.phi);
    assert!(
        close(ec.phi[0][0], indirect, 4.0 * ec.phi_sigma[0][0] + 1e-6),
        "{:?} vs {indirect}",
        ec.phi
    );
    assert!((ec.phi[0][0] - 0.4).abs() < 0.02);
    for e in [&em, &ec] {
        assert!(e.is_additive());
        assert_eq!(e.prediction[0], 0.9);
    }
}

/// Independent columns whose sample covariance is exactly diagonal.
fn orthogonal_rows(n: usize, r: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<DVector<f64>> = (0..n)
        .map(|_| DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    for j in 0..n {
        let m = cols[j].mean();
        cols[j].add_scalar_mut(-m);
        for k in 0..j {
            let proj = cols[j].dot(&cols[k]) / cols[k].dot(&cols[k]);
            let ck = cols[k].clone();
            cols[j].axpy(-proj, &ck, 1.0);
        }
        let sd = (cols[j].norm_squared() / (r - 1) as f64).sqrt();
        let (mu, scale) = (0.3 * j as f64 - 1.0, 0.5 + 0.2 * j as f64);
        cols[j] = cols[j].map(|v| mu + scale * v / sd);
    }
    (0..r).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn wiggly(n: usize) -> FnModel<impl Fn(&[f64], &mut [f64]) + Send + Sync> {
    FnModel::new(n, 2, move |x: &[f64], out: &mut [f64]| {
        let s: f64 = x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * 0.3 * v).sum();
        out[0] = s.tanh() + x[0] * x[1];
        out[1] = x.iter().map(|v| v * v).sum::<f64>() * 0.1 - x[n - 1];
    })
}

#[test]
fn samplers_collapse_under_independence() {
    let n = 8;
    let ds = dataset(orthogonal_rows(n, 20_000, 2));
    let model = wiggly(n);
    let x: Vec<f64> = (0..n).map(|i| 0.5 - 0.1 * i as f64).collect();
    let ordering = CausalOrdering::new(
        vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]],
        vec![false, true, false],
        n,
    )
    .unwrap();
    let m = 2000;
    let samplers = [
        ValueSampler::marginal(ds.clone(), m, 9).unwrap(),
        ValueSampler::conditional(ds.clone(), m, 9).unwrap(),
        ValueSampler::causal(ds, ordering, m, 9).unwrap(),
    ];
    for mask in 0..1u32 << n {
        let s = Coalition::new(mask, n).unwrap();
        let v: Vec<_> = samplers.iter().map(|sp| sp.value(&model, &x, s).unwrap()).collect();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            for k in 0..2 {
                let tol = 4.0 * (v[a].sigma[k] + v[b].sigma[k]) + 1e-9;
                assert!(
                    close(v[a].value[k], v[b].value[k], tol),
                    "{s:?} output {k}: {:?} vs {:?}",
                    v[a],
                    v[b]
                );
            }
        }
    }
}

#[test]
fn confounded_component_is_marginal() {
    let n = 6;
    let l = DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 / (1.0 + (i - j) as f64) } else { 0.0 });
    let ds = dataset(gaussian_rows(&[0.0, 1.0, -1.0, 0.5, 0.0, 2.0], &l, 50_000, 3));
    let model = wiggly(n);
    let x = [0.4, 1.3, -0.2, 0.0, 1.1, 1.5];
    let marginal = ValueSampler::marginal(ds.clone(), 2000, 4).unwrap();
    let causal = ValueSampler::causal(ds, CausalOrdering::single(n, true).unwrap(), 2000, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let s = Coalition::new(rng.random_range(0..(1u32 << n) - 1), n).unwrap();
        let (a, b) = (
            marginal.value(&model, &x, s).unwrap(),
            causal.value(&model, &x, s).unwrap(),
        );
        for k in 0..2 {
            assert!(
                close(a.value[k], b.value[k], 4.0 * (a.sigma[k] + b.sigma[k])),
                "{s:?}: {a:?} vs {b:?}"
            );
        }
    }
}

#[test]
fn within_component_order_does_not_matter() {
    let n = 4;
    let l = DMatrix::from_fn(n, n, |i, j| if j <= i { 0.7f64.powi((i - j) as i32) } else { 0.0 });
    let ds = dataset(gaussian_rows(&[0.0; 4], &l, 5000, 5));
    let model = wiggly(n);
    let x = [0.5, -0.5, 1.0, 0.2];
    let a = CausalOrdering::new(vec![vec![0], vec![1, 2, 3]], vec![false, false], n).unwrap();
    let b = CausalOrdering::new(vec![vec![0], vec![3, 1, 2]], vec![false, false], n).unwrap();
    let sa = ValueSampler::causal(ds.clone(), a, 4000, 6).unwrap();
    let sb = ValueSampler::causal(ds, b, 4000, 6).unwrap();
    for mask in 0..1u32 << n {
        let s = Coalition::new(mask, n).unwrap();
        let (va, vb) = (sa.value(&model, &x, s).unwrap(), sb.value(&model, &x, s).unwrap());
        for k in 0..2 {
            assert!(close(
                va.value[k],
                vb.value[k],
                4.0 * (va.sigma[k] + vb.sigma[k]) + 1e-12
            ));
        }
    }
}

#[test]
fn fit_recovers_generating_gaussian() {
    let l = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 0.8, 0.0, -0.3, 0.2, 0.6]);
    let sigma = &l * l.transpose();
    let mean = [1.0, -2.0, 0.5];
    let r = 10_000;
    let g = fit_gaussian_default(&dataset(gaussian_rows(&mean, &l, r, 7))).unwrap();
    for i in 0..3 {
        let se = (sigma[(i, i)] / r as f64).sqrt();
        assert!(close(g.mean()[i], mean[i], 4.0 * se));
        for j in 0..3 {
            let se = ((sigma[(i, i)] * sigma[(j, j)] + sigma[(i, j)].powi(2)) / r as f64).sqrt();
            assert!(close(g.covariance()[(i, j)], sigma[(i, j)], 4.0 * se), "({i},{j})");
        }
    }
}

/// Least-squares fit of `y` on `[1, X]`, evaluated at `x0`.
fn ols_predict(rows: &[Vec<f64>], target: usize, given: &[usize], x0: &[f64]) -> f64 {
    let r = rows.len();
    let design = DMatrix::from_fn(
        r,
        given.len() + 1,
        |i, j| if j == 0 { 1.0 } else { rows[i][given[j - 1]] },
    );
    let y = DVector::from_fn(r, |i, _| rows[i][target]);
    let xtx = design.transpose() * &design;
    let beta = xtx.cholesky().unwrap().solve(&(design.transpose() * y));
    beta[0] + given.iter().enumerate().map(|(j, &g)| beta[j + 1] * x0[g]).sum::<f64>()
}

#[test]
fn conditional_mean_matches_regression() {
    let n = 5;
    let l = DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 / (1.0 + (i + j) as f64) } else { 0.0 });
    let rows = gaussian_rows(&[0.0, 1.0, 2.0, -1.0, 0.5], &l, 5000, 10);
    let model = LinearModel::new(
        vec![vec![0.0, 0.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0, 0.0]],
        vec![0.0, 0.0],
    );
    let x = [0.8, 0.5, 2.4, -0.7, 0.9];
    let sampler = ValueSampler::conditional(dataset(rows.clone()), 4000, 11).unwrap();
    for mask in 0..(1u32 << n) - 1 {
        let s = Coalition::new(mask, n).unwrap();
        let given: Vec<usize> = s.members().collect();
        let v = sampler.value(&model, &x, s).unwrap();
        let fill = |t: usize| {
            if s.contains(t) {
                x[t]
            } else {
                ols_predict(&rows, t, &given, &x)
            }
        };
        let oracle = [fill(4), fill(0) + fill(3)];
        for k in 0..2 {
            assert!(
                close(v.value[k], oracle[k], 4.0 * v.sigma[k] + 1e-5),
                "{s:?} output {k}: {} vs {}",
                v.value[k],
                oracle[k]
            );
        }
    }
}

#[test]
fn sweep_marginal_is_the_background_average() {
    let rows = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, -1.0]];
    let s = ValueSampler::marginal(dataset(rows), 1, 0).unwrap().with_sweep(true);
    assert_eq!(s.mc_samples(), 3);
    let model = LinearModel::single(vec![1.0, 10.0], 0.0);
    let v = s.value(&model, &[5.0, 5.0], Coalition::new(0b01, 2).unwrap()).unwrap();
    assert!(close(v.value[0], 5.0 + 10.0, 1e-12));
    assert_eq!(model.evaluate(&[5.0, 5.0]), vec![55.0]);
}
