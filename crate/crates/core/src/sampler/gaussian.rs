use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::dataset::BackgroundDataset;
use crate::error::{Error, Result};

/// Allowed asymmetry of a covariance matrix.
const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues above `-EIGEN_SLACK * scale` are clamped to zero rather than rejected.
const EIGEN_SLACK: f64 = 1e-10;

/// Multivariate normal over the feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianModel {
    /// Validates symmetry and positive definiteness.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.shape() != (n, n) {
            return Err(Error::Schema(format!(
                "covariance is {:?} for a mean of length {n}",
                covariance.shape()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("gaussian parameters must be finite".into()));
        }
        let scale = covariance.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Numeric(format!("covariance is not symmetric at ({i},{j})")));
                }
            }
        }
        let diag_max = covariance.diagonal().amax();
        let definite = covariance
            .clone()
            .cholesky()
            .is_some_and(|c| c.l_dirty().diagonal().iter().all(|&d| d * d > 1e-12 * diag_max));
        if !definite {
            return Err(Error::Numeric("covariance is not positive definite".into()));
        }
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Distribution of the remaining features given `given` = `(index, value)` pairs.
    ///
    /// The result is indexed over the non-given features in ascending order.
    pub fn condition(&self, given: &[(usize, f64)]) -> Result<GaussianModel> {
        let n = self.dim();
        let mut given_idx: Vec<usize> = given.iter().map(|g| g.0).collect();
        given_idx.sort_unstable();
        if given_idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("conditioning indices must be distinct".into()));
        }
        if given_idx.iter().any(|&i| i >= n) {
            return Err(Error::Domain(format!("conditioning index outside {n} features")));
        }
        if given_idx.len() >= n {
            return Err(Error::Domain("cannot condition on every feature".into()));
        }
        let target: Vec<usize> = (0..n).filter(|i| !given_idx.contains(i)).collect();
        let given_order: Vec<usize> = given.iter().map(|g| g.0).collect();
        let plan = self.plan(&target, &given_order)?;
        let x_given = DVector::from_iterator(given.len(), given.iter().map(|g| g.1));
        let mean = plan.conditional_mean(&x_given);
        let covariance = &plan.factor * plan.factor.transpose();
        Ok(GaussianModel { mean, covariance })
    }

    /// Mahalanobis distance of `x` from the mean.
    pub fn mahalanobis(&self, x: &[f64]) -> Result<f64> {
        let diff = DVector::from_column_slice(x) - &self.mean;
        let chol = self
            .covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))?;
        let z = chol.solve(&diff);
        Ok(diff.dot(&z).sqrt())
    }

    /// Precomputes the regression of `target` on `given` for repeated sampling.
    pub(crate) fn plan(&self, target: &[usize], given: &[usize]) -> Result<ConditionalPlan> {
        let sub = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |r, c| self.covariance[(rows[r], cols[c])])
        };
        let mean_t = DVector::from_iterator(target.len(), target.iter().map(|&i| self.mean[i]));
        let mean_g = DVector::from_iterator(given.len(), given.iter().map(|&i| self.mean[i]));
        let cov_tt = sub(target, target);

        let (coef, cond_cov) = if given.is_empty() {
            (DMatrix::zeros(target.len(), 0), cov_tt)
        } else {
            let cov_gg = sub(given, given);
            let cov_gt = sub(given, target);
            let chol = cov_gg
                .cholesky()
                .ok_or_else(|| Error::Numeric("conditioning covariance block is singular".into()))?;
            // Σ_tg Σ_gg⁻¹ = (Σ_gg⁻¹ Σ_gt)ᵀ
            let coef = chol.solve(&cov_gt).transpose();
            let cond = cov_tt - &coef * &cov_gt;
            (coef, cond)
        };
        let factor = psd_factor(cond_cov)?;
        Ok(ConditionalPlan {
            target: target.to_vec(),
            given: given.to_vec(),
            mean_t,
            mean_g,
            coef,
            factor,
            z: Vec::new(),
        })
    }
}

/// `L` with `L Lᵀ = cov`, after symmetrizing and clamping tiny negative eigenvalues.
fn psd_factor(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    if n == 0 {
        return Ok(cov);
    }
    let sym = (&cov + cov.transpose()) * 0.5;
    let scale = (0..n).map(|i| sym[(i, i)].abs()).fold(1.0, f64::max);
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -EIGEN_SLACK * scale {
        return Err(Error::Numeric(format!(
            "conditional covariance is indefinite (eigenvalue {min:e})"
        )));
    }
    let mut factor = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// Fitted regression `x_t | x_g ~ N(μ_t + B (x_g − μ_g), L Lᵀ)`.
#[derive(Debug, Clone)]
pub(crate) struct ConditionalPlan {
    target: Vec<usize>,
    given: Vec<usize>,
    mean_t: DVector<f64>,
    mean_g: DVector<f64>,
    coef: DMatrix<f64>,
    factor: DMatrix<f64>,
    z: Vec<f64>,
}

impl ConditionalPlan {
    fn conditional_mean(&self, x_given: &DVector<f64>) -> DVector<f64> {
        if self.given.is_empty() {
            return self.mean_t.clone();
        }
        &self.mean_t + &self.coef * (x_given - &self.mean_g)
    }

    /// Overwrites `x[target]` with a draw conditioned on the current `x[given]`.
    pub(crate) fn sample_into<R: Rng + ?Sized>(&mut self, x: &mut [f64], rng: &mut R) {
        let t = self.target.len();
        self.z.clear();
        self.z.extend((0..t).map(|_| rng.sample::<f64, _>(StandardNormal)));
        for r in 0..t {
            let mut v = self.mean_t[r];
            for (c, &g) in self.given.iter().enumerate() {
                v += self.coef[(r, c)] * (x[g] - self.mean_g[c]);
            }
            for (c, z) in self.z.iter().enumerate() {
                v += self.factor[(r, c)] * z;
            }
            x[self.target[r]] = v;
        }
    }
}

/// Sample mean and covariance (divisor `R − 1`) plus `ridge · I`.
pub fn fit_gaussian(dataset: &BackgroundDataset, ridge: f64) -> Result<GaussianModel> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Config(format!(
            "ridge must be finite and non-negative, got {ridge}"
        )));
    }
    let (mean, mut cov) = sample_moments(dataset)?;
    for i in 0..cov.nrows() {
        cov[(i, i)] += ridge;
    }
    GaussianModel::new(mean, cov)
}

/// [`fit_gaussian`] with ridge `1e-6 · trace(Σ) / N` (floored at `1e-12`).
pub fn fit_gaussian_default(dataset: &BackgroundDataset) -> Result<GaussianModel> {
    let (_, cov) = sample_moments(dataset)?;
    fit_gaussian(dataset, default_ridge(&cov))
}

pub(crate) fn default_ridge(cov: &DMatrix<f64>) -> f64 {
    (1e-6 * cov.trace() / cov.nrows() as f64).max(1e-12)
}

fn sample_moments(dataset: &BackgroundDataset) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = dataset.n_features();
    let r = dataset.n_rows();
    if r < 2 {
        return Err(Error::Data("need at least two rows to fit a covariance".into()));
    }
    if dataset.rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Data("background data contains non-finite values".into()));
    }
    let mean = DVector::from_vec(dataset.column_means());
    let mut cov = DMatrix::zeros(n, n);
    for row in dataset.rows() {
        for i in 0..n {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = cov[(i, j)] / (r - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}
