//! Characteristic-function estimators over a background dataset.
//!
//! `v(S)` is the expected model output when the features in `S` are fixed at
//! the explained instance and the absent features are drawn from:
//!  - [`SamplerKind::Marginal`]: background rows, ignoring dependence on `S`;
//!  - [`SamplerKind::Conditional`]: the fitted Gaussian conditioned on `x_S`;
//!  - [`SamplerKind::Causal`]: the fitted Gaussian under `do(x_S)`, walking a
//!    [`CausalOrdering`] component by component.
//!
//! Each coalition draws from its own RNG stream keyed by `(seed, mask)`.

mod dataset;
mod gaussian;
mod ordering;

use rand::Rng;

pub use dataset::BackgroundDataset;
pub use gaussian::{fit_gaussian, fit_gaussian_default, GaussianModel};
pub use ordering::{CausalOrdering, OrderingConfig, LEVER_ORDERING_JSON};

use gaussian::ConditionalPlan;

use crate::attribution::{Coalition, CoalitionValue, Game, Method};
use crate::error::{Error, Result};
use crate::feature::FeatureSpace;
use crate::model::PolicyModel;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Marginal,
    Conditional,
    Causal,
}

#[derive(Debug, Clone)]
pub struct ValueSampler {
    kind: SamplerKind,
    dataset: BackgroundDataset,
    gaussian: Option<GaussianModel>,
    ordering: Option<CausalOrdering>,
    mc_samples: usize,
    seed: u64,
    sweep: bool,
}

impl ValueSampler {
    pub fn marginal(dataset: BackgroundDataset, mc_samples: usize, seed: u64) -> Result<Self> {
        Self::build(SamplerKind::Marginal, dataset, None, None, mc_samples, seed)
    }

    /// Conditional sampler on a Gaussian fitted with the default ridge.
    pub fn conditional(dataset: BackgroundDataset, mc_samples: usize, seed: u64) -> Result<Self> {
        let g = fit_gaussian_default(&dataset)?;
        Self::build(SamplerKind::Conditional, dataset, Some(g), None, mc_samples, seed)
    }

    /// Causal sampler on a Gaussian fitted with the default ridge.
    pub fn causal(dataset: BackgroundDataset, ordering: CausalOrdering, mc_samples: usize, seed: u64) -> Result<Self> {
        let g = fit_gaussian_default(&dataset)?;
        Self::build(SamplerKind::Causal, dataset, Some(g), Some(ordering), mc_samples, seed)
    }

    fn build(
        kind: SamplerKind,
        dataset: BackgroundDataset,
        gaussian: Option<GaussianModel>,
        ordering: Option<CausalOrdering>,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if mc_samples == 0 {
            return Err(Error::Config("at least one Monte Carlo sample is required".into()));
        }
        if let Some(ord) = &ordering {
            if ord.n_features() != dataset.n_features() {
                return Err(Error::Schema(format!(
                    "ordering covers {} features, dataset has {}",
                    ord.n_features(),
                    dataset.n_features()
                )));
            }
        }
        Ok(Self {
            kind,
            dataset,
            gaussian,
            ordering,
            mc_samples,
            seed,
            sweep: false,
        })
    }

    /// Replaces the fitted Gaussian (conditional and causal samplers only).
    pub fn with_gaussian(mut self, gaussian: GaussianModel) -> Result<Self> {
        if self.kind == SamplerKind::Marginal {
            return Err(Error::Config("the marginal sampler does not use a Gaussian".into()));
        }
        if gaussian.dim() != self.dataset.n_features() {
            return Err(Error::Schema("gaussian dimension does not match the dataset".into()));
        }
        self.gaussian = Some(gaussian);
        Ok(self)
    }

    /// Marginal sampler only: visit every background row once instead of
    /// drawing `mc_samples` rows with replacement.
    pub fn with_sweep(mut self, sweep: bool) -> Self {
        self.sweep = sweep;
        self
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn method(&self) -> Method {
        match self.kind {
            SamplerKind::Marginal => Method::Marginal,
            SamplerKind::Conditional => Method::Conditional,
            SamplerKind::Causal => Method::Causal,
        }
    }

    pub fn dataset(&self) -> &BackgroundDataset {
        &self.dataset
    }

    pub fn feature_space(&self) -> &FeatureSpace {
        self.dataset.feature_space()
    }

    pub fn gaussian(&self) -> Option<&GaussianModel> {
        self.gaussian.as_ref()
    }

    pub fn ordering(&self) -> Option<&CausalOrdering> {
        self.ordering.as_ref()
    }

    /// Samples actually drawn per coalition.
    pub fn mc_samples(&self) -> usize {
        if self.sweep && self.kind == SamplerKind::Marginal {
            self.dataset.n_rows()
        } else {
            self.mc_samples
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Estimates `v(S)` and its standard error for `model` at `x_star`.
    ///
    /// The full coalition returns `f(x_star)` exactly with zero error.
    pub fn value(&self, model: &dyn PolicyModel, x_star: &[f64], s: Coalition) -> Result<CoalitionValue> {
        let n = self.dataset.n_features();
        if x_star.len() != n || s.width() != n || model.input_dim() != n {
            return Err(Error::Schema(format!(
                "instance ({}), coalition ({}) and model ({}) must all span {n} features",
                x_star.len(),
                s.width(),
                model.input_dim()
            )));
        }
        if s.is_full() {
            let out = model.evaluate(x_star);
            check_finite(&out)?;
            return Ok(CoalitionValue::exact(out));
        }
        match self.kind {
            SamplerKind::Marginal => self.marginal_value(model, x_star, s),
            SamplerKind::Conditional => self.conditional_value(model, x_star, s),
            SamplerKind::Causal => self.causal_value(model, x_star, s),
        }
    }

    fn marginal_value(&self, model: &dyn PolicyModel, x_star: &[f64], s: Coalition) -> Result<CoalitionValue> {
        let absent: Vec<usize> = s.absentees().collect();
        let rows = self.dataset.n_rows();
        let mut rng = rng::coalition_stream(self.seed, s.mask());
        let mut x = x_star.to_vec();
        let mut stats = MeanAccumulator::new(model.output_dim());
        let mut out = vec![0.0; model.output_dim()];
        for m in 0..self.mc_samples() {
            let r = if self.sweep { m } else { rng.random_range(0..rows) };
            let row = self.dataset.row(r);
            for &i in &absent {
                x[i] = row[i];
            }
            model.evaluate_into(&x, &mut out);
            stats.push(&out)?;
        }
        Ok(stats.finish())
    }

    fn conditional_value(&self, model: &dyn PolicyModel, x_star: &[f64], s: Coalition) -> Result<CoalitionValue> {
        let gaussian = self.require_gaussian()?;
        let absent: Vec<usize> = s.absentees().collect();
        let present: Vec<usize> = s.members().collect();
        let plan = gaussian.plan(&absent, &present)?;
        self.simulate(model, x_star, s, vec![plan])
    }

    /// Interventional value: components are visited in causal order; the
    /// absent part of each is drawn given all earlier components plus, for
    /// mutually interacting components, the intervened members of its own.
    fn causal_value(&self, model: &dyn PolicyModel, x_star: &[f64], s: Coalition) -> Result<CoalitionValue> {
        let gaussian = self.require_gaussian()?;
        let ordering = self
            .ordering
            .as_ref()
            .ok_or_else(|| Error::Config("causal sampling requires a causal ordering".into()))?;
        let mut upstream: Vec<usize> = Vec::new();
        let mut plans = Vec::new();
        for (comp, &confounded) in ordering.components().iter().zip(ordering.confounded()) {
            let absent: Vec<usize> = comp.iter().copied().filter(|&i| !s.contains(i)).collect();
            if !absent.is_empty() {
                let mut given = upstream.clone();
                if !confounded {
                    given.extend(comp.iter().copied().filter(|&i| s.contains(i)));
                }
                plans.push(gaussian.plan(&absent, &given)?);
            }
            upstream.extend_from_slice(comp);
        }
        self.simulate(model, x_star, s, plans)
    }

    fn simulate(
        &self,
        model: &dyn PolicyModel,
        x_star: &[f64],
        s: Coalition,
        mut plans: Vec<ConditionalPlan>,
    ) -> Result<CoalitionValue> {
        let mut rng = rng::coalition_stream(self.seed, s.mask());
        let mut x = x_star.to_vec();
        let mut stats = MeanAccumulator::new(model.output_dim());
        let mut out = vec![0.0; model.output_dim()];
        for _ in 0..self.mc_samples {
            // present features are never overwritten, so x keeps x* on S
            for plan in plans.iter_mut() {
                plan.sample_into(&mut x, &mut rng);
            }
            model.evaluate_into(&x, &mut out);
            stats.push(&out)?;
        }
        Ok(stats.finish())
    }

    fn require_gaussian(&self) -> Result<&GaussianModel> {
        self.gaussian
            .as_ref()
            .ok_or_else(|| Error::Config("this sampler has no fitted Gaussian".into()))
    }
}

fn check_finite(out: &[f64]) -> Result<()> {
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric("model produced a non-finite output".into()))
    }
}

/// Welford running mean / variance per output.
struct MeanAccumulator {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl MeanAccumulator {
    fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) -> Result<()> {
        check_finite(x)?;
        self.count += 1;
        let c = self.count as f64;
        for k in 0..x.len() {
            let d = x[k] - self.mean[k];
            self.mean[k] += d / c;
            self.m2[k] += d * (x[k] - self.mean[k]);
        }
        Ok(())
    }

    /// Standard error `sd / √M`; zero when only one sample was drawn.
    fn finish(self) -> CoalitionValue {
        let c = self.count as f64;
        let sigma = self
            .m2
            .iter()
            .map(|m2| {
                if self.count > 1 {
                    (m2 / (c - 1.0) / c).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        CoalitionValue {
            value: self.mean,
            sigma,
        }
    }
}

/// The game `S ↦ v(S)` for one model, instance and sampler.
pub struct SampledGame<'a> {
    model: &'a dyn PolicyModel,
    x_star: &'a [f64],
    sampler: &'a ValueSampler,
}

impl<'a> SampledGame<'a> {
    pub fn new(model: &'a dyn PolicyModel, x_star: &'a [f64], sampler: &'a ValueSampler) -> Self {
        Self { model, x_star, sampler }
    }
}

impl Game for SampledGame<'_> {
    fn n_players(&self) -> usize {
        self.sampler.feature_space().len()
    }

    fn output_dim(&self) -> usize {
        self.model.output_dim()
    }

    fn value(&self, coalition: Coalition) -> Result<CoalitionValue> {
        self.sampler.value(self.model, self.x_star, coalition)
    }

    fn player_names(&self) -> Vec<String> {
        self.sampler.feature_space().names().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LinearModel;

    fn two_rows() -> BackgroundDataset {
        BackgroundDataset::new(
            FeatureSpace::anonymous(2).unwrap(),
            vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, -1.0]],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn full_coalition_is_exact() {
        let model = LinearModel::single(vec![1.5, -2.0], 0.25);
        let sampler = ValueSampler::conditional(two_rows(), 50, 3).unwrap();
        let v = sampler.value(&model, &[1.0, 2.0], Coalition::full(2).unwrap()).unwrap();
        assert_eq!(v.value, vec![1.5 - 4.0 + 0.25]);
        assert_eq!(v.sigma, vec![0.0]);
    }

    #[test]
    fn sweep_gives_dataset_mean() {
        let model = LinearModel::single(vec![1.0, 1.0], 0.0);
        let sampler = ValueSampler::marginal(two_rows(), 1, 0).unwrap().with_sweep(true);
        let v = sampler
            .value(&model, &[9.0, 9.0], Coalition::empty(2).unwrap())
            .unwrap();
        assert!((v.value[0] - 3.0).abs() < 1e-15);
        assert_eq!(sampler.mc_samples(), 3);
    }

    #[test]
    fn empty_coalition_ignores_instance() {
        let model = LinearModel::single(vec![1.0, 2.0], 0.0);
        for sampler in [
            ValueSampler::marginal(two_rows(), 64, 5).unwrap(),
            ValueSampler::conditional(two_rows(), 64, 5).unwrap(),
            ValueSampler::causal(
                two_rows(),
                CausalOrdering::new(vec![vec![0], vec![1]], vec![false, false], 2).unwrap(),
                64,
                5,
            )
            .unwrap(),
        ] {
            let e = Coalition::empty(2).unwrap();
            let a = sampler.value(&model, &[0.0, 0.0], e).unwrap();
            let b = sampler.value(&model, &[7.0, -3.0], e).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn schema_mismatches() {
        let model = LinearModel::single(vec![1.0, 2.0, 3.0], 0.0);
        let sampler = ValueSampler::marginal(two_rows(), 8, 0).unwrap();
        assert!(matches!(
            sampler.value(&model, &[0.0, 0.0], Coalition::empty(2).unwrap()),
            Err(Error::Schema(_))
        ));
        let bad = CausalOrdering::single(3, false).unwrap();
        assert!(ValueSampler::causal(two_rows(), bad, 8, 0).is_err());
        assert!(ValueSampler::marginal(two_rows(), 0, 0).is_err());
    }
}
