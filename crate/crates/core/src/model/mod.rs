//! Deterministic models to be explained.

mod linear;
mod mlp;
mod scripted;

pub use linear::LinearModel;
pub use mlp::{load_mlp, Activation, Mlp};
pub use scripted::{scripted_lever_policy, ScriptedLeverPolicy};

/// A pure map from a feature vector to an output vector.
///
/// Implementations must return bit-identical outputs for identical inputs.
pub trait PolicyModel: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// Writes `f(x)` into `out` (`out.len() == output_dim()`).
    fn evaluate_into(&self, x: &[f64], out: &mut [f64]);

    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim()];
        self.evaluate_into(x, &mut out);
        out
    }

    fn output_names(&self) -> Vec<String> {
        (1..=self.output_dim()).map(|k| format!("a{k}")).collect()
    }
}

impl<M: PolicyModel + ?Sized> PolicyModel for Box<M> {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).evaluate_into(x, out)
    }

    fn output_names(&self) -> Vec<String> {
        (**self).output_names()
    }
}

/// Model backed by a closure; handy for synthetic test targets.
pub struct FnModel<F> {
    input_dim: usize,
    output_dim: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(input_dim: usize, output_dim: usize, f: F) -> Self {
        Self {
            input_dim,
            output_dim,
            f,
        }
    }
}

impl<F> PolicyModel for FnModel<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}
