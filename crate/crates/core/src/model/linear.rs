use super::PolicyModel;

/// `f(x) = W x + b`, with `W` stored row-major (`output_dim × input_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl LinearModel {
    /// # Panics
    /// If rows have different lengths or `bias` does not match the row count.
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Self {
        assert_eq!(weights.len(), bias.len(), "one bias per output");
        assert!(!weights.is_empty());
        let n = weights[0].len();
        assert!(weights.iter().all(|r| r.len() == n), "ragged weight matrix");
        Self { weights, bias }
    }

    pub fn single(weights: Vec<f64>, bias: f64) -> Self {
        Self::new(vec![weights], vec![bias])
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

impl PolicyModel for LinearModel {
    fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    fn output_dim(&self) -> usize {
        self.weights.len()
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        for (k, row) in self.weights.iter().enumerate() {
            out[k] = self.bias[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}
