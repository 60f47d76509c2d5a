use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature::FeatureSpace;

/// Recorded feature vectors used to estimate every expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundDataset {
    feature_space: FeatureSpace,
    /// Row-major `R × N`.
    values: Vec<f64>,
    n_rows: usize,
    source_episodes: Vec<u32>,
}

impl BackgroundDataset {
    pub fn new(feature_space: FeatureSpace, rows: Vec<Vec<f64>>, source_episodes: Vec<u32>) -> Result<Self> {
        let n = feature_space.len();
        if rows.len() < 2 {
            return Err(Error::Data(format!(
                "background data needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Data(format!(
                    "row {r} has {} values for {n} features",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "row {r}, feature `{}` is not finite",
                    feature_space.names()[j]
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            feature_space,
            values,
            n_rows: rows.len(),
            source_episodes,
        })
    }

    pub fn feature_space(&self) -> &FeatureSpace {
        &self.feature_space
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.feature_space.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.n_features();
        &self.values[r * n..(r + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_features())
    }

    pub fn source_episodes(&self) -> &[u32] {
        &self.source_episodes
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n_features();
        let mut mean = vec![0.0; n];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n_rows as f64);
        mean
    }

    /// Reads a CSV whose header names the features. Units are filled in for
    /// the known lever features and left empty otherwise.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let names: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let units = names
            .iter()
            .map(|n| crate::lever::unit_of(n).unwrap_or("").to_string())
            .collect();
        let feature_space = FeatureSpace::new(names, units)?;
        let mut rows = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Data(format!("{}: row {r}: `{s}` is not a number", path.display())))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(feature_space, rows, Vec::new())
    }

    /// Writes the dataset as CSV. Values use the shortest decimal form that
    /// parses back to the identical `f64`.
    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(self.feature_space.names())?;
        for row in self.rows() {
            writer.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Data(format!("csv buffer: {e}")))?;
        crate::report::write_atomic(path.as_ref(), &bytes)
    }
}
