use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, named model inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    names: Vec<String>,
    units: Vec<String>,
}

impl FeatureSpace {
    pub fn new(names: Vec<String>, units: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Schema("feature space needs at least one feature".into()));
        }
        if units.len() != names.len() {
            return Err(Error::Schema(format!(
                "{} feature names but {} units",
                names.len(),
                units.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if name.trim().is_empty() {
                return Err(Error::Schema(format!("feature {i} has an empty name")));
            }
            if names[..i].contains(name) {
                return Err(Error::Schema(format!("duplicate feature name `{name}`")));
            }
        }
        Ok(Self { names, units })
    }

    /// Feature space with empty unit strings.
    pub fn unitless<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let units = vec![String::new(); names.len()];
        Self::new(names, units)
    }

    /// `x0, x1, ...`
    pub fn anonymous(n: usize) -> Result<Self> {
        Self::unitless((0..n).map(|i| format!("x{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(FeatureSpace::unitless(["a", "b", "a"]).is_err());
        assert!(FeatureSpace::unitless(["a", " "]).is_err());
        assert!(FeatureSpace::unitless(Vec::<String>::new()).is_err());
        assert!(FeatureSpace::new(vec!["a".into()], vec![]).is_err());
    }

    #[test]
    fn lookup() {
        let fs = FeatureSpace::unitless(["q1", "q2"]).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs.index_of("q2"), Some(1));
        assert_eq!(fs.index_of("q3"), None);
    }
}
