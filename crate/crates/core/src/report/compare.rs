use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Report;
use crate::attribution::Method;
use crate::error::{Error, Result};

/// A named set of features whose attributions are summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub members: Vec<String>,
}

impl FeatureGroup {
    pub fn new(name: impl Into<String>, members: &[&str]) -> Self {
        FeatureGroup {
            name: name.into(),
            members: members.iter().map(|m| m.to_string()).collect(),
        }
    }

    /// Parses `name=a,b,c`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, members) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("group `{s}` is not of the form name=a,b")))?;
        let members: Vec<String> = members
            .split(',')
            .map(|m| m.trim().to_string())
            .filter(|m| !m.is_empty())
            .collect();
        if name.trim().is_empty() || members.is_empty() {
            return Err(Error::Config(format!(
                "group `{s}` needs a name and at least one feature"
            )));
        }
        Ok(FeatureGroup {
            name: name.trim().to_string(),
            members,
        })
    }
}

/// Joint angles versus relative distances, restricted to features present.
pub fn default_groups(feature_names: &[String]) -> Vec<FeatureGroup> {
    [
        FeatureGroup::new("joints", &["q1", "q2", "q3"]),
        FeatureGroup::new("distances", &["dx", "dz"]),
    ]
    .into_iter()
    .filter(|g| g.members.iter().all(|m| feature_names.contains(m)))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDelta {
    pub name: String,
    pub members: Vec<String>,
    /// Per output.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_sigma: Vec<f64>,
}

/// `b − a` for two reports on the same instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method_a: Method,
    pub method_b: Method,
    pub feature_names: Vec<String>,
    pub output_names: Vec<String>,
    /// `delta[k][i] = phi_b[k][i] − phi_a[k][i]`.
    pub delta: Vec<Vec<f64>>,
    /// `sigma_a + sigma_b`.
    pub delta_sigma: Vec<Vec<f64>>,
    pub groups: Vec<GroupDelta>,
}

pub fn compare(a: &Report, b: &Report, groups: &[FeatureGroup]) -> Result<Comparison> {
    let (ea, eb) = (&a.explanation, &b.explanation);
    if ea.feature_names != eb.feature_names {
        return Err(Error::Comparison(format!(
            "feature names differ: {:?} vs {:?}",
            ea.feature_names, eb.feature_names
        )));
    }
    if ea.output_dim() != eb.output_dim() || a.output_names != b.output_names {
        return Err(Error::Comparison(format!(
            "outputs differ: {:?} vs {:?}",
            a.output_names, b.output_names
        )));
    }
    if ea.instance != eb.instance {
        return Err(Error::Comparison("reports explain different instances".into()));
    }
    let n = ea.n_features();
    let outputs = ea.output_dim();
    for e in [ea, eb] {
        if e.phi.len() != outputs || e.phi.iter().chain(&e.phi_sigma).any(|row| row.len() != n) {
            return Err(Error::Comparison(format!(
                "{} report has malformed attribution arrays",
                e.method
            )));
        }
    }

    let delta: Vec<Vec<f64>> = (0..outputs)
        .map(|k| (0..n).map(|i| eb.phi[k][i] - ea.phi[k][i]).collect())
        .collect();
    let delta_sigma: Vec<Vec<f64>> = (0..outputs)
        .map(|k| (0..n).map(|i| ea.phi_sigma[k][i] + eb.phi_sigma[k][i]).collect())
        .collect();

    let mut group_deltas = Vec::with_capacity(groups.len());
    for g in groups {
        let idx = g
            .members
            .iter()
            .map(|m| {
                ea.feature_names
                    .iter()
                    .position(|f| f == m)
                    .ok_or_else(|| Error::Comparison(format!("group `{}` names unknown feature `{m}`", g.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        let sum =
            |phi: &[Vec<f64>]| -> Vec<f64> { (0..outputs).map(|k| idx.iter().map(|&i| phi[k][i]).sum()).collect() };
        let ga = sum(&ea.phi);
        let gb = sum(&eb.phi);
        let sa = sum(&ea.phi_sigma);
        let sb = sum(&eb.phi_sigma);
        group_deltas.push(GroupDelta {
            name: g.name.clone(),
            members: g.members.clone(),
            delta: gb.iter().zip(&ga).map(|(b, a)| b - a).collect(),
            delta_sigma: sa.iter().zip(&sb).map(|(a, b)| a + b).collect(),
            a: ga,
            b: gb,
        });
    }

    Ok(Comparison {
        method_a: ea.method,
        method_b: eb.method,
        feature_names: ea.feature_names.clone(),
        output_names: a.output_names.clone(),
        delta,
        delta_sigma,
        groups: group_deltas,
    })
}

impl Comparison {
    /// Plain-text table, one block per output.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "delta = {} - {}", self.method_b, self.method_a);
        for (k, output) in self.output_names.iter().enumerate() {
            let _ = writeln!(s, "\n[{output}]");
            let _ = writeln!(s, "{:<14} {:>12} {:>12}", "feature", "delta", "sigma");
            for (i, name) in self.feature_names.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{:<14} {:>12.6} {:>12.6}",
                    name, self.delta[k][i], self.delta_sigma[k][i]
                );
            }
            for g in &self.groups {
                let _ = writeln!(
                    s,
                    "{:<14} {:>12.6} {:>12.6}  ({} {:.6} -> {:.6})",
                    format!("Σ{}", g.name),
                    g.delta[k],
                    g.delta_sigma[k],
                    g.members.join("+"),
                    g.a[k],
                    g.b[k]
                );
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}
