use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolicyModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "identity" | "linear" => Some(Activation::Identity),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
    act: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MlpFile {
    layers: Vec<LayerFile>,
    input: usize,
    output: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// row-major `outputs × inputs`
    w: Vec<f64>,
    b: Vec<f64>,
    inputs: usize,
    act: Activation,
}

/// Fully connected network evaluated in `f64`.
///
/// Layer `l` computes `act(W_l h + b_l)` where `W_l` has one row per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    input: usize,
    output: usize,
    widest: usize,
}

impl Mlp {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MlpFile = serde_json::from_str(text).map_err(|e| Error::ModelLoad {
            layer: 0,
            msg: format!("invalid weights JSON: {e}"),
        })?;
        Self::from_file(file)
    }

    fn from_file(file: MlpFile) -> Result<Self> {
        if file.layers.is_empty() {
            return Err(Error::ModelLoad {
                layer: 0,
                msg: "network has no layers".into(),
            });
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        let mut width = file.input;
        let mut widest = file.input;
        for (l, layer) in file.layers.into_iter().enumerate() {
            let err = |msg: String| Error::ModelLoad { layer: l, msg };
            let act =
                Activation::parse(&layer.act).ok_or_else(|| err(format!("unknown activation `{}`", layer.act)))?;
            if layer.w.is_empty() {
                return Err(err("weight matrix has no rows".into()));
            }
            if layer.b.len() != layer.w.len() {
                return Err(err(format!(
                    "{} biases for {} output units",
                    layer.b.len(),
                    layer.w.len()
                )));
            }
            for (r, row) in layer.w.iter().enumerate() {
                if row.len() != width {
                    return Err(err(format!(
                        "row {r} has {} weights, expected {width} inputs",
                        row.len()
                    )));
                }
            }
            if layer.w.iter().flatten().chain(&layer.b).any(|v| !v.is_finite()) {
                return Err(err("non-finite weight".into()));
            }
            let outputs = layer.w.len();
            layers.push(Layer {
                w: layer.w.into_iter().flatten().collect(),
                b: layer.b,
                inputs: width,
                act,
            });
            width = outputs;
            widest = widest.max(width);
        }
        if width != file.output {
            return Err(Error::ModelLoad {
                layer: layers.len() - 1,
                msg: format!("final layer has {width} outputs, declared {}", file.output),
            });
        }
        Ok(Self {
            layers,
            input: file.input,
            output: file.output,
            widest,
        })
    }

    fn to_file(&self) -> MlpFile {
        MlpFile {
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    w: l.w.chunks(l.inputs).map(<[f64]>::to_vec).collect(),
                    b: l.b.clone(),
                    act: match l.act {
                        Activation::Relu => "relu",
                        Activation::Tanh => "tanh",
                        Activation::Identity => "identity",
                    }
                    .to_string(),
                })
                .collect(),
            input: self.input,
            output: self.output,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("mlp serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::report::write_atomic(path.as_ref(), self.to_json().as_bytes())
    }

    /// Dense layers `(weights, bias, activation)` with `weights[out][in]`.
    pub fn from_layers(layers: Vec<(Vec<Vec<f64>>, Vec<f64>, Activation)>) -> Result<Self> {
        let input = layers.first().and_then(|l| l.0.first()).map_or(0, Vec::len);
        let output = layers.last().map_or(0, |l| l.0.len());
        let file = MlpFile {
            layers: layers
                .into_iter()
                .map(|(w, b, act)| LayerFile {
                    w,
                    b,
                    act: format!("{act:?}").to_lowercase(),
                })
                .collect(),
            input,
            output,
        };
        Self::from_file(file)
    }
}

pub fn load_mlp(path: impl AsRef<Path>) -> Result<Mlp> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Mlp::from_json(&text)
}

impl PolicyModel for Mlp {
    fn input_dim(&self) -> usize {
        self.input
    }

    fn output_dim(&self) -> usize {
        self.output
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        let mut cur = Vec::with_capacity(self.widest);
        cur.extend_from_slice(&x[..self.input]);
        let mut next = Vec::with_capacity(self.widest);
        for layer in &self.layers {
            next.clear();
            for (row, b) in layer.w.chunks_exact(layer.inputs).zip(&layer.b) {
                let mut acc = *b;
                for (w, h) in row.iter().zip(&cur) {
                    acc += w * h;
                }
                next.push(layer.act.apply(acc));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        out.copy_from_slice(&cur);
    }
}
