use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Activation, DenseLayer, Mlp, Parameters};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "ping-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

/// One named parameter tensor, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// Serialized model parameters plus the non-numeric settings needed to
/// rebuild the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub model: String,
    pub settings: BTreeMap<String, String>,
    pub params: Vec<ParamRecord>,
}

impl Checkpoint {
    pub fn capture<M: Parameters>(model_kind: &str, settings: BTreeMap<String, String>, model: &M) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            model: model_kind.to_string(),
            settings,
            params: model
                .params()
                .into_iter()
                .map(|(name, shape, values)| ParamRecord {
                    name,
                    shape,
                    values: values.to_vec(),
                })
                .collect(),
        }
    }

    /// Copies stored values into `model`, whose names and shapes must match.
    pub fn restore_into<M: Parameters>(&self, model: &mut M) -> Result<()> {
        let layout: Vec<(String, Vec<usize>)> = model.params().into_iter().map(|(n, s, _)| (n, s)).collect();
        if layout.len() != self.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "checkpoint has {} tensors, model has {}",
                self.params.len(),
                layout.len()
            )));
        }
        for ((name, shape), rec) in layout.iter().zip(&self.params) {
            if *name != rec.name || *shape != rec.shape {
                return Err(Error::ShapeMismatch(format!(
                    "checkpoint tensor {} {:?} does not match model tensor {name} {shape:?}",
                    rec.name, rec.shape
                )));
            }
        }
        for (dst, rec) in model.params_mut().into_iter().zip(&self.params) {
            dst.copy_from_slice(&rec.values);
        }
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Result<&ParamRecord> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::ShapeMismatch(format!("checkpoint lacks tensor {name}")))
    }

    pub fn setting(&self, key: &str) -> Result<&str> {
        self.settings
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::InvalidConfig(format!("checkpoint lacks setting `{key}`")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text).map_err(|e| Error::malformed(&e))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::MalformedFile {
                line: 1,
                column: 1,
                message: format!("unsupported checkpoint {} v{}", ckpt.format, ckpt.version),
            });
        }
        for rec in &ckpt.params {
            if rec.shape.iter().product::<usize>() != rec.values.len() {
                return Err(Error::MalformedFile {
                    line: 1,
                    column: 1,
                    message: format!(
                        "tensor {} has shape {:?} but {} values",
                        rec.name,
                        rec.shape,
                        rec.values.len()
                    ),
                });
            }
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub(crate) fn dense_from_records(w: &ParamRecord, b: &ParamRecord) -> Result<DenseLayer> {
    let (&[o, i], &[bo]) = (w.shape.as_slice(), b.shape.as_slice()) else {
        return Err(Error::ShapeMismatch(format!(
            "{} / {} are not a dense layer",
            w.name, b.name
        )));
    };
    let weights = Array2::from_shape_vec((o, i), w.values.clone()).map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    DenseLayer::new(
        weights,
        Array1::from(b.values.clone())
            .into_shape_with_order(bo)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?,
    )
}

pub(crate) fn parse_setting<T: std::str::FromStr<Err = String>>(ckpt: &Checkpoint, key: &str) -> Result<T> {
    ckpt.setting(key)?.parse().map_err(Error::InvalidConfig)
}

impl Mlp {
    pub fn to_checkpoint(&self) -> Checkpoint {
        let settings = BTreeMap::from([
            ("activation".to_string(), self.activation.to_string()),
            ("dropout".to_string(), self.dropout.to_string()),
        ]);
        Checkpoint::capture("mlp", settings, self)
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.model != "mlp" {
            return Err(Error::InvalidConfig(format!(
                "checkpoint holds a {} model, not mlp",
                ckpt.model
            )));
        }
        let activation: Activation = parse_setting(ckpt, "activation")?;
        let dropout: f64 = ckpt
            .setting("dropout")?
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("dropout: {e}")))?;
        let mut hidden = Vec::new();
        for l in 0..super::HIDDEN_LAYERS {
            hidden.push(dense_from_records(
                ckpt.tensor(&format!("hidden{l}.weights"))?,
                ckpt.tensor(&format!("hidden{l}.bias"))?,
            )?);
        }
        let head = dense_from_records(ckpt.tensor("head.weights")?, ckpt.tensor("head.bias")?)?;
        let model = Self {
            hidden,
            head,
            activation,
            dropout,
        };
        // Name/shape/order check against the rebuilt model.
        let mut check = model.clone();
        ckpt.restore_into(&mut check)?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Hyperparameters;

    #[test]
    fn mlp_round_trip_is_exact() {
        let hp = Hyperparameters {
            hidden_dim: 30,
            dropout: 0.25,
            activation: Activation::LeakyRelu,
            ..Hyperparameters::default()
        };
        let model = Mlp::new(5, &hp, 77);
        let text = model.to_checkpoint().to_json().unwrap();
        let back = Mlp::from_checkpoint(&Checkpoint::from_json(&text).unwrap()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_checkpoint().to_json().unwrap(), text);
    }

    #[test]
    fn rejects_mismatched_layout() {
        let hp = Hyperparameters {
            hidden_dim: 30,
            ..Hyperparameters::default()
        };
        let ckpt = Mlp::new(5, &hp, 1).to_checkpoint();
        let mut other = Mlp::new(4, &hp, 1);
        assert!(ckpt.restore_into(&mut other).is_err());
        let mut bad = ckpt.clone();
        bad.params[0].values.pop();
        assert!(Checkpoint::from_json(&bad.to_json().unwrap()).is_err());
    }
}
