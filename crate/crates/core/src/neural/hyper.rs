use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 2] = [Self::Adam, Self::Sgd];

    pub fn name(self) -> &'static str {
        match self {
            Self::Adam => "adam",
            Self::Sgd => "sgd",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "adam" => Ok(Self::Adam),
            "sgd" => Ok(Self::Sgd),
            _ => Err(format!("unknown optimizer `{s}` (expected adam, sgd)")),
        }
    }
}

/// Neighbor aggregation in message-passing layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Pool,
    Mean,
    Gcn,
}

impl Aggregation {
    pub const ALL: [Aggregation; 3] = [Self::Pool, Self::Mean, Self::Gcn];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pool => "pool",
            Self::Mean => "mean",
            Self::Gcn => "gcn",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown aggregation `{s}` (expected pool, mean, gcn)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub optimizer: OptimizerKind,
    pub activation: Activation,
    pub aggregation: Aggregation,
    pub scorer_activation: Activation,
    pub l2_weight: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            learning_rate: 0.005,
            dropout: 0.0,
            optimizer: OptimizerKind::Adam,
            activation: Activation::Relu,
            aggregation: Aggregation::Mean,
            scorer_activation: Activation::Tanh,
            l2_weight: 0.0,
            epochs: 500,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    pub const HIDDEN_DIM_RANGE: (usize, usize) = (25, 600);
    pub const LEARNING_RATE_RANGE: (f64, f64) = (1e-5, 1e-1);

    /// Checks every field against its allowed range.
    pub fn validate(&self) -> Result<()> {
        self.validate_architecture()?;
        if self.epochs == 0 {
            return Err(Error::InvalidHyperparameter("epochs must be positive".into()));
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate) but accepts zero epochs, which the
    /// training loops treat as "return the initial model".
    pub fn validate_architecture(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHyperparameter(m));
        let (hlo, hhi) = Self::HIDDEN_DIM_RANGE;
        if !(hlo..=hhi).contains(&self.hidden_dim) {
            return bad(format!("hidden_dim {} outside [{hlo}, {hhi}]", self.hidden_dim));
        }
        let (llo, lhi) = Self::LEARNING_RATE_RANGE;
        if !(llo..=lhi).contains(&self.learning_rate) {
            return bad(format!("learning_rate {} outside [{llo}, {lhi}]", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !Activation::HIDDEN.contains(&self.activation) {
            return bad(format!(
                "hidden activation must be relu, elu or leaky_relu, got {}",
                self.activation
            ));
        }
        if !(self.l2_weight >= 0.0 && self.l2_weight.is_finite()) {
            return bad(format!(
                "l2_weight {} must be a finite non-negative number",
                self.l2_weight
            ));
        }
        Ok(())
    }
}
