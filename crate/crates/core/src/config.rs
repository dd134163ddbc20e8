use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::{FixedFormat, DEFAULT_FRAC_BITS};

/// Training hyperparameters.
///
/// Defaults are the reference engine settings: stumps, half subsampling,
/// unit L2 regularization, no split penalty, 100 trees, 64 engines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 regularizer on leaf weights.
    pub lambda: f64,
    /// Minimum gain a split must exceed.
    pub gamma: f64,
    /// Number of split levels; 1 grows stumps.
    pub max_depth: usize,
    pub n_trees: usize,
    /// Per-sample, per-tree Bernoulli inclusion rate.
    pub subsample: f64,
    /// Shrinkage applied to leaf weights when they are added to scores.
    pub eta: f64,
    pub n_engines: usize,
    pub seed: u64,
    pub frac_bits: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1.0,
            gamma: 0.0,
            max_depth: 1,
            n_trees: 100,
            subsample: 0.5,
            eta: 1.0,
            n_engines: 64,
            seed: 0,
            frac_bits: DEFAULT_FRAC_BITS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be >= 1".into());
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!(
                "subsample must be in (0, 1], got {}",
                self.subsample
            ));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must be in (0, 1], got {}", self.eta));
        }
        if self.n_engines == 0 {
            return bad("n_engines must be >= 1".into());
        }
        FixedFormat::new(self.frac_bits)?;
        Ok(())
    }

    pub fn fixed_format(&self) -> Result<FixedFormat> {
        FixedFormat::new(self.frac_bits)
    }
}

/// The hyperparameters that determine a trained model. The engine count is
/// left out: it changes how training is executed, not what it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub gamma: f64,
    pub max_depth: usize,
    pub n_trees: usize,
    pub subsample: f64,
    pub eta: f64,
    pub seed: u64,
    pub frac_bits: u32,
}

impl From<&TrainConfig> for ModelParams {
    fn from(c: &TrainConfig) -> Self {
        ModelParams {
            lambda: c.lambda,
            gamma: c.gamma,
            max_depth: c.max_depth,
            n_trees: c.n_trees,
            subsample: c.subsample,
            eta: c.eta,
            seed: c.seed,
            frac_bits: c.frac_bits,
        }
    }
}

impl ModelParams {
    /// A training configuration reproducing these parameters.
    pub fn to_config(&self, n_engines: usize) -> TrainConfig {
        TrainConfig {
            lambda: self.lambda,
            gamma: self.gamma,
            max_depth: self.max_depth,
            n_trees: self.n_trees,
            subsample: self.subsample,
            eta: self.eta,
            n_engines,
            seed: self.seed,
            frac_bits: self.frac_bits,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.to_config(1).validate()
    }

    pub fn fixed_format(&self) -> Result<FixedFormat> {
        FixedFormat::new(self.frac_bits)
    }
}
