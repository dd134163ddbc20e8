//! Gradient-boosted decision trees for binary classification, trained the
//! way a streaming hardware engine would train them.
//!
//! Features are quantized to 8-bit bins ([`quantizer`]). Each engine keeps
//! feature memory, fixed-point state memory and a double-banked index table
//! ([`memory`]). Nodes are trained from gradient histograms with an
//! exact-greedy scan ([`node_trainer`]), split through the index table
//! ([`splitter`]), and driven tree by tree by [`controller::train`]. With
//! several engines the per-engine histograms are summed exactly
//! ([`parallel`]), so the trained model does not depend on the engine
//! count. [`cost`] turns a training log into a clock-cycle estimate.
//!
//! ```
//! use gbdt_engine::{quantizer, train, BinMap, RawDataset, TrainConfig};
//!
//! let raw = RawDataset::from_rows(
//!     &[vec![0.1], vec![0.2], vec![0.8], vec![0.9]],
//!     vec![0, 0, 1, 1],
//! ).unwrap();
//! let bins = BinMap::fit(&raw, 255).unwrap();
//! let data = quantizer::transform(&raw, &bins).unwrap();
//! let config = TrainConfig { n_trees: 3, subsample: 1.0, n_engines: 2, ..TrainConfig::default() };
//! let out = train(&data, raw.labels(), &config).unwrap();
//! let p = out.model.predict_proba(&data).unwrap();
//! assert!(p[0] < 0.5 && p[3] > 0.5);
//! ```

pub mod config;
pub mod controller;
pub mod cost;
pub mod error;
pub mod fixed;
pub mod io;
pub mod loss;
pub mod memory;
pub mod metrics;
pub mod model;
pub mod node_trainer;
pub mod parallel;
pub mod quantizer;
pub mod splitter;

pub use config::TrainConfig;
pub use controller::{subsample_indices, train, TrainLog, TrainOutcome};
pub use cost::{estimate, CostParams, CostReport};
pub use error::{Error, Result};
pub use fixed::FixedFormat;
pub use memory::{EngineMemory, IndexTable, QuantizedMatrix};
pub use metrics::{auc, evaluate_per_tree};
pub use model::Model;
pub use node_trainer::{GradStats, GradientHistogram, SplitDecision};
pub use quantizer::{BinMap, RawDataset, MISSING_BIN};
pub use splitter::{TreeModel, TreeNode};
