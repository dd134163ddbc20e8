//! The boosting driver: per-tree subsampling, depth-synchronous node
//! training and splitting across engines, and the end-of-tree update.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::fixed::FixedFormat;
use crate::loss::log_loss;
use crate::memory::{EngineMemory, QuantizedMatrix, Range};
use crate::model::Model;
use crate::node_trainer::{find_best_split, leaf_decision, GradStats, SplitDecision};
use crate::parallel::{merged_histogram, shard_bounds};
use crate::splitter::{apply_tree_update, split_node, TreeModel, TreeNode};

/// Base margin; `sigmoid(0) = 1/2`.
pub const BASE_SCORE: f64 = 0.0;

/// Uniform draw in `[0, 1)` from the top 53 bits of a word.
#[inline]
pub fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli(`rate`) sample selection for one tree, ascending.
///
/// Sample `i` of tree `t` is decided by the `i`-th 64-bit word of ChaCha8
/// stream `t` keyed by `seed`, a counter-based function of
/// `(seed, t, i)`. A rate of one takes every sample without drawing.
pub fn subsample_indices(seed: u64, tree_index: usize, n: usize, rate: f64) -> Vec<usize> {
    if rate >= 1.0 {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64);
    (0..n)
        .filter(|_| unit_interval(rng.next_u64()) < rate)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Split,
    /// Scanned, but no split gained more than zero.
    Leaf,
    /// Forced leaf at the depth limit; no gain scan.
    DepthLeaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLog {
    pub depth: usize,
    pub node: usize,
    pub n_samples: u64,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLog {
    /// Samples selected by the subsample for this tree.
    pub n_active: usize,
    pub nodes: Vec<NodeLog>,
    /// Mean log loss over every training sample after this tree.
    pub train_loss: f64,
}

/// Per-tree node and sample counts of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub n_samples: usize,
    pub n_engines: usize,
    pub max_depth: usize,
    pub trees: Vec<TreeLog>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub log: TrainLog,
    /// Final raw training margins, in sample order.
    pub scores: Vec<i64>,
}

/// Engines of one training run plus the block each owns.
struct Engines {
    memories: Vec<EngineMemory>,
    blocks: Vec<Range>,
}

impl Engines {
    fn load(
        data: &QuantizedMatrix,
        labels: &[u8],
        n_engines: usize,
        fx: FixedFormat,
    ) -> Result<Self> {
        let blocks = shard_bounds(data.n_samples(), n_engines);
        let memories = blocks
            .iter()
            .map(|&(s, e)| EngineMemory::load(data.rows(s, e), &labels[s..e], BASE_SCORE, fx))
            .collect::<Result<Vec<_>>>()?;
        Ok(Engines { memories, blocks })
    }

    /// Hands each engine the part of the (ascending, global) subsample that
    /// falls in its block, as local indices.
    fn init_index_tables(&mut self, active: &[usize]) -> Result<()> {
        for (mem, &(s, e)) in self.memories.iter_mut().zip(&self.blocks) {
            let lo = active.partition_point(|&i| i < s);
            let hi = active.partition_point(|&i| i < e);
            let local: Vec<usize> = active[lo..hi].iter().map(|&i| i - s).collect();
            mem.init_index_table(&local)?;
        }
        Ok(())
    }

    fn ranges(&self, depth: usize, node: usize) -> Result<Vec<Range>> {
        self.memories
            .iter()
            .map(|m| m.index.node_slice(depth, node))
            .collect()
    }

    fn node_totals(&self, ranges: &[Range]) -> GradStats {
        let mut totals = GradStats::default();
        for (m, &r) in self.memories.iter().zip(ranges) {
            for &i in m.index.indices(r) {
                totals += GradStats::new(m.state.grad[i], m.state.hess[i], 1);
            }
        }
        totals
    }

    fn scores(&self) -> Vec<i64> {
        self.memories
            .iter()
            .flat_map(|m| m.state.score.iter().copied())
            .collect()
    }
}

/// Trains `config.n_trees` trees on `data`.
pub fn train(data: &QuantizedMatrix, labels: &[u8], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if data.n_samples() == 0 {
        return Err(Error::NoSamples);
    }
    if labels.len() != data.n_samples() {
        return Err(Error::Dimension(format!(
            "{} labels for {} samples",
            labels.len(),
            data.n_samples()
        )));
    }
    let fx = config.fixed_format()?;
    let mut engines = Engines::load(data, labels, config.n_engines, fx)?;
    let n = data.n_samples();
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut tree_logs = Vec::with_capacity(config.n_trees);

    for t in 0..config.n_trees {
        let active = subsample_indices(config.seed, t, n, config.subsample);
        engines.init_index_tables(&active)?;
        let (tree, nodes) = grow_tree(&mut engines, config, fx)?;

        engines
            .memories
            .par_iter_mut()
            .try_for_each(|m| apply_tree_update(m, &tree, config.eta))?;

        let margins = engines.scores().into_iter().map(|s| fx.dequantize(s));
        tree_logs.push(TreeLog {
            n_active: active.len(),
            nodes,
            train_loss: log_loss(margins, labels),
        });
        trees.push(tree);
    }

    Ok(TrainOutcome {
        scores: engines.scores(),
        model: Model {
            params: config.into(),
            bin_map: data.bin_map().clone(),
            base_score: fx.quantize(BASE_SCORE),
            trees,
        },
        log: TrainLog {
            n_samples: n,
            n_engines: config.n_engines,
            max_depth: config.max_depth,
            trees: tree_logs,
        },
    })
}

/// One tree, depth by depth. Every node of a depth is decided and written
/// to the inactive bank before the banks toggle.
fn grow_tree(
    engines: &mut Engines,
    config: &TrainConfig,
    fx: FixedFormat,
) -> Result<(TreeModel, Vec<NodeLog>)> {
    let mut levels: Vec<Vec<TreeNode>> = Vec::new();
    let mut logs = Vec::new();
    let mut width = 1;
    for depth in 0..=config.max_depth {
        if width == 0 {
            break;
        }
        let mut level = Vec::with_capacity(width);
        let mut next_left = 0;
        for node in 0..width {
            let ranges = engines.ranges(depth, node)?;
            let (decision, totals, kind) = if depth >= config.max_depth {
                let totals = engines.node_totals(&ranges);
                (
                    leaf_decision(fx, totals, config.lambda)?,
                    totals,
                    NodeKind::DepthLeaf,
                )
            } else {
                let hist = merged_histogram(&engines.memories, &ranges)?;
                let totals = hist.totals();
                let d = find_best_split(&hist, totals, depth, config)?;
                let kind = if d.is_leaf() {
                    NodeKind::Leaf
                } else {
                    NodeKind::Split
                };
                (d, totals, kind)
            };
            logs.push(NodeLog {
                depth,
                node,
                n_samples: totals.count,
                kind,
            });
            match decision {
                SplitDecision::Leaf { weight } => {
                    for (m, &r) in engines.memories.iter_mut().zip(&ranges) {
                        m.index.carry(r);
                    }
                    level.push(TreeNode::Leaf { weight });
                }
                SplitDecision::Split {
                    feature,
                    threshold_bin,
                    missing_left,
                    ..
                } => {
                    for m in engines.memories.iter_mut() {
                        split_node(m, depth, node, next_left, &decision)?;
                    }
                    level.push(TreeNode::Split {
                        feature,
                        threshold_bin,
                        missing_left,
                        left_child: next_left,
                    });
                    next_left += 2;
                }
            }
        }
        for m in engines.memories.iter_mut() {
            m.index.toggle();
        }
        levels.push(level);
        width = next_left;
    }
    Ok((TreeModel::from_levels(levels)?, logs))
}
