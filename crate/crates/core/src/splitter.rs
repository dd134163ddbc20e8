//! Sample routing: index-table partitioning of split nodes and the
//! end-of-tree score and gradient refresh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedFormat;
use crate::memory::{EngineMemory, Range};
use crate::node_trainer::SplitDecision;
use crate::quantizer::MISSING_BIN;

/// One model-memory record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Raw fixed-point weight.
        weight: i64,
    },
    Split {
        feature: usize,
        threshold_bin: u8,
        missing_left: bool,
        /// Index of the left child in the next level; the right child
        /// follows it.
        left_child: usize,
    },
}

impl TreeNode {
    #[inline]
    fn goes_left(threshold_bin: u8, missing_left: bool, bin: u8) -> bool {
        if bin == MISSING_BIN {
            missing_left
        } else {
            bin <= threshold_bin
        }
    }
}

/// A tree stored level by level, as in the per-depth model memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeModel {
    levels: Vec<Vec<TreeNode>>,
}

impl TreeModel {
    pub fn single_leaf(weight: i64) -> Self {
        TreeModel {
            levels: vec![vec![TreeNode::Leaf { weight }]],
        }
    }

    /// Builds and validates a tree from its levels.
    pub fn from_levels(levels: Vec<Vec<TreeNode>>) -> Result<Self> {
        let tree = TreeModel { levels };
        tree.validate()?;
        Ok(tree)
    }

    pub fn levels(&self) -> &[Vec<TreeNode>] {
        &self.levels
    }

    /// Number of levels, counting the root.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Every leaf weight, level by level.
    pub fn leaf_weights(&self) -> impl Iterator<Item = i64> + '_ {
        self.levels.iter().flatten().filter_map(|n| match n {
            TreeNode::Leaf { weight } => Some(*weight),
            TreeNode::Split { .. } => None,
        })
    }

    /// Checks a single root and that every split's children exist and every
    /// non-root node has exactly one parent.
    pub fn validate(&self) -> Result<()> {
        match self.levels.first() {
            Some(root) if root.len() == 1 => {}
            _ => return Err(Error::MalformedTree("tree needs exactly one root".into())),
        }
        for (d, level) in self.levels.iter().enumerate() {
            let next_len = self.levels.get(d + 1).map_or(0, Vec::len);
            let mut referenced = vec![0u8; next_len];
            for node in level {
                if let TreeNode::Split { left_child, .. } = *node {
                    if left_child + 1 >= next_len {
                        return Err(Error::MalformedTree(format!(
                            "split at depth {d} points to missing children {left_child}, {}",
                            left_child + 1
                        )));
                    }
                    referenced[left_child] += 1;
                    referenced[left_child + 1] += 1;
                }
            }
            if let Some(i) = referenced.iter().position(|&r| r != 1) {
                return Err(Error::MalformedTree(format!(
                    "node {i} at depth {} has {} parents",
                    d + 1,
                    referenced[i]
                )));
            }
        }
        Ok(())
    }

    /// Descends from the root, reading feature bins through `bin_of`.
    pub fn route(&self, bin_of: impl Fn(usize) -> u8) -> Result<i64> {
        let mut node = 0;
        for (d, level) in self.levels.iter().enumerate() {
            let record = level
                .get(node)
                .ok_or_else(|| Error::MalformedTree(format!("missing node {node} at depth {d}")))?;
            match *record {
                TreeNode::Leaf { weight } => return Ok(weight),
                TreeNode::Split {
                    feature,
                    threshold_bin,
                    missing_left,
                    left_child,
                } => {
                    node = if TreeNode::goes_left(threshold_bin, missing_left, bin_of(feature)) {
                        left_child
                    } else {
                        left_child + 1
                    };
                }
            }
        }
        Err(Error::MalformedTree(format!(
            "descended past the last level ({})",
            self.levels.len()
        )))
    }
}

/// Leaf weight reached by a sample given as one bin per feature.
pub fn route_to_leaf(tree: &TreeModel, sample_bins: &[u8]) -> Result<i64> {
    tree.route(|f| sample_bins.get(f).copied().unwrap_or(MISSING_BIN))
}

/// Score increment contributed by a leaf: `quantize(eta * weight)`.
#[inline]
pub fn shrunk_weight(fx: FixedFormat, weight: i64, eta: f64) -> i64 {
    fx.quantize(eta * fx.dequantize(weight))
}

/// Stable partition of `range` from the active bank into the inactive bank.
///
/// Left-going indices fill `start..mid` and right-going indices `mid..end`,
/// each in their original order. Returns `mid`.
pub fn partition(
    memory: &mut EngineMemory,
    range: Range,
    decision: &SplitDecision,
) -> Result<usize> {
    let (feature, threshold_bin, missing_left) = match *decision {
        SplitDecision::Split {
            feature,
            threshold_bin,
            missing_left,
            ..
        } => (feature, threshold_bin, missing_left),
        SplitDecision::Leaf { .. } => {
            return Err(Error::Contract(
                "cannot partition on a leaf decision".into(),
            ))
        }
    };
    let (start, end) = range;
    if start > end || end > memory.index.n_active() {
        return Err(Error::InvalidArgument(format!(
            "range {start}..{end} outside 0..{}",
            memory.index.n_active()
        )));
    }
    let column = memory.features().column(feature).to_vec();
    let (src, dst) = memory.index.banks_mut();
    let src = &src[start..end];
    let n_left = src
        .iter()
        .filter(|&&i| TreeNode::goes_left(threshold_bin, missing_left, column[i]))
        .count();
    let mid = start + n_left;
    let (mut l, mut r) = (start, mid);
    for &i in src {
        if TreeNode::goes_left(threshold_bin, missing_left, column[i]) {
            dst[l] = i;
            l += 1;
        } else {
            dst[r] = i;
            r += 1;
        }
    }
    Ok(mid)
}

/// Partitions node `(depth, node)` and records its children at
/// `(depth + 1, left_child)` and `(depth + 1, left_child + 1)`.
pub fn split_node(
    memory: &mut EngineMemory,
    depth: usize,
    node: usize,
    left_child: usize,
    decision: &SplitDecision,
) -> Result<usize> {
    let (start, end) = memory.index.node_slice(depth, node)?;
    let mid = partition(memory, (start, end), decision)?;
    memory
        .index
        .record_range(depth + 1, left_child, (start, mid));
    memory
        .index
        .record_range(depth + 1, left_child + 1, (mid, end));
    Ok(mid)
}

/// Adds each sample's shrunk leaf weight to its score and refreshes its
/// gradient and hessian. Covers every sample, not only the subsample.
pub fn apply_tree_update(memory: &mut EngineMemory, tree: &TreeModel, eta: f64) -> Result<()> {
    let fx = memory.fixed_format();
    for i in 0..memory.n_samples() {
        let features = memory.features();
        let weight = tree.route(|f| features.get(i, f))?;
        memory.state.score[i] += shrunk_weight(fx, weight, eta);
        memory.state.refresh(fx, i);
    }
    Ok(())
}
