//! Data-parallel engines: contiguous sample sharding, per-engine
//! histograms, and an exact merge feeding one split decision.

use rayon::prelude::*;

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::memory::{EngineMemory, Range};
use crate::node_trainer::{build_histogram, find_best_split, GradientHistogram, SplitDecision};

/// Half-open block of `0..n` owned by each of `n_engines` engines.
///
/// The first `n % E` engines get `ceil(n / E)` samples and the rest
/// `floor(n / E)`, so shard sizes differ by at most one; when `n < E` the
/// trailing engines are empty.
pub fn shard_bounds(n: usize, n_engines: usize) -> Vec<Range> {
    let e = n_engines.max(1);
    let (base, extra) = (n / e, n % e);
    (0..e)
        .map(|k| {
            let start = k * base + k.min(extra);
            (start, start + base + usize::from(k < extra))
        })
        .collect()
}

/// Splits `active_indices` into contiguous, order-preserving blocks.
pub fn shard(active_indices: &[usize], n_engines: usize) -> Vec<Vec<usize>> {
    shard_bounds(active_indices.len(), n_engines)
        .into_iter()
        .map(|(s, e)| active_indices[s..e].to_vec())
        .collect()
}

/// Elementwise sum, accumulated in ascending engine order.
pub fn merge_histograms(hists: &[GradientHistogram]) -> Result<GradientHistogram> {
    let first = hists
        .first()
        .ok_or_else(|| Error::InvalidArgument("no histograms to merge".into()))?;
    let mut merged = GradientHistogram::zeros(first.n_features());
    for h in hists {
        merged.add_assign(h)?;
    }
    Ok(merged)
}

/// Builds each engine's histogram over its range concurrently and merges
/// them.
pub fn merged_histogram(memories: &[EngineMemory], ranges: &[Range]) -> Result<GradientHistogram> {
    if memories.len() != ranges.len() || memories.is_empty() {
        return Err(Error::Dimension(format!(
            "{} engines but {} ranges",
            memories.len(),
            ranges.len()
        )));
    }
    let n_features = memories[0].features().n_features();
    if let Some(k) = memories
        .iter()
        .position(|m| m.features().n_features() != n_features)
    {
        return Err(Error::Dimension(format!(
            "engine {k} holds a different number of features"
        )));
    }
    let hists: Vec<GradientHistogram> = memories
        .par_iter()
        .zip(ranges.par_iter())
        .map(|(m, &r)| build_histogram(m, r))
        .collect();
    merge_histograms(&hists)
}

/// One node trained jointly by all engines.
pub fn train_node_parallel(
    memories: &[EngineMemory],
    ranges: &[Range],
    depth: usize,
    config: &TrainConfig,
) -> Result<SplitDecision> {
    let hist = merged_histogram(memories, ranges)?;
    find_best_split(&hist, hist.totals(), depth, config)
}
