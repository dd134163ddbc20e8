//! Node training: gradient histograms and exact-greedy split selection.

use std::ops::{Add, AddAssign, Sub};

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::fixed::FixedFormat;
use crate::memory::{EngineMemory, Range};
use crate::quantizer::MISSING_BIN;

pub const BINS_PER_FEATURE: usize = 256;

/// Exact fixed-point sums of gradient, hessian and sample count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct GradStats {
    pub sum_g: i64,
    pub sum_h: i64,
    pub count: u64,
}

impl GradStats {
    pub fn new(sum_g: i64, sum_h: i64, count: u64) -> Self {
        GradStats {
            sum_g,
            sum_h,
            count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

impl Add for GradStats {
    type Output = GradStats;
    fn add(self, o: GradStats) -> GradStats {
        GradStats::new(
            self.sum_g + o.sum_g,
            self.sum_h + o.sum_h,
            self.count + o.count,
        )
    }
}

impl AddAssign for GradStats {
    fn add_assign(&mut self, o: GradStats) {
        *self = *self + o;
    }
}

impl Sub for GradStats {
    type Output = GradStats;
    fn sub(self, o: GradStats) -> GradStats {
        GradStats::new(
            self.sum_g - o.sum_g,
            self.sum_h - o.sum_h,
            self.count - o.count,
        )
    }
}

/// 256 bins of [`GradStats`] per feature, bin 255 holding missing values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientHistogram {
    n_features: usize,
    bins: Vec<GradStats>,
}

impl GradientHistogram {
    pub fn zeros(n_features: usize) -> Self {
        GradientHistogram {
            n_features,
            bins: vec![GradStats::default(); n_features * BINS_PER_FEATURE],
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature(&self, feature: usize) -> &[GradStats] {
        &self.bins[feature * BINS_PER_FEATURE..(feature + 1) * BINS_PER_FEATURE]
    }

    pub fn bin(&self, feature: usize, bin: u8) -> GradStats {
        self.bins[feature * BINS_PER_FEATURE + usize::from(bin)]
    }

    pub fn bin_mut(&mut self, feature: usize, bin: u8) -> &mut GradStats {
        &mut self.bins[feature * BINS_PER_FEATURE + usize::from(bin)]
    }

    /// Sum over all bins of one feature.
    pub fn feature_totals(&self, feature: usize) -> GradStats {
        self.feature(feature)
            .iter()
            .fold(GradStats::default(), |acc, &b| acc + b)
    }

    /// Node totals. Every feature sees every sample once, so feature 0
    /// suffices.
    pub fn totals(&self) -> GradStats {
        if self.n_features == 0 {
            GradStats::default()
        } else {
            self.feature_totals(0)
        }
    }

    /// Elementwise integer addition.
    pub fn add_assign(&mut self, other: &GradientHistogram) -> Result<()> {
        if self.n_features != other.n_features {
            return Err(Error::Dimension(format!(
                "histograms over {} and {} features",
                self.n_features, other.n_features
            )));
        }
        for (a, &b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        Ok(())
    }
}

/// Accumulates the gradient histogram of the samples in `range`.
pub fn build_histogram(memory: &EngineMemory, range: Range) -> GradientHistogram {
    let features = memory.features();
    let mut hist = GradientHistogram::zeros(features.n_features());
    let indices = memory.index.indices(range);
    let state = &memory.state;
    for f in 0..features.n_features() {
        let column = features.column(f);
        let slots = &mut hist.bins[f * BINS_PER_FEATURE..(f + 1) * BINS_PER_FEATURE];
        for &i in indices {
            let slot = &mut slots[usize::from(column[i])];
            slot.sum_g += state.grad[i];
            slot.sum_h += state.hess[i];
            slot.count += 1;
        }
    }
    hist
}

/// Second-order split gain on dequantized sums, minus `gamma`.
pub fn split_gain(
    fx: FixedFormat,
    left: GradStats,
    right: GradStats,
    lambda: f64,
    gamma: f64,
) -> f64 {
    let gl = fx.dequantize(left.sum_g);
    let hl = fx.dequantize(left.sum_h);
    let gr = fx.dequantize(right.sum_g);
    let hr = fx.dequantize(right.sum_h);
    let gp = fx.dequantize(left.sum_g + right.sum_g);
    let hp = fx.dequantize(left.sum_h + right.sum_h);
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - gp * gp / (hp + lambda)) - gamma
}

/// Quantized `-G / (H + lambda)`.
pub fn leaf_weight(fx: FixedFormat, sum_g: i64, sum_h: i64, lambda: f64) -> Result<i64> {
    let denom = fx.dequantize(sum_h) + lambda;
    if denom <= 0.0 {
        return Err(Error::DegenerateNode);
    }
    Ok(fx.quantize(-fx.dequantize(sum_g) / denom))
}

/// Outcome of training one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitDecision {
    Leaf {
        /// Fixed-point leaf value.
        weight: i64,
    },
    Split {
        feature: usize,
        threshold_bin: u8,
        /// Direction taken by samples in the missing bin.
        missing_left: bool,
        gain: f64,
    },
}

impl SplitDecision {
    pub fn is_leaf(&self) -> bool {
        matches!(self, SplitDecision::Leaf { .. })
    }

    /// Routing predicate of a split; `None` for a leaf.
    pub fn goes_left(&self, bin: u8) -> Option<bool> {
        match *self {
            SplitDecision::Leaf { .. } => None,
            SplitDecision::Split {
                threshold_bin,
                missing_left,
                ..
            } => Some(if bin == MISSING_BIN {
                missing_left
            } else {
                bin <= threshold_bin
            }),
        }
    }
}

/// Leaf over `totals`. An empty node gets weight zero.
pub fn leaf_decision(fx: FixedFormat, totals: GradStats, lambda: f64) -> Result<SplitDecision> {
    let weight = if totals.is_empty() {
        0
    } else {
        leaf_weight(fx, totals.sum_g, totals.sum_h, lambda)?
    };
    Ok(SplitDecision::Leaf { weight })
}

/// Exact-greedy scan over every feature, threshold and missing direction.
///
/// Candidates are visited feature-major, threshold ascending, missing-left
/// before missing-right; only a strictly larger gain replaces the incumbent.
/// Candidates with an empty side are skipped. The node becomes a leaf at
/// `depth == max_depth`, or when no candidate gains more than zero.
pub fn find_best_split(
    hist: &GradientHistogram,
    totals: GradStats,
    depth: usize,
    config: &TrainConfig,
) -> Result<SplitDecision> {
    let fx = config.fixed_format()?;
    if depth >= config.max_depth || totals.count < 2 {
        return leaf_decision(fx, totals, config.lambda);
    }

    let mut best: Option<(f64, usize, u8, bool)> = None;
    for f in 0..hist.n_features() {
        let bins = hist.feature(f);
        let missing = bins[usize::from(MISSING_BIN)];
        let present = totals - missing;
        let mut prefix = GradStats::default();
        for (t, &b) in bins[..usize::from(MISSING_BIN)].iter().enumerate() {
            prefix += b;
            for missing_left in [true, false] {
                let left = if missing_left {
                    prefix + missing
                } else {
                    prefix
                };
                let right = totals - left;
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let gain = split_gain(fx, left, right, config.lambda, config.gamma);
                if best.is_none_or(|(g, ..)| gain > g) {
                    best = Some((gain, f, t as u8, missing_left));
                }
            }
            // Higher thresholds repeat this partition.
            if prefix.count == present.count {
                break;
            }
        }
    }

    match best {
        Some((gain, feature, threshold_bin, missing_left)) if gain > 0.0 => {
            Ok(SplitDecision::Split {
                feature,
                threshold_bin,
                missing_left,
                gain,
            })
        }
        _ => leaf_decision(fx, totals, config.lambda),
    }
}
