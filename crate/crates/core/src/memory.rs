//! Per-engine data memory: feature memory, state memory, and the
//! double-banked index table that maps node address ranges to samples.

use crate::error::{Error, Result};
use crate::fixed::FixedFormat;
use crate::loss::gradient_pair;
use crate::quantizer::{BinMap, MISSING_BIN};

pub type Range = (usize, usize);

/// Column-major 8-bit bin indices plus the bin map that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    n_samples: usize,
    n_features: usize,
    bins: Vec<u8>,
    bin_map: BinMap,
}

impl QuantizedMatrix {
    pub fn new(n_samples: usize, bins: Vec<u8>, bin_map: BinMap) -> Result<Self> {
        let n_features = bin_map.n_features();
        if bins.len() != n_samples * n_features {
            return Err(Error::Dimension(format!(
                "{} bins for {n_samples} samples x {n_features} features",
                bins.len()
            )));
        }
        for f in 0..n_features {
            let n_centroids = bin_map.centroids(f).len();
            let col = &bins[f * n_samples..(f + 1) * n_samples];
            if let Some(&b) = col
                .iter()
                .find(|&&b| b != MISSING_BIN && usize::from(b) >= n_centroids)
            {
                return Err(Error::InvalidArgument(format!(
                    "feature {f}: bin {b} beyond {n_centroids} centroids"
                )));
            }
        }
        Ok(QuantizedMatrix {
            n_samples,
            n_features,
            bins,
            bin_map,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn bin_map(&self) -> &BinMap {
        &self.bin_map
    }

    pub fn column(&self, feature: usize) -> &[u8] {
        &self.bins[feature * self.n_samples..(feature + 1) * self.n_samples]
    }

    #[inline]
    pub fn get(&self, sample: usize, feature: usize) -> u8 {
        self.bins[feature * self.n_samples + sample]
    }

    /// Bins of one sample across all features.
    pub fn row(&self, sample: usize) -> Vec<u8> {
        (0..self.n_features).map(|f| self.get(sample, f)).collect()
    }

    /// Copy of the contiguous sample block `start..end`.
    pub fn rows(&self, start: usize, end: usize) -> QuantizedMatrix {
        let mut bins = Vec::with_capacity((end - start) * self.n_features);
        for f in 0..self.n_features {
            bins.extend_from_slice(&self.column(f)[start..end]);
        }
        QuantizedMatrix {
            n_samples: end - start,
            n_features: self.n_features,
            bins,
            bin_map: self.bin_map.clone(),
        }
    }
}

/// One sample's entry in state memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateRecord {
    pub score: i64,
    pub grad: i64,
    pub hess: i64,
    pub label: u8,
}

/// Struct-of-arrays state memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMemory {
    pub score: Vec<i64>,
    pub grad: Vec<i64>,
    pub hess: Vec<i64>,
    pub label: Vec<u8>,
}

impl StateMemory {
    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn record(&self, sample: usize) -> StateRecord {
        StateRecord {
            score: self.score[sample],
            grad: self.grad[sample],
            hess: self.hess[sample],
            label: self.label[sample],
        }
    }

    /// Recomputes gradient and hessian of one sample from its score.
    pub fn refresh(&mut self, fx: FixedFormat, sample: usize) {
        let (g, h) = gradient_pair(fx, self.score[sample], self.label[sample]);
        self.grad[sample] = g;
        self.hess[sample] = h;
    }
}

/// Two banks of sample indices plus per-depth node address ranges.
///
/// Splits read the active bank and write the inactive one; the caller
/// toggles after every node of a depth has been written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTable {
    banks: [Vec<usize>; 2],
    active_bank: usize,
    node_ranges: Vec<Vec<Option<Range>>>,
}

impl IndexTable {
    /// Bank 0 holds `active_indices` in the given order; the root covers it.
    pub fn init(active_indices: &[usize], n_samples: usize) -> Result<Self> {
        let mut seen = vec![false; n_samples];
        for &i in active_indices {
            if i >= n_samples {
                return Err(Error::InvalidArgument(format!(
                    "sample index {i} out of {n_samples}"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        let n = active_indices.len();
        Ok(IndexTable {
            banks: [active_indices.to_vec(), vec![0; n]],
            active_bank: 0,
            node_ranges: vec![vec![Some((0, n))]],
        })
    }

    pub fn n_active(&self) -> usize {
        self.banks[0].len()
    }

    pub fn active_bank(&self) -> usize {
        self.active_bank
    }

    pub fn node_slice(&self, depth: usize, node: usize) -> Result<Range> {
        self.node_ranges
            .get(depth)
            .and_then(|d| d.get(node).copied().flatten())
            .ok_or(Error::UnknownNode { depth, node })
    }

    pub fn record_range(&mut self, depth: usize, node: usize, range: Range) {
        if self.node_ranges.len() <= depth {
            self.node_ranges.resize(depth + 1, Vec::new());
        }
        let level = &mut self.node_ranges[depth];
        if level.len() <= node {
            level.resize(node + 1, None);
        }
        level[node] = Some(range);
    }

    /// Number of nodes recorded at `depth`.
    pub fn width(&self, depth: usize) -> usize {
        self.node_ranges.get(depth).map_or(0, Vec::len)
    }

    /// Sample indices of `range` in the active bank.
    pub fn indices(&self, range: Range) -> &[usize] {
        &self.banks[self.active_bank][range.0..range.1]
    }

    pub fn active(&self) -> &[usize] {
        &self.banks[self.active_bank]
    }

    /// Active bank as read-only and the inactive bank as writable.
    pub(crate) fn banks_mut(&mut self) -> (&[usize], &mut [usize]) {
        let [a, b] = &mut self.banks;
        if self.active_bank == 0 {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Copies `range` unchanged into the inactive bank (leaf nodes).
    pub fn carry(&mut self, range: Range) {
        let (src, dst) = self.banks_mut();
        dst[range.0..range.1].copy_from_slice(&src[range.0..range.1]);
    }

    pub fn toggle(&mut self) {
        self.active_bank ^= 1;
    }
}

/// Feature memory, state memory, and index table of one engine.
#[derive(Debug, Clone)]
pub struct EngineMemory {
    features: QuantizedMatrix,
    pub state: StateMemory,
    pub index: IndexTable,
    fx: FixedFormat,
}

impl EngineMemory {
    /// Loads feature memory and initializes state from `base_score`.
    pub fn load(
        matrix: QuantizedMatrix,
        labels: &[u8],
        base_score: f64,
        fx: FixedFormat,
    ) -> Result<Self> {
        if labels.len() != matrix.n_samples() {
            return Err(Error::Dimension(format!(
                "{} labels for {} samples",
                labels.len(),
                matrix.n_samples()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
        }
        let n = labels.len();
        let score = fx.quantize(base_score);
        let (grad, hess): (Vec<i64>, Vec<i64>) =
            labels.iter().map(|&y| gradient_pair(fx, score, y)).unzip();
        let state = StateMemory {
            score: vec![score; n],
            grad,
            hess,
            label: labels.to_vec(),
        };
        let index = IndexTable::init(&[], 0)?;
        Ok(EngineMemory {
            features: matrix,
            state,
            index,
            fx,
        })
    }

    pub fn features(&self) -> &QuantizedMatrix {
        &self.features
    }

    pub fn fixed_format(&self) -> FixedFormat {
        self.fx
    }

    pub fn n_samples(&self) -> usize {
        self.features.n_samples()
    }

    /// Resets the index table over `active_indices` (local sample indices).
    pub fn init_index_table(&mut self, active_indices: &[usize]) -> Result<()> {
        self.index = IndexTable::init(active_indices, self.n_samples())?;
        Ok(())
    }
}
