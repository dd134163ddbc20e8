//! Conversion of raw real-valued feature columns into 8-bit bin indices.
//!
//! Each feature gets up to 255 ascending centroids. A value maps to the index
//! of its nearest centroid; missing values (`NaN`) map to [`MISSING_BIN`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::QuantizedMatrix;

/// Reserved bin for missing values, identical for every feature.
pub const MISSING_BIN: u8 = 255;
/// Largest number of centroids a feature may carry.
pub const MAX_BINS: usize = 255;

/// Row-major raw samples. Missing entries are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    n_samples: usize,
    n_features: usize,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl RawDataset {
    pub fn new(n_features: usize, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::Dimension(
                "dataset needs at least one feature".into(),
            ));
        }
        if values.len() != labels.len() * n_features {
            return Err(Error::Dimension(format!(
                "{} values for {} samples of {} features",
                values.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
        }
        Ok(RawDataset {
            n_samples: labels.len(),
            n_features,
            values,
            labels,
        })
    }

    /// Builds a dataset from rows; every row must have `n_features` entries.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {n_features}",
                rows[i].len()
            )));
        }
        Self::new(n_features, rows.concat(), labels)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.n_features..(sample + 1) * self.n_features]
    }

    pub fn value(&self, sample: usize, feature: usize) -> f64 {
        self.values[sample * self.n_features + feature]
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_samples)
            .map(|i| self.value(i, feature))
            .collect()
    }

    /// Rows `start..end` as a new dataset.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.n_samples {
            return Err(Error::InvalidArgument(format!(
                "row slice {start}..{end} outside 0..{}",
                self.n_samples
            )));
        }
        Self::new(
            self.n_features,
            self.values[start * self.n_features..end * self.n_features].to_vec(),
            self.labels[start..end].to_vec(),
        )
    }
}

/// Per-feature centroid lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMap {
    centroids: Vec<Vec<f64>>,
}

impl BinMap {
    /// Validates that every feature has 1..=255 strictly ascending, finite
    /// centroids.
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        if centroids.is_empty() {
            return Err(Error::Dimension(
                "bin map needs at least one feature".into(),
            ));
        }
        for (f, c) in centroids.iter().enumerate() {
            if c.is_empty() || c.len() > MAX_BINS {
                return Err(Error::InvalidArgument(format!(
                    "feature {f} has {} centroids, expected 1..={MAX_BINS}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) || c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "feature {f} centroids are not strictly ascending finite values"
                )));
            }
        }
        Ok(BinMap { centroids })
    }

    /// Fits centroids on every column of `raw`.
    pub fn fit(raw: &RawDataset, max_bins: usize) -> Result<Self> {
        let centroids = (0..raw.n_features())
            .map(|f| fit_bins(&raw.column(f), max_bins).map_err(|e| relabel(e, f)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(centroids)
    }

    pub fn n_features(&self) -> usize {
        self.centroids.len()
    }

    pub fn missing_bin(&self) -> u8 {
        MISSING_BIN
    }

    pub fn centroids(&self, feature: usize) -> &[f64] {
        &self.centroids[feature]
    }

    /// Bin index for one value of one feature.
    pub fn bin(&self, feature: usize, value: f64) -> u8 {
        nearest_bin(&self.centroids[feature], value)
    }
}

fn relabel(e: Error, feature: usize) -> Error {
    match e {
        Error::AllMissingFeature(_) => Error::AllMissingFeature(feature),
        other => other,
    }
}

/// Centroids for one column.
///
/// Up to `max_bins` distinct values become centroids directly. Otherwise the
/// nearest-rank quantiles at `k / (max_bins + 1)`, `k = 1..=max_bins`, are
/// taken and duplicates dropped.
pub fn fit_bins(column: &[f64], max_bins: usize) -> Result<Vec<f64>> {
    if column.is_empty() {
        return Err(Error::InvalidArgument("empty column".into()));
    }
    if !(1..=MAX_BINS).contains(&max_bins) {
        return Err(Error::InvalidArgument(format!(
            "max_bins {max_bins} outside [1, {MAX_BINS}]"
        )));
    }
    let mut sorted: Vec<f64> = column.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return Err(Error::AllMissingFeature(0));
    }
    if let Some(v) = sorted.iter().find(|v| v.is_infinite()) {
        return Err(Error::InvalidArgument(format!("non-finite value {v}")));
    }
    sorted.sort_by(f64::total_cmp);
    // -0.0 and 0.0 compare equal; keep a single canonical zero.
    for v in sorted.iter_mut() {
        if *v == 0.0 {
            *v = 0.0;
        }
    }

    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= max_bins {
        return Ok(distinct);
    }

    let n = sorted.len();
    let denom = max_bins + 1;
    let mut centroids: Vec<f64> = (1..=max_bins)
        .map(|k| {
            // ceil(k * n / denom) - 1, in integers
            let rank = (k * n).div_ceil(denom);
            sorted[rank.max(1) - 1]
        })
        .collect();
    centroids.dedup();
    Ok(centroids)
}

/// Nearest centroid by absolute distance; equidistant values take the lower
/// index. `NaN` maps to [`MISSING_BIN`].
pub fn nearest_bin(centroids: &[f64], value: f64) -> u8 {
    if value.is_nan() {
        return MISSING_BIN;
    }
    let upper = centroids.partition_point(|&c| c < value);
    let bin = if upper == 0 {
        0
    } else if upper == centroids.len() {
        centroids.len() - 1
    } else {
        let below = value - centroids[upper - 1];
        let above = centroids[upper] - value;
        if above < below {
            upper
        } else {
            upper - 1
        }
    };
    bin as u8
}

/// Quantizes `raw` with `bins`, producing column-major bin indices.
pub fn transform(raw: &RawDataset, bins: &BinMap) -> Result<QuantizedMatrix> {
    if raw.n_features() != bins.n_features() {
        return Err(Error::Dimension(format!(
            "dataset has {} features, bin map has {}",
            raw.n_features(),
            bins.n_features()
        )));
    }
    let n = raw.n_samples();
    let mut columns = Vec::with_capacity(n * raw.n_features());
    for f in 0..raw.n_features() {
        let centroids = bins.centroids(f);
        columns.extend((0..n).map(|i| nearest_bin(centroids, raw.value(i, f))));
    }
    QuantizedMatrix::new(n, columns, bins.clone())
}
