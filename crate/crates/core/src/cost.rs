//! First-order clock-cycle model of the hardware training engine.
//!
//! Every streaming pass moves one sample per clock per engine and pays a
//! fixed pipeline latency. The gain scan sweeps the ordered bins once per
//! trained node with all features in parallel.

use serde::{Deserialize, Serialize};

use crate::controller::{NodeKind, TrainLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub clock_hz: f64,
    pub pipeline_latency_cycles: u64,
    pub gain_scan_cycles: u64,
    pub per_tree_overhead_cycles: u64,
    /// Validation samples scored on chip once per tree; zero excludes them.
    pub n_valid: usize,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            clock_hz: 100e6,
            pipeline_latency_cycles: 16,
            gain_scan_cycles: 256,
            per_tree_overhead_cycles: 64,
            n_valid: 0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0)
            || self.pipeline_latency_cycles == 0
            || self.gain_scan_cycles == 0
            || self.per_tree_overhead_cycles == 0
        {
            return Err(Error::InvalidArgument(
                "cost parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleBreakdown {
    pub histogram: u64,
    pub split: u64,
    pub update: u64,
    pub scan: u64,
    pub overhead: u64,
    pub validation: u64,
}

impl CycleBreakdown {
    pub fn total(&self) -> u64 {
        self.histogram + self.split + self.update + self.scan + self.overhead + self.validation
    }

    /// Cycles spent in one-sample-per-clock passes.
    pub fn streaming(&self) -> u64 {
        self.histogram + self.split + self.update + self.validation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub total_cycles: u64,
    pub breakdown: CycleBreakdown,
    pub wall_seconds: f64,
    pub clock_hz: f64,
    pub n_engines: usize,
    pub n_trees: usize,
}

impl CostReport {
    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let b = &self.breakdown;
        let rows: [(&str, String); 12] = [
            ("total_cycles", self.total_cycles.to_string()),
            ("histogram_cycles", b.histogram.to_string()),
            ("split_cycles", b.split.to_string()),
            ("update_cycles", b.update.to_string()),
            ("scan_cycles", b.scan.to_string()),
            ("overhead_cycles", b.overhead.to_string()),
            ("validation_cycles", b.validation.to_string()),
            ("clock_hz", self.clock_hz.to_string()),
            ("n_engines", self.n_engines.to_string()),
            ("n_trees", self.n_trees.to_string()),
            ("wall_seconds", self.wall_seconds.to_string()),
            ("wall_ms", (self.wall_seconds * 1e3).to_string()),
        ];
        rows.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Aligned human-readable table.
    pub fn to_text(&self) -> String {
        let b = &self.breakdown;
        let mut out = String::new();
        for (name, cycles) in [
            ("histogram pass", b.histogram),
            ("split pass", b.split),
            ("update pass", b.update),
            ("gain scan", b.scan),
            ("tree overhead", b.overhead),
            ("validation", b.validation),
            ("total", self.total_cycles),
        ] {
            out.push_str(&format!("{name:<16}{cycles:>14} cycles\n"));
        }
        out.push_str(&format!(
            "{:<16}{:>14.6} ms at {} MHz, {} engines\n",
            "wall time",
            self.wall_seconds * 1e3,
            self.clock_hz / 1e6,
            self.n_engines
        ));
        out
    }
}

pub fn to_wall_time(cycles: u64, clock_hz: f64) -> f64 {
    cycles as f64 / clock_hz
}

/// Cycle estimate for the run described by `log` on `n_engines` engines.
///
/// Per depth, the histogram pass streams every trained node and the split
/// pass every split node, each `ceil(size / E)` cycles plus one pipeline
/// latency. Scanned nodes cost `gain_scan_cycles`; depth-limit leaves are
/// not scanned. Each tree adds an update pass over all samples and a fixed
/// overhead.
pub fn estimate(log: &TrainLog, n_engines: usize, params: &CostParams) -> Result<CostReport> {
    params.validate()?;
    if n_engines == 0 {
        return Err(Error::InvalidArgument("n_engines must be >= 1".into()));
    }
    let e = n_engines as u64;
    let lat = params.pipeline_latency_cycles;
    let mut b = CycleBreakdown::default();
    for tree in &log.trees {
        let max_depth = tree.nodes.iter().map(|n| n.depth).max();
        for depth in 0..=max_depth.unwrap_or(0) {
            let nodes: Vec<_> = tree.nodes.iter().filter(|n| n.depth == depth).collect();
            if nodes.is_empty() {
                continue;
            }
            b.histogram += nodes.iter().map(|n| n.n_samples.div_ceil(e)).sum::<u64>() + lat;
            let splits: Vec<_> = nodes.iter().filter(|n| n.kind == NodeKind::Split).collect();
            if !splits.is_empty() {
                b.split += splits.iter().map(|n| n.n_samples.div_ceil(e)).sum::<u64>() + lat;
            }
            b.scan += params.gain_scan_cycles
                * nodes
                    .iter()
                    .filter(|n| n.kind != NodeKind::DepthLeaf)
                    .count() as u64;
        }
        b.update += (log.n_samples as u64).div_ceil(e) + lat;
        if params.n_valid > 0 {
            b.validation += (params.n_valid as u64).div_ceil(e) + lat;
        }
        b.overhead += params.per_tree_overhead_cycles;
    }
    let total_cycles = b.total();
    Ok(CostReport {
        total_cycles,
        breakdown: b,
        wall_seconds: to_wall_time(total_cycles, params.clock_hz),
        clock_hz: params.clock_hz,
        n_engines,
        n_trees: log.trees.len(),
    })
}
