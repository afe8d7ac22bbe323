//! Analysis reports, summary tables and figures.
//!
//! An [`AnalysisReport`] carries the echoed configuration, the dataset
//! metadata, and per-pool brackets, fits and vote gains. It also keeps each
//! pool's `(size, dem, rep)` points so figures and every derived number can
//! be regenerated from the report alone.

mod figures;
mod table;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use figures::{emit_figures, scatter_svg, brackets_svg, FigureList, FigureOptions};
pub use table::{format_pct, render_table, TableFormat};

use crate::brackets::{bracket_stats, BracketStats, BracketWeighting};
use crate::diagnostics::{combined_pool_fit, shuffle_baseline, threshold_sweep, CombinedFit, ShuffleBaseline, SweepResult};
use crate::error::{LpbError, Result};
use crate::ingest::{scope_filter, ColumnMapping, DatasetMeta, ParsedDataset, Scope};
use crate::lpb::{large_precinct_split, pool_lpb, LargeSplit, LpbResult};
use crate::pools::{mean_precinct_size, partition_pools, PartitionResult, PoolLabel, WinPool};
use crate::regression::RegressionFit;
use crate::{DEFAULT_ALPHA, DEFAULT_BRACKET_WIDTH, DEFAULT_THRESHOLD};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleRequest {
    pub n_seeds: usize,
    pub rng_seed: u64,
}

/// Everything needed to rerun an analysis, echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub mapping: ColumnMapping,
    pub scope: Scope,
    pub threshold: u64,
    pub bracket_width: u64,
    pub bracket_weighting: BracketWeighting,
    pub alpha: f64,
    pub shuffle: Option<ShuffleRequest>,
    pub combined: bool,
    pub sweep: Option<Vec<u64>>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            mapping: ColumnMapping::default(),
            scope: Scope::all(),
            threshold: DEFAULT_THRESHOLD,
            bracket_width: DEFAULT_BRACKET_WIDTH,
            bracket_weighting: BracketWeighting::Unweighted,
            alpha: DEFAULT_ALPHA,
            shuffle: None,
            combined: false,
            sweep: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub record_count: usize,
    pub bluewin_count: usize,
    pub redwin_count: usize,
    pub tie_count: usize,
    pub zero_vote_count: usize,
    pub scope_total_votes: u64,
}

impl From<&PartitionResult> for PartitionSummary {
    fn from(p: &PartitionResult) -> Self {
        PartitionSummary {
            record_count: p.record_count(),
            bluewin_count: p.blue_pool.len(),
            redwin_count: p.red_pool.len(),
            tie_count: p.tie_count(),
            zero_vote_count: p.zero_vote_count,
            scope_total_votes: p.scope_total_votes,
        }
    }
}

/// A precinct as plotted: size and party counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub size: u64,
    pub dem: u64,
    pub rep: u64,
}

impl ScatterPoint {
    pub fn blue_fraction(&self) -> f64 {
        self.dem as f64 / self.size as f64
    }

    pub fn red_fraction(&self) -> f64 {
        self.rep as f64 / self.size as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolReport {
    pub label: PoolLabel,
    pub precinct_count: usize,
    pub dem_votes: u64,
    pub rep_votes: u64,
    pub mean_size: Option<f64>,
    pub large_count: usize,
    pub brackets: Vec<BracketStats>,
    pub red_fit: Option<RegressionFit>,
    pub blue_fit: Option<RegressionFit>,
    pub lpb: Option<LpbResult>,
    /// Pool order, ascending size.
    pub points: Vec<ScatterPoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsBlock {
    pub shuffle: Vec<ShuffleBaseline>,
    pub combined: Option<CombinedFit>,
    /// Why the combined fit is missing, when it was requested.
    pub combined_error: Option<String>,
    pub sweep: Option<SweepResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub scope_label: String,
    pub dataset: DatasetMeta,
    pub config: AnalysisConfig,
    pub partition: PartitionSummary,
    pub pools: Vec<PoolReport>,
    pub large_split: LargeSplit,
    pub diagnostics: Option<DiagnosticsBlock>,
}

impl AnalysisReport {
    pub fn pool(&self, label: PoolLabel) -> Option<&PoolReport> {
        self.pools.iter().find(|p| p.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| LpbError::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LpbError::io(path, e))?;
        Self::from_json(&text)
    }
}

fn pool_report(pool: &WinPool, cfg: &AnalysisConfig, scope_total: u64) -> Result<PoolReport> {
    let fitted = pool_lpb(pool, cfg.threshold, scope_total, cfg.alpha);
    let (dem_votes, rep_votes) = pool.vote_totals();
    Ok(PoolReport {
        label: pool.label,
        precinct_count: pool.len(),
        dem_votes,
        rep_votes,
        mean_size: mean_precinct_size(pool),
        large_count: pool.large(cfg.threshold).len(),
        brackets: bracket_stats(pool, cfg.bracket_width, cfg.bracket_weighting)?,
        red_fit: fitted.as_ref().map(|p| p.red_fit),
        blue_fit: fitted.as_ref().map(|p| p.blue_fit),
        lpb: fitted.map(|p| p.lpb),
        points: pool
            .records()
            .iter()
            .map(|r| ScatterPoint {
                size: r.total(),
                dem: r.dem_votes,
                rep: r.rep_votes,
            })
            .collect(),
    })
}

/// Runs the requested diagnostics on an existing partition.
pub fn run_diagnostics(partition: &PartitionResult, cfg: &AnalysisConfig) -> Result<Option<DiagnosticsBlock>> {
    if cfg.shuffle.is_none() && !cfg.combined && cfg.sweep.is_none() {
        return Ok(None);
    }
    let mut block = DiagnosticsBlock::default();
    if let Some(req) = &cfg.shuffle {
        for pool in [&partition.blue_pool, &partition.red_pool] {
            match shuffle_baseline(pool, req.n_seeds, req.rng_seed) {
                Ok(b) => block.shuffle.push(b),
                Err(e) => log::warn!("shuffle baseline skipped: {e}"),
            }
        }
    }
    if cfg.combined {
        match combined_pool_fit(partition, cfg.threshold, cfg.alpha) {
            Ok(c) => block.combined = Some(c),
            Err(e) => block.combined_error = Some(e.to_string()),
        }
    }
    if let Some(ts) = &cfg.sweep {
        block.sweep = Some(threshold_sweep(partition, ts, cfg.alpha)?);
    }
    Ok(Some(block))
}

/// Full pipeline over the configured scope of a parsed dataset.
pub fn analyze(dataset: &ParsedDataset, cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    if cfg.threshold == 0 {
        return Err(LpbError::InvalidArgument("threshold must be at least 1".into()));
    }
    let scoped = scope_filter(&dataset.records, &cfg.scope);
    if scoped.is_empty() {
        return Err(LpbError::InsufficientData(format!(
            "scope {} matched no records in {}",
            cfg.scope.label(),
            dataset.meta.source_path
        )));
    }
    let partition = partition_pools(&scoped);
    let pools = [&partition.blue_pool, &partition.red_pool]
        .into_iter()
        .map(|p| pool_report(p, cfg, partition.scope_total_votes))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisReport {
        tool_version: TOOL_VERSION.to_string(),
        scope_label: cfg.scope.label(),
        dataset: dataset.meta.clone(),
        config: cfg.clone(),
        partition: PartitionSummary::from(&partition),
        pools,
        large_split: large_precinct_split(&partition, cfg.threshold),
        diagnostics: run_diagnostics(&partition, cfg)?,
    })
}
