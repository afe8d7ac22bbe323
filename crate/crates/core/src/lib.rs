//! Large precinct bias (LPB) analysis.
//!
//! The pipeline runs bottom-up:
//!
//! - [`ingest`] parses precinct CSV files through a declarative column mapping
//!   and selects a state or county scope.
//! - [`pools`] splits the scope into blue-win and red-win pools ordered by
//!   precinct size.
//! - [`brackets`] summarises each pool in fixed-width size brackets.
//! - [`regression`] fits vote fractions against precinct size over the large
//!   precinct tail of a pool.
//! - [`lpb`] turns the fitted slope into an estimated vote gain and a percent
//!   of all votes cast in the scope.
//! - [`diagnostics`] holds the random-order baseline, the combined-pool fit
//!   and threshold sweeps.
//! - [`synth`] generates electorates with planted heterogeneity and
//!   inconvenience mechanisms.
//! - [`report`] assembles everything into a JSON report, tables and SVG
//!   figures.

pub mod brackets;
pub mod diagnostics;
pub mod error;
pub mod ingest;
pub mod lpb;
pub mod pools;
pub mod regression;
pub mod report;
pub mod synth;

pub use brackets::{bracket_stats, BracketStats, BracketWeighting};
pub use diagnostics::{
    combined_pool_fit, shuffle_baseline, threshold_sweep, ShuffleBaseline, SweepResult,
};
pub use error::{LpbError, Result};
pub use ingest::{
    parse_dataset, scope_filter, ColumnMapping, DatasetMeta, ParsedDataset, PrecinctRecord, Scope,
};
pub use lpb::{
    compute_lpb, large_precinct_split, summarize_state, Direction, LargeSplit, LpbResult,
    SummaryRow,
};
pub use pools::{large_cutoff, mean_precinct_size, partition_pools, PartitionResult, PoolLabel, WinPool};
pub use regression::{build_series, ols_fit, FractionSeries, RegressionFit, Side, XKind};
pub use report::{AnalysisReport, AnalysisConfig};
pub use synth::{generate, planted_truth, PlantedTruth, SynthConfig};

/// Large-precinct threshold used throughout the literature this crate follows.
pub const DEFAULT_THRESHOLD: u64 = 800;
/// Bracket width in votes.
pub const DEFAULT_BRACKET_WIDTH: u64 = 200;
/// Significance level for the advisory `significant` flag.
pub const DEFAULT_ALPHA: f64 = 0.05;
