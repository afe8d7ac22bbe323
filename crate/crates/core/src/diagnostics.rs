//! Robustness checks: random-order baseline, combined-pool fit, threshold sweeps.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};
use crate::lpb::{compute_lpb, pool_lpb, LpbResult};
use crate::pools::{PartitionResult, PoolLabel, WinPool};
use crate::regression::{build_series, ols_fit, FractionSeries, RegressionFit, Side, XKind};

/// Generator used for every shuffle, recorded in outputs.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9) seed_from_u64; Fisher-Yates via rand 0.9 SliceRandom::shuffle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleBaseline {
    pub pool_label: PoolLabel,
    pub rng_algorithm: String,
    pub seeds: Vec<u64>,
    pub slopes: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub fraction_within_2se: f64,
}

/// Shuffles the full pool once per seed and fits Red fractions against rank.
///
/// Seed `k` is `rng_seed + k` (wrapping).
pub fn shuffle_baseline(pool: &WinPool, n_seeds: usize, rng_seed: u64) -> Result<ShuffleBaseline> {
    if pool.len() < 3 {
        return Err(LpbError::InsufficientData(format!(
            "shuffle baseline needs at least 3 precincts, {} pool has {}",
            pool.label,
            pool.len()
        )));
    }
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|k| rng_seed.wrapping_add(k)).collect();
    let fits: Vec<RegressionFit> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order = pool.records().to_vec();
            order.shuffle(&mut rng);
            ols_fit(&FractionSeries::ranked(&order, Side::Red))
                .expect("ranks are distinct and n >= 3")
        })
        .collect();
    let within = fits.iter().filter(|f| f.within_se(2.0)).count();
    Ok(ShuffleBaseline {
        pool_label: pool.label,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        seeds,
        slopes: fits.iter().map(|f| f.slope).collect(),
        stderrs: fits.iter().map(|f| f.slope_stderr).collect(),
        fraction_within_2se: if fits.is_empty() { 0.0 } else { within as f64 / fits.len() as f64 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedFit {
    pub fit: RegressionFit,
    /// Same vote-gain formula applied to the merged ordering; a derived output.
    pub lpb: LpbResult,
}

/// Merges both win pools, reorders by size and fits the large tail.
pub fn combined_pool_fit(
    partition: &PartitionResult,
    threshold: u64,
    alpha: f64,
) -> Result<CombinedFit> {
    let merged: Vec<_> = partition
        .blue_pool
        .records()
        .iter()
        .chain(partition.red_pool.records())
        .cloned()
        .collect();
    let pool = WinPool::from_records(PoolLabel::Combined, merged);
    let fit = ols_fit(&build_series(&pool, threshold, Side::Red, XKind::Size)?)?;
    let lpb = compute_lpb(&pool, &fit, threshold, partition.scope_total_votes, alpha)?;
    Ok(CombinedFit { fit, lpb })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n_large: usize,
    pub lpb: Option<LpbResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: u64,
    pub blue: SweepCell,
    pub red: SweepCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn thresholds(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.threshold).collect()
    }

    /// `threshold,pool,n_large,direction,slope,lpb_votes,pct`; absent cells leave the last four empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["threshold", "pool", "n_large", "direction", "slope", "lpb_votes", "pct"])?;
        for row in &self.rows {
            for (label, cell) in [(PoolLabel::BlueWin, &row.blue), (PoolLabel::RedWin, &row.red)] {
                let (dir, slope, votes, pct) = match &cell.lpb {
                    Some(l) => (
                        l.direction.map(|d| d.as_str().to_string()).unwrap_or_else(|| "none".into()),
                        l.slope_used.to_string(),
                        l.lpb_votes.to_string(),
                        l.pct_of_scope.map(|p| p.to_string()).unwrap_or_default(),
                    ),
                    None => Default::default(),
                };
                wtr.write_record([
                    row.threshold.to_string(),
                    label.as_str().to_string(),
                    cell.n_large.to_string(),
                    dir,
                    slope,
                    votes,
                    pct,
                ])?;
            }
        }
        wtr.flush().map_err(|e| LpbError::io("<sweep csv>", e))?;
        Ok(())
    }
}

/// Per-pool vote gain at each threshold. Thresholds are sorted and deduplicated.
pub fn threshold_sweep(
    partition: &PartitionResult,
    thresholds: &[u64],
    alpha: f64,
) -> Result<SweepResult> {
    if thresholds.contains(&0) {
        return Err(LpbError::InvalidArgument("thresholds must be at least 1".into()));
    }
    let mut ts = thresholds.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let cell = |pool: &WinPool, t: u64| SweepCell {
        n_large: pool.large(t).len(),
        lpb: pool_lpb(pool, t, partition.scope_total_votes, alpha).map(|p| p.lpb),
    };
    Ok(SweepResult {
        rows: ts
            .into_iter()
            .map(|t| SweepRow {
                threshold: t,
                blue: cell(&partition.blue_pool, t),
                red: cell(&partition.red_pool, t),
            })
            .collect(),
    })
}
