//! Vote-gain estimates from a fitted slope.
//!
//! For a pool whose Red-series slope over large precincts is `s`, the
//! estimated gain for the favoured side is
//!
//! ```text
//! |s| * Σ (size_i − T) * size_i      over precincts with size_i ≥ T
//! ```
//!
//! Red gains when `s > 0`, Blue when `s < 0`. The sum always starts at the
//! cutoff index, for both directions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};
use crate::pools::{mean_precinct_size, PartitionResult, PoolLabel, WinPool};
use crate::regression::{build_series, ols_fit, RegressionFit, Side, XKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Red,
    Blue,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Red => "red",
            Direction::Blue => "blue",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Red => Direction::Blue,
            Direction::Blue => Direction::Red,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpbResult {
    pub pool_label: PoolLabel,
    pub threshold: u64,
    pub n_large: usize,
    /// `None` when the slope is exactly zero.
    pub direction: Option<Direction>,
    /// Magnitude of the Red-series slope.
    pub slope_used: f64,
    pub lpb_votes: f64,
    /// Percent of all two-party votes in the scope; `None` for an empty scope.
    pub pct_of_scope: Option<f64>,
    pub p_value: f64,
    /// Advisory only: `p_value < alpha`.
    pub significant: bool,
}

/// Σ (size − threshold) · size over large precincts, exact in integers.
pub fn size_excess_moment(pool: &WinPool, threshold: u64) -> u128 {
    pool.large(threshold)
        .iter()
        .map(|r| {
            let t = r.total() as u128;
            (t - threshold as u128) * t
        })
        .sum()
}

/// `fit` must be the pool's Size-x Red-series fit at `threshold`.
pub fn compute_lpb(
    pool: &WinPool,
    fit: &RegressionFit,
    threshold: u64,
    scope_total_votes: u64,
    alpha: f64,
) -> Result<LpbResult> {
    if fit.side != Side::Red || fit.x_kind != XKind::Size {
        return Err(LpbError::InvalidArgument(
            "vote gain needs the Size-x Red-series fit".into(),
        ));
    }
    let direction = if fit.slope > 0.0 {
        Some(Direction::Red)
    } else if fit.slope < 0.0 {
        Some(Direction::Blue)
    } else {
        None
    };
    let slope_used = fit.slope.abs();
    let lpb_votes = slope_used * size_excess_moment(pool, threshold) as f64;
    let pct_of_scope =
        (scope_total_votes > 0).then(|| 100.0 * lpb_votes / scope_total_votes as f64);
    Ok(LpbResult {
        pool_label: pool.label,
        threshold,
        n_large: pool.large(threshold).len(),
        direction,
        slope_used,
        lpb_votes,
        pct_of_scope,
        p_value: fit.p_value,
        significant: fit.p_value < alpha,
    })
}

/// Red and Blue Size-x fits plus the vote gain for one pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolLpb {
    pub red_fit: RegressionFit,
    pub blue_fit: RegressionFit,
    pub lpb: LpbResult,
}

/// Fits and vote gain, or `None` when the large tail cannot support a fit.
pub fn pool_lpb(pool: &WinPool, threshold: u64, scope_total_votes: u64, alpha: f64) -> Option<PoolLpb> {
    let fit_side = |side| {
        build_series(pool, threshold, side, XKind::Size).and_then(|s| ols_fit(&s))
    };
    let red_fit = fit_side(Side::Red).ok()?;
    let blue_fit = fit_side(Side::Blue).ok()?;
    let lpb = compute_lpb(pool, &red_fit, threshold, scope_total_votes, alpha).ok()?;
    Some(PoolLpb { red_fit, blue_fit, lpb })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeSplit {
    pub threshold: u64,
    pub blue_votes: u64,
    pub red_votes: u64,
    pub blue_pct: Option<f64>,
    pub red_pct: Option<f64>,
}

/// Two-party totals over every precinct of size ≥ `threshold`, ties included.
pub fn large_precinct_split(partition: &PartitionResult, threshold: u64) -> LargeSplit {
    let (mut blue, mut red) = (0u64, 0u64);
    let large = partition
        .blue_pool
        .large(threshold)
        .iter()
        .chain(partition.red_pool.large(threshold))
        .chain(partition.ties.iter().filter(|r| r.total() >= threshold));
    for r in large {
        blue += r.dem_votes;
        red += r.rep_votes;
    }
    let total = (blue + red) as f64;
    let pct = |v: u64| (blue + red > 0).then(|| 100.0 * v as f64 / total);
    LargeSplit {
        threshold,
        blue_votes: blue,
        red_votes: red,
        blue_pct: pct(blue),
        red_pct: pct(red),
    }
}

/// One row of the per-state summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub state_year: String,
    pub bluewin_mean_size: Option<f64>,
    pub bluewin_lpb_pct: Option<f64>,
    pub bluewin_direction: Option<Direction>,
    pub redwin_mean_size: Option<f64>,
    pub redwin_lpb_pct: Option<f64>,
    pub redwin_direction: Option<Direction>,
}

pub fn summarize_state(
    partition: &PartitionResult,
    threshold: u64,
    state_year: impl Into<String>,
    alpha: f64,
) -> SummaryRow {
    let cell = |pool: &WinPool| {
        pool_lpb(pool, threshold, partition.scope_total_votes, alpha)
            .map(|p| (p.lpb.pct_of_scope, p.lpb.direction))
            .unwrap_or((None, None))
    };
    let (bp, bd) = cell(&partition.blue_pool);
    let (rp, rd) = cell(&partition.red_pool);
    SummaryRow {
        state_year: state_year.into(),
        bluewin_mean_size: mean_precinct_size(&partition.blue_pool),
        bluewin_lpb_pct: bp,
        bluewin_direction: bd,
        redwin_mean_size: mean_precinct_size(&partition.red_pool),
        redwin_lpb_pct: rp,
        redwin_direction: rd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PrecinctRecord;
    use crate::pools::partition_pools;
    use proptest::prelude::*;

    fn red_fit(slope: f64) -> RegressionFit {
        RegressionFit {
            side: Side::Red,
            x_kind: XKind::Size,
            slope,
            intercept: 0.3,
            n: 2,
            r_squared: 0.0,
            slope_stderr: 0.0,
            p_value: 1.0,
        }
    }

    fn blue_pool(pairs: &[(u64, u64)]) -> WinPool {
        let recs = pairs
            .iter()
            .enumerate()
            .map(|(i, &(b, r))| PrecinctRecord::new("ZZ", "", i.to_string(), b, r))
            .collect();
        WinPool::from_records(PoolLabel::BlueWin, recs)
    }

    #[test]
    fn hand_evaluated_sum() {
        let pool = blue_pool(&[(300, 100), (700, 300), (800, 400)]);
        let res = compute_lpb(&pool, &red_fit(1e-4), 800, 10_000, 0.05).unwrap();
        // 1e-4 * (200*1000 + 400*1200)
        assert_eq!(res.lpb_votes, 68.0);
        assert_eq!(res.n_large, 2);
        assert_eq!(res.direction, Some(Direction::Red));
        assert!((res.pct_of_scope.unwrap() - 0.68).abs() < 1e-12);
    }

    #[test]
    fn zero_slope_has_no_direction() {
        let pool = blue_pool(&[(700, 300), (800, 400)]);
        let res = compute_lpb(&pool, &red_fit(0.0), 800, 100, 0.05).unwrap();
        assert_eq!(res.lpb_votes, 0.0);
        assert_eq!(res.pct_of_scope, Some(0.0));
        assert_eq!(res.direction, None);
    }

    #[test]
    fn negative_slope_is_blue_gain() {
        let pool = blue_pool(&[(700, 300), (800, 400)]);
        let res = compute_lpb(&pool, &red_fit(-1e-4), 800, 0, 0.05).unwrap();
        assert_eq!(res.direction, Some(Direction::Blue));
        assert_eq!(res.slope_used, 1e-4);
        assert_eq!(res.lpb_votes, 68.0);
        assert_eq!(res.pct_of_scope, None);
    }

    #[test]
    fn rejects_non_red_size_fit() {
        let pool = blue_pool(&[(700, 300)]);
        let mut fit = red_fit(1e-4);
        fit.side = Side::Blue;
        assert!(compute_lpb(&pool, &fit, 800, 1, 0.05).is_err());
    }

    #[test]
    fn split_includes_ties() {
        let p = partition_pools(&[
            PrecinctRecord::new("ZZ", "", "a", 500, 400),
            PrecinctRecord::new("ZZ", "", "b", 100, 100),
            PrecinctRecord::new("ZZ", "", "c", 450, 450),
        ]);
        let s = large_precinct_split(&p, 800);
        assert_eq!((s.blue_votes, s.red_votes), (950, 850));
        let s = large_precinct_split(&partition_pools(&[PrecinctRecord::new("ZZ", "", "a", 500, 400), PrecinctRecord::new("ZZ", "", "b", 100, 100)]), 800);
        assert_eq!((s.blue_votes, s.red_votes), (500, 400));
    }

    #[test]
    fn split_without_large_precincts_is_zero() {
        let s = large_precinct_split(&partition_pools(&[PrecinctRecord::new("ZZ", "", "a", 10, 5)]), 800);
        assert_eq!((s.blue_votes, s.red_votes, s.blue_pct), (0, 0, None));
    }

    #[test]
    fn flat_dataset_summarizes_to_zero() {
        let mut recs = Vec::new();
        for (i, size) in [500u64, 900, 1000, 1500, 2000].iter().enumerate() {
            recs.push(PrecinctRecord::new("ZZ", "", format!("b{i}"), size * 6 / 10, size * 4 / 10));
            recs.push(PrecinctRecord::new("ZZ", "", format!("r{i}"), size * 4 / 10, size * 6 / 10));
        }
        let row = summarize_state(&partition_pools(&recs), 800, "ZZ-flat", 0.05);
        assert_eq!(row.bluewin_lpb_pct, Some(0.0));
        assert_eq!(row.redwin_lpb_pct, Some(0.0));
        assert_eq!(row.bluewin_mean_size, Some(1180.0));
    }

    #[test]
    fn pool_without_large_tail_gives_absent_cell() {
        let recs = vec![
            PrecinctRecord::new("ZZ", "", "a", 600, 400),
            PrecinctRecord::new("ZZ", "", "b", 700, 500),
            PrecinctRecord::new("ZZ", "", "c", 10, 20),
        ];
        let row = summarize_state(&partition_pools(&recs), 800, "x", 0.05);
        assert!(row.bluewin_lpb_pct.is_some());
        assert_eq!(row.redwin_lpb_pct, None);
        assert_eq!(row.redwin_mean_size, Some(30.0));
    }

    fn arb_records() -> impl Strategy<Value = Vec<PrecinctRecord>> {
        proptest::collection::vec((1u64..2500, 1u64..2500), 20..120).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (d, r))| PrecinctRecord::new("ZZ", "", i.to_string(), d, r))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn recompute_and_denominator_identities(recs in arb_records(), t in 200u64..1500) {
            let part = partition_pools(&recs);
            for pool in [&part.blue_pool, &part.red_pool] {
                if let Some(p) = pool_lpb(pool, t, part.scope_total_votes, 0.05) {
                    let recomputed: f64 = pool.records().iter()
                        .filter(|r| r.total() >= t)
                        .map(|r| p.red_fit.slope.abs() * (r.total() - t) as f64 * r.total() as f64)
                        .sum();
                    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
                    if p.lpb.lpb_votes > 0.0 {
                        prop_assert!(rel(recomputed, p.lpb.lpb_votes) < 1e-9);
                        let back = p.lpb.pct_of_scope.unwrap() * part.scope_total_votes as f64 / 100.0;
                        prop_assert!(rel(back, p.lpb.lpb_votes) < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn raising_threshold_never_grows_tail(recs in arb_records(), t in 0u64..3000, dt in 0u64..1000) {
            let part = partition_pools(&recs);
            prop_assert!(part.blue_pool.large(t + dt).len() <= part.blue_pool.large(t).len());
        }
    }
}
