//! Win-pool partitioning and size ordering.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};
use crate::ingest::PrecinctRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoolLabel {
    BlueWin,
    RedWin,
    /// Both win pools merged; only produced by the combined-pool diagnostic.
    Combined,
}

impl PoolLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PoolLabel::BlueWin => "BlueWin",
            PoolLabel::RedWin => "RedWin",
            PoolLabel::Combined => "Combined",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            PoolLabel::BlueWin => PoolLabel::RedWin,
            PoolLabel::RedWin => PoolLabel::BlueWin,
            PoolLabel::Combined => PoolLabel::Combined,
        }
    }
}

impl fmt::Display for PoolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Precincts won by one party, ascending by size.
#[derive(Debug, Clone, PartialEq)]
pub struct WinPool {
    pub label: PoolLabel,
    records: Vec<PrecinctRecord>,
    dem_total: u64,
    rep_total: u64,
}

/// Size ascending; equal sizes fall back to the precinct key so listings are reproducible.
fn size_order(a: &PrecinctRecord, b: &PrecinctRecord) -> std::cmp::Ordering {
    a.total().cmp(&b.total()).then_with(|| a.key().cmp(&b.key()))
}

impl WinPool {
    /// Orders `records` by size. Pool membership is not checked here, which
    /// lets the combined diagnostic reuse the type.
    pub fn from_records(label: PoolLabel, mut records: Vec<PrecinctRecord>) -> Self {
        records.sort_by(size_order);
        let dem_total = records.iter().map(|r| r.dem_votes).sum();
        let rep_total = records.iter().map(|r| r.rep_votes).sum();
        WinPool {
            label,
            records,
            dem_total,
            rep_total,
        }
    }

    pub fn records(&self) -> &[PrecinctRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// (dem sum, rep sum) over the pool.
    pub fn vote_totals(&self) -> (u64, u64) {
        (self.dem_total, self.rep_total)
    }

    pub fn total_votes(&self) -> u64 {
        self.dem_total + self.rep_total
    }

    pub fn sizes(&self) -> impl Iterator<Item = u64> + '_ {
        self.records.iter().map(PrecinctRecord::total)
    }

    /// Precincts with size at or above `threshold`.
    pub fn large(&self, threshold: u64) -> &[PrecinctRecord] {
        match large_cutoff(self, threshold) {
            Some(i) => &self.records[i..],
            None => &[],
        }
    }

    /// Audit CSV: `pool,label,precinct_id,dem,rep,total`, where `pool` is the
    /// pool label and `label` the precinct's `state/county`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["pool", "label", "precinct_id", "dem", "rep", "total"])?;
        for r in &self.records {
            wtr.write_record([
                self.label.as_str(),
                &format!("{}/{}", r.state, r.county),
                &r.precinct_id,
                &r.dem_votes.to_string(),
                &r.rep_votes.to_string(),
                &r.total().to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| LpbError::io("<pool csv>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub blue_pool: WinPool,
    pub red_pool: WinPool,
    /// Precincts with dem = rep > 0; outside both pools, inside the denominator.
    pub ties: Vec<PrecinctRecord>,
    pub zero_vote_count: usize,
    /// Two-party votes over every scoped record, ties included.
    pub scope_total_votes: u64,
}

impl PartitionResult {
    pub fn tie_count(&self) -> usize {
        self.ties.len()
    }

    pub fn record_count(&self) -> usize {
        self.blue_pool.len() + self.red_pool.len() + self.ties.len() + self.zero_vote_count
    }

    pub fn pool(&self, label: PoolLabel) -> Option<&WinPool> {
        match label {
            PoolLabel::BlueWin => Some(&self.blue_pool),
            PoolLabel::RedWin => Some(&self.red_pool),
            PoolLabel::Combined => None,
        }
    }
}

pub fn partition_pools(records: &[PrecinctRecord]) -> PartitionResult {
    let mut blue = Vec::new();
    let mut red = Vec::new();
    let mut ties = Vec::new();
    let mut zero_vote_count = 0;
    let mut scope_total_votes = 0;
    for rec in records {
        scope_total_votes += rec.total();
        match rec.dem_votes.cmp(&rec.rep_votes) {
            _ if rec.total() == 0 => zero_vote_count += 1,
            std::cmp::Ordering::Greater => blue.push(rec.clone()),
            std::cmp::Ordering::Less => red.push(rec.clone()),
            std::cmp::Ordering::Equal => ties.push(rec.clone()),
        }
    }
    ties.sort_by(size_order);
    PartitionResult {
        blue_pool: WinPool::from_records(PoolLabel::BlueWin, blue),
        red_pool: WinPool::from_records(PoolLabel::RedWin, red),
        ties,
        zero_vote_count,
        scope_total_votes,
    }
}

/// 0-based index of the first precinct with size ≥ `threshold`.
pub fn large_cutoff(pool: &WinPool, threshold: u64) -> Option<usize> {
    let idx = pool.records.partition_point(|r| r.total() < threshold);
    (idx < pool.records.len()).then_some(idx)
}

/// Mean size over the whole pool; `None` when empty.
pub fn mean_precinct_size(pool: &WinPool) -> Option<f64> {
    if pool.is_empty() {
        None
    } else {
        Some(pool.total_votes() as f64 / pool.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: &str, d: u64, r: u64) -> PrecinctRecord {
        PrecinctRecord::new("ZZ", "", id, d, r)
    }

    fn pool_of_sizes(sizes: &[u64]) -> WinPool {
        let recs = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| rec(&format!("{i:04}"), s - s / 3, s / 3))
            .collect();
        WinPool::from_records(PoolLabel::BlueWin, recs)
    }

    fn linear_scan(pool: &WinPool, threshold: u64) -> Option<usize> {
        pool.records().iter().position(|r| r.total() >= threshold)
    }

    #[test]
    fn strict_majority_goes_to_blue() {
        let p = partition_pools(&[rec("a", 10, 5)]);
        assert_eq!((p.blue_pool.len(), p.red_pool.len(), p.tie_count()), (1, 0, 0));
    }

    #[test]
    fn exact_tie_is_excluded_but_counted_in_scope() {
        let p = partition_pools(&[rec("a", 7, 7)]);
        assert!(p.blue_pool.is_empty() && p.red_pool.is_empty());
        assert_eq!(p.tie_count(), 1);
        assert_eq!(p.scope_total_votes, 14);
    }

    #[test]
    fn zero_vote_precincts_are_counted_separately() {
        let p = partition_pools(&[rec("a", 0, 0), rec("b", 0, 3)]);
        assert_eq!(p.zero_vote_count, 1);
        assert_eq!(p.tie_count(), 0);
        assert_eq!(p.red_pool.len(), 1);
    }

    #[test]
    fn empty_input_yields_empty_pools() {
        let p = partition_pools(&[]);
        assert_eq!(p.record_count(), 0);
        assert_eq!(p.scope_total_votes, 0);
        assert_eq!(mean_precinct_size(&p.blue_pool), None);
    }

    #[test]
    fn cutoff_boundary_is_inclusive() {
        let pool = pool_of_sizes(&[100, 799, 800, 1200]);
        assert_eq!(large_cutoff(&pool, 800), Some(2));
        assert_eq!(pool.large(800).len(), 2);
        assert_eq!(large_cutoff(&pool_of_sizes(&[100, 200]), 800), None);
    }

    #[test]
    fn cutoff_at_alternate_threshold_matches_scan() {
        let pool = pool_of_sizes(&[600, 650, 700]);
        assert_eq!(large_cutoff(&pool, 600), linear_scan(&pool, 600));
        assert_eq!(large_cutoff(&pool, 600), Some(0));
    }

    #[test]
    fn mean_size() {
        assert_eq!(mean_precinct_size(&pool_of_sizes(&[400])), Some(400.0));
        assert_eq!(mean_precinct_size(&pool_of_sizes(&[100, 300, 800])), Some(400.0));
    }

    #[test]
    fn equal_sizes_break_ties_by_key() {
        let pool = WinPool::from_records(
            PoolLabel::BlueWin,
            vec![rec("b", 6, 4), rec("a", 7, 3), rec("c", 1, 0)],
        );
        let ids: Vec<_> = pool.records().iter().map(|r| r.precinct_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn audit_csv_layout() {
        let pool = WinPool::from_records(PoolLabel::RedWin, vec![rec("p1", 3, 4)]);
        let mut buf = Vec::new();
        pool.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "pool,label,precinct_id,dem,rep,total\nRedWin,ZZ/,p1,3,4,7\n"
        );
    }

    fn arb_records() -> impl Strategy<Value = Vec<PrecinctRecord>> {
        proptest::collection::vec((0u64..2000, 0u64..2000), 0..200).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (d, r))| rec(&i.to_string(), d, r))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn partition_is_exhaustive_and_exclusive(recs in arb_records()) {
            let p = partition_pools(&recs);
            prop_assert_eq!(p.record_count(), recs.len());
            prop_assert!(p.blue_pool.records().iter().all(|r| r.dem_votes > r.rep_votes));
            prop_assert!(p.red_pool.records().iter().all(|r| r.rep_votes > r.dem_votes));
            prop_assert!(p.ties.iter().all(|r| r.dem_votes == r.rep_votes && r.total() > 0));
            let independent: u64 = recs.iter().map(|r| r.dem_votes + r.rep_votes).sum();
            prop_assert_eq!(p.scope_total_votes, independent);
            prop_assert!(p.scope_total_votes >= p.blue_pool.total_votes() + p.red_pool.total_votes());
        }

        #[test]
        fn ordering_is_sorted_and_idempotent(recs in arb_records()) {
            let p = partition_pools(&recs);
            for pool in [&p.blue_pool, &p.red_pool] {
                let sizes: Vec<u64> = pool.sizes().collect();
                prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
                let again = partition_pools(pool.records());
                let same = if pool.label == PoolLabel::BlueWin { &again.blue_pool } else { &again.red_pool };
                prop_assert_eq!(same, pool);
            }
        }

        #[test]
        fn cutoff_matches_linear_scan(recs in arb_records(), t in 0u64..4000) {
            let p = partition_pools(&recs);
            prop_assert_eq!(large_cutoff(&p.blue_pool, t), linear_scan(&p.blue_pool, t));
        }
    }
}
