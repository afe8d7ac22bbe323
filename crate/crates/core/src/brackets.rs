//! Fixed-width precinct-size brackets.
//!
//! Bracket `k` (1-based) covers sizes `[max(1, (k-1)*width), k*width - 1]`.
//! Brackets run from 1 up to the last non-empty one; empty interior brackets
//! are kept with a zero count and no mean fractions.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};
use crate::pools::WinPool;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BracketWeighting {
    /// Each precinct counts once.
    #[default]
    Unweighted,
    /// Each precinct weighted by its size.
    VoteWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketStats {
    pub bracket_index: usize,
    pub low: u64,
    pub high: u64,
    pub precinct_count: usize,
    pub total_votes: u64,
    pub mean_blue_fraction: Option<f64>,
    pub mean_red_fraction: Option<f64>,
    /// Share of the pool's votes falling in this bracket.
    pub vote_share_width: f64,
}

/// Bracket index for a precinct size (`size >= 1`).
pub fn bracket_of(size: u64, width: u64) -> usize {
    (size / width) as usize + 1
}

pub fn bracket_bounds(index: usize, width: u64) -> (u64, u64) {
    let k = index as u64;
    (((k - 1) * width).max(1), k * width - 1)
}

pub fn bracket_stats(
    pool: &WinPool,
    width: u64,
    weighting: BracketWeighting,
) -> Result<Vec<BracketStats>> {
    if width == 0 {
        return Err(LpbError::InvalidArgument("bracket width must be at least 1".into()));
    }
    let Some(largest) = pool.sizes().max() else {
        return Ok(Vec::new());
    };
    let n_brackets = bracket_of(largest, width);

    #[derive(Default, Clone)]
    struct Acc {
        count: usize,
        votes: u64,
        weight: f64,
        blue: f64,
        red: f64,
    }
    let mut acc = vec![Acc::default(); n_brackets];
    for rec in pool.records() {
        let size = rec.total();
        let a = &mut acc[bracket_of(size, width) - 1];
        let w = match weighting {
            BracketWeighting::Unweighted => 1.0,
            BracketWeighting::VoteWeighted => size as f64,
        };
        a.count += 1;
        a.votes += size;
        a.weight += w;
        a.blue += w * rec.blue_fraction();
        a.red += w * rec.red_fraction();
    }

    let pool_votes = pool.total_votes() as f64;
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(i, a)| {
            let (low, high) = bracket_bounds(i + 1, width);
            let (blue, red) = if a.count == 0 {
                (None, None)
            } else {
                (Some(a.blue / a.weight), Some(a.red / a.weight))
            };
            BracketStats {
                bracket_index: i + 1,
                low,
                high,
                precinct_count: a.count,
                total_votes: a.votes,
                mean_blue_fraction: blue,
                mean_red_fraction: red,
                vote_share_width: a.votes as f64 / pool_votes,
            }
        })
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `bracket,low,high,count,total_votes,mean_blue_frac,mean_red_frac,vote_share_width`
pub fn write_brackets_csv<W: Write>(out: W, stats: &[BracketStats]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "bracket",
        "low",
        "high",
        "count",
        "total_votes",
        "mean_blue_frac",
        "mean_red_frac",
        "vote_share_width",
    ])?;
    for b in stats {
        wtr.write_record([
            b.bracket_index.to_string(),
            b.low.to_string(),
            b.high.to_string(),
            b.precinct_count.to_string(),
            b.total_votes.to_string(),
            opt(b.mean_blue_fraction),
            opt(b.mean_red_fraction),
            b.vote_share_width.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| LpbError::io("<brackets csv>", e))?;
    Ok(())
}
