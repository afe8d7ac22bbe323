//! Ordinary least squares of vote fractions against precinct size.
//!
//! LPB fits use precinct size (`XKind::Size`) as the regressor because the
//! vote-gain sum multiplies the slope by a distance in votes. `XKind::Rank`
//! (position in the ordering) exists for the random-order baseline only.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{LpbError, Result};
use crate::ingest::PrecinctRecord;
use crate::pools::{large_cutoff, WinPool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Republican share `r / (b + r)`.
    Red,
    /// Democratic share `b / (b + r)`.
    Blue,
}

impl Side {
    pub fn fraction(self, rec: &PrecinctRecord) -> f64 {
        match self {
            Side::Red => rec.red_fraction(),
            Side::Blue => rec.blue_fraction(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XKind {
    Size,
    Rank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionSeries {
    pub points: Vec<(f64, f64)>,
    pub x_kind: XKind,
    pub side: Side,
}

impl FractionSeries {
    pub fn new(points: Vec<(f64, f64)>, x_kind: XKind, side: Side) -> Self {
        FractionSeries { points, x_kind, side }
    }

    /// Every record in the given order, x = 1-based rank.
    pub fn ranked(records: &[PrecinctRecord], side: Side) -> Self {
        let points = records
            .iter()
            .enumerate()
            .map(|(i, r)| ((i + 1) as f64, side.fraction(r)))
            .collect();
        FractionSeries::new(points, XKind::Rank, side)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One point per large precinct (size ≥ `threshold`), in pool order.
///
/// With `XKind::Rank` the x value is the precinct's 1-based position in the
/// whole pool, so it stays comparable to the size ordering.
pub fn build_series(
    pool: &WinPool,
    threshold: u64,
    side: Side,
    x_kind: XKind,
) -> Result<FractionSeries> {
    let start = large_cutoff(pool, threshold).unwrap_or(pool.len());
    let tail = &pool.records()[start..];
    if tail.len() < 2 {
        return Err(LpbError::InsufficientData(format!(
            "{} pool has {} precincts with size >= {threshold}; at least 2 are needed",
            pool.label,
            tail.len()
        )));
    }
    let points = tail
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let x = match x_kind {
                XKind::Size => r.total() as f64,
                XKind::Rank => (start + i + 1) as f64,
            };
            (x, side.fraction(r))
        })
        .collect();
    Ok(FractionSeries::new(points, x_kind, side))
}

/// Serialises as `{side, x_kind, slope, intercept, n, r2, stderr, p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub side: Side,
    pub x_kind: XKind,
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
    #[serde(rename = "r2")]
    pub r_squared: f64,
    #[serde(rename = "stderr")]
    pub slope_stderr: f64,
    #[serde(rename = "p")]
    pub p_value: f64,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// |slope| ≤ k standard errors.
    pub fn within_se(&self, k: f64) -> bool {
        self.slope.abs() <= k * self.slope_stderr
    }
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
fn t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Least squares line through the series.
///
/// Standard error and p-value use the residual variance with n − 2 degrees
/// of freedom. With exactly two points there are no residual degrees of
/// freedom: the stderr is reported as 0 and the p-value as 1.
pub fn ols_fit(series: &FractionSeries) -> Result<RegressionFit> {
    let pts = &series.points;
    let n = pts.len();
    if n < 2 {
        return Err(LpbError::InsufficientData(format!(
            "regression needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(LpbError::DegenerateX);
    }

    let constant_y = pts.iter().all(|p| p.1 == pts[0].1);
    if constant_y {
        return Ok(RegressionFit {
            side: series.side,
            x_kind: series.x_kind,
            slope: 0.0,
            intercept: pts[0].1,
            n,
            r_squared: 0.0,
            slope_stderr: 0.0,
            p_value: 1.0,
        });
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (slope_stderr, p_value) = if n > 2 {
        let df = nf - 2.0;
        let se = (sse / df / sxx).sqrt();
        let p = if se > 0.0 {
            t_two_sided(slope / se, df)
        } else if slope == 0.0 {
            1.0
        } else {
            0.0
        };
        (se, p)
    } else {
        (0.0, 1.0)
    };
    Ok(RegressionFit {
        side: series.side,
        x_kind: series.x_kind,
        slope,
        intercept,
        n,
        r_squared,
        slope_stderr,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pools::PoolLabel;
    use proptest::prelude::*;

    fn series(points: &[(f64, f64)]) -> FractionSeries {
        FractionSeries::new(points.to_vec(), XKind::Size, Side::Red)
    }

    fn hand_pool() -> WinPool {
        WinPool::from_records(
            PoolLabel::BlueWin,
            vec![
                PrecinctRecord::new("ZZ", "", "a", 60, 40),
                PrecinctRecord::new("ZZ", "", "b", 500, 400),
                PrecinctRecord::new("ZZ", "", "c", 500, 700),
            ],
        )
    }

    #[test]
    fn series_over_large_tail() {
        let s = build_series(&hand_pool(), 800, Side::Red, XKind::Size).unwrap();
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.points[0], (900.0, 400.0 / 900.0));
        assert_eq!(s.points[1], (1200.0, 700.0 / 1200.0));
        let b = build_series(&hand_pool(), 800, Side::Blue, XKind::Size).unwrap();
        assert!((b.points[0].1 - 5.0 / 9.0).abs() < 1e-15);
        assert!((b.points[1].1 - 5.0 / 12.0).abs() < 1e-15);
        let r = build_series(&hand_pool(), 800, Side::Red, XKind::Rank).unwrap();
        assert_eq!(r.points.iter().map(|p| p.0).collect::<Vec<_>>(), [2.0, 3.0]);
    }

    #[test]
    fn empty_tail_is_insufficient() {
        let err = build_series(&hand_pool(), 2000, Side::Red, XKind::Size).unwrap_err();
        assert!(matches!(err, LpbError::InsufficientData(_)));
    }

    #[test]
    fn constant_response() {
        let fit = ols_fit(&series(&[(800.0, 0.4), (1000.0, 0.4), (1200.0, 0.4)])).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 0.4);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn three_point_closed_form() {
        let fit = ols_fit(&series(&[(0.0, 0.0), (1.0, 0.0), (2.0, 2.0)])).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-15);
        assert!((fit.intercept + 1.0 / 3.0).abs() < 1e-15);
        // residuals 1/3, -2/3, 1/3 -> sse 2/3, df 1, sxx 2
        assert!((fit.slope_stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((fit.r_squared - 0.75).abs() < 1e-15);
        // t = sqrt(3) with 1 df: p = 1 - 2*atan(sqrt 3)/pi = 1/3
        assert!((fit.p_value - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn two_points_give_the_line_through_them() {
        let fit = ols_fit(&series(&[(900.0, 0.2), (1300.0, 0.6)])).unwrap();
        assert!((fit.slope - 0.001).abs() < 1e-15);
        assert!((fit.predict(900.0) - 0.2).abs() < 1e-12);
        assert_eq!((fit.slope_stderr, fit.p_value), (0.0, 1.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            ols_fit(&series(&[(800.0, 0.1), (800.0, 0.5)])),
            Err(LpbError::DegenerateX)
        ));
        assert!(matches!(ols_fit(&series(&[(1.0, 0.1)])), Err(LpbError::InsufficientData(_))));
    }

    #[test]
    fn json_field_names() {
        let fit = ols_fit(&series(&[(0.0, 0.0), (1.0, 0.0), (2.0, 2.0)])).unwrap();
        let v: serde_json::Value = serde_json::to_value(fit).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["intercept", "n", "p", "r2", "side", "slope", "stderr", "x_kind"]);
    }

    fn arb_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((800.0f64..5000.0, 0.0f64..1.0), 3..60)
    }

    proptest! {
        #[test]
        fn complementary_sides_have_opposite_slopes(pts in arb_points()) {
            let red = series(&pts);
            let blue = FractionSeries::new(pts.iter().map(|&(x, y)| (x, 1.0 - y)).collect(), XKind::Size, Side::Blue);
            if let (Ok(a), Ok(b)) = (ols_fit(&red), ols_fit(&blue)) {
                prop_assert!((a.slope + b.slope).abs() < 1e-12);
                prop_assert!((a.slope_stderr - b.slope_stderr).abs() < 1e-12);
            }
        }

        #[test]
        fn scale_equivariance(pts in arb_points(), c in 0.01f64..100.0) {
            let base = ols_fit(&series(&pts));
            let scaled = ols_fit(&series(&pts.iter().map(|&(x, y)| (x * c, y)).collect::<Vec<_>>()));
            if let (Ok(a), Ok(b)) = (base, scaled) {
                prop_assert!((b.slope * c - a.slope).abs() <= 1e-9 * a.slope.abs().max(1e-12));
            }
        }

        #[test]
        fn power_of_two_scaling_is_exact(pts in arb_points(), e in -8i32..8) {
            let c = 2f64.powi(e);
            let a = ols_fit(&series(&pts)).unwrap();
            let b = ols_fit(&series(&pts.iter().map(|&(x, y)| (x * c, y)).collect::<Vec<_>>())).unwrap();
            prop_assert_eq!(b.slope, a.slope / c);
        }

        #[test]
        fn fit_statistics_are_in_range(pts in arb_points()) {
            let fit = ols_fit(&series(&pts)).unwrap();
            prop_assert!(fit.slope.is_finite());
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
            prop_assert!((0.0..=1.0).contains(&fit.p_value));
            prop_assert!(fit.slope_stderr >= 0.0);
        }
    }
}
