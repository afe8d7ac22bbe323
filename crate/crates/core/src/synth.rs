//! Synthetic electorates with planted size effects.
//!
//! Two mechanisms act on precincts above the threshold, both linear in
//! `u = max(0, size − threshold)`:
//!
//! - heterogeneity pulls the winner's fraction toward one half,
//!   `f − heterogeneity_rate · u`, floored at 0.5, in both regions alike;
//! - inconvenience removes blue ballots only, scaling the blue count by
//!   `1 − inconvenience_rate · u`, floored at 0, in both regions.
//!
//! Gaussian noise is added to the blue fraction before the inconvenience
//! loss and the integer rounding. Fractions are clamped to [0.01, 0.99] and
//! every clamp is counted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{LpbError, Result};
use crate::ingest::PrecinctRecord;

pub const FRACTION_FLOOR: f64 = 0.01;
pub const FRACTION_CEIL: f64 = 0.99;
const MAX_SIZE_DRAWS: usize = 10_000;

/// Log-normal precinct sizes truncated to `[min_size, max_size]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizeDistribution {
    pub median: f64,
    /// Standard deviation of log size.
    pub dispersion: f64,
    pub min_size: u64,
    pub max_size: u64,
}

/// Missing JSON fields take their values from [`SynthConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_precincts: usize,
    pub size_distribution: SizeDistribution,
    pub base_blue_fraction_blueland: f64,
    pub base_red_fraction_redland: f64,
    pub blueland_share: f64,
    pub heterogeneity_rate: f64,
    pub inconvenience_rate: f64,
    pub threshold: u64,
    pub noise_sd: f64,
    pub rng_seed: u64,
    pub state: String,
}

fn default_state() -> String {
    "SY".into()
}

impl Default for SizeDistribution {
    fn default() -> Self {
        SizeDistribution {
            median: 800.0,
            dispersion: 0.5,
            min_size: 50,
            max_size: 3000,
        }
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_precincts: 4000,
            size_distribution: SizeDistribution::default(),
            base_blue_fraction_blueland: 0.68,
            base_red_fraction_redland: 0.66,
            blueland_share: 0.5,
            heterogeneity_rate: 0.0,
            inconvenience_rate: 0.0,
            threshold: 800,
            noise_sd: 0.03,
            rng_seed: 1,
            state: default_state(),
        }
    }
}

impl SynthConfig {
    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| LpbError::io(path, e))?;
        let cfg: SynthConfig = serde_json::from_reader(file)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LpbError::InvalidConfig(msg));
        let d = &self.size_distribution;
        if self.n_precincts == 0 {
            return bad("n_precincts must be positive".into());
        }
        if !(d.median.is_finite() && d.median > 0.0) {
            return bad(format!("median size must be positive, got {}", d.median));
        }
        if !(d.dispersion.is_finite() && d.dispersion >= 0.0) {
            return bad(format!("dispersion must be non-negative, got {}", d.dispersion));
        }
        if d.min_size == 0 || d.min_size > d.max_size {
            return bad(format!(
                "size bounds [{}, {}] are infeasible",
                d.min_size, d.max_size
            ));
        }
        for (name, v) in [
            ("base_blue_fraction_blueland", self.base_blue_fraction_blueland),
            ("base_red_fraction_redland", self.base_red_fraction_redland),
        ] {
            if !(v > 0.5 && v < 1.0) {
                return bad(format!("{name} must lie in (0.5, 1), got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.blueland_share) {
            return bad(format!("blueland_share must lie in [0, 1], got {}", self.blueland_share));
        }
        for (name, v) in [
            ("heterogeneity_rate", self.heterogeneity_rate),
            ("inconvenience_rate", self.inconvenience_rate),
            ("noise_sd", self.noise_sd),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.threshold == 0 {
            return bad("threshold must be at least 1".into());
        }
        Ok(())
    }

    /// Same configuration with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        SynthConfig {
            rng_seed: seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mechanism {
    Heterogeneity,
    Inconvenience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    /// Expected Red-series slope per vote in the blue-win pool.
    pub bluewin_red_slope: f64,
    /// Expected Blue-series slope per vote in the red-win pool.
    pub redwin_blue_slope: f64,
    pub mechanisms: Vec<Mechanism>,
}

/// Noise-free observed red fraction of a precinct with pre-loss size `size`
/// and base blue fraction `base_blue` (blue is the winner when > 0.5).
pub fn mechanism_red_fraction(cfg: &SynthConfig, base_blue: f64, size: f64) -> f64 {
    let u = (size - cfg.threshold as f64).max(0.0);
    let blue_wins = base_blue > 0.5;
    let winner = if blue_wins { base_blue } else { 1.0 - base_blue };
    let winner = (winner - cfg.heterogeneity_rate * u).max(0.5);
    let blue = if blue_wins { winner } else { 1.0 - winner };
    let kept_blue = blue * (1.0 - cfg.inconvenience_rate * u).max(0.0);
    let red = 1.0 - blue;
    red / (kept_blue + red)
}

/// Closed-form slopes at the threshold, ignoring noise, rounding and the 0.5 floor.
///
/// With winner fraction `f` and loss rate `γ`, the observed red fraction is
/// `(1 − f + h·u) / ((f − h·u)(1 − γ·u) + 1 − f + h·u)`; its derivative at
/// `u = 0` is `h + f(1 − f)γ`. In the red-win region with blue fraction
/// `g`, the blue fraction's derivative is `h − g(1 − g)γ`.
pub fn planted_truth(cfg: &SynthConfig) -> PlantedTruth {
    let h = cfg.heterogeneity_rate;
    let gamma = cfg.inconvenience_rate;
    let f = cfg.base_blue_fraction_blueland;
    let g = 1.0 - cfg.base_red_fraction_redland;
    let mut mechanisms = Vec::new();
    if h > 0.0 {
        mechanisms.push(Mechanism::Heterogeneity);
    }
    if gamma > 0.0 {
        mechanisms.push(Mechanism::Inconvenience);
    }
    PlantedTruth {
        bluewin_red_slope: h + f * (1.0 - f) * gamma,
        redwin_blue_slope: h - g * (1.0 - g) * gamma,
        mechanisms,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub records: Vec<PrecinctRecord>,
    pub truth: PlantedTruth,
    /// Precincts whose noisy blue fraction hit a clamp bound.
    pub clamp_events: usize,
}

fn draw_size(rng: &mut ChaCha8Rng, d: &SizeDistribution) -> Result<u64> {
    let clamp = |x: f64| (x.round() as u64).clamp(d.min_size, d.max_size);
    if d.dispersion == 0.0 {
        return Ok(clamp(d.median));
    }
    let dist = LogNormal::new(d.median.ln(), d.dispersion)
        .map_err(|e| LpbError::InvalidConfig(format!("size distribution: {e}")))?;
    for _ in 0..MAX_SIZE_DRAWS {
        let s = dist.sample(rng).round();
        if s >= d.min_size as f64 && s <= d.max_size as f64 {
            return Ok(s as u64);
        }
    }
    Ok(clamp(dist.sample(rng)))
}

/// Deterministic in `rng_seed`. Region is recorded in the county column.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let noise = Normal::new(0.0, cfg.noise_sd)
        .map_err(|e| LpbError::InvalidConfig(format!("noise: {e}")))?;
    let t = cfg.threshold as f64;

    let mut records = Vec::with_capacity(cfg.n_precincts);
    let mut clamp_events = 0;
    for i in 0..cfg.n_precincts {
        let blueland = rng.random::<f64>() < cfg.blueland_share;
        let size = draw_size(&mut rng, &cfg.size_distribution)?;
        let u = (size as f64 - t).max(0.0);

        let base = if blueland {
            cfg.base_blue_fraction_blueland
        } else {
            cfg.base_red_fraction_redland
        };
        let winner = (base - cfg.heterogeneity_rate * u).max(0.5);
        let mut blue = if blueland { winner } else { 1.0 - winner };
        if cfg.noise_sd > 0.0 {
            blue += noise.sample(&mut rng);
        }
        if !(FRACTION_FLOOR..=FRACTION_CEIL).contains(&blue) {
            clamp_events += 1;
            blue = blue.clamp(FRACTION_FLOOR, FRACTION_CEIL);
        }

        let keep = (1.0 - cfg.inconvenience_rate * u).max(0.0);
        let s = size as f64;
        let dem = (blue * s * keep).round() as u64;
        let rep = ((1.0 - blue) * s).round() as u64;
        let region = if blueland { "Blueland" } else { "Redland" };
        records.push(PrecinctRecord::new(
            cfg.state.clone(),
            region,
            format!("S{i:06}"),
            dem,
            rep,
        ));
    }
    if clamp_events > 0 {
        log::info!("{clamp_events} synthetic precincts hit the fraction clamp");
    }
    Ok(SynthDataset {
        records,
        truth: planted_truth(cfg),
        clamp_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpb::pool_lpb;
    use crate::pools::partition_pools;

    fn null_cfg() -> SynthConfig {
        SynthConfig {
            noise_sd: 0.0,
            n_precincts: 600,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn null_mechanisms_give_constant_fractions_and_zero_slopes() {
        let cfg = SynthConfig {
            // sizes multiple of 50 so rounding keeps every fraction identical
            base_blue_fraction_blueland: 0.7,
            base_red_fraction_redland: 0.6,
            size_distribution: SizeDistribution {
                median: 1000.0,
                dispersion: 0.0,
                min_size: 1000,
                max_size: 1000,
            },
            ..null_cfg()
        };
        let truth = planted_truth(&cfg);
        assert_eq!((truth.bluewin_red_slope, truth.redwin_blue_slope), (0.0, 0.0));
        assert!(truth.mechanisms.is_empty());
        let data = generate(&cfg).unwrap();
        for r in &data.records {
            let expected = if r.county == "Blueland" { (700, 300) } else { (400, 600) };
            assert_eq!((r.dem_votes, r.rep_votes), expected);
        }
    }

    #[test]
    fn null_mechanisms_with_varied_sizes_fit_flat() {
        let cfg = SynthConfig {
            base_blue_fraction_blueland: 0.75,
            base_red_fraction_redland: 0.75,
            ..null_cfg()
        };
        let data = generate(&cfg).unwrap();
        let part = partition_pools(&data.records);
        for pool in [&part.blue_pool, &part.red_pool] {
            let p = pool_lpb(pool, 800, part.scope_total_votes, 0.05).unwrap();
            // integer rounding only: |slope| tiny and not significant
            assert!(p.red_fit.slope.abs() < 1e-6, "{}", p.red_fit.slope);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = SynthConfig::default();
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        assert_ne!(generate(&cfg).unwrap().records, generate(&cfg.with_seed(2)).unwrap().records);
    }

    #[test]
    fn sizes_respect_truncation() {
        let data = generate(&SynthConfig::default()).unwrap();
        assert!(data.records.iter().all(|r| {
            let s = r.total();
            // rounding of the two party counts can shift the total by one
            (49..=3001).contains(&s)
        }));
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let mut cfg = SynthConfig::default();
        cfg.size_distribution.min_size = 5000;
        assert!(matches!(generate(&cfg), Err(LpbError::InvalidConfig(_))));
        let cfg = SynthConfig {
            base_blue_fraction_blueland: 0.4,
            ..SynthConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SynthConfig {
            noise_sd: -1.0,
            ..SynthConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn heterogeneity_truth_is_the_rate() {
        let cfg = SynthConfig {
            heterogeneity_rate: 3e-5,
            ..SynthConfig::default()
        };
        let t = planted_truth(&cfg);
        assert_eq!(t.bluewin_red_slope, 3e-5);
        assert_eq!(t.redwin_blue_slope, 3e-5);
        assert_eq!(t.mechanisms, vec![Mechanism::Heterogeneity]);
    }

    /// Right derivative at the threshold by Richardson-extrapolated forward differences.
    fn right_derivative(g: impl Fn(f64) -> f64, x: f64) -> f64 {
        let d = |h: f64| (g(x + h) - g(x)) / h;
        2.0 * d(0.5) - d(1.0)
    }

    #[test]
    fn closed_form_slopes_match_finite_differences() {
        for (h, gamma) in [(0.0, 2e-5), (3e-5, 0.0), (2e-5, 1e-5)] {
            let cfg = SynthConfig {
                heterogeneity_rate: h,
                inconvenience_rate: gamma,
                ..SynthConfig::default()
            };
            let t = planted_truth(&cfg);
            let at = cfg.threshold as f64;
            let blue_region = right_derivative(
                |s| mechanism_red_fraction(&cfg, cfg.base_blue_fraction_blueland, s),
                at,
            );
            let red_region = -right_derivative(
                |s| mechanism_red_fraction(&cfg, 1.0 - cfg.base_red_fraction_redland, s),
                at,
            );
            assert!((blue_region - t.bluewin_red_slope).abs() < 1e-9, "{blue_region} vs {}", t.bluewin_red_slope);
            assert!((red_region - t.redwin_blue_slope).abs() < 1e-9, "{red_region} vs {}", t.redwin_blue_slope);
        }
        let f: f64 = 0.68;
        let cfg = SynthConfig {
            inconvenience_rate: 2e-5,
            ..SynthConfig::default()
        };
        assert!((planted_truth(&cfg).bluewin_red_slope - f * (1.0 - f) * 2e-5).abs() < 1e-18);
        assert!(planted_truth(&cfg).redwin_blue_slope < 0.0);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SynthConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SynthConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_config_uses_defaults() {
        let cfg: SynthConfig =
            serde_json::from_str(r#"{"n_precincts": 10, "size_distribution": {"median": 600}}"#).unwrap();
        assert_eq!(cfg.n_precincts, 10);
        assert_eq!(cfg.size_distribution.median, 600.0);
        assert_eq!(cfg.size_distribution.max_size, 3000);
        assert_eq!(cfg.state, "SY");
    }
}
