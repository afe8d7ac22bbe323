//! Fixtures shared by the criterion benches.

use lpb_core::synth::{generate, SynthConfig};
use lpb_core::PrecinctRecord;

/// A synthetic electorate of `n` precincts with both mechanisms switched on.
pub fn electorate(n: usize, seed: u64) -> Vec<PrecinctRecord> {
    let cfg = SynthConfig {
        n_precincts: n,
        heterogeneity_rate: 2e-5,
        inconvenience_rate: 2e-5,
        rng_seed: seed,
        ..SynthConfig::default()
    };
    generate(&cfg).expect("default synth config is valid").records
}
