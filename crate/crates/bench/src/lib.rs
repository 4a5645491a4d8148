//! Shared fixtures for the benchmarks.

use toposim_core::config::{PatternSpec, RunConfig};
use toposim_core::pipeline::Model;
use toposim_core::spectral::{band_coherence, periodogram, smooth, BandMatrices};
use toposim_core::MultivariateSeries;

pub fn config(pattern: PatternSpec, k: usize, samples: usize) -> RunConfig {
    RunConfig {
        pattern,
        k,
        samples,
        ..RunConfig::default()
    }
}

pub fn series(cfg: &RunConfig, seed: u64) -> MultivariateSeries {
    Model::new(cfg).unwrap().simulate(seed, cfg.snr).unwrap()
}

pub fn band_matrices(cfg: &RunConfig, seed: u64) -> BandMatrices {
    let s = series(cfg, seed);
    let stack = smooth(&periodogram(&s).unwrap(), cfg.bandwidth()).unwrap();
    band_coherence(&stack, cfg.band, cfg.sr).unwrap()
}
