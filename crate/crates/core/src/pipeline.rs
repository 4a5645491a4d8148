//! One replicate end to end: simulate, estimate coherence, compute persistence.

use crate::config::{PatternSpec, RunConfig};
use crate::error::Result;
use crate::graph::{mixing_weights, MixingWeights, PatternGraph};
use crate::homology::{persistence, rips_complex, total_persistence, PersistenceDiagram, TotalPersistence};
use crate::latent::{simulate_latents, Ar2Params, DEFAULT_BURN_IN};
use crate::mixing::{mix, mix_with_snr, MultivariateSeries};
use crate::spectral::{band_coherence, periodogram, smooth, Band, BandMatrices};

/// Parts of a configuration that do not change between replicates.
#[derive(Debug, Clone)]
pub struct Model {
    pub graph: PatternGraph,
    pub weights: MixingWeights,
    pub ar2: Ar2Params,
    pub samples: usize,
}

impl Model {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        Self::with_pattern(cfg, &cfg.pattern)
    }

    /// Same as [`Model::new`] with the pattern swapped out.
    pub fn with_pattern(cfg: &RunConfig, pattern: &PatternSpec) -> Result<Self> {
        let graph = pattern.build()?;
        let weights = mixing_weights(&graph, cfg.k);
        Ok(Self {
            graph,
            weights,
            ar2: cfg.ar2()?,
            samples: cfg.samples,
        })
    }

    /// Draw one observed series. Latents and noise both derive from `seed`.
    pub fn simulate(&self, seed: u64, snr: Option<f64>) -> Result<MultivariateSeries> {
        let latents = simulate_latents(&self.ar2, self.graph.node_count(), self.samples, seed, DEFAULT_BURN_IN)?;
        let mut series = match snr {
            Some(s) => mix_with_snr(&latents, &self.weights, s, seed)?,
            None => mix(&latents, &self.weights, 0.0, seed)?,
        };
        series.meta.graph_kind = Some(self.graph.kind().to_string());
        Ok(series)
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub matrices: BandMatrices,
    pub diagram: PersistenceDiagram,
    pub total: TotalPersistence,
}

/// Coherence in `band`, then the Rips persistence of `1 - coherence`.
pub fn analyze(
    series: &MultivariateSeries,
    band: Band,
    bandwidth: usize,
    max_dim: usize,
    threshold: f64,
) -> Result<Analysis> {
    let raw = periodogram(series)?;
    let stack = smooth(&raw, bandwidth)?;
    let matrices = band_coherence(&stack, band, series.sampling_rate_hz)?;
    let complex = rips_complex(&matrices.distance, max_dim, threshold)?;
    let diagram = persistence(&complex);
    let total = total_persistence(&diagram);
    Ok(Analysis {
        matrices,
        diagram,
        total,
    })
}

pub fn analyze_with(series: &MultivariateSeries, cfg: &RunConfig) -> Result<Analysis> {
    analyze(series, cfg.band, cfg.bandwidth(), cfg.max_dim, cfg.threshold)
}

/// Simulate and analyse a single replicate.
pub fn run_replicate(model: &Model, cfg: &RunConfig, seed: u64, snr: Option<f64>) -> Result<Analysis> {
    let series = model.simulate(seed, snr)?;
    analyze_with(&series, cfg)
}
