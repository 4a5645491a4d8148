//! Simulation of multivariate time series whose frequency-specific
//! dependence network carries a prescribed topology, and the analysis chain
//! that recovers it: smoothed-periodogram coherence, Vietoris–Rips
//! filtration, persistent homology, and replicate-level inference.

pub mod config;
pub mod error;
pub mod graph;
pub mod homology;
pub mod inference;
pub mod io;
pub mod latent;
pub mod mixing;
pub mod pipeline;
pub mod rng;
pub mod spectral;
pub mod svg;

pub use error::{Error, Result};
pub use graph::{
    circular_ladder, double_circular_ladder, hop_distances, mixing_weights, quotient_grid, GraphKind,
    MixingWeights, PatternGraph, Surface,
};
pub use homology::{
    persistence, rips_complex, total_persistence, Feature, FilteredComplex, PersistenceDiagram,
    TotalPersistence,
};
pub use latent::{ar2_from_peak, simulate_latents, Ar2Params, LatentPanel};
pub use mixing::{mix, mix_with_snr, MultivariateSeries, SeriesMeta};
pub use spectral::{band_coherence, periodogram, smooth, Band, BandMatrices, SpectralStack};
pub use config::{PatternSpec, Preset, RunConfig, SeriesFormat};
pub use pipeline::{analyze, run_replicate, Analysis, Model};
pub use inference::{bootstrap_compare, snr_sweep, spearman, BootstrapResult, FiveNumber, SweepResult};
