//! Latent AR(2) oscillators with a spectral peak at a chosen frequency.
//!
//! The characteristic polynomial `1 - phi1 r - phi2 r^2` is given the complex
//! conjugate roots `M exp(±i 2π ψ)`, with `ψ = f / SR`. That fixes
//! `phi1 = 2 cos(2πψ) / M` and `phi2 = -1 / M^2`; `M` close to 1 concentrates
//! the spectrum around `f`.

use std::f64::consts::PI;

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::rng;

pub const DEFAULT_ROOT_MAGNITUDE: f64 = 1.05;
pub const DEFAULT_BURN_IN: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar2Params {
    pub peak_freq_hz: f64,
    pub sampling_rate_hz: f64,
    pub root_magnitude: f64,
    /// Peak frequency in cycles per sample.
    pub phase: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub noise_sd: f64,
}

impl Ar2Params {
    /// Theoretical spectral density at `freq` (cycles/sample).
    pub fn spectral_density(&self, freq: f64) -> f64 {
        let w = 2.0 * PI * freq;
        let re = 1.0 - self.phi1 * w.cos() - self.phi2 * (2.0 * w).cos();
        let im = self.phi1 * w.sin() + self.phi2 * (2.0 * w).sin();
        self.noise_sd * self.noise_sd / (re * re + im * im)
    }

    /// Lag-one autocorrelation of the stationary process.
    pub fn lag_one_autocorrelation(&self) -> f64 {
        self.phi1 / (1.0 - self.phi2)
    }
}

/// Build AR(2) coefficients whose spectrum peaks near `peak_freq_hz`.
pub fn ar2_from_peak(
    peak_freq_hz: f64,
    sampling_rate_hz: f64,
    root_magnitude: f64,
    noise_sd: f64,
) -> Result<Ar2Params> {
    if !(sampling_rate_hz.is_finite() && sampling_rate_hz > 0.0) {
        return Err(domain(format!("sampling rate must be positive, got {sampling_rate_hz}")));
    }
    if !(peak_freq_hz > 0.0 && peak_freq_hz < sampling_rate_hz / 2.0) {
        return Err(domain(format!(
            "peak frequency {peak_freq_hz} Hz must lie in (0, {}) Hz (Nyquist)",
            sampling_rate_hz / 2.0
        )));
    }
    if !(root_magnitude.is_finite() && root_magnitude > 1.0) {
        return Err(domain(format!("root magnitude must exceed 1 for causality, got {root_magnitude}")));
    }
    if !(noise_sd.is_finite() && noise_sd > 0.0) {
        return Err(domain(format!("innovation sd must be positive, got {noise_sd}")));
    }
    let phase = peak_freq_hz / sampling_rate_hz;
    Ok(Ar2Params {
        peak_freq_hz,
        sampling_rate_hz,
        root_magnitude,
        phase,
        phi1: 2.0 * (2.0 * PI * phase).cos() / root_magnitude,
        phi2: -1.0 / (root_magnitude * root_magnitude),
        noise_sd,
    })
}

/// Named frequency bands, keyed on their peak frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandPreset {
    Delta,
    Theta,
    Alpha,
    Beta,
}

impl BandPreset {
    pub const ALL: [BandPreset; 4] = [Self::Delta, Self::Theta, Self::Alpha, Self::Beta];

    pub fn peak_hz(self) -> f64 {
        match self {
            Self::Delta => 2.0,
            Self::Theta => 5.0,
            Self::Alpha => 10.0,
            Self::Beta => 19.5,
        }
    }
}

/// `P` independent, standardised AR(2) realisations stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPanel {
    pub processes: Array2<f64>,
    pub sampling_rate_hz: f64,
    pub seed: u64,
    pub burn_in: usize,
}

impl LatentPanel {
    pub fn count(&self) -> usize {
        self.processes.nrows()
    }

    pub fn len(&self) -> usize {
        self.processes.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.processes.is_empty()
    }
}

/// Simulate `count` independent latents of `length` samples each.
///
/// The recursion starts from zeros, the first `burn_in` samples are dropped,
/// and every series is centred and scaled to unit empirical variance. Channel
/// `p` draws from its own ChaCha stream, so the panel does not depend on the
/// order in which channels are generated.
pub fn simulate_latents(
    params: &Ar2Params,
    count: usize,
    length: usize,
    seed: u64,
    burn_in: usize,
) -> Result<LatentPanel> {
    if count == 0 {
        return Err(domain("latent count must be at least 1"));
    }
    if length < 2 {
        return Err(domain(format!("latent length must be at least 2, got {length}")));
    }
    if burn_in < 2 {
        return Err(domain(format!("burn-in must be at least 2, got {burn_in}")));
    }
    let base = rng::derive_seed(seed, rng::tag::LATENT);
    let rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|p| simulate_one(params, length, burn_in, base, p as u64))
        .collect();
    let mut processes = Array2::zeros((count, length));
    for (mut dst, src) in processes.rows_mut().into_iter().zip(rows) {
        dst.assign(&ndarray::ArrayView1::from(&src));
    }
    Ok(LatentPanel {
        processes,
        sampling_rate_hz: params.sampling_rate_hz,
        seed,
        burn_in,
    })
}

fn simulate_one(params: &Ar2Params, length: usize, burn_in: usize, seed: u64, channel: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, channel);
    let (mut z1, mut z2) = (0.0_f64, 0.0_f64);
    let mut out = Vec::with_capacity(length);
    for t in 0..burn_in + length {
        let w: f64 = StandardNormal.sample(&mut rng);
        let z = params.phi1 * z1 + params.phi2 * z2 + params.noise_sd * w;
        z2 = z1;
        z1 = z;
        if t >= burn_in {
            out.push(z);
        }
    }
    standardize(&mut out);
    out
}

pub(crate) fn standardize(x: &mut [f64]) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in x.iter_mut() {
        *v = (*v - mean) / sd;
    }
}
