//! Observed series `Y(t) = W Z(t) + ε(t)`.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::MixingWeights;
use crate::latent::LatentPanel;
use crate::rng;

/// Provenance carried alongside a simulated series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub graph_kind: Option<String>,
    pub cutoff: Option<usize>,
    pub band: Option<String>,
    pub seed: Option<u64>,
    pub snr: Option<f64>,
}

/// `P` channels of `T` real samples (row `p` is channel `p`).
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    pub data: Array2<f64>,
    pub sampling_rate_hz: f64,
    pub meta: SeriesMeta,
}

impl MultivariateSeries {
    pub fn new(data: Array2<f64>, sampling_rate_hz: f64) -> Result<Self> {
        if let Some(((p, t), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Degenerate(format!("non-finite sample at channel {p}, t={t}")));
        }
        if !(sampling_rate_hz.is_finite() && sampling_rate_hz > 0.0) {
            return Err(domain(format!("sampling rate must be positive, got {sampling_rate_hz}")));
        }
        Ok(Self {
            data,
            sampling_rate_hz,
            meta: SeriesMeta::default(),
        })
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Reject series whose coherence would be degenerate: constant channels and
/// channels that are exact copies of each other.
pub fn check_channels(series: &MultivariateSeries) -> Result<()> {
    let rows: Vec<_> = series.data.rows().into_iter().collect();
    for (p, r) in rows.iter().enumerate() {
        if r.iter().all(|&v| v == r[0]) {
            return Err(Error::Degenerate(format!("channel {p} is constant")));
        }
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let cmp = |a: &usize, b: &usize| {
        rows[*a]
            .iter()
            .zip(rows[*b].iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    order.sort_by(cmp);
    for w in order.windows(2) {
        if cmp(&w[0], &w[1]).is_eq() {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::Degenerate(format!("channels {a} and {b} are identical")));
        }
    }
    Ok(())
}

fn check_dims(latents: &LatentPanel, weights: &MixingWeights) -> Result<()> {
    if latents.count() != weights.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} latents but {}x{} mixing weights",
            latents.count(),
            weights.dim(),
            weights.dim()
        )));
    }
    Ok(())
}

/// Noiseless mixture `W Z`.
pub fn signal(latents: &LatentPanel, weights: &MixingWeights) -> Result<Array2<f64>> {
    check_dims(latents, weights)?;
    Ok(weights.matrix.dot(&latents.processes))
}

/// `W Z + ε` with iid Gaussian noise of standard deviation `noise_sd` on
/// every channel and sample. Channel `p` uses noise stream `p` of `seed`.
pub fn mix(
    latents: &LatentPanel,
    weights: &MixingWeights,
    noise_sd: f64,
    seed: u64,
) -> Result<MultivariateSeries> {
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(domain(format!("noise sd must be finite and >= 0, got {noise_sd}")));
    }
    let sd = vec![noise_sd; weights.dim()];
    mix_inner(latents, weights, &sd, seed, None)
}

/// Mixture whose per-channel noise variance is the empirical variance of that
/// channel's noiseless mix divided by `snr`.
pub fn mix_with_snr(
    latents: &LatentPanel,
    weights: &MixingWeights,
    snr: f64,
    seed: u64,
) -> Result<MultivariateSeries> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(domain(format!("snr must be positive and finite, got {snr}")));
    }
    let clean = signal(latents, weights)?;
    let sd: Vec<f64> = clean
        .rows()
        .into_iter()
        .map(|row| {
            let n = row.len() as f64;
            let mean = row.sum() / n;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (var / snr).sqrt()
        })
        .collect();
    mix_inner(latents, weights, &sd, seed, Some(snr))
}

fn mix_inner(
    latents: &LatentPanel,
    weights: &MixingWeights,
    noise_sd: &[f64],
    seed: u64,
    snr: Option<f64>,
) -> Result<MultivariateSeries> {
    let mut data = signal(latents, weights)?;
    let base = rng::derive_seed(seed, rng::tag::NOISE);
    for (p, mut row) in data.rows_mut().into_iter().enumerate() {
        if noise_sd[p] == 0.0 {
            continue;
        }
        let mut rng = rng::stream(base, p as u64);
        for v in row.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += noise_sd[p] * e;
        }
    }
    Ok(MultivariateSeries {
        data,
        sampling_rate_hz: latents.sampling_rate_hz,
        meta: SeriesMeta {
            cutoff: Some(weights.cutoff),
            seed: Some(seed),
            snr,
            ..SeriesMeta::default()
        },
    })
}
