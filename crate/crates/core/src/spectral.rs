//! Smoothed-periodogram spectral matrices and band coherence.
//!
//! A [`SpectralStack`] keeps the scaled DFT coefficients `d(ω_k)` of every
//! channel together with the smoothing kernel, and materialises the
//! `P x P` matrix `f̂(ω_k) = Σ_j w_j d(ω_{k+j}) d(ω_{k+j})*` on demand.
//! Coherence is computed bin by bin and then averaged over the band.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mixing::MultivariateSeries;

/// Auto-spectra at or below this level make coherence undefined.
pub const MIN_AUTO_SPECTRUM: f64 = 1e-14;

/// Bins handled per parallel task; fixed so sums do not depend on the pool size.
const BIN_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// Uniform weights with half-weight endpoints over `2m + 1` bins.
    ModifiedDaniell { half_width: usize },
    /// Uniform weights over `2m + 1` bins.
    Flat { half_width: usize },
}

impl Kernel {
    pub fn half_width(&self) -> usize {
        match *self {
            Kernel::ModifiedDaniell { half_width } | Kernel::Flat { half_width } => half_width,
        }
    }

    /// Weights for offsets `-m..=m`; nonnegative, summing to one.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.half_width();
        match self {
            Kernel::ModifiedDaniell { .. } => (0..=2 * m)
                .map(|i| if i == 0 || i == 2 * m { 0.25 / m as f64 } else { 0.5 / m as f64 })
                .collect(),
            Kernel::Flat { .. } => vec![1.0 / (2 * m + 1) as f64; 2 * m + 1],
        }
    }
}

/// Half-width `⌈√T / 4⌉` bins.
pub fn default_bandwidth(sample_len: usize) -> usize {
    ((sample_len as f64).sqrt() / 4.0).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preprocess {
    #[default]
    Center,
    Detrend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStack {
    freqs: Vec<f64>,
    /// `P x K` scaled DFT coefficients for bins `k = 1..=T/2`.
    coeffs: Array2<Complex64>,
    kernel: Option<Kernel>,
    sample_len: usize,
}

impl SpectralStack {
    /// Fourier frequencies in cycles per sample.
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn sample_len(&self) -> usize {
        self.sample_len
    }

    pub fn kernel(&self) -> Option<Kernel> {
        self.kernel
    }

    /// Smoothing half-width in bins; 0 for the raw periodogram.
    pub fn bandwidth(&self) -> usize {
        self.kernel.map_or(0, |k| k.half_width())
    }

    pub fn coefficients(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    /// Window of (sqrt-weighted) coefficients for bin `k`: `P x L`.
    fn window(&self, k: usize) -> Array2<Complex64> {
        let nbins = self.len();
        let Some(kernel) = self.kernel else {
            return self.coeffs.slice(ndarray::s![.., k..k + 1]).to_owned();
        };
        let m = kernel.half_width() as isize;
        let w = kernel.weights();
        let taps: Vec<(usize, f64)> = (-m..=m)
            .zip(w)
            .filter_map(|(off, w)| {
                let j = k as isize + off;
                (j >= 0 && (j as usize) < nbins).then_some((j as usize, w))
            })
            .collect();
        let total: f64 = taps.iter().map(|t| t.1).sum();
        let mut a = Array2::zeros((self.channels(), taps.len()));
        for (c, &(j, w)) in taps.iter().enumerate() {
            let s = (w / total).sqrt();
            for p in 0..self.channels() {
                a[[p, c]] = self.coeffs[[p, j]] * s;
            }
        }
        a
    }

    /// The (smoothed) Hermitian spectral matrix at bin `k` (frequency `freqs()[k]`).
    pub fn matrix(&self, k: usize) -> Array2<Complex64> {
        let a = self.window(k);
        let p = a.nrows();
        let mut s = Array2::zeros((p, p));
        for i in 0..p {
            let ai = a.row(i);
            s[[i, i]] = Complex64::new(ai.iter().map(|z| z.norm_sqr()).sum(), 0.0);
            for j in i + 1..p {
                let v: Complex64 = ai.iter().zip(a.row(j)).map(|(x, y)| x * y.conj()).sum();
                s[[i, j]] = v;
                s[[j, i]] = v.conj();
            }
        }
        s
    }
}

/// Raw periodogram of mean-centred channels.
pub fn periodogram(series: &MultivariateSeries) -> Result<SpectralStack> {
    periodogram_with(series, Preprocess::Center)
}

pub fn periodogram_with(series: &MultivariateSeries, pre: Preprocess) -> Result<SpectralStack> {
    let (p, t) = series.data.dim();
    if t < 8 {
        return Err(domain(format!("need at least 8 samples, got {t}")));
    }
    if p == 0 {
        return Err(domain("series has no channels"));
    }
    for (ch, row) in series.data.axis_iter(Axis(0)).enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("channel {ch} has non-finite samples")));
        }
        if row.iter().all(|&v| v == row[0]) {
            return Err(Error::Degenerate(format!("channel {ch} is constant")));
        }
    }
    let nbins = t / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t);
    let scale = 1.0 / (t as f64).sqrt();
    let mut coeffs = Array2::zeros((p, nbins));
    let mut buf = vec![Complex64::new(0.0, 0.0); t];
    for (ch, row) in series.data.axis_iter(Axis(0)).enumerate() {
        let x = preprocess(row.as_slice().map(<[f64]>::to_vec).unwrap_or_else(|| row.to_vec()), pre);
        for (b, v) in buf.iter_mut().zip(&x) {
            *b = Complex64::new(*v, 0.0);
        }
        fft.process(&mut buf);
        for k in 0..nbins {
            coeffs[[ch, k]] = buf[k + 1] * scale;
        }
    }
    Ok(SpectralStack {
        freqs: (1..=nbins).map(|k| k as f64 / t as f64).collect(),
        coeffs,
        kernel: None,
        sample_len: t,
    })
}

fn preprocess(mut x: Vec<f64>, pre: Preprocess) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    match pre {
        Preprocess::Center => x.iter_mut().for_each(|v| *v -= mean),
        Preprocess::Detrend => {
            let tbar = (n - 1.0) / 2.0;
            let sxx: f64 = (0..x.len()).map(|t| (t as f64 - tbar).powi(2)).sum();
            let sxy: f64 = x.iter().enumerate().map(|(t, v)| (t as f64 - tbar) * (v - mean)).sum();
            let slope = sxy / sxx;
            for (t, v) in x.iter_mut().enumerate() {
                *v -= mean + slope * (t as f64 - tbar);
            }
        }
    }
    x
}

/// Modified-Daniell smoothing with half-width `bandwidth`,
/// `1 <= bandwidth < ⌊T/4⌋`.
pub fn smooth(stack: &SpectralStack, bandwidth: usize) -> Result<SpectralStack> {
    let limit = stack.sample_len / 4;
    if bandwidth == 0 || bandwidth >= limit {
        return Err(domain(format!(
            "smoothing bandwidth must satisfy 1 <= h < {limit} (T/4), got {bandwidth}; \
             an unsmoothed periodogram has coherence identically 1"
        )));
    }
    smooth_with(stack, Kernel::ModifiedDaniell { half_width: bandwidth })
}

/// Smoothing with an explicit kernel. Near the ends of the frequency grid the
/// kernel is truncated and renormalised.
pub fn smooth_with(stack: &SpectralStack, kernel: Kernel) -> Result<SpectralStack> {
    if kernel.half_width() == 0 {
        return Err(domain("kernel half-width must be at least 1"));
    }
    Ok(SpectralStack {
        kernel: Some(kernel),
        ..stack.clone()
    })
}

/// Frequency band in Hz, closed on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub const LOW: Band = Band { lo_hz: 1.0, hi_hz: 7.5 };
    pub const MIDDLE: Band = Band { lo_hz: 7.5, hi_hz: 15.0 };
    pub const HIGH: Band = Band { lo_hz: 15.0, hi_hz: 30.0 };

    pub fn new(lo_hz: f64, hi_hz: f64) -> Result<Self> {
        if !(lo_hz.is_finite() && hi_hz.is_finite() && lo_hz > 0.0 && hi_hz >= lo_hz) {
            return Err(domain(format!("invalid band [{lo_hz}, {hi_hz}] Hz")));
        }
        Ok(Self { lo_hz, hi_hz })
    }

    /// Bin indices of `stack` whose frequency lies in the band.
    pub fn bins(&self, stack: &SpectralStack, sampling_rate_hz: f64) -> Vec<usize> {
        stack
            .freqs()
            .iter()
            .enumerate()
            .filter(|(_, &f)| {
                let hz = f * sampling_rate_hz;
                hz >= self.lo_hz && hz <= self.hi_hz
            })
            .map(|(k, _)| k)
            .collect()
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo_hz, self.hi_hz)
    }
}

impl FromStr for Band {
    type Err = Error;

    /// `lo:hi` in Hz, or one of `low`, `middle`, `high`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => return Ok(Band::LOW),
            "middle" => return Ok(Band::MIDDLE),
            "high" => return Ok(Band::HIGH),
            _ => {}
        }
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| domain(format!("band must be `lo:hi`, got `{s}`")))?;
        let lo = lo.trim().parse().map_err(|_| domain(format!("bad band edge `{lo}`")))?;
        let hi = hi.trim().parse().map_err(|_| domain(format!("bad band edge `{hi}`")))?;
        Band::new(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrices {
    pub band: Band,
    /// Number of Fourier bins averaged.
    pub bins: usize,
    pub coherence: Array2<f64>,
    pub distance: Array2<f64>,
}

/// Coherence `|f_pq|^2 / (f_pp f_qq)` at one bin, from the stack's matrix.
pub fn coherence_at(stack: &SpectralStack, k: usize) -> Result<Array2<f64>> {
    let s = stack.matrix(k);
    coherence_from_matrix(&s).map_err(|ch| {
        Error::Degenerate(format!(
            "auto-spectrum of channel {ch} is <= {MIN_AUTO_SPECTRUM} at {} cycles/sample",
            stack.freqs()[k]
        ))
    })
}

fn coherence_from_matrix(s: &Array2<Complex64>) -> std::result::Result<Array2<f64>, usize> {
    let p = s.nrows();
    let diag: Vec<f64> = (0..p).map(|i| s[[i, i]].re).collect();
    if let Some(ch) = diag.iter().position(|&d| d <= MIN_AUTO_SPECTRUM) {
        return Err(ch);
    }
    let mut c = Array2::zeros((p, p));
    for i in 0..p {
        c[[i, i]] = 1.0;
        for j in i + 1..p {
            let v = (s[[i, j]].norm_sqr() / (diag[i] * diag[j])).clamp(0.0, 1.0);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    Ok(c)
}

/// Band-averaged coherence and the distance `1 - coherence`.
///
/// The stack must be smoothed; the band must contain at least one bin.
pub fn band_coherence(stack: &SpectralStack, band: Band, sampling_rate_hz: f64) -> Result<BandMatrices> {
    if stack.kernel().is_none() {
        return Err(domain("band coherence needs a smoothed spectrum (bandwidth >= 1)"));
    }
    let nyquist = sampling_rate_hz / 2.0;
    if !(band.lo_hz > 0.0 && band.hi_hz < nyquist) {
        return Err(domain(format!("band {band} Hz must lie inside (0, {nyquist}) Hz")));
    }
    let bins = band.bins(stack, sampling_rate_hz);
    if bins.is_empty() {
        return Err(Error::EmptyBand {
            lo: band.lo_hz,
            hi: band.hi_hz,
        });
    }
    let p = stack.channels();
    let partials: Vec<Result<Array2<f64>>> = bins
        .par_chunks(BIN_CHUNK)
        .map(|chunk| {
            let mut acc = Array2::<f64>::zeros((p, p));
            for &k in chunk {
                acc += &coherence_at(stack, k)?;
            }
            Ok(acc)
        })
        .collect();
    let mut coherence = Array2::<f64>::zeros((p, p));
    for part in partials {
        coherence += &part?;
    }
    coherence /= bins.len() as f64;
    for i in 0..p {
        coherence[[i, i]] = 1.0;
        for j in i + 1..p {
            let v = coherence[[i, j]].clamp(0.0, 1.0);
            coherence[[i, j]] = v;
            coherence[[j, i]] = v;
        }
    }
    let distance = coherence.mapv(|c| 1.0 - c);
    Ok(BandMatrices {
        band,
        bins: bins.len(),
        coherence,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn series(data: Array2<f64>) -> MultivariateSeries {
        MultivariateSeries::new(data, 100.0).unwrap()
    }

    fn white(p: usize, t: usize, seed: u64) -> Array2<f64> {
        let mut r = rng::stream(seed, 0);
        Array2::from_shape_fn((p, t), |_| r.sample(StandardNormal))
    }

    #[test]
    fn direct_dft_agrees_with_fft() {
        let t = 64;
        let x = white(1, t, 1);
        let stack = periodogram(&series(x.clone())).unwrap();
        let mean = x.row(0).sum() / t as f64;
        for k in 1..=t / 2 {
            let mut d = Complex64::new(0.0, 0.0);
            for (n, v) in x.row(0).iter().enumerate() {
                let ang = -2.0 * PI * k as f64 * n as f64 / t as f64;
                d += Complex64::from_polar(v - mean, ang);
            }
            d /= (t as f64).sqrt();
            assert!((stack.coefficients()[[0, k - 1]] - d).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_over_half_spectrum() {
        let t = 64;
        let x = white(3, t, 2);
        let stack = periodogram(&series(x.clone())).unwrap();
        for p in 0..3 {
            let row = x.row(p);
            let mean = row.sum() / t as f64;
            let ss: f64 = row.iter().map(|v| (v - mean).powi(2)).sum();
            let diag: Vec<f64> = (0..stack.len()).map(|k| stack.matrix(k)[[p, p]].re).collect();
            // bins 1..T/2-1 appear twice in the full spectrum, Nyquist once
            let total = 2.0 * diag[..t / 2 - 1].iter().sum::<f64>() + diag[t / 2 - 1];
            assert!((total - ss).abs() < 1e-10 * ss);
        }
    }

    #[test]
    fn cosine_concentrates_at_its_bin() {
        let t = 128;
        let k0 = 9;
        let x = Array2::from_shape_fn((1, t), |(_, n)| (2.0 * PI * k0 as f64 * n as f64 / t as f64).cos());
        let stack = periodogram(&series(x)).unwrap();
        let diag: Vec<f64> = (0..stack.len()).map(|k| stack.matrix(k)[[0, 0]].re).collect();
        let total: f64 = diag.iter().sum();
        assert!((diag[k0 - 1] / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raw_periodogram_is_rank_one() {
        let mut x = white(2, 64, 3);
        let first = x.row(0).to_owned();
        x.row_mut(1).assign(&first);
        let stack = periodogram(&series(x)).unwrap();
        for k in 0..stack.len() {
            let m = stack.matrix(k);
            let gm = (m[[0, 0]].re * m[[1, 1]].re).sqrt();
            assert!((m[[0, 1]].norm() - gm).abs() <= 1e-12 * gm.max(1.0));
        }
        // raw coherence is 1 for any pair
        let y = white(3, 64, 4);
        let raw = periodogram(&series(y)).unwrap();
        let c = coherence_at(&raw, 5).unwrap();
        assert!(c.iter().all(|&v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn constant_channel_is_degenerate() {
        let mut x = white(2, 32, 5);
        x.row_mut(1).fill(3.0);
        assert!(matches!(periodogram(&series(x)), Err(Error::Degenerate(_))));
        assert!(periodogram(&series(white(1, 7, 1))).is_err());
    }

    #[test]
    fn kernel_weights_sum_to_one() {
        for m in 1..6 {
            for k in [Kernel::ModifiedDaniell { half_width: m }, Kernel::Flat { half_width: m }] {
                let w = k.weights();
                assert_eq!(w.len(), 2 * m + 1);
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
                assert!(w.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn bandwidth_validation() {
        let stack = periodogram(&series(white(2, 64, 6))).unwrap();
        assert!(smooth(&stack, 0).is_err());
        assert!(smooth(&stack, 16).is_err());
        assert!(smooth(&stack, 15).is_ok());
        assert!(band_coherence(&stack, Band::MIDDLE, 100.0).is_err());
    }

    #[test]
    fn flat_kernel_covering_everything_gives_grand_average() {
        let stack = periodogram(&series(white(3, 64, 7))).unwrap();
        let n = stack.len();
        let flat = smooth_with(&stack, Kernel::Flat { half_width: n }).unwrap();
        let mut grand = Array2::<Complex64>::zeros((3, 3));
        for k in 0..n {
            grand += &stack.matrix(k);
        }
        grand /= Complex64::new(n as f64, 0.0);
        for k in 0..n {
            let m = flat.matrix(k);
            assert!(m.iter().zip(grand.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn smoothed_matrices_are_hermitian_and_psd() {
        let stack = smooth(&periodogram(&series(white(4, 256, 8))).unwrap(), 5).unwrap();
        for k in [0, 10, stack.len() - 1] {
            let m = stack.matrix(k);
            for i in 0..4 {
                assert_eq!(m[[i, i]].im, 0.0);
                assert!(m[[i, i]].re >= 0.0);
                for j in 0..4 {
                    assert_eq!(m[[i, j]], m[[j, i]].conj());
                }
            }
            // every 2x2 principal minor is nonnegative
            for i in 0..4 {
                for j in i + 1..4 {
                    let det = m[[i, i]].re * m[[j, j]].re - m[[i, j]].norm_sqr();
                    assert!(det >= -1e-8);
                }
            }
        }
    }

    #[test]
    fn smoothing_shrinks_variance_by_kernel_energy() {
        // Monte-Carlo over 200 white-noise seeds at an interior bin.
        let (t, h, bin) = (512, 4, 100);
        let energy: f64 = Kernel::ModifiedDaniell { half_width: h }.weights().iter().map(|w| w * w).sum();
        let (mut raw, mut sm) = (Vec::new(), Vec::new());
        for seed in 0..200 {
            let stack = periodogram(&series(white(1, t, 1000 + seed))).unwrap();
            raw.push(stack.matrix(bin)[[0, 0]].re);
            sm.push(smooth(&stack, h).unwrap().matrix(bin)[[0, 0]].re);
        }
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let ratio = var(&sm) / var(&raw);
        assert!((ratio / energy - 1.0).abs() < 0.3, "ratio {ratio}, expected {energy}");
    }

    #[test]
    fn coherence_is_scale_invariant() {
        let mut x = white(3, 512, 9);
        for i in 0..512 {
            x[[1, i]] += 0.5 * x[[0, i]];
        }
        let band = Band::new(5.0, 40.0).unwrap();
        let a = band_coherence(&smooth(&periodogram(&series(x.clone())).unwrap(), 6).unwrap(), band, 100.0).unwrap();
        x.row_mut(1).mapv_inplace(|v| v * 37.5);
        x.row_mut(2).mapv_inplace(|v| v * 1e-3);
        let b = band_coherence(&smooth(&periodogram(&series(x)).unwrap(), 6).unwrap(), band, 100.0).unwrap();
        for (u, v) in a.coherence.iter().zip(b.coherence.iter()) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn band_matrices_invariants() {
        let stack = smooth(&periodogram(&series(white(5, 512, 10))).unwrap(), 8).unwrap();
        let m = band_coherence(&stack, Band::MIDDLE, 100.0).unwrap();
        for i in 0..5 {
            assert_eq!(m.coherence[[i, i]], 1.0);
            assert_eq!(m.distance[[i, i]], 0.0);
            for j in 0..5 {
                assert_eq!(m.coherence[[i, j]], m.coherence[[j, i]]);
                assert!((0.0..=1.0).contains(&m.distance[[i, j]]));
                assert_eq!(m.distance[[i, j]], 1.0 - m.coherence[[i, j]]);
            }
        }
    }

    #[test]
    fn band_errors() {
        let stack = smooth(&periodogram(&series(white(2, 64, 11))).unwrap(), 2).unwrap();
        // bins are 100/64 Hz apart
        let narrow = Band::new(10.0, 10.5).unwrap();
        assert!(matches!(band_coherence(&stack, narrow, 100.0), Err(Error::EmptyBand { .. })));
        assert!(band_coherence(&stack, Band::new(10.0, 60.0).unwrap(), 100.0).is_err());
    }

    #[test]
    fn band_parsing() {
        assert_eq!("7.5:15".parse::<Band>().unwrap(), Band::MIDDLE);
        assert_eq!("high".parse::<Band>().unwrap(), Band::HIGH);
        assert!("3".parse::<Band>().is_err());
        assert!("5:2".parse::<Band>().is_err());
    }

    #[test]
    fn detrending_removes_a_linear_ramp() {
        let t = 256;
        let mut x = white(1, t, 12);
        let base = periodogram(&series(x.clone())).unwrap();
        for i in 0..t {
            x[[0, i]] += 0.3 * i as f64;
        }
        let detrended = periodogram_with(&series(x), Preprocess::Detrend).unwrap();
        // the ramp would dominate bin 1 without detrending
        let a = base.matrix(0)[[0, 0]].re;
        let b = detrended.matrix(0)[[0, 0]].re;
        assert!(b < 10.0 * a.max(1.0));
    }
}
