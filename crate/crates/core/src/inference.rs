//! Replicate experiments: SNR sweeps and two-group bootstrap comparisons.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{PatternSpec, RunConfig};
use crate::error::{domain, Error, Result};
use crate::homology::TotalPersistence;
use crate::pipeline::{run_replicate, Model};
use crate::rng;

/// Seed of replicate `r` for master seed `seed`. Replicate 0 reuses the
/// master seed so a one-replicate run matches a plain generate/analyze.
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    seed.wrapping_add(replicate as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub snr: f64,
    pub replicate: usize,
    pub seed: u64,
    pub total: TotalPersistence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub snr_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub mean_p0: Vec<f64>,
    pub mean_p1: Vec<f64>,
    pub mean_p2: Vec<f64>,
    /// Grid-major: all replicates of the first SNR, then the next.
    pub runs: Vec<SweepRun>,
}

impl SweepResult {
    pub fn means(&self, dim: usize) -> &[f64] {
        match dim {
            0 => &self.mean_p0,
            1 => &self.mean_p1,
            _ => &self.mean_p2,
        }
    }

    /// Spearman correlation of the per-SNR means of `P_dim` with the SNR.
    pub fn trend(&self, dim: usize) -> f64 {
        spearman(&self.snr_grid, self.means(dim))
    }
}

/// Mean total persistence over `replicates` runs at every grid point.
///
/// Replicate `r` uses [`replicate_seed`] at every SNR, so the grid points
/// share latent panels and differ only in the noise level.
pub fn snr_sweep(cfg: &RunConfig, snr_grid: &[f64], replicates: usize, seed: u64) -> Result<SweepResult> {
    if snr_grid.is_empty() {
        return Err(domain("snr grid is empty"));
    }
    if snr_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("snr grid must be strictly increasing"));
    }
    if replicates == 0 {
        return Err(domain("need at least one replicate"));
    }
    let model = Model::new(cfg)?;
    let jobs: Vec<(f64, usize)> = snr_grid
        .iter()
        .flat_map(|&s| (0..replicates).map(move |r| (s, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(snr, replicate)| {
            let seed = replicate_seed(seed, replicate);
            let total = run_replicate(&model, cfg, seed, Some(snr))
                .map_err(|e| Error::Job {
                    snr,
                    replicate,
                    source: Box::new(e),
                })?
                .total;
            log::debug!("snr={snr} replicate={replicate} {total:?}");
            Ok(SweepRun {
                snr,
                replicate,
                seed,
                total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut means = [Vec::new(), Vec::new(), Vec::new()];
    for chunk in runs.chunks(replicates) {
        for (d, m) in means.iter_mut().enumerate() {
            m.push(chunk.iter().map(|r| r.total.get(d)).sum::<f64>() / replicates as f64);
        }
    }
    let [mean_p0, mean_p1, mean_p2] = means;
    Ok(SweepResult {
        snr_grid: snr_grid.to_vec(),
        replicates,
        seed,
        mean_p0,
        mean_p1,
        mean_p2,
        runs,
    })
}

/// Total persistence of `n` independent replicates of `pattern`. `group_tag`
/// keeps the groups' random streams apart.
pub fn group_summaries(
    cfg: &RunConfig,
    pattern: &PatternSpec,
    n: usize,
    seed: u64,
    group_tag: u64,
) -> Result<Vec<TotalPersistence>> {
    let model = Model::with_pattern(cfg, pattern)?;
    let base = rng::derive_seed(seed, group_tag);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let snr = cfg.snr.unwrap_or(f64::NAN);
            run_replicate(&model, cfg, replicate_seed(base, i), cfg.snr)
                .map(|a| a.total)
                .map_err(|e| Error::Job {
                    snr,
                    replicate: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// `n` draws with replacement from `0..n`.
pub fn resample_indices(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBootstrap {
    pub label: String,
    /// Per-replicate summaries.
    pub samples: Vec<TotalPersistence>,
    /// One group mean per bootstrap draw.
    pub means: Vec<TotalPersistence>,
}

impl GroupBootstrap {
    pub fn means_of(&self, dim: usize) -> Vec<f64> {
        self.means.iter().map(|t| t.get(dim)).collect()
    }

    pub fn summary(&self, dim: usize) -> FiveNumber {
        FiveNumber::of(&self.means_of(dim))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub n: usize,
    pub b: usize,
    pub seed: u64,
    pub groups: [GroupBootstrap; 2],
}

impl BootstrapResult {
    /// Whether the two groups' interquartile ranges of bootstrap means overlap.
    pub fn iqr_overlap(&self, dim: usize) -> bool {
        self.groups[0].summary(dim).iqr_overlaps(&self.groups[1].summary(dim))
    }
}

fn bootstrap_means(samples: &[TotalPersistence], b: usize, rng: &mut ChaCha8Rng) -> Vec<TotalPersistence> {
    let n = samples.len();
    (0..b)
        .map(|_| {
            let mut acc = [0.0; 3];
            for i in resample_indices(rng, n) {
                for (d, a) in acc.iter_mut().enumerate() {
                    *a += samples[i].get(d);
                }
            }
            TotalPersistence {
                p0: acc[0] / n as f64,
                p1: acc[1] / n as f64,
                p2: acc[2] / n as f64,
            }
        })
        .collect()
}

/// `b` bootstrap group means for each group, resampling `N` of `N` with
/// replacement. Both groups must have the same size.
pub fn bootstrap_compare(
    group_one: &[TotalPersistence],
    group_two: &[TotalPersistence],
    b: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let n = group_one.len();
    if n < 2 || group_two.len() < 2 {
        return Err(domain(format!(
            "each group needs at least 2 summaries, got {} and {}",
            n,
            group_two.len()
        )));
    }
    if group_two.len() != n {
        return Err(domain(format!("group sizes differ: {} vs {}", n, group_two.len())));
    }
    if b == 0 {
        return Err(domain("need at least one bootstrap draw"));
    }
    let base = rng::derive_seed(seed, rng::tag::BOOTSTRAP);
    let groups = [(group_one, "one"), (group_two, "two")]
        .into_iter()
        .enumerate()
        .map(|(g, (samples, label))| {
            let mut r = rng::stream(base, g as u64);
            GroupBootstrap {
                label: label.to_string(),
                samples: samples.to_vec(),
                means: bootstrap_means(samples, b, &mut r),
            }
        })
        .collect::<Vec<_>>();
    let [g1, g2]: [GroupBootstrap; 2] = groups.try_into().expect("two groups");
    Ok(BootstrapResult {
        n,
        b,
        seed,
        groups: [g1, g2],
    })
}

/// Simulate both groups of `cfg` and compare them.
pub fn run_bootstrap(cfg: &RunConfig) -> Result<BootstrapResult> {
    let compare = cfg.compare.ok_or(Error::Config {
        field: "compare",
        msg: "bootstrap needs a second pattern".into(),
    })?;
    let one = group_summaries(cfg, &cfg.pattern, cfg.boot_n, cfg.seed, rng::tag::GROUP_ONE)?;
    let two = group_summaries(cfg, &compare, cfg.boot_n, cfg.seed, rng::tag::GROUP_TWO)?;
    let mut res = bootstrap_compare(&one, &two, cfg.boot_b, cfg.seed)?;
    res.groups[0].label = cfg.pattern.to_string();
    res.groups[1].label = compare.to_string();
    Ok(res)
}

/// Boxplot statistics; quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Panics on an empty slice.
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "five-number summary of an empty sample");
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        }
    }

    pub fn iqr_overlaps(&self, other: &FiveNumber) -> bool {
        self.q1 <= other.q3 && other.q1 <= self.q3
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Ranks starting at 1; ties share the average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. NaN if either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    pearson(&ranks(x), &ranks(y))
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// True when the `k`-th largest persistence exceeds `ratio` times the next
/// one (zero if absent). `sorted_desc` must be in decreasing order.
pub fn gap_dominant(sorted_desc: &[f64], k: usize, ratio: f64) -> bool {
    if k == 0 || sorted_desc.len() < k {
        return false;
    }
    sorted_desc[k - 1] > ratio * sorted_desc.get(k).copied().unwrap_or(0.0)
}
