use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toposim_bench::{band_matrices, config, series};
use toposim_core::config::PatternSpec;
use toposim_core::graph::Surface;
use toposim_core::latent::{ar2_from_peak, simulate_latents, DEFAULT_BURN_IN};
use toposim_core::spectral::{band_coherence, periodogram, smooth};
use toposim_core::{persistence, rips_complex};

fn latents(c: &mut Criterion) {
    let params = ar2_from_peak(10.0, 100.0, 1.05, 1.0).unwrap();
    let mut g = c.benchmark_group("latents");
    for p in [30usize, 153] {
        g.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| simulate_latents(&params, p, 1 << 13, 1, DEFAULT_BURN_IN).unwrap())
        });
    }
    g.finish();
}

fn coherence(c: &mut Criterion) {
    let cfg = config(PatternSpec::CircularLadder { rungs: 15 }, 2, 1 << 13);
    let s = series(&cfg, 1);
    let mut g = c.benchmark_group("coherence");
    g.bench_function("periodogram_p30", |b| b.iter(|| periodogram(&s).unwrap()));
    let raw = periodogram(&s).unwrap();
    g.bench_function("smooth_and_band_p30", |b| {
        b.iter(|| {
            let st = smooth(&raw, cfg.bandwidth()).unwrap();
            band_coherence(&st, cfg.band, cfg.sr).unwrap()
        })
    });
    g.finish();
}

fn homology(c: &mut Criterion) {
    let mut g = c.benchmark_group("persistence");
    g.sample_size(10);
    let one = band_matrices(&config(PatternSpec::CircularLadder { rungs: 15 }, 2, 1 << 13), 1);
    g.bench_function("cl15_max_dim1", |b| {
        b.iter(|| persistence(&rips_complex(&one.distance, 1, 1.0).unwrap()))
    });
    let sphere = PatternSpec::Grid { surface: Surface::Sphere, rows: 8, cols: 14 };
    let sph = band_matrices(&config(sphere, 3, 1 << 12), 1);
    g.bench_function("sphere86_max_dim2", |b| {
        b.iter(|| persistence(&rips_complex(&sph.distance, 2, 1.0).unwrap()))
    });
    let torus = PatternSpec::Grid { surface: Surface::Torus, rows: 9, cols: 17 };
    let tor = band_matrices(&config(torus, 3, 1 << 13), 1);
    g.bench_function("torus153_max_dim2", |b| {
        b.iter(|| persistence(&rips_complex(&tor.distance, 2, 1.0).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, latents, coherence, homology);
criterion_main!(benches);
