use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use toposim_core::config::{PatternSpec, Preset, RunConfig, SeriesFormat};
use toposim_core::graph::Surface;
use toposim_core::spectral::Band;

#[derive(Debug, Parser)]
#[command(name = "toposim", version, about = "Simulate and analyse topological dependence patterns in multivariate time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a series and write it with a metadata file.
    Generate(RunArgs),
    /// Coherence, Rips persistence and total persistence of a series.
    Analyze {
        /// Series file (CSV or binary). Simulated from the config when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mean total persistence over a grid of SNR values.
    Sweep(RunArgs),
    /// Bootstrap comparison of two patterns' total persistence.
    Bootstrap(RunArgs),
    /// Write a pattern graph, its edge list and mixing weights.
    Graph(RunArgs),
}

/// Flags shared by every subcommand. Precedence: defaults, then `--preset`,
/// then `--config`, then the remaining flags.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file with any subset of the run fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// one-cycle, two-cycle, torus, sphere-sweep, bootstrap-compare (or fig7/fig10/fig14/fig16/fig17).
    #[arg(long)]
    pub preset: Option<String>,
    /// circular-ladder, double-ladder, torus, sphere, cylinder; or a compact form such as `torus:9x17`.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Ring length; two comma-separated values for a double ladder.
    #[arg(long, value_delimiter = ',')]
    pub rungs: Option<Vec<usize>>,
    /// Second pattern for `bootstrap`, in compact form.
    #[arg(long)]
    pub compare: Option<String>,
    /// Hop cutoff of the mixing weights.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub peak_hz: Option<f64>,
    #[arg(long)]
    pub sr: Option<f64>,
    #[arg(long)]
    pub root_mag: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `lo:hi` in Hz, or low/middle/high.
    #[arg(long)]
    pub band: Option<String>,
    #[arg(long)]
    pub smooth_bw: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub snr_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub boot_n: Option<usize>,
    #[arg(long)]
    pub boot_b: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or bin
    #[arg(long)]
    pub format: Option<String>,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn pattern_with(base: PatternSpec, a: &RunArgs) -> Result<PatternSpec> {
    let mut p = match a.pattern.as_deref() {
        None => base,
        Some(s) if s.contains(':') => s.parse()?,
        Some("circular-ladder" | "cl") => match base {
            PatternSpec::CircularLadder { .. } => base,
            _ => PatternSpec::CircularLadder { rungs: 15 },
        },
        Some("double-ladder" | "dcl") => match base {
            PatternSpec::DoubleLadder { .. } => base,
            _ => PatternSpec::DoubleLadder { lobes: [8, 8] },
        },
        Some(kind) => {
            let surface: Surface = kind
                .parse()
                .with_context(|| format!("invalid config field `pattern`: unknown pattern `{kind}`"))?;
            match base {
                PatternSpec::Grid { rows, cols, .. } => PatternSpec::Grid { surface, rows, cols },
                _ => PatternSpec::Grid {
                    surface,
                    rows: 9,
                    cols: 17,
                },
            }
        }
    };
    match &mut p {
        PatternSpec::CircularLadder { rungs } => {
            if let Some(r) = &a.rungs {
                if r.len() != 1 {
                    bail!("invalid config field `rungs`: circular ladder takes one value");
                }
                *rungs = r[0];
            }
        }
        PatternSpec::DoubleLadder { lobes } => {
            if let Some(r) = &a.rungs {
                *lobes = match r.as_slice() {
                    [n] => [*n, *n],
                    [x, y] => [*x, *y],
                    _ => bail!("invalid config field `rungs`: double ladder takes one or two values"),
                };
            }
        }
        PatternSpec::Grid { rows, cols, .. } => {
            *rows = a.rows.unwrap_or(*rows);
            *cols = a.cols.unwrap_or(*cols);
        }
    }
    if !matches!(p, PatternSpec::Grid { .. }) && (a.rows.is_some() || a.cols.is_some()) {
        bail!("invalid config field `rows`: --rows/--cols apply only to grid patterns");
    }
    if matches!(p, PatternSpec::Grid { .. }) && a.rungs.is_some() {
        bail!("invalid config field `rungs`: --rungs applies only to ladder patterns");
    }
    Ok(p)
}

impl RunArgs {
    pub fn preset(&self) -> Result<Option<Preset>> {
        Ok(self.preset.as_deref().map(str::parse).transpose()?)
    }

    /// Layer preset, config file and flags into a validated config.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match self.preset()? {
            Some(p) => p.config(),
            None => RunConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let patch: Value =
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
            let mut base = serde_json::to_value(&cfg)?;
            merge(&mut base, patch);
            cfg = serde_json::from_value(base).with_context(|| format!("config {}", path.display()))?;
        }
        cfg.pattern = pattern_with(cfg.pattern, self)?;
        if let Some(c) = &self.compare {
            cfg.compare = Some(c.parse()?);
        }
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { cfg.$f = v.clone(); })*};
        }
        set!(k, peak_hz, sr, root_mag, samples, max_dim, threshold, replicates, boot_n, boot_b, seed, out, snr_grid);
        if let Some(v) = self.smooth_bw {
            cfg.smooth_bw = Some(v);
        }
        if let Some(v) = self.snr {
            cfg.snr = Some(v);
        }
        if let Some(b) = &self.band {
            cfg.band = b
                .parse::<Band>()
                .with_context(|| "invalid config field `band`".to_string())?;
        }
        if let Some(f) = &self.format {
            cfg.format = f.parse::<SeriesFormat>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
