//! Run configuration and the bundled presets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{circular_ladder, double_circular_ladder, quotient_grid, PatternGraph, Surface};
use crate::homology::{DEFAULT_THRESHOLD, MAX_HOMOLOGY_DIM};
use crate::latent::{ar2_from_peak, Ar2Params, DEFAULT_ROOT_MAGNITUDE};
use crate::spectral::Band;

/// Which dependence pattern to build.
///
/// The compact text form is `circular-ladder:15`, `double-ladder:8,8`,
/// `torus:9x17`, `sphere:8x14` or `cylinder:3x5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternSpec {
    CircularLadder { rungs: usize },
    DoubleLadder { lobes: [usize; 2] },
    Grid { surface: Surface, rows: usize, cols: usize },
}

impl PatternSpec {
    pub fn build(&self) -> Result<PatternGraph> {
        match *self {
            PatternSpec::CircularLadder { rungs } => circular_ladder(rungs),
            PatternSpec::DoubleLadder { lobes } => double_circular_ladder(lobes),
            PatternSpec::Grid { surface, rows, cols } => quotient_grid(rows, cols, surface),
        }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternSpec::CircularLadder { rungs } => write!(f, "circular-ladder:{rungs}"),
            PatternSpec::DoubleLadder { lobes } => write!(f, "double-ladder:{},{}", lobes[0], lobes[1]),
            PatternSpec::Grid { surface, rows, cols } => write!(f, "{surface}:{rows}x{cols}"),
        }
    }
}

fn pattern_err(msg: String) -> Error {
    Error::Config { field: "pattern", msg }
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| pattern_err(format!("`{s}` is not a nonnegative integer")))
}

impl FromStr for PatternSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| pattern_err(format!("expected `kind:params`, got `{s}`")))?;
        match kind {
            "circular-ladder" | "cl" => Ok(PatternSpec::CircularLadder { rungs: parse_count(args)? }),
            "double-ladder" | "dcl" => {
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| pattern_err(format!("double ladder needs `a,b` lobes, got `{args}`")))?;
                Ok(PatternSpec::DoubleLadder {
                    lobes: [parse_count(a)?, parse_count(b)?],
                })
            }
            _ => {
                let surface: Surface = kind.parse().map_err(|_| pattern_err(format!("unknown pattern `{kind}`")))?;
                let (r, c) = args
                    .split_once('x')
                    .ok_or_else(|| pattern_err(format!("grid needs `rowsxcols`, got `{args}`")))?;
                Ok(PatternSpec::Grid {
                    surface,
                    rows: parse_count(r)?,
                    cols: parse_count(c)?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesFormat {
    #[default]
    Csv,
    Bin,
}

impl FromStr for SeriesFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "bin" => Ok(Self::Bin),
            other => Err(Error::Config {
                field: "format",
                msg: format!("expected `csv` or `bin`, got `{other}`"),
            }),
        }
    }
}

/// Everything a run needs. Fields that only some subcommands use carry
/// defaults so one file can drive all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pattern: PatternSpec,
    /// Second group's pattern for bootstrap comparisons.
    pub compare: Option<PatternSpec>,
    /// Hop cutoff of the mixing weights.
    pub k: usize,
    pub band: Band,
    pub peak_hz: f64,
    pub sr: f64,
    pub root_mag: f64,
    pub samples: usize,
    pub snr: Option<f64>,
    /// Half-width of the smoothing kernel in bins; `None` picks `ceil(sqrt(T)/4)`.
    pub smooth_bw: Option<usize>,
    pub max_dim: usize,
    /// Rips threshold and death value of essential classes.
    pub threshold: f64,
    pub snr_grid: Vec<f64>,
    pub replicates: usize,
    pub boot_n: usize,
    pub boot_b: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: SeriesFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pattern: PatternSpec::CircularLadder { rungs: 15 },
            compare: None,
            k: 2,
            band: Band::MIDDLE,
            peak_hz: 10.0,
            sr: 100.0,
            root_mag: DEFAULT_ROOT_MAGNITUDE,
            samples: 1 << 13,
            snr: None,
            smooth_bw: None,
            max_dim: 1,
            threshold: DEFAULT_THRESHOLD,
            snr_grid: Vec::new(),
            replicates: 100,
            boot_n: 50,
            boot_b: 1000,
            seed: 1,
            out: PathBuf::from("out"),
            format: SeriesFormat::Csv,
        }
    }
}

fn bad(field: &'static str, msg: impl Into<String>) -> Error {
    Error::Config { field, msg: msg.into() }
}

impl RunConfig {
    /// Check every field against the preconditions of the stage that
    /// consumes it, so no computation starts on an invalid configuration.
    pub fn validate(&self) -> Result<()> {
        let graph = self.pattern.build().map_err(|e| bad("pattern", e.to_string()))?;
        if let Some(c) = &self.compare {
            let g2 = c.build().map_err(|e| bad("compare", e.to_string()))?;
            if g2.node_count() != graph.node_count() {
                return Err(bad(
                    "compare",
                    format!("{} nodes, but pattern has {}", g2.node_count(), graph.node_count()),
                ));
            }
        }
        if self.k == 0 {
            return Err(bad("k", "hop cutoff must be at least 1"));
        }
        if !(self.sr.is_finite() && self.sr > 0.0) {
            return Err(bad("sr", format!("sampling rate must be positive, got {}", self.sr)));
        }
        self.ar2().map_err(|e| match e {
            Error::Domain(m) if m.contains("root magnitude") => bad("root_mag", m),
            Error::Domain(m) => bad("peak_hz", m),
            other => other,
        })?;
        if self.samples < 16 {
            return Err(bad("samples", format!("need at least 16 samples, got {}", self.samples)));
        }
        if u32::try_from(self.samples).is_err() {
            return Err(bad("samples", "too many samples"));
        }
        let nyquist = self.sr / 2.0;
        if !(self.band.lo_hz > 0.0 && self.band.lo_hz <= self.band.hi_hz && self.band.hi_hz < nyquist) {
            return Err(bad("band", format!("band {} Hz must lie inside (0, {nyquist}) Hz", self.band)));
        }
        let df = self.sr / self.samples as f64;
        let first = (self.band.lo_hz / df).ceil();
        if first * df > self.band.hi_hz || first < 1.0 {
            return Err(bad("band", format!("band {} Hz contains no Fourier frequency", self.band)));
        }
        let bw = self.bandwidth();
        if bw == 0 || bw >= self.samples / 4 {
            return Err(bad("smooth_bw", format!("bandwidth must lie in [1, {}), got {bw}", self.samples / 4)));
        }
        if self.max_dim > MAX_HOMOLOGY_DIM {
            return Err(bad("max_dim", format!("at most {MAX_HOMOLOGY_DIM}, got {}", self.max_dim)));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(bad("threshold", format!("must be positive, got {}", self.threshold)));
        }
        if let Some(s) = self.snr {
            if !(s.is_finite() && s > 0.0) {
                return Err(bad("snr", format!("must be positive and finite, got {s}")));
            }
        }
        if self.snr_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(bad("snr_grid", "values must be positive and finite"));
        }
        if self.snr_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("snr_grid", "grid must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(bad("replicates", "need at least 1 replicate"));
        }
        if self.boot_n < 2 {
            return Err(bad("boot_n", format!("need at least 2 per group, got {}", self.boot_n)));
        }
        if self.boot_b == 0 {
            return Err(bad("boot_b", "need at least 1 bootstrap draw"));
        }
        Ok(())
    }

    pub fn ar2(&self) -> Result<Ar2Params> {
        ar2_from_peak(self.peak_hz, self.sr, self.root_mag, 1.0)
    }

    pub fn bandwidth(&self) -> usize {
        self.smooth_bw
            .unwrap_or_else(|| crate::spectral::default_bandwidth(self.samples))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Named paper-scale runs. Figure names are accepted as aliases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    OneCycle,
    TwoCycle,
    Torus,
    SphereSweep,
    BootstrapCompare,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::OneCycle,
        Preset::TwoCycle,
        Preset::Torus,
        Preset::SphereSweep,
        Preset::BootstrapCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::OneCycle => "one-cycle",
            Preset::TwoCycle => "two-cycle",
            Preset::Torus => "torus",
            Preset::SphereSweep => "sphere-sweep",
            Preset::BootstrapCompare => "bootstrap-compare",
        }
    }

    /// The subcommand a preset is meant for.
    pub fn command(self) -> &'static str {
        match self {
            Preset::SphereSweep => "sweep",
            Preset::BootstrapCompare => "bootstrap",
            _ => "analyze",
        }
    }

    pub fn config(self) -> RunConfig {
        let base = RunConfig::default();
        match self {
            Preset::OneCycle => base,
            Preset::TwoCycle => RunConfig {
                pattern: PatternSpec::DoubleLadder { lobes: [8, 8] },
                ..base
            },
            Preset::Torus => RunConfig {
                pattern: PatternSpec::Grid {
                    surface: Surface::Torus,
                    rows: 9,
                    cols: 17,
                },
                k: 3,
                max_dim: 2,
                ..base
            },
            Preset::SphereSweep => RunConfig {
                pattern: PatternSpec::Grid {
                    surface: Surface::Sphere,
                    rows: 8,
                    cols: 14,
                },
                k: 3,
                max_dim: 2,
                samples: 1 << 12,
                snr_grid: geomspace(0.3, 30.0, 8),
                replicates: 100,
                ..base
            },
            Preset::BootstrapCompare => RunConfig {
                compare: Some(PatternSpec::DoubleLadder { lobes: [8, 8] }),
                samples: 1 << 12,
                boot_n: 50,
                boot_b: 1000,
                ..base
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-cycle" | "fig7" => Ok(Preset::OneCycle),
            "two-cycle" | "fig10" => Ok(Preset::TwoCycle),
            "torus" | "fig14" => Ok(Preset::Torus),
            "sphere-sweep" | "fig16" => Ok(Preset::SphereSweep),
            "bootstrap-compare" | "fig17" => Ok(Preset::BootstrapCompare),
            other => Err(Error::Config {
                field: "preset",
                msg: format!("unknown preset `{other}`"),
            }),
        }
    }
}

/// `n` points spaced evenly in log scale from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}
