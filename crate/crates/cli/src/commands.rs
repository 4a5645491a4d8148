use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use toposim_core::config::{RunConfig, SeriesFormat};
use toposim_core::graph::write_edge_list;
use toposim_core::inference::{run_bootstrap, snr_sweep, BootstrapResult, SweepResult};
use toposim_core::io::{self, check_csv, write_atomic};
use toposim_core::mixing::{check_channels, MultivariateSeries};
use toposim_core::pipeline::{analyze_with, Analysis, Model};
use toposim_core::svg;

enum Check<'a> {
    Csv(&'a str),
    Json,
    Svg,
    Series(&'a MultivariateSeries),
    Text,
}

/// Writes outputs into one directory and re-reads each to confirm it landed intact.
struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn put(&self, name: &str, bytes: &[u8], check: Check<'_>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let ok = match check {
            Check::Csv(header) => check_csv(&path, header).map(|_| ()).map_err(anyhow::Error::from),
            Check::Json => fs::read(&path)
                .map_err(anyhow::Error::from)
                .and_then(|b| serde_json::from_slice::<Value>(&b).map(|_| ()).map_err(Into::into)),
            Check::Svg => fs::read_to_string(&path).map_err(anyhow::Error::from).and_then(|s| {
                if s.starts_with("<svg") && s.trim_end().ends_with("</svg>") {
                    Ok(())
                } else {
                    bail!("malformed svg")
                }
            }),
            Check::Series(expected) => io::read_series(&path, expected.sampling_rate_hz)
                .map_err(anyhow::Error::from)
                .and_then(|s| {
                    if s.data == expected.data {
                        Ok(())
                    } else {
                        bail!("series read back differs from what was written")
                    }
                }),
            Check::Text => fs::metadata(&path).map(|_| ()).map_err(Into::into),
        };
        ok.with_context(|| format!("validating {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(name, text.as_bytes(), Check::Json)
    }
}

fn model(cfg: &RunConfig) -> Result<Model> {
    Ok(Model::new(cfg)?)
}

fn warnings(model: &Model, k: usize) -> Vec<String> {
    model.graph.detectability(k).iter().map(ToString::to_string).collect()
}

pub fn generate(cfg: &RunConfig) -> Result<()> {
    let model = model(cfg)?;
    let mut series = model.simulate(cfg.seed, cfg.snr)?;
    series.meta.band = Some(cfg.band.to_string());
    let out = Outputs::new(&cfg.out)?;
    let name = match cfg.format {
        SeriesFormat::Csv => {
            out.put("series.csv", io::series_to_csv(&series).as_bytes(), Check::Series(&series))?;
            "series.csv"
        }
        SeriesFormat::Bin => {
            out.put("series.bin", &io::series_to_bin(&series), Check::Series(&series))?;
            "series.bin"
        }
    };
    let ar2 = model.ar2;
    out.json(
        "meta.json",
        &json!({
            "config": cfg,
            "series": {
                "file": name,
                "channels": series.channels(),
                "samples": series.len(),
                "sampling_rate_hz": series.sampling_rate_hz,
                "meta": series.meta,
            },
            "derived": {
                "phi1": ar2.phi1,
                "phi2": ar2.phi2,
                "psi": ar2.phase,
                "root_magnitude": ar2.root_magnitude,
                "lag_one_autocorrelation": ar2.lag_one_autocorrelation(),
                "nodes": model.graph.node_count(),
                "edges": model.graph.edges().len(),
                "graph_diameter": model.graph.diameter(),
                "smoothing_bandwidth": cfg.bandwidth(),
            },
            "warnings": warnings(&model, cfg.k),
        }),
    )?;
    Ok(())
}

fn top(values: Vec<f64>, n: usize) -> Vec<f64> {
    values.into_iter().take(n).collect()
}

fn write_analysis(out: &Outputs, cfg: &RunConfig, a: &Analysis, source: Value) -> Result<()> {
    let m = &a.matrices;
    out.put("coherence.csv", io::matrix_to_csv(&m.coherence).as_bytes(), Check::Text)?;
    out.put("distance.csv", io::matrix_to_csv(&m.distance).as_bytes(), Check::Text)?;
    for name in ["coherence.csv", "distance.csv"] {
        let path = out.dir.join(name);
        let back = io::parse_matrix_csv(&fs::read_to_string(&path)?, &path)?;
        if back.nrows() != m.coherence.nrows() {
            bail!("validating {}: wrong size", path.display());
        }
    }
    out.put("diagram.csv", io::diagram_to_csv(&a.diagram).as_bytes(), Check::Csv("dim,birth,death,essential"))?;
    out.put("diagram.svg", svg::diagram_svg(&a.diagram).as_bytes(), Check::Svg)?;
    let dims: Vec<Value> = (0..=cfg.max_dim)
        .map(|d| {
            json!({
                "dim": d,
                "features": a.diagram.in_dim(d).count(),
                "essential": a.diagram.essential_count(d),
                "total_persistence": a.total.get(d),
                "top_persistences": top(a.diagram.persistences(d), 5),
            })
        })
        .collect();
    out.json(
        "summary.json",
        &json!({
            "source": source,
            "band": m.band.to_string(),
            "bins": m.bins,
            "smoothing_bandwidth": cfg.bandwidth(),
            "max_dim": cfg.max_dim,
            "essential_death_cap": a.diagram.cap,
            "total_persistence": a.total,
            "dimensions": dims,
        }),
    )?;
    Ok(())
}

pub fn analyze(cfg: &RunConfig, input: Option<&Path>) -> Result<()> {
    let (series, source) = match input {
        Some(path) => (
            io::read_series(path, cfg.sr)?,
            json!({ "input": path.display().to_string() }),
        ),
        None => {
            let model = model(cfg)?;
            let s = model.simulate(cfg.seed, cfg.snr)?;
            (s, json!({ "simulated": cfg, "warnings": warnings(&model, cfg.k) }))
        }
    };
    check_channels(&series)?;
    let a = analyze_with(&series, cfg)?;
    let out = Outputs::new(&cfg.out)?;
    write_analysis(&out, cfg, &a, source)
}

fn sweep_summary(cfg: &RunConfig, res: &SweepResult) -> Value {
    json!({
        "config": cfg,
        "snr_grid": res.snr_grid,
        "replicates": res.replicates,
        "seed": res.seed,
        "mean_p0": res.mean_p0,
        "mean_p1": res.mean_p1,
        "mean_p2": res.mean_p2,
        "spearman": {
            "p0": res.trend(0),
            "p1": res.trend(1),
            "p2": res.trend(2),
        },
    })
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let grid = match (cfg.snr_grid.is_empty(), cfg.snr) {
        (false, _) => cfg.snr_grid.clone(),
        (true, Some(s)) => vec![s],
        (true, None) => bail!("invalid config field `snr_grid`: sweep needs --snr-grid or --snr"),
    };
    let res = snr_sweep(cfg, &grid, cfg.replicates, cfg.seed)?;
    let out = Outputs::new(&cfg.out)?;
    let rows = res.runs.len();
    let path = out.put("sweep.csv", io::sweep_to_csv(&res).as_bytes(), Check::Csv("snr,replicate,seed,p0,p1,p2"))?;
    if check_csv(&path, "snr,replicate,seed,p0,p1,p2")? != rows {
        bail!("validating {}: row count", path.display());
    }
    out.json("sweep.json", &sweep_summary(cfg, &res))?;
    out.put("sweep.svg", svg::sweep_svg(&res).as_bytes(), Check::Svg)?;
    Ok(())
}

fn bootstrap_summary(cfg: &RunConfig, res: &BootstrapResult) -> Value {
    let groups: Vec<Value> = res
        .groups
        .iter()
        .map(|g| {
            json!({
                "label": g.label,
                "p0": g.summary(0),
                "p1": g.summary(1),
                "p2": g.summary(2),
            })
        })
        .collect();
    json!({
        "config": cfg,
        "n": res.n,
        "b": res.b,
        "seed": res.seed,
        "groups": groups,
        "iqr_overlap": {
            "p0": res.iqr_overlap(0),
            "p1": res.iqr_overlap(1),
            "p2": res.iqr_overlap(2),
        },
    })
}

pub fn bootstrap(cfg: &RunConfig) -> Result<()> {
    if cfg.compare.is_none() {
        bail!("invalid config field `compare`: bootstrap needs --compare or a preset with two patterns");
    }
    let res = run_bootstrap(cfg)?;
    let out = Outputs::new(&cfg.out)?;
    out.put(
        "bootstrap.csv",
        io::bootstrap_to_csv(&res).as_bytes(),
        Check::Csv("group,draw,mean_p0,mean_p1,mean_p2"),
    )?;
    out.put(
        "bootstrap_samples.csv",
        io::bootstrap_samples_to_csv(&res).as_bytes(),
        Check::Csv("group,replicate,p0,p1,p2"),
    )?;
    out.json("bootstrap.json", &bootstrap_summary(cfg, &res))?;
    out.put("bootstrap.svg", svg::bootstrap_svg(&res, cfg.max_dim + 1).as_bytes(), Check::Svg)?;
    Ok(())
}

pub fn graph(cfg: &RunConfig) -> Result<()> {
    let model = model(cfg)?;
    let g = &model.graph;
    let out = Outputs::new(&cfg.out)?;
    let mut edges = Vec::new();
    write_edge_list(g, &mut edges)?;
    let path = out.put("edges.txt", &edges, Check::Text)?;
    let back = toposim_core::graph::read_edge_list(&path)?;
    if back.edges() != g.edges() {
        bail!("validating {}: edge list differs", path.display());
    }
    out.put("weights.csv", io::matrix_to_csv(&model.weights.matrix).as_bytes(), Check::Text)?;
    let cycles: Vec<Value> = g
        .main_cycles()
        .iter()
        .map(|c| json!({ "label": c.label, "nodes": c.nodes }))
        .collect();
    out.json(
        "graph.json",
        &json!({
            "kind": g.kind(),
            "nodes": g.node_count(),
            "edges": g.edges().len(),
            "diameter": g.diameter(),
            "max_degree": (0..g.node_count()).map(|v| g.degree(v)).max(),
            "cutoff": cfg.k,
            "main_cycles": cycles,
            "warnings": warnings(&model, cfg.k),
        }),
    )?;
    Ok(())
}
