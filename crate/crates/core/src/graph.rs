//! Dependence graphs with a prescribed topology, hop distances and the
//! distance-decaying mixing weights built on them.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Torus,
    Sphere,
    Cylinder,
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Surface::Torus => "torus",
            Surface::Sphere => "sphere",
            Surface::Cylinder => "cylinder",
        })
    }
}

impl std::str::FromStr for Surface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(Surface::Torus),
            "sphere" => Ok(Surface::Sphere),
            "cylinder" => Ok(Surface::Cylinder),
            other => Err(domain(format!("unknown surface `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    CircularLadder { rungs: usize },
    DoubleCircularLadder { lobes: [usize; 2] },
    QuotientGrid { rows: usize, cols: usize, surface: Surface },
    Custom,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::CircularLadder { rungs } => write!(f, "circular_ladder({rungs})"),
            GraphKind::DoubleCircularLadder { lobes } => {
                write!(f, "double_circular_ladder({},{})", lobes[0], lobes[1])
            }
            GraphKind::QuotientGrid { rows, cols, surface } => {
                write!(f, "quotient_grid({rows}x{cols},{surface})")
            }
            GraphKind::Custom => f.write_str("custom"),
        }
    }
}

/// A cycle the pattern is designed to carry (a ring around a hole or cavity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MainCycle {
    pub label: String,
    pub nodes: Vec<usize>,
}

/// Undirected, connected graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    kind: GraphKind,
    adjacency: Vec<Vec<usize>>,
    hop_dist: Array2<u32>,
    main_cycles: Vec<MainCycle>,
}

impl PatternGraph {
    /// Build a graph from an edge list. Edges are normalised to `u < v` and
    /// deduplicated; self-loops and out-of-range ids are rejected.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        kind: GraphKind,
        main_cycles: Vec<MainCycle>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(domain("graph must have at least one node"));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(domain(format!("self-loop at node {u}")));
            }
            if u >= node_count || v >= node_count {
                return Err(domain(format!("edge ({u}, {v}) references a node >= {node_count}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let hop_dist = bfs_all_pairs(&adjacency)?;
        Ok(Self {
            node_count,
            edges,
            kind,
            adjacency,
            hop_dist,
            main_cycles,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn hop_dist(&self) -> &Array2<u32> {
        &self.hop_dist
    }

    pub fn diameter(&self) -> u32 {
        self.hop_dist.iter().copied().max().unwrap_or(0)
    }

    pub fn main_cycles(&self) -> &[MainCycle] {
        &self.main_cycles
    }

    /// Check each main cycle against the mixing cutoff: a feature is only
    /// expected to be visible when the hop diameter of the subgraph around it
    /// is at least `2K`.
    pub fn detectability(&self, cutoff: usize) -> Vec<DetectabilityWarning> {
        self.main_cycles
            .iter()
            .filter_map(|c| {
                let diameter = induced_diameter(&self.adjacency, &c.nodes);
                (u64::from(diameter) < 2 * cutoff as u64).then(|| DetectabilityWarning {
                    cycle: c.label.clone(),
                    diameter,
                    cutoff,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectabilityWarning {
    pub cycle: String,
    pub diameter: u32,
    pub cutoff: usize,
}

impl fmt::Display for DetectabilityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: hop diameter {} is below 2K = {}; the feature may not be detectable",
            self.cycle,
            self.diameter,
            2 * self.cutoff
        )
    }
}

/// Circular ladder `CL_n`: outer ring `0..n`, inner ring `n..2n`, rung `i -- n+i`.
pub fn circular_ladder(n: usize) -> Result<PatternGraph> {
    if n < 3 {
        return Err(domain(format!("circular ladder needs at least 3 rungs, got {n}")));
    }
    let edges = ladder_edges(n);
    let cycle = MainCycle {
        label: format!("ring of CL_{n}"),
        nodes: (0..n).collect(),
    };
    PatternGraph::new(2 * n, edges, GraphKind::CircularLadder { rungs: n }, vec![cycle])
}

fn ladder_edges(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(3 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        edges.push((i, j));
        edges.push((n + i, n + j));
        edges.push((i, n + i));
    }
    edges
}

/// Two circular ladders glued along one rung.
///
/// Lobe A is `CL_a` with its usual numbering. Lobe B is `CL_b` whose rung 0
/// is identified with lobe A's rung 0 (nodes `0` and `a`); its remaining
/// outer nodes follow at `2a..2a+b-1` and inner nodes at `2a+b-1..2a+2b-2`.
/// Node count is `2a + 2b - 2`; the two glued nodes have degree 5.
pub fn double_circular_ladder(lobes: [usize; 2]) -> Result<PatternGraph> {
    let [a, b] = lobes;
    if a < 3 || b < 3 {
        return Err(domain(format!("each lobe needs at least 3 rungs, got ({a}, {b})")));
    }
    let offset = 2 * a;
    let map_b = |v: usize| -> usize {
        match v {
            0 => 0,
            v if v == b => a,
            v if v < b => offset + v - 1,
            v => offset + (b - 1) + (v - b - 1),
        }
    };
    let mut edges = ladder_edges(a);
    edges.extend(ladder_edges(b).into_iter().map(|(u, v)| (map_b(u), map_b(v))));
    let cycles = vec![
        MainCycle {
            label: format!("ring of lobe A (CL_{a})"),
            nodes: (0..a).collect(),
        },
        MainCycle {
            label: format!("ring of lobe B (CL_{b})"),
            nodes: (0..b).map(map_b).collect(),
        },
    ];
    PatternGraph::new(2 * a + 2 * b - 2, edges, GraphKind::DoubleCircularLadder { lobes }, cycles)
}

/// Rectangular grid with edge identifications.
///
/// Torus and cylinder use node `i * cols + j` for row `i`, column `j`; both
/// wrap columns, the torus also wraps rows. The sphere wraps columns, keeps
/// rows `1..rows-1` as rings (`(i-1) * cols + j`) and collapses the top and
/// bottom rows into pole nodes `(rows-2) * cols` and `(rows-2) * cols + 1`.
pub fn quotient_grid(rows: usize, cols: usize, surface: Surface) -> Result<PatternGraph> {
    if rows < 3 || cols < 3 {
        return Err(domain(format!("quotient grid needs at least 3x3 nodes, got {rows}x{cols}")));
    }
    let kind = GraphKind::QuotientGrid { rows, cols, surface };
    let id = |i: usize, j: usize| i * cols + j;
    let row_ring = |i: usize, label: String| MainCycle {
        label,
        nodes: (0..cols).map(|j| id(i, j)).collect(),
    };
    match surface {
        Surface::Torus | Surface::Cylinder => {
            let wrap_rows = surface == Surface::Torus;
            let mut edges = Vec::new();
            for i in 0..rows {
                for j in 0..cols {
                    edges.push((id(i, j), id(i, (j + 1) % cols)));
                    if i + 1 < rows || wrap_rows {
                        edges.push((id(i, j), id((i + 1) % rows, j)));
                    }
                }
            }
            let mut cycles = vec![row_ring(0, format!("{cols}-node row ring"))];
            if wrap_rows {
                cycles.push(MainCycle {
                    label: format!("{rows}-node column ring"),
                    nodes: (0..rows).map(|i| id(i, 0)).collect(),
                });
            }
            PatternGraph::new(rows * cols, edges, kind, cycles)
        }
        Surface::Sphere => {
            let rings = rows - 2;
            let north = rings * cols;
            let south = north + 1;
            let mut edges = Vec::new();
            for i in 0..rings {
                for j in 0..cols {
                    edges.push((id(i, j), id(i, (j + 1) % cols)));
                    if i + 1 < rings {
                        edges.push((id(i, j), id(i + 1, j)));
                    }
                }
            }
            for j in 0..cols {
                edges.push((north, id(0, j)));
                edges.push((south, id(rings - 1, j)));
            }
            let half = cols / 2;
            let mut meridian = vec![north];
            meridian.extend((0..rings).map(|i| id(i, 0)));
            meridian.push(south);
            meridian.extend((0..rings).rev().map(|i| id(i, half)));
            let cycles = vec![
                row_ring(rings / 2, format!("{cols}-node equator")),
                MainCycle {
                    label: "pole-to-pole meridian".to_string(),
                    nodes: meridian,
                },
            ];
            PatternGraph::new(rings * cols + 2, edges, kind, cycles)
        }
    }
}

/// All-pairs shortest-path hop counts by breadth-first search.
pub fn hop_distances(node_count: usize, edges: &[(usize, usize)]) -> Result<Array2<u32>> {
    let mut adjacency = vec![Vec::new(); node_count];
    for &(u, v) in edges {
        if u >= node_count || v >= node_count {
            return Err(domain(format!("edge ({u}, {v}) references a node >= {node_count}")));
        }
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    bfs_all_pairs(&adjacency)
}

fn bfs_all_pairs(adjacency: &[Vec<usize>]) -> Result<Array2<u32>> {
    let n = adjacency.len();
    let mut dist = Array2::from_elem((n, n), u32::MAX);
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        let mut row = dist.row_mut(src);
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &v in &adjacency[u] {
                if row[v] == u32::MAX {
                    row[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        if let Some(missing) = row.iter().position(|&d| d == u32::MAX) {
            return Err(Error::Disconnected(if src == 0 { missing } else { src }));
        }
    }
    Ok(dist)
}

/// Hop diameter of the subgraph induced on `nodes`.
fn induced_diameter(adjacency: &[Vec<usize>], nodes: &[usize]) -> u32 {
    let members: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut best = 0;
    for &src in &members {
        let mut seen = std::collections::BTreeMap::new();
        seen.insert(src, 0u32);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = seen[&u];
            best = best.max(du);
            for &v in &adjacency[u] {
                if members.contains(&v) && !seen.contains_key(&v) {
                    seen.insert(v, du + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    best
}

/// `W[p,q] = 1 / (1 + d(p,q))` for `d(p,q) <= K`, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingWeights {
    pub matrix: Array2<f64>,
    pub cutoff: usize,
    pub warnings: Vec<DetectabilityWarning>,
}

impl MixingWeights {
    pub fn identity(p: usize) -> Self {
        Self {
            matrix: Array2::eye(p),
            cutoff: 0,
            warnings: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Mixing weights for `graph` with hop cutoff `K`. Detectability warnings are
/// logged and attached to the result.
pub fn mixing_weights(graph: &PatternGraph, cutoff: usize) -> MixingWeights {
    let matrix = graph.hop_dist().mapv(|d| {
        if (d as usize) <= cutoff {
            1.0 / (1.0 + f64::from(d))
        } else {
            0.0
        }
    });
    let warnings = graph.detectability(cutoff);
    for w in &warnings {
        log::warn!("{}: {w}", graph.kind());
    }
    MixingWeights {
        matrix,
        cutoff,
        warnings,
    }
}

/// Write `u v` lines, zero-based, preceded by `#` comments.
pub fn write_edge_list<W: Write>(graph: &PatternGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# {}", graph.kind())?;
    writeln!(out, "# nodes {} edges {}", graph.node_count(), graph.edges().len())?;
    for &(u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Parse an edge list into a [`GraphKind::Custom`] graph. Blank lines and
/// `#` comments are skipped; the node count is one past the largest id.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<PatternGraph> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(i + 1, format!("expected `u v`, got `{line}`")));
        };
        let u: usize = u.parse().map_err(|e| parse_err(i + 1, format!("bad node id `{u}`: {e}")))?;
        let v: usize = v.parse().map_err(|e| parse_err(i + 1, format!("bad node id `{v}`: {e}")))?;
        edges.push((u, v));
    }
    let Some(max_id) = edges.iter().map(|&(u, v)| u.max(v)).max() else {
        return Err(parse_err(0, "edge list is empty".into()));
    };
    PatternGraph::new(max_id + 1, edges, GraphKind::Custom, Vec::new())
}

pub fn read_edge_list(path: &Path) -> Result<PatternGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, path)
}
