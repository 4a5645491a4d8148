//! Vietoris–Rips filtrations and their persistence diagrams.

mod binomial;
mod engine;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use engine::Rips;

/// Highest homology dimension supported.
pub const MAX_HOMOLOGY_DIM: usize = 2;

/// Default filtration threshold and essential-class death cap for
/// coherence distances, which never exceed 1.
pub const DEFAULT_THRESHOLD: f64 = 1.0;

/// A simplex of the filtration with its Rips value (largest pairwise distance).
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Ascending vertex ids.
    pub vertices: Vec<usize>,
    pub filtration: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Rips filtration of a distance matrix, up to simplices of dimension
/// `max_dim + 1`, truncated at `threshold`.
///
/// The complex is kept implicit: simplices are enumerated from the distance
/// matrix when needed.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    n: usize,
    dist: Vec<f64>,
    max_dim: usize,
    threshold: f64,
}

impl FilteredComplex {
    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn rips(&self) -> Rips<'_> {
        Rips::new(self.n, &self.dist, self.threshold, self.max_dim)
    }

    /// Simplex counts for dimensions `0..=max_dim + 1`.
    pub fn simplex_counts(&self) -> Vec<u64> {
        let rips = self.rips();
        (0..=self.max_dim + 1).map(|d| if d == 0 { self.n as u64 } else { rips.count(d) }).collect()
    }

    /// All simplices sorted by (filtration value, dimension, lexicographic
    /// vertex tuple). Intended for small complexes.
    pub fn simplices(&self) -> Vec<Simplex> {
        let rips = self.rips();
        let mut out: Vec<Simplex> = (0..self.n)
            .map(|v| Simplex {
                vertices: vec![v],
                filtration: self.distance(v, v),
            })
            .collect();
        let mut buf = Vec::new();
        for dim in 1..=self.max_dim + 1 {
            for e in rips.simplices(dim) {
                rips.vertices(e.idx, dim, &mut buf);
                let mut vertices = buf.clone();
                vertices.reverse();
                out.push(Simplex {
                    vertices,
                    filtration: e.diam,
                });
            }
        }
        out.sort_by(|a, b| {
            a.filtration
                .total_cmp(&b.filtration)
                .then(a.vertices.len().cmp(&b.vertices.len()))
                .then_with(|| a.vertices.cmp(&b.vertices))
        });
        out
    }
}

/// Validate `distance` and wrap it as a Rips filtration.
pub fn rips_complex(distance: &Array2<f64>, max_dim: usize, threshold: f64) -> Result<FilteredComplex> {
    let (n, m) = distance.dim();
    if n != m {
        return Err(Error::InvalidMatrix(format!("matrix is {n}x{m}, not square")));
    }
    if n == 0 {
        return Err(Error::InvalidMatrix("matrix is empty".into()));
    }
    if max_dim > MAX_HOMOLOGY_DIM {
        return Err(Error::Domain(format!("max_dim must be at most {MAX_HOMOLOGY_DIM}, got {max_dim}")));
    }
    if !(threshold > 0.0) || threshold.is_nan() {
        return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
    }
    for i in 0..n {
        if distance[[i, i]] != 0.0 {
            return Err(Error::InvalidMatrix(format!("diagonal entry ({i},{i}) is {}", distance[[i, i]])));
        }
        for j in 0..i {
            let (a, b) = (distance[[i, j]], distance[[j, i]]);
            if a != b {
                return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j}): {a} vs {b}")));
            }
            if !(a >= 0.0) || a.is_infinite() {
                return Err(Error::InvalidMatrix(format!("entry ({i},{j}) = {a} is not a finite nonnegative distance")));
            }
        }
    }
    Ok(FilteredComplex {
        n,
        dist: distance.iter().copied().collect(),
        max_dim,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    /// Never dies within the filtration; `death` is the cap.
    pub essential: bool,
}

impl Feature {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    /// Sorted by (dimension, birth, death); zero-length pairs are dropped.
    pub features: Vec<Feature>,
    /// Death value assigned to essential classes.
    pub cap: f64,
    pub max_dim: usize,
}

impl PersistenceDiagram {
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Feature> + '_ {
        self.features.iter().filter(move |f| f.dim == dim)
    }

    /// Persistences of dimension-`dim` features, largest first.
    pub fn persistences(&self, dim: usize) -> Vec<f64> {
        let mut p: Vec<f64> = self.in_dim(dim).map(Feature::persistence).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        p
    }

    pub fn essential_count(&self, dim: usize) -> usize {
        self.in_dim(dim).filter(|f| f.essential).count()
    }
}

/// Persistence diagram of `complex` in dimensions `0..=max_dim`.
pub fn persistence(complex: &FilteredComplex) -> PersistenceDiagram {
    let births: Vec<f64> = (0..complex.n).map(|v| complex.distance(v, v)).collect();
    let out = engine::compute(&complex.rips(), &births, complex.max_dim, complex.threshold);
    let mut features = out.features;
    features.retain(|f| f.death > f.birth);
    features.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
            .then(a.essential.cmp(&b.essential))
    });
    PersistenceDiagram {
        features,
        cap: complex.threshold,
        max_dim: complex.max_dim,
    }
}

/// `P_k = Σ (death - birth)` over dimension-`k` features, essential classes
/// counted up to the cap.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TotalPersistence {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl TotalPersistence {
    pub fn get(&self, dim: usize) -> f64 {
        match dim {
            0 => self.p0,
            1 => self.p1,
            2 => self.p2,
            _ => 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p0, self.p1, self.p2]
    }
}

pub fn total_persistence(pd: &PersistenceDiagram) -> TotalPersistence {
    let mut t = [0.0; 3];
    for f in &pd.features {
        if f.dim < 3 {
            t[f.dim] += f.persistence();
        }
    }
    TotalPersistence {
        p0: t[0],
        p1: t[1],
        p2: t[2],
    }
}
