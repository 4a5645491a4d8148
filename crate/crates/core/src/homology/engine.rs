//! Vietoris–Rips persistence over GF(2).
//!
//! Dimension 0 is a union–find sweep over the edges. Higher dimensions reduce
//! the coboundary matrix (columns processed from the latest simplex to the
//! earliest, pivot = earliest coface) with three shortcuts:
//!
//! * clearing: simplices that were pivots one dimension lower give zero
//!   columns and are skipped;
//! * emergent pairs: when the earliest coface has the same diameter and is not
//!   yet a pivot, the column is paired without building it;
//! * implicit columns: coboundaries are enumerated from the combinatorial
//!   index, and a reduced column is stored as the list of simplices whose
//!   coboundaries it sums.
//!
//! The filtration order is `(diameter, dimension, index)`. Any order that
//! refines the diameters gives the same diagram once zero-length pairs are
//! dropped.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use super::binomial::Binomial;
use super::Feature;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub(crate) diam: f64,
    pub(crate) idx: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diam.total_cmp(&other.diam).then(self.idx.cmp(&other.idx))
    }
}

pub(crate) struct Rips<'a> {
    n: usize,
    dist: &'a [f64],
    threshold: f64,
    binom: Binomial,
}

impl<'a> Rips<'a> {
    pub(crate) fn new(n: usize, dist: &'a [f64], threshold: f64, max_dim: usize) -> Self {
        Self {
            n,
            dist,
            threshold,
            binom: Binomial::new(n, max_dim + 3),
        }
    }

    #[inline]
    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub(crate) fn vertices(&self, idx: u64, dim: usize, out: &mut Vec<usize>) {
        self.binom.vertices(idx, dim, self.n, out);
    }

    pub(crate) fn index(&self, vertices: &[usize]) -> u64 {
        self.binom.index(vertices)
    }

    /// All `dim`-simplices with diameter within the threshold, in index order
    /// of their largest vertex blocks. Blocks are built in parallel.
    pub(crate) fn simplices(&self, dim: usize) -> Vec<Entry> {
        let blocks: Vec<Vec<Entry>> = (0..self.n)
            .into_par_iter()
            .map(|top| {
                let mut out = Vec::new();
                let mut stack = vec![top];
                self.extend(&mut stack, 0.0, dim, &mut out);
                out
            })
            .collect();
        blocks.into_iter().flatten().collect()
    }

    /// Number of `dim`-simplices within the threshold, without storing them.
    pub(crate) fn count(&self, dim: usize) -> u64 {
        (0..self.n)
            .into_par_iter()
            .map(|top| {
                let mut count = 0u64;
                let mut stack = vec![top];
                self.count_from(&mut stack, 0.0, dim, &mut count);
                count
            })
            .sum()
    }

    fn extend(&self, stack: &mut Vec<usize>, diam: f64, dim: usize, out: &mut Vec<Entry>) {
        if stack.len() == dim + 1 {
            out.push(Entry {
                diam,
                idx: self.index(stack),
            });
            return;
        }
        let last = *stack.last().expect("non-empty");
        for v in 0..last {
            let d = stack.iter().fold(diam, |m, &w| m.max(self.d(v, w)));
            if d <= self.threshold {
                stack.push(v);
                self.extend(stack, d, dim, out);
                stack.pop();
            }
        }
    }

    fn count_from(&self, stack: &mut Vec<usize>, diam: f64, dim: usize, count: &mut u64) {
        if stack.len() == dim + 1 {
            *count += 1;
            return;
        }
        let last = *stack.last().expect("non-empty");
        for v in 0..last {
            let d = stack.iter().fold(diam, |m, &w| m.max(self.d(v, w)));
            if d <= self.threshold {
                stack.push(v);
                self.count_from(stack, d, dim, count);
                stack.pop();
            }
        }
    }

    /// Cofaces of `simplex` (a `dim`-simplex with descending vertices `verts`)
    /// within the threshold.
    fn cofaces(&self, simplex: Entry, verts: &[usize], out: &mut Vec<Entry>) {
        let mut idx_below = simplex.idx;
        let mut idx_above = 0u64;
        let mut k = verts.len();
        let mut next = 0;
        for v in (0..self.n).rev() {
            if next < verts.len() && verts[next] == v {
                idx_below -= self.binom.get(v, k);
                idx_above += self.binom.get(v, k + 1);
                k -= 1;
                next += 1;
                continue;
            }
            let row = &self.dist[v * self.n..(v + 1) * self.n];
            let diam = verts.iter().fold(simplex.diam, |m, &w| m.max(row[w]));
            if diam <= self.threshold {
                out.push(Entry {
                    diam,
                    idx: idx_above + self.binom.get(v, k + 1) + idx_below,
                });
            }
        }
    }
}

/// Pop cancelling pairs; leave the pivot on top of the heap.
fn pivot(heap: &mut BinaryHeap<Reverse<Entry>>) -> Option<Entry> {
    loop {
        let Reverse(top) = heap.pop()?;
        match heap.peek() {
            Some(&Reverse(next)) if next.idx == top.idx => {
                heap.pop();
            }
            _ => {
                heap.push(Reverse(top));
                return Some(top);
            }
        }
    }
}

/// Reduce a list of simplices mod 2.
fn cancel_pairs(v: &mut Vec<Entry>) {
    v.sort_unstable_by_key(|e| e.idx);
    let mut out: Vec<Entry> = Vec::with_capacity(v.len());
    for &e in v.iter() {
        if out.last().is_some_and(|l| l.idx == e.idx) {
            out.pop();
        } else {
            out.push(e);
        }
    }
    *v = out;
}

pub(crate) struct Output {
    pub(crate) features: Vec<Feature>,
}

/// Persistence in dimensions `0..=max_dim`. `births` are the vertex
/// filtration values (the diagonal of the distance matrix).
pub(crate) fn compute(rips: &Rips<'_>, births: &[f64], max_dim: usize, cap: f64) -> Output {
    let mut features = Vec::new();
    let mut cleared = zero_dimensional(rips, births, cap, &mut features);
    for dim in 1..=max_dim {
        cleared = reduce_dimension(rips, dim, &cleared, dim < max_dim, cap, &mut features);
    }
    Output { features }
}

fn zero_dimensional(rips: &Rips<'_>, births: &[f64], cap: f64, features: &mut Vec<Feature>) -> FxHashSet<u64> {
    let n = rips.n;
    let mut edges = rips.simplices(1);
    edges.par_sort_unstable();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // component representative = its elder vertex (earliest birth, then smallest id)
    let elder = |a: usize, b: usize| -> (usize, usize) {
        if births[a].total_cmp(&births[b]).then(a.cmp(&b)) == Ordering::Greater {
            (b, a)
        } else {
            (a, b)
        }
    };
    let mut cleared = FxHashSet::default();
    let mut verts = Vec::with_capacity(2);
    for e in edges {
        rips.vertices(e.idx, 1, &mut verts);
        let (ru, rv) = (find(&mut parent, verts[0]), find(&mut parent, verts[1]));
        if ru == rv {
            continue;
        }
        let (old, young) = elder(ru, rv);
        parent[young] = old;
        cleared.insert(e.idx);
        if e.diam > births[young] {
            features.push(Feature {
                dim: 0,
                birth: births[young],
                death: e.diam,
                essential: false,
            });
        }
    }
    for v in 0..n {
        if find(&mut parent, v) == v {
            features.push(Feature {
                dim: 0,
                birth: births[v],
                death: cap,
                essential: true,
            });
        }
    }
    cleared
}

/// Reduce the coboundary columns of `dim`-simplices. Returns the set of
/// `(dim+1)`-simplices that became pivots (used for clearing) when `keep` is set.
fn reduce_dimension(
    rips: &Rips<'_>,
    dim: usize,
    cleared: &FxHashSet<u64>,
    keep: bool,
    cap: f64,
    features: &mut Vec<Feature>,
) -> FxHashSet<u64> {
    let mut columns: Vec<Entry> = rips.simplices(dim).into_iter().filter(|e| !cleared.contains(&e.idx)).collect();
    columns.par_sort_unstable_by(|a, b| b.cmp(a));

    let mut pivots: FxHashMap<u64, u32> = FxHashMap::default();
    let mut reductions: Vec<Vec<Entry>> = Vec::new();
    let mut verts = Vec::with_capacity(dim + 2);
    let mut buf = Vec::new();
    let mut heap: BinaryHeap<Reverse<Entry>> = BinaryHeap::new();

    for &col in &columns {
        buf.clear();
        rips.vertices(col.idx, dim, &mut verts);
        rips.cofaces(col, &verts, &mut buf);
        let Some(&first) = buf.iter().min() else {
            features.push(Feature {
                dim,
                birth: col.diam,
                death: cap,
                essential: true,
            });
            continue;
        };
        if first.diam == col.diam && !pivots.contains_key(&first.idx) {
            pivots.insert(first.idx, reductions.len() as u32);
            reductions.push(vec![col]);
            continue;
        }

        heap.clear();
        heap.extend(buf.drain(..).map(Reverse));
        let mut combo = vec![col];
        loop {
            match pivot(&mut heap) {
                None => {
                    features.push(Feature {
                        dim,
                        birth: col.diam,
                        death: cap,
                        essential: true,
                    });
                    break;
                }
                Some(p) => match pivots.get(&p.idx) {
                    Some(&slot) => {
                        for &s in &reductions[slot as usize] {
                            rips.vertices(s.idx, dim, &mut verts);
                            rips.cofaces(s, &verts, &mut buf);
                            heap.extend(buf.drain(..).map(Reverse));
                        }
                        combo.extend_from_slice(&reductions[slot as usize]);
                    }
                    None => {
                        if p.diam > col.diam {
                            features.push(Feature {
                                dim,
                                birth: col.diam,
                                death: p.diam,
                                essential: false,
                            });
                        }
                        cancel_pairs(&mut combo);
                        pivots.insert(p.idx, reductions.len() as u32);
                        reductions.push(combo);
                        break;
                    }
                },
            }
        }
    }
    if keep {
        pivots.into_keys().collect()
    } else {
        FxHashSet::default()
    }
}
