//! Textbook persistence: enumerate every Rips simplex, sort the filtration,
//! and reduce the full boundary matrix column by column over GF(2).

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

fn diam(d: &[Vec<f64>], s: &[usize]) -> f64 {
    let mut m = 0.0f64;
    for (i, &a) in s.iter().enumerate() {
        for &b in &s[i + 1..] {
            m = m.max(d[a][b]);
        }
    }
    m
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Diagram of the Rips filtration of `d` up to `max_dim`, keeping simplices
/// with diameter `<= threshold`; classes alive at the end die at `threshold`.
pub fn naive_persistence(d: &[Vec<f64>], max_dim: usize, threshold: f64) -> Vec<Pair> {
    let n = d.len();
    let mut simplices: Vec<(f64, Vec<usize>)> = Vec::new();
    for k in 1..=max_dim + 2 {
        for s in combinations(n, k) {
            let f = diam(d, &s);
            if f <= threshold {
                simplices.push((f, s));
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.len().cmp(&b.1.len()))
            .then_with(|| a.1.cmp(&b.1))
    });
    let index: HashMap<Vec<usize>, usize> = simplices.iter().enumerate().map(|(i, (_, s))| (s.clone(), i)).collect();

    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(simplices.len());
    for (_, s) in &simplices {
        let mut col: Vec<usize> = if s.len() == 1 {
            Vec::new()
        } else {
            (0..s.len())
                .map(|i| {
                    let mut face = s.clone();
                    face.remove(i);
                    index[&face]
                })
                .collect()
        };
        col.sort_unstable();
        columns.push(col);
    }

    let mut low_owner: HashMap<usize, usize> = HashMap::new();
    let mut paired = vec![false; simplices.len()];
    let mut out = Vec::new();
    for j in 0..columns.len() {
        loop {
            let Some(&low) = columns[j].last() else { break };
            match low_owner.get(&low) {
                Some(&other) => {
                    let add = columns[other].clone();
                    let mut sum = Vec::new();
                    let (mut a, mut b) = (0, 0);
                    let cur = &columns[j];
                    while a < cur.len() || b < add.len() {
                        if b == add.len() || (a < cur.len() && cur[a] < add[b]) {
                            sum.push(cur[a]);
                            a += 1;
                        } else if a == cur.len() || add[b] < cur[a] {
                            sum.push(add[b]);
                            b += 1;
                        } else {
                            a += 1;
                            b += 1;
                        }
                    }
                    columns[j] = sum;
                }
                None => {
                    low_owner.insert(low, j);
                    paired[low] = true;
                    paired[j] = true;
                    let dim = simplices[low].1.len() - 1;
                    let (birth, death) = (simplices[low].0, simplices[j].0);
                    if death > birth {
                        out.push(Pair { dim, birth, death, essential: false });
                    }
                    break;
                }
            }
        }
    }
    for (i, (f, s)) in simplices.iter().enumerate() {
        let dim = s.len() - 1;
        if !paired[i] && dim <= max_dim && threshold > *f {
            out.push(Pair { dim, birth: *f, death: threshold, essential: true });
        }
    }
    sort_pairs(&mut out);
    out
}

pub fn sort_pairs(p: &mut [Pair]) {
    p.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
            .then(a.essential.cmp(&b.essential))
    });
}
