//! Combinatorial number system: a `d`-simplex with vertices
//! `v_d > ... > v_0` has index `Σ_i C(v_i, i + 1)`.

#[derive(Debug, Clone)]
pub(crate) struct Binomial {
    table: Vec<Vec<u64>>,
}

impl Binomial {
    /// Table for `C(n, k)` with `n <= max_n`, `k <= max_k`.
    pub(crate) fn new(max_n: usize, max_k: usize) -> Self {
        let mut table = vec![vec![0u64; max_k + 1]; max_n + 1];
        for n in 0..=max_n {
            table[n][0] = 1;
            for k in 1..=max_k.min(n) {
                table[n][k] = table[n - 1][k - 1]
                    .checked_add(if k < n { table[n - 1][k] } else { 0 })
                    .expect("simplex index overflows u64");
            }
        }
        Self { table }
    }

    #[inline]
    pub(crate) fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }

    /// Index of the simplex with the given vertices (any order).
    pub(crate) fn index(&self, vertices: &[usize]) -> u64 {
        let mut v = vertices.to_vec();
        v.sort_unstable();
        v.iter().enumerate().map(|(i, &x)| self.get(x, i + 1)).sum()
    }

    /// Vertices (descending) of the `dim`-simplex with index `idx`, among `n` points.
    pub(crate) fn vertices(&self, mut idx: u64, dim: usize, n: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut upper = n;
        for k in (1..=dim + 1).rev() {
            // largest v < upper with C(v, k) <= idx
            let (mut lo, mut hi) = (k - 1, upper - 1);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if self.get(mid, k) <= idx {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            out.push(lo);
            idx -= self.get(lo, k);
            upper = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal_values() {
        let b = Binomial::new(10, 4);
        assert_eq!(b.get(5, 2), 10);
        assert_eq!(b.get(10, 4), 210);
        assert_eq!(b.get(3, 4), 0);
        assert_eq!(b.get(0, 0), 1);
    }

    #[test]
    fn index_round_trip_enumerates_all_subsets() {
        let n = 9;
        let b = Binomial::new(n, 4);
        let mut buf = Vec::new();
        for dim in 0..3 {
            let count = b.get(n, dim + 1);
            for idx in 0..count {
                b.vertices(idx, dim, n, &mut buf);
                assert_eq!(buf.len(), dim + 1);
                assert!(buf.windows(2).all(|w| w[0] > w[1]));
                assert_eq!(b.index(&buf), idx);
            }
        }
    }
}
