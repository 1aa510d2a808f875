//! Banded LU with partial pivoting (LAPACK `gbtf2`-style band storage) and a
//! reverse Cuthill-McKee ordering to squeeze sparse saddle-point systems into
//! a narrow band.

use super::{NumericsError, Result};

/// Reverse Cuthill-McKee ordering of a sparse symmetric pattern given by
/// (i, j) index pairs. Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(n: usize, pattern: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(i, j) in pattern {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // Start each component from a minimum-degree node.
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree[i]);
        let Some(start) = start else { break };
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().cloned().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| degree[u]);
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// LU factorization of a banded matrix with partial pivoting.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Band storage: entry (i, j) lives at `data[j * ldab + (i - j + kl + ku)]`.
    data: Vec<f64>,
    ipiv: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedLu {
    /// Factors a sparse matrix given by triplets (duplicates are summed).
    /// `kl`/`ku` are derived from the pattern.
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut kl = 0usize;
        let mut ku = 0usize;
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(NumericsError::DimensionMismatch(
                    "banded triplet index out of range".into(),
                ));
            }
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut data = vec![0.0; ldab * n];
        for &(i, j, v) in triplets {
            data[j * ldab + (i + kv - j)] += v;
        }
        let mut me = Self {
            n,
            kl,
            ku,
            data,
            ipiv: vec![0; n],
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };
        me.factor_in_place()?;
        Ok(me)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * (2 * self.kl + self.ku + 1) + (i + self.kl + self.ku - j)
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let mut ju = 0usize;
        for j in 0..n {
            let ilim = (j + kl).min(n - 1);
            let mut jp = j;
            let mut pmax = 0.0;
            for i in j..=ilim {
                let a = self.data[self.idx(i, j)].abs();
                if a > pmax {
                    pmax = a;
                    jp = i;
                }
            }
            self.ipiv[j] = jp;
            self.min_pivot = self.min_pivot.min(pmax);
            self.max_pivot = self.max_pivot.max(pmax);
            if pmax == 0.0 {
                return Err(NumericsError::Singular(format!(
                    "banded LU: zero pivot at column {j}"
                )));
            }
            ju = ju.max((j + kv).min(n - 1));
            if jp != j {
                for c in j..=ju {
                    let (a, b) = (self.idx(jp, c), self.idx(j, c));
                    self.data.swap(a, b);
                }
            }
            if j < n - 1 {
                let piv = self.data[self.idx(j, j)];
                for i in j + 1..=ilim {
                    let p = self.idx(i, j);
                    self.data[p] /= piv;
                }
                for c in j + 1..=ju {
                    let ujc = self.data[self.idx(j, c)];
                    if ujc != 0.0 {
                        for i in j + 1..=ilim {
                            let l = self.data[self.idx(i, j)];
                            if l != 0.0 {
                                let p = self.idx(i, c);
                                self.data[p] -= l * ujc;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Crude reciprocal condition estimate from the pivot range.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n, "rhs length mismatch");
        let kl = self.kl;
        let kv = self.kl + self.ku;
        if n == 0 {
            return;
        }
        for j in 0..n - 1 {
            let p = self.ipiv[j];
            if p != j {
                b.swap(p, j);
            }
            let ilim = (j + kl).min(n - 1);
            let bj = b[j];
            if bj != 0.0 {
                for i in j + 1..=ilim {
                    b[i] -= self.data[self.idx(i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.data[self.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.data[self.idx(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
