use std::collections::VecDeque;

use super::{CsrMatrix, SolverError};

/// Reverse Cuthill–McKee ordering of a structurally symmetric matrix.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(a, start, &degree);
        let mut queue = VecDeque::new();
        queue.push_back(root);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, root: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; a.nrows()];
    let mut queue = VecDeque::new();
    level[root] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &w in a.row(v).0 {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(a: &CsrMatrix, start: usize, degree: &[usize]) -> usize {
    let mut root = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(a, root);
        let far = level.iter().copied().filter(|&l| l != usize::MAX).max().unwrap_or(0);
        if far <= ecc && ecc > 0 {
            break;
        }
        ecc = far;
        let next = (0..a.nrows()).filter(|&v| level[v] == far).min_by_key(|&v| (degree[v], v));
        match next {
            Some(v) if v != root => root = v,
            _ => break,
        }
    }
    root
}

/// Envelope (profile) LDLᵀ factorization of a symmetric positive definite
/// matrix after reverse Cuthill–McKee reordering.
#[derive(Debug, Clone)]
pub struct SymmetricFactor {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SymmetricFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolverError::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let perm = rcm_ordering(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            let old = perm[i];
            *f = a.row(old).0.iter().map(|&j| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let old = perm[i];
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn < i {
                    lower[start[i] + jn - first[i]] = v;
                } else if jn == i {
                    diag[i] = v;
                }
            }
        }
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        // Crout elimination in place: lower[i, j] holds L_ij after row i is done.
        for i in 0..n {
            let fi = first[i];
            let row_i = start[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = lower[row_i + j - fi];
                let row_j = start[j];
                for k in lo..j {
                    s -= lower[row_i + k - fi] * diag[k] * lower[row_j + k - fj];
                }
                lower[row_i + j - fi] = s / diag[j];
            }
            let mut d = diag[i];
            for k in fi..i {
                let l = lower[row_i + k - fi];
                d -= l * l * diag[k];
            }
            if !(d > 1e-300_f64.max(scale * 1e-18)) {
                return Err(SolverError::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            diag[i] = d;
        }
        Ok(Self { perm, first, start, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for (yi, d) in y.iter_mut().zip(&self.diag) {
            *yi /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Number of stored off-diagonal entries.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_grid_laplacian_plus_identity() {
        let m = 9;
        let n = m * m;
        let mut t = Vec::new();
        let id = |i: usize, j: usize| i * m + j;
        for i in 0..m {
            for j in 0..m {
                t.push((id(i, j), id(i, j), 1.0));
                if i + 1 < m {
                    let (a, b) = (id(i, j), id(i + 1, j));
                    t.extend([(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)]);
                }
                if j + 1 < m {
                    let (a, b) = (id(i, j), id(i, j + 1));
                    t.extend([(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)]);
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let f = SymmetricFactor::new(&a).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let b = a.matvec(&xs);
        let x = f.solve(&b);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-10);
        }
        assert!(f.envelope_size() < n * n / 4);
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SymmetricFactor::new(&a), Err(SolverError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = CsrMatrix::from_triplets(4, 4, &[(0, 3, 1.0), (3, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
        let mut p = rcm_ordering(&a);
        p.sort();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }
}
