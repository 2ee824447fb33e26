use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{axpy, CsrMatrix, SolverError, SymmetricFactor};
use super::gram::m_dot;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Residual tolerance relative to the spectral scale `max_i S_ii / M_ii`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Problems up to this size are solved densely unless `force_iterative`.
    pub dense_limit: usize,
    pub force_iterative: bool,
    /// Extra block vectors beyond the requested count.
    pub guard: usize,
    /// Shift `σ = shift_rel * scale` that makes `S + σM` definite.
    pub shift_rel: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 2000, seed: 0x5eed, dense_limit: 400, force_iterative: false, guard: 6, shift_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EigenWarning {
    /// Two returned eigenvalues closer than `1e-10 * scale`; their vectors are
    /// only determined up to rotation.
    Cluster { index: usize, spacing: f64 },
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending eigenvalues of `S x = λ M x`.
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// `‖Sx - λMx‖_{M⁻¹} / scale` per pair.
    pub residuals: Vec<f64>,
    pub scale: f64,
    pub iterations: usize,
    pub dense: bool,
    pub warnings: Vec<EigenWarning>,
}

/// Smallest `count` eigenpairs of the pencil `(S, diag(m))`, `S` symmetric
/// positive semidefinite and `m > 0`.
///
/// Small problems go through a dense symmetric eigensolver. Larger ones use
/// block inverse iteration on `S + σM` with Rayleigh–Ritz extraction, so the
/// kernel is found without knowing its dimension.
pub fn smallest_eigenpairs(s: &CsrMatrix, m: &[f64], count: usize, opts: &EigenOptions) -> Result<EigenPairs, SolverError> {
    let n = s.nrows();
    if m.len() != n {
        return Err(SolverError::DimensionMismatch { expected: n, got: m.len() });
    }
    let count = count.min(n);
    let scale = s.spectral_scale(m).max(f64::MIN_POSITIVE);
    let mut out = if n == 0 || count == 0 {
        EigenPairs { values: vec![], vectors: vec![], residuals: vec![], scale, iterations: 0, dense: true, warnings: vec![] }
    } else if !opts.force_iterative && (n <= opts.dense_limit || count + opts.guard >= n / 2) {
        dense(s, m, count, scale)
    } else {
        subspace(s, m, count, scale, opts)?
    };
    for i in 1..out.values.len() {
        let spacing = out.values[i] - out.values[i - 1];
        let floor = 1e-8 * scale;
        if spacing < 1e-10 * scale && out.values[i - 1] > floor {
            out.warnings.push(EigenWarning::Cluster { index: i, spacing });
        }
    }
    Ok(out)
}

fn residual(s: &CsrMatrix, m: &[f64], x: &[f64], lambda: f64) -> f64 {
    let sx = s.matvec(x);
    sx.iter().zip(m).zip(x).map(|((a, mi), xi)| (a - lambda * mi * xi).powi(2) / mi).sum::<f64>().sqrt()
}

fn dense(s: &CsrMatrix, m: &[f64], count: usize, scale: f64) -> EigenPairs {
    let n = s.nrows();
    let isq: Vec<f64> = m.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut a = s.scale(Some(&isq), Some(&isq)).to_dense();
    a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for &i in idx.iter().take(count) {
        let col = eig.eigenvectors.column(i);
        let x: Vec<f64> = (0..n).map(|r| col[r] * isq[r]).collect();
        let lambda = eig.eigenvalues[i];
        residuals.push(residual(s, m, &x, lambda) / scale);
        values.push(lambda);
        vectors.push(x);
    }
    EigenPairs { values, vectors, residuals, scale, iterations: 1, dense: true, warnings: vec![] }
}

fn m_orthonormalize(vs: &mut Vec<Vec<f64>>, m: &[f64], rng: &mut ChaCha8Rng) {
    let n = m.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs.drain(..) {
        let mut w = v;
        for attempt in 0..3 {
            let n0 = m_dot(&w, &w, m).sqrt();
            for _ in 0..2 {
                for q in &out {
                    let c = m_dot(q, &w, m);
                    axpy(-c, q, &mut w);
                }
            }
            let nrm = m_dot(&w, &w, m).sqrt();
            if nrm > 1e-8 * n0 && nrm > 0.0 {
                w.iter_mut().for_each(|x| *x /= nrm);
                break;
            }
            if attempt == 2 {
                panic!("could not complete an M-orthonormal block");
            }
            w = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
        out.push(w);
    }
    *vs = out;
}

fn subspace(s: &CsrMatrix, m: &[f64], count: usize, scale: f64, opts: &EigenOptions) -> Result<EigenPairs, SolverError> {
    let n = s.nrows();
    let p = (count + opts.guard.max(count / 2)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut shift = opts.shift_rel * scale;
    let factor = loop {
        let shifted = s.add(&CsrMatrix::from_diagonal(&m.iter().map(|v| v * shift).collect::<Vec<_>>()));
        match SymmetricFactor::new(&shifted) {
            Ok(f) => break f,
            Err(e) => {
                if shift > 1e-3 * scale {
                    return Err(e);
                }
                shift *= 100.0;
            }
        }
    };

    let mut block: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    m_orthonormalize(&mut block, m, &mut rng);
    let mut values = vec![0.0; p];
    let mut residuals = vec![f64::INFINITY; p];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut y: Vec<Vec<f64>> = block
            .iter()
            .map(|x| {
                let mx: Vec<f64> = x.iter().zip(m).map(|(a, b)| a * b).collect();
                factor.solve(&mx)
            })
            .collect();
        m_orthonormalize(&mut y, m, &mut rng);
        let sy: Vec<Vec<f64>> = y.iter().map(|v| s.matvec(v)).collect();
        let mut a = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let v = super::dot(&y[i], &sy[j]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(a);
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        for (slot, &i) in idx.iter().enumerate() {
            let c = eig.eigenvectors.column(i);
            let mut x = vec![0.0; n];
            for (k, yk) in y.iter().enumerate() {
                axpy(c[k], yk, &mut x);
            }
            block[slot] = x;
            values[slot] = eig.eigenvalues[i];
        }
        let mut done = true;
        for i in 0..count {
            residuals[i] = residual(s, m, &block[i], values[i]) / scale;
            if residuals[i] > opts.tol {
                done = false;
            }
        }
        if done {
            break;
        }
        if iterations >= opts.max_iter {
            let worst = residuals[..count].iter().fold(0.0f64, |a, &b| a.max(b));
            return Err(SolverError::SolverStall { iterations, residual: worst });
        }
    }
    block.truncate(count);
    values.truncate(count);
    residuals.truncate(count);
    Ok(EigenPairs { values, vectors: block, residuals, scale, iterations, dense: false, warnings: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.extend([(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)]);
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn cycle_spectrum_dense_and_iterative_agree() {
        let n = 600;
        let s = cycle(n);
        let m = vec![1.0; n];
        let exact = |k: usize| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos();
        let it = smallest_eigenpairs(&s, &m, 3, &EigenOptions { force_iterative: true, ..Default::default() }).unwrap();
        assert!(!it.dense);
        assert!(it.values[0].abs() < 1e-10);
        assert!((it.values[1] - exact(1)).abs() < 1e-10);
        assert!((it.values[2] - exact(1)).abs() < 1e-10);
        let de = smallest_eigenpairs(&s, &m, 3, &EigenOptions { dense_limit: 1000, ..Default::default() }).unwrap();
        assert!(de.dense);
        for (a, b) in it.values.iter().zip(&de.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn generalized_mass_is_respected() {
        let s = CsrMatrix::from_diagonal(&[2.0, 6.0, 12.0]);
        let m = [1.0, 2.0, 3.0];
        let e = smallest_eigenpairs(&s, &m, 3, &EigenOptions::default()).unwrap();
        for (v, want) in e.values.iter().zip([2.0, 3.0, 4.0]) {
            assert!((v - want).abs() < 1e-12);
        }
        for x in &e.vectors {
            assert!((m_dot(x, x, &m) - 1.0).abs() < 1e-12);
        }
    }
}
