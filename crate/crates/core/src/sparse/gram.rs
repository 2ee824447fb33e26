use super::{axpy, SolverError};

/// `Σ a_i b_i m_i`.
pub fn m_dot(a: &[f64], b: &[f64], m: &[f64]) -> f64 {
    a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum()
}

pub fn m_norm(a: &[f64], m: &[f64]) -> f64 {
    m_dot(a, a, m).sqrt()
}

/// Modified Gram–Schmidt with one reorthogonalization pass in the inner
/// product `diag(m)`. Fails if any vector is numerically dependent on the
/// previous ones (relative threshold `1e-10`).
pub fn gram_orthonormalize(vectors: &[Vec<f64>], m: &[f64]) -> Result<Vec<Vec<f64>>, SolverError> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != m.len() {
            return Err(SolverError::DimensionMismatch { expected: m.len(), got: v.len() });
        }
        let mut w = v.clone();
        let n0 = m_norm(&w, m);
        for _ in 0..2 {
            for q in &out {
                let c = m_dot(q, &w, m);
                axpy(-c, q, &mut w);
            }
        }
        let n = m_norm(&w, m);
        if !(n > 1e-10 * n0) {
            let rank = out.len() + count_independent(&vectors[out.len() + 1..], &out, m);
            return Err(SolverError::RankDeficient { rank, requested: vectors.len() });
        }
        w.iter_mut().for_each(|x| *x /= n);
        out.push(w);
    }
    Ok(out)
}

fn count_independent(rest: &[Vec<f64>], basis: &[Vec<f64>], m: &[f64]) -> usize {
    let mut basis = basis.to_vec();
    let start = basis.len();
    for v in rest {
        let mut w = v.clone();
        let n0 = m_norm(&w, m);
        for _ in 0..2 {
            for q in &basis {
                let c = m_dot(q, &w, m);
                axpy(-c, q, &mut w);
            }
        }
        let n = m_norm(&w, m);
        if n > 1e-10 * n0 {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis.len() - start
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_in_weighted_product() {
        let m = [1.0, 2.0, 0.5];
        let vs = vec![vec![1.0, 1.0, 1.0], vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 1.0]];
        let q = gram_orthonormalize(&vs, &m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m_dot(&q[i], &q[j], &m) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dependent_vectors_report_rank() {
        let m = [1.0; 3];
        let vs = vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(gram_orthonormalize(&vs, &m), Err(SolverError::RankDeficient { rank: 2, requested: 3 }));
    }
}
