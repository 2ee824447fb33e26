use super::{axpy, dot, norm2, CsrMatrix, SolverError};

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Stop when `‖b - Ax‖₂ <= tol * ‖b‖₂`.
    pub tol: f64,
    pub max_iter: usize,
    /// Jacobi preconditioning. Requires a positive diagonal.
    pub jacobi: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 20_000, jacobi: true }
    }
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True relative residual of the returned iterate.
    pub relative_residual: f64,
}

/// Euclidean-orthonormal basis of a subspace to be projected out of the
/// right-hand side and every search direction. Use it for singular systems
/// whose kernel is known.
#[derive(Debug, Clone, Default)]
pub struct Deflation {
    basis: Vec<Vec<f64>>,
}

impl Deflation {
    /// Orthonormalizes the given vectors. Numerically dependent ones are dropped.
    pub fn new(vectors: &[Vec<f64>]) -> Self {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            let mut w = v.clone();
            let n0 = norm2(&w);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let n = norm2(&w);
            if n > 1e-10 * n0.max(f64::MIN_POSITIVE) {
                w.iter_mut().for_each(|x| *x /= n);
                basis.push(w);
            }
        }
        Self { basis }
    }

    /// Deflation by the constant vector, the kernel of a connected graph Laplacian.
    pub fn constants(n: usize) -> Self {
        Self::new(&[vec![1.0; n]])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, v: &mut [f64]) {
        for q in &self.basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

/// Preconditioned conjugate gradients for a symmetric positive
/// (semi)definite matrix.
///
/// With `deflation` the system is solved on the orthogonal complement of the
/// deflated subspace. A system that is inconsistent and not deflated cannot
/// reach the tolerance and ends in [`SolverError::SolverStall`].
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &CgOptions,
    deflation: Option<&Deflation>,
) -> Result<CgSolution, SolverError> {
    let n = a.nrows();
    if b.len() != n {
        return Err(SolverError::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut rhs = b.to_vec();
    if let Some(d) = deflation {
        d.project(&mut rhs);
    }
    let bnorm = norm2(&rhs);
    if bnorm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = if opts.jacobi {
        a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect()
    } else {
        vec![1.0; n]
    };

    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if let Some(d) = deflation {
        d.project(&mut x);
    }
    let mut r = rhs.clone();
    if x.iter().any(|&v| v != 0.0) {
        let ax = a.matvec(&x);
        axpy(-1.0, &ax, &mut r);
    }
    let precondition = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        if let Some(d) = deflation {
            d.project(&mut z);
        }
        z
    };
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut best = norm2(&r) / bnorm;
    let mut iterations = 0;

    while best > opts.tol {
        if iterations >= opts.max_iter {
            return Err(SolverError::SolverStall { iterations, residual: best });
        }
        iterations += 1;
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !rz.is_finite() {
            return Err(SolverError::SolverStall { iterations, residual: best });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if let Some(d) = deflation {
            d.project(&mut r);
        }
        let rel = norm2(&r) / bnorm;
        best = rel;
        if rel <= opts.tol {
            break;
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    let mut true_r = rhs;
    axpy(-1.0, &a.matvec(&x), &mut true_r);
    if let Some(d) = deflation {
        d.project(&mut true_r);
    }
    let relative_residual = norm2(&true_r) / bnorm;
    if relative_residual > opts.tol * 100.0 {
        return Err(SolverError::SolverStall { iterations, residual: relative_residual });
    }
    Ok(CgSolution { x, iterations, relative_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.extend([(i, i, 1.0), (i + 1, i + 1, 1.0), (i, i + 1, -1.0), (i + 1, i, -1.0)]);
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn solves_spd_tridiagonal() {
        let n = 50;
        let a = path_laplacian(n).add(&CsrMatrix::identity(n));
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&xs);
        let sol = cg_solve(&a, &b, None, &CgOptions::default(), None).unwrap();
        for (u, v) in sol.x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_consistent_with_deflation() {
        let n = 30;
        let a = path_laplacian(n);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64).powi(2) / 100.0).collect();
        let b = a.matvec(&xs);
        let d = Deflation::constants(n);
        let sol = cg_solve(&a, &b, None, &CgOptions::default(), Some(&d)).unwrap();
        let mean: f64 = xs.iter().sum::<f64>() / n as f64;
        for (u, v) in sol.x.iter().zip(&xs) {
            assert!((u - (v - mean)).abs() < 1e-8);
        }
    }

    #[test]
    fn inconsistent_without_deflation_stalls() {
        let n = 20;
        let a = path_laplacian(n);
        let b = vec![1.0; n];
        let opts = CgOptions { max_iter: 200, ..Default::default() };
        match cg_solve(&a, &b, None, &opts, None) {
            Err(SolverError::SolverStall { .. }) => {}
            other => panic!("expected stall, got {other:?}"),
        }
    }
}
