//! One-dimensional reductions of differential forms on warped products
//! `[0, L] x N` with metric `dr² + e^{2r} h`, `N` a flat torus of dimension
//! `n - 1`.
//!
//! A Fourier mode `e^{i⟨m, θ⟩}` with `|m|² = μ` reduces a `j`-form to a pair
//! `(p, a)`: `p(r)` is the coefficient of `dr ∧ (·)` in `Λ^{j-1}`, `a(r)` the
//! tangential part in `Λ^j`. Rotating `m` onto `√μ e₀` and absorbing the phase
//! `i` into `p` makes everything real:
//!
//! `d(p, a) = (a' - m∧p, m∧a)`.
//!
//! On the grid, `p` lives at cell midpoints and `a` at nodes, so the discrete
//! `d` is a difference of node values minus a wedge, and `d ∘ d = 0` exactly.
//! Pointwise norms carry the weights `ω_j(r) = e^{(n-1-2j) r}`.

mod checks;
mod oracles;

pub use checks::{
    donnelly_xavier_check, flow_primitive, gap_check, hardy_check, pullback_check, sample_closed_form,
    vanishing_check, InequalityReport, PrimitiveReport, PullbackReport, VanishingReport, VIOLATION_TOL,
};
pub use oracles::{analytic_oracles, OracleGrid, OracleTable, SmoothProfile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::{smallest_eigenpairs, CsrMatrix, EigenOptions, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WarpedError {
    #[error("radial step {dr} is coarser than 0.1")]
    GridTooCoarse { dr: f64 },
    #[error("invalid problem: {0}")]
    BadProblem(String),
    #[error("form is not closed (relative residual {residual:e})")]
    NotClosed { residual: f64 },
    #[error("form carries {fraction:e} of its squared norm within one unit of r = L")]
    TailTooFat { fraction: f64 },
    #[error("no Hardy constant: (n-1)/2 - (k-1) = {0} is not positive")]
    NoHardyConstant(f64),
    #[error("unknown oracle {0:?}")]
    UnknownOracle(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Boundary conditions at the two ends of `[0, L]`. The truncation end
/// `r = L` gets the condition dual to the one at `r = 0`, so that the pair
/// has no cohomology of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialBc {
    /// Tangential part vanishes at both ends.
    CompactSupport,
    /// Tangential part vanishes at `r = 0`; the node at `r = L` is free.
    RelativeAt0,
    /// The node at `r = 0` is free; the tangential part vanishes at `r = L`.
    AbsoluteAt0,
}

/// Largest accepted radial step.
pub const MAX_DR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeProblem {
    pub n: usize,
    pub k: usize,
    pub length: f64,
    pub dr: f64,
    pub cells: usize,
    /// Mode eigenvalues `μ = |m|²`.
    pub modes: Vec<f64>,
    pub bc: RadialBc,
}

impl ModeProblem {
    /// The grid uses `ceil(L / dr)` cells, so the effective step never
    /// exceeds the requested one.
    pub fn new(n: usize, k: usize, length: f64, dr: f64, modes: Vec<f64>, bc: RadialBc) -> Result<Self, WarpedError> {
        if n < 2 || k > n {
            return Err(WarpedError::BadProblem(format!("need n >= 2 and k <= n, got n = {n}, k = {k}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(WarpedError::BadProblem(format!("length {length}")));
        }
        if !(dr > 0.0) || dr > MAX_DR {
            return Err(WarpedError::GridTooCoarse { dr });
        }
        if modes.is_empty() || modes.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(WarpedError::BadProblem("modes must be a nonempty list of finite μ >= 0".into()));
        }
        let cells = (length / dr - 1e-9).ceil().max(2.0) as usize;
        Ok(Self { n, k, length, dr: length / cells as f64, cells, modes, bc })
    }

    pub fn with_bc(&self, bc: RadialBc) -> Self {
        Self { bc, ..self.clone() }
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn fiber_dim(&self) -> usize {
        self.n - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn midpoint(&self, c: usize) -> f64 {
        (c as f64 + 0.5) * self.dr
    }

    /// Exponent of `ω_j`: `n - 1 - 2j` (may be negative).
    pub fn weight_exponent(&self, j: isize) -> f64 {
        self.n as f64 - 1.0 - 2.0 * j as f64
    }

    /// `½((n-1)/2 - k)²`, the lower bound for the spectrum in degree `k`.
    pub fn gap_constant(&self) -> f64 {
        0.5 * ((self.n as f64 - 1.0) / 2.0 - self.k as f64).powi(2)
    }

    pub fn space(&self, degree: usize) -> ModeSpace {
        ModeSpace::new(self, degree)
    }
}

/// Sorted bitmasks of the `j`-subsets of `{0, .., f-1}`.
pub fn fiber_basis(f: usize, j: isize) -> Vec<u32> {
    if j < 0 || j as usize > f {
        return vec![];
    }
    let mut out: Vec<u32> = (0u32..(1u32 << f)).filter(|m| m.count_ones() as isize == j).collect();
    out.sort_unstable();
    out
}

/// Degrees of freedom of `j`-forms of one mode, interleaved by position:
/// node `i` (tangential part) then cell `i` (radial part).
#[derive(Debug, Clone)]
pub struct ModeSpace {
    pub degree: usize,
    pub p_basis: Vec<u32>,
    pub a_basis: Vec<u32>,
    pub cells: usize,
    pub first_node: usize,
    node_offset: Vec<usize>,
    cell_offset: Vec<usize>,
    /// `log` of the quadrature weight of each degree of freedom.
    pub log_weight: Vec<f64>,
    pub dim: usize,
}

impl ModeSpace {
    fn new(problem: &ModeProblem, degree: usize) -> Self {
        let f = problem.fiber_dim();
        let p_basis = fiber_basis(f, degree as isize - 1);
        let a_basis = fiber_basis(f, degree as isize);
        let first_node = match problem.bc {
            RadialBc::AbsoluteAt0 => 0,
            _ => 1,
        };
        let last_node = match problem.bc {
            RadialBc::RelativeAt0 => problem.cells,
            _ => problem.cells - 1,
        };
        let n_cells = problem.cells;
        let mut node_offset = vec![usize::MAX; n_cells + 1];
        let mut cell_offset = vec![usize::MAX; n_cells];
        let mut log_weight = Vec::new();
        let (ea, ep) = (problem.weight_exponent(degree as isize), problem.weight_exponent(degree as isize - 1));
        let ldr = problem.dr.ln();
        let mut next = 0;
        for i in 0..=n_cells {
            if i >= first_node && i <= last_node && !a_basis.is_empty() {
                node_offset[i] = next;
                let half = if i == 0 || i == n_cells { 0.5f64.ln() } else { 0.0 };
                for _ in &a_basis {
                    log_weight.push(ea * problem.node(i) + ldr + half);
                }
                next += a_basis.len();
            }
            if i < n_cells && !p_basis.is_empty() {
                cell_offset[i] = next;
                for _ in &p_basis {
                    log_weight.push(ep * problem.midpoint(i) + ldr);
                }
                next += p_basis.len();
            }
        }
        Self { degree, p_basis, a_basis, cells: n_cells, first_node, node_offset, cell_offset, log_weight, dim: next }
    }

    /// Index of tangential component `b` at node `i`, if that node is free.
    pub fn a_index(&self, i: usize, b: usize) -> Option<usize> {
        let o = *self.node_offset.get(i)?;
        (o != usize::MAX).then(|| o + b)
    }

    pub fn p_index(&self, c: usize, b: usize) -> Option<usize> {
        let o = *self.cell_offset.get(c)?;
        (o != usize::MAX).then(|| o + b)
    }

    /// Packs a form into weighted coordinates `W^{1/2} x`.
    pub fn normalize(&self, form: &ModeForm) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for c in 0..self.cells {
            for b in 0..self.p_basis.len() {
                if let Some(ix) = self.p_index(c, b) {
                    x[ix] = form.p[c * self.p_basis.len() + b] * (0.5 * self.log_weight[ix]).exp();
                }
            }
        }
        for i in 0..=self.cells {
            for b in 0..self.a_basis.len() {
                if let Some(ix) = self.a_index(i, b) {
                    x[ix] = form.a[i * self.a_basis.len() + b] * (0.5 * self.log_weight[ix]).exp();
                }
            }
        }
        x
    }

    /// Inverse of [`normalize`](Self::normalize); removed nodes get zero.
    pub fn denormalize(&self, x: &[f64], mu: f64) -> ModeForm {
        let mut form = ModeForm::zeros(self, mu);
        for c in 0..self.cells {
            for b in 0..self.p_basis.len() {
                if let Some(ix) = self.p_index(c, b) {
                    form.p[c * self.p_basis.len() + b] = x[ix] * (-0.5 * self.log_weight[ix]).exp();
                }
            }
        }
        for i in 0..=self.cells {
            for b in 0..self.a_basis.len() {
                if let Some(ix) = self.a_index(i, b) {
                    form.a[i * self.a_basis.len() + b] = x[ix] * (-0.5 * self.log_weight[ix]).exp();
                }
            }
        }
        form
    }
}

/// A `j`-form of one mode in plain (unweighted) coefficients. `p` has
/// `cells x C(n-1, j-1)` entries, `a` has `(cells + 1) x C(n-1, j)`; entries
/// at constrained end nodes are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeForm {
    pub degree: usize,
    pub mu: f64,
    pub p: Vec<f64>,
    pub a: Vec<f64>,
}

impl ModeForm {
    pub fn zeros(space: &ModeSpace, mu: f64) -> Self {
        Self {
            degree: space.degree,
            mu,
            p: vec![0.0; space.cells * space.p_basis.len()],
            a: vec![0.0; (space.cells + 1) * space.a_basis.len()],
        }
    }
}

// (target, source, value) entries of e₀∧ : Λ^j -> Λ^{j+1}, as basis positions.
pub(crate) fn wedge_e0(from: &[u32], to: &[u32]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (s, &m) in from.iter().enumerate() {
        if m & 1 == 0 {
            let t = to.binary_search(&(m | 1)).expect("wedge target in basis");
            out.push((t, s));
        }
    }
    out
}

/// Weighted matrix of `d : Λ^j -> Λ^{j+1}` for mode `μ`, i.e.
/// `W_{j+1}^{1/2} D W_j^{-1/2}`.
pub fn mode_d(problem: &ModeProblem, degree: usize, mu: f64) -> CsrMatrix {
    let src = problem.space(degree);
    let dst = problem.space(degree + 1);
    let m = mu.sqrt();
    let inv_dr = 1.0 / problem.dr;
    let mut trip = Vec::new();
    let mut push = |t: Option<usize>, s: Option<usize>, v: f64| {
        if let (Some(t), Some(s)) = (t, s) {
            let scale = (0.5 * (dst.log_weight[t] - src.log_weight[s])).exp();
            trip.push((t, s, v * scale));
        }
    };
    // radial part of the image: (a_{c+1} - a_c)/dr - m∧p_c, in Λ^j at cell c
    let wedge_p = wedge_e0(&src.p_basis, &src.a_basis);
    for c in 0..problem.cells {
        for b in 0..src.a_basis.len() {
            let t = dst.p_index(c, b);
            push(t, src.a_index(c + 1, b), inv_dr);
            push(t, src.a_index(c, b), -inv_dr);
        }
        if m > 0.0 {
            for &(tb, sb) in &wedge_p {
                push(dst.p_index(c, tb), src.p_index(c, sb), -m);
            }
        }
    }
    // tangential part: m∧a_i
    if m > 0.0 {
        let wedge_a = wedge_e0(&src.a_basis, &dst.a_basis);
        for i in 0..=problem.cells {
            for &(tb, sb) in &wedge_a {
                push(dst.a_index(i, tb), src.a_index(i, sb), m);
            }
        }
    }
    CsrMatrix::from_triplets(dst.dim, src.dim, &trip)
}

/// Weighted Hodge Laplacian `D̃_jᵀ D̃_j + D̃_{j-1} D̃_{j-1}ᵀ` of one mode.
pub fn mode_laplacian(problem: &ModeProblem, degree: usize, mu: f64) -> CsrMatrix {
    let up = mode_d(problem, degree, mu);
    let mut s = up.transpose().mul(&up);
    if degree > 0 {
        let down = mode_d(problem, degree - 1, mu);
        s = s.add(&down.mul(&down.transpose()));
    }
    s
}

/// Smallest `count` eigenvalues of the degree-`k` Laplacian for each mode.
pub fn mode_spectrum(problem: &ModeProblem, count: usize) -> Result<Vec<(f64, Vec<f64>)>, WarpedError> {
    let mut out = Vec::with_capacity(problem.modes.len());
    for &mu in &problem.modes {
        let s = mode_laplacian(problem, problem.k, mu);
        let n = s.nrows();
        if n == 0 {
            out.push((mu, vec![]));
            continue;
        }
        let opts = EigenOptions { tol: 1e-11, dense_limit: 300, ..Default::default() };
        let e = smallest_eigenpairs(&s, &vec![1.0; n], count.min(n), &opts)?;
        out.push((mu, e.values));
    }
    Ok(out)
}

/// Bottom of the spectrum of the degree-`k` Laplacian over all modes.
pub fn mode_lambda0(problem: &ModeProblem) -> Result<f64, WarpedError> {
    let spec = mode_spectrum(problem, 1)?;
    Ok(spec.iter().filter_map(|(_, v)| v.first().copied()).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_squared_is_zero() {
        for &(n, mu) in &[(3usize, 0.0), (4, 2.0), (5, 1.0)] {
            let p = ModeProblem::new(n, 0, 3.0, 0.1, vec![mu], RadialBc::AbsoluteAt0).unwrap();
            for j in 0..n - 1 {
                let prod = mode_d(&p, j + 1, mu).mul(&mode_d(&p, j, mu));
                let worst = prod.triplets().iter().fold(0.0f64, |m, t| m.max(t.2.abs()));
                assert!(worst < 1e-9, "n={n} j={j} worst={worst}");
            }
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        assert_eq!(
            ModeProblem::new(3, 1, 10.0, 0.2, vec![0.0], RadialBc::CompactSupport).unwrap_err(),
            WarpedError::GridTooCoarse { dr: 0.2 }
        );
    }

    #[test]
    fn flat_weight_interval() {
        // n = 1 fiber would be flat; n = 2 with μ = 0 and k = 0 is the half-cylinder.
        let p = ModeProblem::new(2, 0, 20.0, 0.01, vec![0.0], RadialBc::CompactSupport).unwrap();
        let l = mode_lambda0(&p).unwrap();
        let want = 0.25 + (std::f64::consts::PI / 20.0).powi(2);
        assert!((l - want).abs() < 1e-4, "{l} vs {want}");
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(fiber_basis(4, 2).len(), 6);
        assert_eq!(fiber_basis(4, -1).len(), 0);
        assert_eq!(fiber_basis(4, 5).len(), 0);
    }
}
