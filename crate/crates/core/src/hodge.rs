//! Hodge Laplacians, harmonic forms and Hodge decompositions of cochains.
//!
//! The weak Laplacian in degree `k` is
//! `S_k = d_kᵀ M_{k+1} d_k + M_k d_{k-1} M_{k-1}⁻¹ d_{k-1}ᵀ M_k`, paired with the
//! mass `M_k`. Relative boundary conditions remove boundary simplices;
//! absolute ones are natural and keep everything.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex, Surface};
use crate::metric::{mass_matrices, MetricError, MetricField, OperatorBundle};
use crate::sparse::{
    cg_solve, gram_orthonormalize, m_dot, m_norm, smallest_eigenpairs, CgOptions, CsrMatrix, EigenOptions,
    EigenWarning, SolverError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HodgeError {
    #[error("boundary condition {0:?} requested on a closed complex")]
    BcOnClosedComplex(BoundaryCondition),
    #[error("no spectral gap of {required} found among {searched} eigenvalues (best ratio {best:e})")]
    AmbiguousKernel { searched: usize, best: f64, required: f64 },
    #[error("degree {0} is outside 0..=2")]
    DegreeOutOfRange(usize),
    #[error("expected a cochain of length {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("cochain is nonzero on boundary simplex {0} under relative conditions")]
    BoundaryValues(usize),
    #[error("only {rings_per_decade:.2} rings per decade in the transition annulus, need 8")]
    UnderResolved { rings_per_decade: f64 },
    #[error("mesh does not cover the annulus [{inner:e}, {outer:e}]")]
    DomainTooSmall { inner: f64, outer: f64 },
    #[error("invalid split: {0}")]
    BadSplit(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    None,
    Absolute,
    Relative,
}

fn kept(bundle: &OperatorBundle, k: usize, bc: BoundaryCondition) -> Result<Vec<usize>, HodgeError> {
    let c = bundle.complex();
    let n = c.n_simplices(k).map_err(|_| HodgeError::DegreeOutOfRange(k))?;
    Ok(match bc {
        BoundaryCondition::Relative => {
            let mask = c.boundary_mask(k)?;
            (0..n).filter(|&i| !mask[i]).collect()
        }
        _ => (0..n).collect(),
    })
}

/// `d_k` restricted to the degrees of freedom of `bc`, as floats.
fn restricted_d(bundle: &OperatorBundle, k: usize, bc: BoundaryCondition) -> Result<CsrMatrix, HodgeError> {
    let cols = kept(bundle, k, bc)?;
    if k == 2 {
        return Ok(CsrMatrix::zeros(0, cols.len()));
    }
    let rows = kept(bundle, k + 1, bc)?;
    Ok(bundle.d(k).select(&rows, &cols).to_f64())
}

fn check_bc(bundle: &OperatorBundle, bc: BoundaryCondition) -> Result<(), HodgeError> {
    if bc != BoundaryCondition::None && bundle.complex().is_closed() {
        return Err(HodgeError::BcOnClosedComplex(bc));
    }
    Ok(())
}

/// A Hodge Laplacian on the degrees of freedom of one boundary condition.
#[derive(Debug, Clone)]
pub struct Laplacian {
    pub k: usize,
    pub bc: BoundaryCondition,
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    /// Global simplex ids of the degrees of freedom.
    pub dofs: Vec<usize>,
    pub full_dim: usize,
}

impl Laplacian {
    /// Extends a restricted vector by zero.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.full_dim];
        for (&i, &v) in self.dofs.iter().zip(x) {
            out[i] = v;
        }
        out
    }

    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&i| x[i]).collect()
    }
}

pub fn assemble_laplacian(bundle: &OperatorBundle, k: usize, bc: BoundaryCondition) -> Result<Laplacian, HodgeError> {
    if k > 2 {
        return Err(HodgeError::DegreeOutOfRange(k));
    }
    check_bc(bundle, bc)?;
    let dofs = kept(bundle, k, bc)?;
    let mk: Vec<f64> = dofs.iter().map(|&i| bundle.mass(k)[i]).collect();
    let n = dofs.len();
    let mut s = CsrMatrix::zeros(n, n);
    if k < 2 {
        let d = restricted_d(bundle, k, bc)?;
        let up_rows = kept(bundle, k + 1, bc)?;
        let mup: Vec<f64> = up_rows.iter().map(|&i| bundle.mass(k + 1)[i]).collect();
        let dt = d.transpose();
        s = dt.scale(None, Some(&mup)).mul(&d);
    }
    if k > 0 {
        let d = restricted_d(bundle, k - 1, bc)?;
        let down = kept(bundle, k - 1, bc)?;
        let inv: Vec<f64> = down.iter().map(|&i| 1.0 / bundle.mass(k - 1)[i]).collect();
        let left = d.scale(Some(&mk), Some(&inv));
        let right = d.transpose().scale(None, Some(&mk));
        s = s.add(&left.mul(&right));
    }
    Ok(Laplacian { k, bc, stiffness: s, mass: mk, dofs, full_dim: bundle.complex().n_simplices(k)? })
}

/// How harmonic forms are separated from the rest of the spectrum.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicPolicy {
    /// Eigenvalues below `floor_rel * scale` count as numerically zero.
    pub floor_rel: f64,
    /// Required ratio between the first nonzero eigenvalue and the last kernel one.
    pub gap_min: f64,
    /// Eigenvalues computed beyond the expected kernel dimension.
    pub extra: usize,
    pub eigen: EigenOptions,
}

impl Default for HarmonicPolicy {
    fn default() -> Self {
        Self { floor_rel: 1e-10, gap_min: 100.0, extra: 4, eigen: EigenOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub k: usize,
    pub bc: BoundaryCondition,
    /// M-orthonormal harmonic cochains, full length (zero on removed simplices).
    pub vectors: Vec<Vec<f64>>,
    /// Smallest eigenvalues that were computed, kernel first.
    pub eigenvalues: Vec<f64>,
    /// `λ_dim / max(λ_{dim-1}, floor)`; infinite when the window holds only kernel.
    pub gap: f64,
    pub floor: f64,
    pub scale: f64,
    pub betti: usize,
    /// Largest `‖S h‖_{M⁻¹} / scale` over the basis.
    pub kernel_residual: f64,
    pub warnings: Vec<EigenWarning>,
}

impl HarmonicBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn matches_betti(&self) -> bool {
        self.dim() == self.betti
    }

    /// M-orthogonal projection of a full-length cochain onto the harmonic space.
    pub fn project(&self, bundle: &OperatorBundle, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for h in &self.vectors {
            let c = bundle.inner(self.k, h, x);
            for (o, hv) in out.iter_mut().zip(h) {
                *o += c * hv;
            }
        }
        out
    }
}

fn kernel_count(values: &[f64], floor: f64, gap_min: f64) -> Option<(usize, f64)> {
    let mut prev = 0.0f64;
    for (j, &v) in values.iter().enumerate() {
        let ratio = v / prev.max(floor);
        if ratio >= gap_min {
            return Some((j, ratio));
        }
        prev = v;
    }
    None
}

/// Harmonic `k`-cochains under `bc`.
///
/// The kernel dimension is read off a spectral gap of at least
/// `policy.gap_min`; the Betti number only sizes the eigenvalue window and is
/// reported next to the result for comparison.
pub fn harmonic_basis(
    bundle: &OperatorBundle,
    k: usize,
    bc: BoundaryCondition,
    policy: &HarmonicPolicy,
) -> Result<HarmonicBasis, HodgeError> {
    let lap = assemble_laplacian(bundle, k, bc)?;
    let betti = bundle.complex().betti(bc == BoundaryCondition::Relative)?[k];
    let n = lap.dofs.len();
    let scale = lap.stiffness.spectral_scale(&lap.mass).max(f64::MIN_POSITIVE);
    let floor = policy.floor_rel * scale;
    if n == 0 {
        return Ok(HarmonicBasis {
            k,
            bc,
            vectors: vec![],
            eigenvalues: vec![],
            gap: f64::INFINITY,
            floor,
            scale,
            betti,
            kernel_residual: 0.0,
            warnings: vec![],
        });
    }
    let mut window = (betti + policy.extra).min(n);
    loop {
        let eig = smallest_eigenpairs(&lap.stiffness, &lap.mass, window, &policy.eigen)?;
        let found = kernel_count(&eig.values, floor, policy.gap_min);
        let (dim, gap) = match found {
            Some(x) => x,
            None if window < n => {
                window = (window * 2).min(n);
                continue;
            }
            None if eig.values.last().is_some_and(|&v| v <= floor) => (n, f64::INFINITY),
            None => {
                let best = eig
                    .values
                    .windows(2)
                    .map(|w| w[1] / w[0].max(floor))
                    .fold(eig.values[0] / floor, f64::max);
                return Err(HodgeError::AmbiguousKernel { searched: window, best, required: policy.gap_min });
            }
        };
        let kernel: Vec<Vec<f64>> = eig.vectors[..dim].to_vec();
        let kernel = gram_orthonormalize(&kernel, &lap.mass)?;
        let kernel_residual = kernel
            .iter()
            .map(|h| {
                let sh = lap.stiffness.matvec(h);
                sh.iter().zip(&lap.mass).map(|(a, m)| a * a / m).sum::<f64>().sqrt() / scale
            })
            .fold(0.0, f64::max);
        return Ok(HarmonicBasis {
            k,
            bc,
            vectors: kernel.iter().map(|h| lap.embed(h)).collect(),
            eigenvalues: eig.values,
            gap,
            floor,
            scale,
            betti,
            kernel_residual,
            warnings: eig.warnings,
        });
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub harmonic: Vec<f64>,
    pub exact: Vec<f64>,
    pub coexact: Vec<f64>,
    /// `‖x - h - dφ - δψ‖_M / ‖x‖_M`.
    pub residual: f64,
    /// Largest `|⟨a, b⟩_M| / ‖x‖²_M` over pairs of components.
    pub orthogonality: f64,
}

/// Splits a `k`-cochain into harmonic, exact and coexact parts. The exact and
/// coexact parts are computed from independent solves, so the residual is a
/// genuine check.
pub fn hodge_decompose(
    bundle: &OperatorBundle,
    x: &[f64],
    k: usize,
    bc: BoundaryCondition,
    basis: &HarmonicBasis,
) -> Result<Decomposition, HodgeError> {
    let lap_dofs = kept(bundle, k, bc)?;
    let full = bundle.complex().n_simplices(k)?;
    if x.len() != full {
        return Err(HodgeError::SizeMismatch { expected: full, got: x.len() });
    }
    if bc == BoundaryCondition::Relative {
        let mask = bundle.complex().boundary_mask(k)?;
        if let Some(i) = (0..full).find(|&i| mask[i] && x[i] != 0.0) {
            return Err(HodgeError::BoundaryValues(i));
        }
    }
    let mk: Vec<f64> = lap_dofs.iter().map(|&i| bundle.mass(k)[i]).collect();
    let xr: Vec<f64> = lap_dofs.iter().map(|&i| x[i]).collect();
    let embed = |v: &[f64]| {
        let mut out = vec![0.0; full];
        for (&i, &a) in lap_dofs.iter().zip(v) {
            out[i] = a;
        }
        out
    };
    let harmonic = basis.project(bundle, x);
    let cg = CgOptions { tol: 1e-13, max_iter: 50_000, jacobi: true };

    let mut exact = vec![0.0; lap_dofs.len()];
    if k > 0 {
        let d = restricted_d(bundle, k - 1, bc)?;
        let mx: Vec<f64> = xr.iter().zip(&mk).map(|(a, m)| a * m).collect();
        let rhs = d.matvec_t(&mx);
        let a = d.transpose().scale(None, Some(&mk)).mul(&d);
        let phi = cg_solve(&a, &rhs, None, &cg, None)?.x;
        exact = d.matvec(&phi);
    }
    let mut coexact = vec![0.0; lap_dofs.len()];
    if k < 2 {
        let d = restricted_d(bundle, k, bc)?;
        let inv: Vec<f64> = mk.iter().map(|m| 1.0 / m).collect();
        let rhs = d.matvec(&xr);
        let a = d.scale(None, Some(&inv)).mul(&d.transpose());
        let psi = cg_solve(&a, &rhs, None, &cg, None)?.x;
        coexact = d.matvec_t(&psi).iter().zip(&inv).map(|(a, b)| a * b).collect();
    }
    let exact = embed(&exact);
    let coexact = embed(&coexact);
    let m = bundle.mass(k);
    let xnorm2 = m_dot(x, x, m).max(f64::MIN_POSITIVE);
    let rest: Vec<f64> = (0..full).map(|i| x[i] - harmonic[i] - exact[i] - coexact[i]).collect();
    let residual = m_norm(&rest, m) / xnorm2.sqrt();
    let orthogonality = [(&harmonic, &exact), (&harmonic, &coexact), (&exact, &coexact)]
        .iter()
        .map(|(a, b)| m_dot(a, b, m).abs() / xnorm2)
        .fold(0.0, f64::max);
    Ok(Decomposition { harmonic, exact, coexact, residual, orthogonality })
}

/// Operator distance `‖P_a - P_b‖` between the harmonic projectors of two
/// bases of equal dimension, measured in the mass of `bundle`. Computed as
/// the largest M-norm of `(I - P_a) B y` over unit `y`, which stays accurate
/// when the spaces nearly coincide.
pub fn projector_distance(bundle: &OperatorBundle, a: &HarmonicBasis, b: &HarmonicBasis) -> Result<f64, HodgeError> {
    if a.k != b.k || a.dim() != b.dim() {
        return Err(HodgeError::SizeMismatch { expected: a.dim(), got: b.dim() });
    }
    let m = bundle.mass(a.k);
    let d = b.dim();
    if d == 0 {
        return Ok(0.0);
    }
    let resid: Vec<Vec<f64>> = b
        .vectors
        .iter()
        .map(|v| {
            let p = a.project(bundle, v);
            v.iter().zip(&p).map(|(x, y)| x - y).collect()
        })
        .collect();
    let gram = nalgebra::DMatrix::from_fn(d, d, |i, j| m_dot(&resid[i], &resid[j], m));
    let top = gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    Ok(top.max(0.0).sqrt())
}

/// Degree-1 comparison of a metric with its conformal rescaling by a
/// per-triangle factor.
#[derive(Debug, Clone, Serialize)]
pub struct ConformalComparison {
    /// Largest entrywise relative difference of the 1-form masses.
    pub mass_difference: f64,
    pub projector_distance: f64,
    pub dims: [usize; 2],
}

pub fn conformal_comparison(
    complex: &SimplicialComplex,
    metric: &MetricField,
    u: &[f64],
    policy: &HarmonicPolicy,
) -> Result<ConformalComparison, HodgeError> {
    let rescaled = metric.conformal_rescale(complex, u)?;
    let b0 = mass_matrices(complex, metric)?;
    let b1 = mass_matrices(complex, &rescaled)?;
    let mass_difference =
        b0.mass(1).iter().zip(b1.mass(1)).map(|(x, y)| (x - y).abs() / x.abs()).fold(0.0, f64::max);
    let bc = if complex.is_closed() { BoundaryCondition::None } else { BoundaryCondition::Absolute };
    let h0 = harmonic_basis(&b0, 1, bc, policy)?;
    let h1 = harmonic_basis(&b1, 1, bc, policy)?;
    let dims = [h0.dim(), h1.dim()];
    let projector_distance = projector_distance(&b0, &h0, &h1)?;
    Ok(ConformalComparison { mass_difference, projector_distance, dims })
}

/// Worst decomposition defects over seeded random cochains.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionTrials {
    pub samples: usize,
    pub max_residual: f64,
    pub max_orthogonality: f64,
}

/// Decomposes `samples` random `k`-cochains with entries uniform in
/// `[-1, 1]`, zeroed on boundary simplices for relative conditions.
pub fn decomposition_trials(
    bundle: &OperatorBundle,
    k: usize,
    bc: BoundaryCondition,
    basis: &HarmonicBasis,
    samples: usize,
    seed: u64,
) -> Result<DecompositionTrials, HodgeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bundle.complex().n_simplices(k)?;
    let mask = bundle.complex().boundary_mask(k)?;
    let mut out = DecompositionTrials { samples, max_residual: 0.0, max_orthogonality: 0.0 };
    for _ in 0..samples {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let v = rng.gen_range(-1.0..1.0);
                if bc == BoundaryCondition::Relative && mask[i] {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let d = hodge_decompose(bundle, &x, k, bc, basis)?;
        out.max_residual = out.max_residual.max(d.residual);
        out.max_orthogonality = out.max_orthogonality.max(d.orthogonality);
    }
    Ok(out)
}

/// [`conformal_comparison`] for `samples` seeded factors uniform in
/// `[-amplitude, amplitude]` per triangle.
pub fn conformal_trials(
    complex: &SimplicialComplex,
    metric: &MetricField,
    samples: usize,
    amplitude: f64,
    seed: u64,
    policy: &HarmonicPolicy,
) -> Result<Vec<ConformalComparison>, HodgeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let u: Vec<f64> = (0..complex.n_triangles()).map(|_| rng.gen_range(-amplitude..=amplitude)).collect();
            conformal_comparison(complex, metric, &u, policy)
        })
        .collect()
}

/// Dirichlet energy of the logarithmic cutoff around a point.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffEnergy {
    pub n: f64,
    pub energy: f64,
    /// `2π / log n`.
    pub exact: f64,
    pub relative_error: f64,
    pub rings_per_decade: f64,
}

/// The cutoff `χ_n(r) = 0` for `r ≤ 1/n²`, `log(n² r) / log n` in between and
/// 1 for `r ≥ 1/n`.
pub fn cutoff_profile(r: f64, n: f64) -> f64 {
    let inner = 1.0 / (n * n);
    if r <= inner {
        0.0
    } else if r >= 1.0 / n {
        1.0
    } else {
        (n * n * r).ln() / n.ln()
    }
}

/// `‖d χ_n‖²` on a planar mesh, with `χ_n` sampled at vertices and distances
/// taken from `coords` to `center`.
pub fn cutoff_energy(
    bundle: &OperatorBundle,
    coords: &[[f64; 3]],
    center: [f64; 3],
    n: f64,
) -> Result<CutoffEnergy, HodgeError> {
    let nv = bundle.complex().n_vertices();
    if coords.len() != nv {
        return Err(HodgeError::SizeMismatch { expected: nv, got: coords.len() });
    }
    let r: Vec<f64> = coords
        .iter()
        .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)).sqrt())
        .collect();
    let (inner, outer) = (1.0 / (n * n), 1.0 / n);
    let rmin = r.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = r.iter().copied().fold(0.0, f64::max);
    if rmin > inner * (1.0 + 1e-9) || rmax < outer * (1.0 - 1e-9) {
        return Err(HodgeError::DomainTooSmall { inner, outer });
    }
    let mut rings: Vec<f64> =
        r.iter().copied().filter(|&x| x >= inner * (1.0 - 1e-9) && x <= outer * (1.0 + 1e-9)).collect();
    rings.sort_by(f64::total_cmp);
    rings.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * *b);
    let rings_per_decade = rings.len().saturating_sub(1) as f64 / n.log10();
    if rings_per_decade < 8.0 {
        return Err(HodgeError::UnderResolved { rings_per_decade });
    }
    let chi: Vec<f64> = r.iter().map(|&x| cutoff_profile(x, n)).collect();
    let m1 = bundle.mass(1);
    let energy = bundle
        .complex()
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[a, b])| m1[e] * (chi[b] - chi[a]).powi(2))
        .sum();
    let exact = 2.0 * std::f64::consts::PI / n.ln();
    Ok(CutoffEnergy { n, energy, exact, relative_error: (energy - exact).abs() / exact, rings_per_decade })
}

/// Outcome of projecting handle strip cochains onto harmonic 1-forms.
#[derive(Debug, Clone, Serialize)]
pub struct GenusExperiment {
    pub handles: usize,
    pub harmonic_dim: usize,
    /// Rank of the Gram matrix of the projected strips.
    pub gram_rank: usize,
    pub gram_eigenvalues: Vec<f64>,
    /// `pairing[i][j]`: integral of projected strip `i` over transverse loop `j`.
    pub pairing: Vec<Vec<f64>>,
}

/// Harmonic representatives of the strip cochains of a generated closed
/// surface are independent, one per handle. Their periods on the transverse
/// loops are preserved by the projection.
pub fn genus_lower_bound_experiment(
    surface: &Surface,
    metric: &MetricField,
    policy: &HarmonicPolicy,
) -> Result<GenusExperiment, HodgeError> {
    let bundle = mass_matrices(&surface.complex, metric)?;
    let basis = harmonic_basis(&bundle, 1, BoundaryCondition::None, policy)?;
    let ne = surface.complex.n_edges();
    let projected: Vec<Vec<f64>> =
        surface.handles.iter().map(|h| basis.project(&bundle, &h.strip_cochain(ne))).collect();
    let g = projected.len();
    let mut gram = nalgebra::DMatrix::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            gram[(i, j)] = bundle.inner(1, &projected[i], &projected[j]);
        }
    }
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let top = ev.last().copied().unwrap_or(0.0);
    let gram_rank = ev.iter().filter(|&&v| v > 1e-8 * top).count();
    let pairing = projected
        .iter()
        .map(|p| surface.handles.iter().map(|h| crate::complex::cycle_integral(p, &h.transverse)).collect())
        .collect();
    Ok(GenusExperiment { handles: g, harmonic_dim: basis.dim(), gram_rank, gram_eigenvalues: ev, pairing })
}

/// Per-degree numbers behind the dimension bounds for a split `M = K ∪ Ω̄`.
#[derive(Debug, Clone, Serialize)]
pub struct LottDegree {
    pub k: usize,
    pub dim_m: usize,
    pub dim_abs_omega: usize,
    pub dim_rel_omega: usize,
    pub betti_k: usize,
    pub betti_k_rel: usize,
    pub betti_k_plus_1_rel: usize,
    /// `dim_rel_omega + betti_k`.
    pub relative_bound: usize,
    /// `dim_abs_omega + betti_k_rel`.
    pub absolute_bound: usize,
    /// `dim_m + betti_k_plus_1_rel`, an upper bound for `dim_abs_omega`.
    pub restriction_bound: usize,
}

impl LottDegree {
    pub fn relative_holds(&self) -> bool {
        self.dim_m <= self.relative_bound
    }

    pub fn absolute_holds(&self) -> bool {
        self.dim_m <= self.absolute_bound
    }

    pub fn restriction_holds(&self) -> bool {
        self.dim_abs_omega <= self.restriction_bound
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LottReport {
    pub degrees: Vec<LottDegree>,
}

impl LottReport {
    pub fn all_hold(&self) -> bool {
        self.degrees.iter().all(|d| d.relative_holds() && d.absolute_holds() && d.restriction_holds())
    }

    pub fn equality(&self) -> bool {
        self.degrees.iter().all(|d| d.dim_m == d.relative_bound && d.dim_m == d.absolute_bound)
    }
}

fn sub_bundle(
    complex: &SimplicialComplex,
    metric: &MetricField,
    tris: &[usize],
) -> Result<(SimplicialComplex, OperatorBundle), HodgeError> {
    let (sub, old) = complex.sub_complex(tris)?;
    let m = metric.restrict(complex, &sub, &old, tris)?;
    let b = mass_matrices(&sub, &m)?;
    Ok((sub, b))
}

/// Compares harmonic dimensions on `M`, and on `Ω = M \ K` under both
/// boundary conditions, with Betti numbers of the compact piece `K` given by
/// `k_triangles`.
pub fn lott_dimension_check(
    complex: &SimplicialComplex,
    metric: &MetricField,
    k_triangles: &[usize],
    policy: &HarmonicPolicy,
) -> Result<LottReport, HodgeError> {
    let nt = complex.n_triangles();
    let mut in_k = vec![false; nt];
    for &t in k_triangles {
        if t >= nt {
            return Err(HodgeError::BadSplit(format!("triangle {t} out of range")));
        }
        in_k[t] = true;
    }
    let k_tris: Vec<usize> = (0..nt).filter(|&t| in_k[t]).collect();
    let omega: Vec<usize> = (0..nt).filter(|&t| !in_k[t]).collect();
    if k_tris.is_empty() || omega.is_empty() {
        return Err(HodgeError::BadSplit("both pieces must contain triangles".into()));
    }
    let whole = mass_matrices(complex, metric)?;
    let (kc, _) = sub_bundle(complex, metric, &k_tris)?;
    let (oc, ob) = sub_bundle(complex, metric, &omega)?;
    if oc.is_closed() || kc.is_closed() {
        return Err(HodgeError::BadSplit("pieces must share a boundary".into()));
    }
    let bk = kc.betti(false)?;
    let bk_rel = kc.betti(true)?;
    let mut degrees = Vec::with_capacity(3);
    for k in 0..3 {
        let whole_bc = if complex.is_closed() { BoundaryCondition::None } else { BoundaryCondition::Absolute };
        let dim_m = harmonic_basis(&whole, k, whole_bc, policy)?.dim();
        let dim_abs_omega = harmonic_basis(&ob, k, BoundaryCondition::Absolute, policy)?.dim();
        let dim_rel_omega = harmonic_basis(&ob, k, BoundaryCondition::Relative, policy)?.dim();
        let betti_k_plus_1_rel = if k < 2 { bk_rel[k + 1] } else { 0 };
        degrees.push(LottDegree {
            k,
            dim_m,
            dim_abs_omega,
            dim_rel_omega,
            betti_k: bk[k],
            betti_k_rel: bk_rel[k],
            betti_k_plus_1_rel,
            relative_bound: dim_rel_omega + bk[k],
            absolute_bound: dim_abs_omega + bk_rel[k],
            restriction_bound: dim_m + betti_k_plus_1_rel,
        });
    }
    Ok(LottReport { degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{gen_annulus, gen_closed_surface};

    fn bundle_of(s: &Surface) -> OperatorBundle {
        mass_matrices(&s.complex, &MetricField::from_surface(s).unwrap()).unwrap()
    }

    #[test]
    fn torus_harmonic_dims() {
        let s = gen_closed_surface(1, 1).unwrap();
        let b = bundle_of(&s);
        for (k, want) in [1, 2, 1].into_iter().enumerate() {
            let h = harmonic_basis(&b, k, BoundaryCondition::None, &HarmonicPolicy::default()).unwrap();
            assert_eq!(h.dim(), want);
            assert!(h.matches_betti());
            assert!(h.gap >= 100.0);
        }
    }

    #[test]
    fn closed_complex_rejects_bc() {
        let s = gen_closed_surface(0, 2).unwrap();
        let b = bundle_of(&s);
        assert_eq!(
            assemble_laplacian(&b, 1, BoundaryCondition::Relative).unwrap_err(),
            HodgeError::BcOnClosedComplex(BoundaryCondition::Relative)
        );
    }

    #[test]
    fn annulus_relative_and_absolute() {
        let s = gen_annulus(4, 16, 0.5, 1.0).unwrap();
        let b = bundle_of(&s);
        let p = HarmonicPolicy::default();
        let abs: Vec<usize> =
            (0..3).map(|k| harmonic_basis(&b, k, BoundaryCondition::Absolute, &p).unwrap().dim()).collect();
        let rel: Vec<usize> =
            (0..3).map(|k| harmonic_basis(&b, k, BoundaryCondition::Relative, &p).unwrap().dim()).collect();
        assert_eq!(abs, vec![1, 1, 0]);
        assert_eq!(rel, vec![0, 1, 1]);
    }

    #[test]
    fn cutoff_profile_values() {
        assert_eq!(cutoff_profile(1e-3, 4.0), 0.0);
        assert_eq!(cutoff_profile(0.5, 4.0), 1.0);
        assert!((cutoff_profile(1.0 / 8.0, 4.0) - 0.5).abs() < 1e-15);
    }
}
