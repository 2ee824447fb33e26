use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracles::{integrate, SmoothProfile};
use super::{fiber_basis, mode_d, mode_laplacian, mode_spectrum, wedge_e0, ModeForm, ModeProblem, ModeSpace, RadialBc, WarpedError};
use crate::sparse::{dot, norm2, smallest_eigenpairs, EigenOptions};

/// Violations are margins below `-VIOLATION_TOL` after normalizing by `‖α‖²`.
pub const VIOLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub constant: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `(lhs - rhs) / ‖α‖²` over samples.
    pub min_margin: f64,
    /// Largest `rhs / lhs`; values near 1 show the inequality is nearly sharp.
    pub max_ratio: f64,
    /// Smallest eigenvalue of the discrete operator, when the check has one.
    pub eigen_min: Option<f64>,
    /// Largest relative defect of the underlying integral identity.
    pub identity_residual: Option<f64>,
}

impl InequalityReport {
    pub fn passes(&self) -> bool {
        self.violations == 0
    }

    fn new(name: &str, constant: f64) -> Self {
        Self {
            name: name.to_string(),
            constant,
            samples: 0,
            violations: 0,
            min_margin: f64::INFINITY,
            max_ratio: 0.0,
            eigen_min: None,
            identity_residual: None,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, norm2: f64) {
        let margin = (lhs - rhs) / norm2;
        self.samples += 1;
        self.min_margin = self.min_margin.min(margin);
        if lhs > 0.0 {
            self.max_ratio = self.max_ratio.max(rhs / lhs);
        }
        if margin < -VIOLATION_TOL {
            self.violations += 1;
        }
    }
}

fn dof_positions(problem: &ModeProblem, space: &ModeSpace) -> Vec<f64> {
    let mut pos = vec![0.0; space.dim];
    for i in 0..=problem.cells {
        for b in 0..space.a_basis.len() {
            if let Some(ix) = space.a_index(i, b) {
                pos[ix] = problem.node(i);
            }
        }
        if i < problem.cells {
            for b in 0..space.p_basis.len() {
                if let Some(ix) = space.p_index(i, b) {
                    pos[ix] = problem.midpoint(i);
                }
            }
        }
    }
    pos
}

// component id of each dof: tangential components first, then radial ones
fn dof_components(problem: &ModeProblem, space: &ModeSpace) -> Vec<usize> {
    let na = space.a_basis.len();
    let mut comp = vec![0; space.dim];
    for i in 0..=problem.cells {
        for b in 0..na {
            if let Some(ix) = space.a_index(i, b) {
                comp[ix] = b;
            }
        }
        if i < problem.cells {
            for b in 0..space.p_basis.len() {
                if let Some(ix) = space.p_index(i, b) {
                    comp[ix] = na + b;
                }
            }
        }
    }
    comp
}

/// Random weighted-coordinate vector whose components are smooth bumps
/// inside `[lo, hi]` tilted by `e^{τ r}`.
fn random_weighted(problem: &ModeProblem, space: &ModeSpace, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    let pos = dof_positions(problem, space);
    let comp = dof_components(problem, space);
    let ncomp = space.a_basis.len() + space.p_basis.len();
    let tilt = rng.gen_range(-1.0..1.0);
    let profiles: Vec<SmoothProfile> = (0..ncomp).map(|_| SmoothProfile::random(rng, lo, hi, tilt)).collect();
    pos.iter().zip(&comp).map(|(&r, &c)| profiles[c].value(r) * (-tilt * lo).exp()).collect()
}

fn random_window(problem: &ModeProblem, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let l = problem.length;
    let margin = (4.0 * problem.dr).max(0.02 * l);
    let lo = rng.gen_range(margin..0.5 * l);
    let hi = rng.gen_range((lo + 0.3 * (l - margin - lo)).max(lo + 4.0 * problem.dr)..=l - margin);
    (lo, hi)
}

/// Smallest eigenvalue of the quadratic form `‖dα‖² + ‖δα‖²` over discrete
/// forms vanishing on the first and last cell, over all modes.
fn compact_bottom(problem: &ModeProblem) -> Result<f64, WarpedError> {
    let compact = problem.with_bc(RadialBc::CompactSupport);
    let space = compact.space(problem.k);
    let mut edge = vec![false; space.dim];
    for c in [0, compact.cells - 1] {
        for b in 0..space.p_basis.len() {
            if let Some(ix) = space.p_index(c, b) {
                edge[ix] = true;
            }
        }
    }
    let keep: Vec<usize> = (0..space.dim).filter(|&i| !edge[i]).collect();
    let mut bottom = f64::INFINITY;
    for &mu in &problem.modes {
        let s = mode_laplacian(&compact, problem.k, mu).select(&keep, &keep);
        let opts = EigenOptions { tol: 1e-11, dense_limit: 300, ..Default::default() };
        let e = smallest_eigenpairs(&s, &vec![1.0; keep.len()], 1, &opts)?;
        bottom = bottom.min(e.values[0]);
    }
    Ok(bottom)
}

/// Checks `‖dα‖² + ‖δα‖² ≥ ½((n-1)/2 - k)² ‖α‖²` on random compactly
/// supported mode forms, and on the bottom of the compactly supported
/// spectrum of each mode.
pub fn gap_check(problem: &ModeProblem, samples: usize, seed: u64) -> Result<InequalityReport, WarpedError> {
    let c = problem.gap_constant();
    let mut report = InequalityReport::new("gap", c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = problem.space(problem.k);
    let ops: Vec<_> = problem
        .modes
        .iter()
        .map(|&mu| (mode_d(problem, problem.k, mu), (problem.k > 0).then(|| mode_d(problem, problem.k - 1, mu))))
        .collect();
    for s in 0..samples {
        let (up, down) = &ops[s % ops.len()];
        let (lo, hi) = random_window(problem, &mut rng);
        let x = random_weighted(problem, &space, &mut rng, lo, hi);
        let nx = dot(&x, &x);
        if nx == 0.0 {
            continue;
        }
        let mut lhs = norm2(&up.matvec(&x)).powi(2);
        if let Some(d) = down {
            lhs += norm2(&d.matvec_t(&x)).powi(2);
        }
        report.record(lhs, c * nx, nx);
    }
    let emin = compact_bottom(problem)?;
    if emin < c - VIOLATION_TOL {
        report.violations += 1;
    }
    report.eigen_min = Some(emin);
    Ok(report)
}

/// Discrete Hardy inequality behind the primitive estimate:
/// `((n-1)/2 - (k-1))² ‖∫_r^L v‖² ≤ ‖v‖²` in the weight `ω_{k-1}`.
///
/// `v` lives at cell midpoints and the tail integral is the exact midpoint
/// sum. Every other sample is `(ε/2) g - g'` for a broad bump `g`, whose
/// weighted tail integral is close to `g`, so the ratio approaches 1.
pub fn hardy_check(n: usize, k: usize, length: f64, dr: f64, samples: usize, seed: u64) -> Result<InequalityReport, WarpedError> {
    let problem = ModeProblem::new(n, k, length, dr, vec![0.0], RadialBc::AbsoluteAt0)?;
    let half_eps = (n as f64 - 1.0) / 2.0 - (k as f64 - 1.0);
    if half_eps <= 0.0 {
        return Err(WarpedError::NoHardyConstant(half_eps));
    }
    let c = half_eps * half_eps;
    let mut report = InequalityReport::new("hardy", c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nc, dr) = (problem.cells, problem.dr);
    let decay_half = (-half_eps * 0.5 * dr).exp();
    let decay = (-half_eps * dr).exp();
    for s in 0..samples {
        let (lo, hi) = random_window(&problem, &mut rng);
        // weighted values ṽ = v e^{(n-1) r / 2} at midpoints
        let vt: Vec<f64> = if s % 2 == 0 {
            let tilt = rng.gen_range(-0.5..0.5);
            let p = SmoothProfile::random(&mut rng, lo, hi, tilt);
            (0..nc).map(|c| p.value(problem.midpoint(c))).collect()
        } else {
            let g = SmoothProfile::broad(lo, problem.length - 4.0 * dr, 0.0);
            (0..nc).map(|c| {
                let r = problem.midpoint(c);
                half_eps * g.value(r) - g.derivative(r)
            })
            .collect()
        };
        // weighted tail sums T_i = (Mv)(r_i) e^{(n-1) r_i / 2}
        let mut tail = vec![0.0; nc + 1];
        for i in (0..nc).rev() {
            tail[i] = vt[i] * decay_half * dr + decay * tail[i + 1];
        }
        let v2: f64 = vt.iter().map(|x| x * x * dr).sum();
        let m2: f64 = tail.iter().enumerate().map(|(i, t)| t * t * dr * if i == 0 { 0.5 } else { 1.0 }).sum();
        if v2 > 0.0 {
            report.record(v2, c * m2, v2);
        }
    }
    Ok(report)
}

/// Checks `(ι_X α, δα) + (ι_X dα, α) ≥ ((n-1)/2 - k) ‖α‖²` for the inward
/// field `X = -∂_r` on smooth compactly supported mode forms, by quadrature
/// of the exact integrands. The defect from the identity
/// `lhs = c‖α‖² + ‖ι_X α‖²` is reported as `identity_residual`.
pub fn donnelly_xavier_check(problem: &ModeProblem, samples: usize, seed: u64) -> Result<InequalityReport, WarpedError> {
    let (n, k) = (problem.n as f64, problem.k as isize);
    let c = (n - 1.0) / 2.0 - k as f64;
    let mut report = InequalityReport::new("donnelly_xavier", c);
    let mut worst_identity = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = problem.fiber_dim();
    let pb = fiber_basis(f, k - 1);
    let ab = fiber_basis(f, k);
    let wedge = wedge_e0(&pb, &ab);
    let (ep, ea) = (problem.weight_exponent(k - 1), problem.weight_exponent(k));
    for s in 0..samples {
        let mu = problem.modes[s % problem.modes.len()];
        let m = mu.sqrt();
        let (lo, hi) = random_window(problem, &mut rng);
        let tilt = rng.gen_range(-1.0..1.0);
        let pp: Vec<SmoothProfile> =
            pb.iter().map(|_| SmoothProfile::random(&mut rng, lo, hi, tilt - 0.5 * ep)).collect();
        let ap: Vec<SmoothProfile> =
            ab.iter().map(|_| SmoothProfile::random(&mut rng, lo, hi, tilt - 0.5 * ea)).collect();
        let integrand = |r: f64| -> [f64; 3] {
            let p: Vec<f64> = pp.iter().map(|g| g.value(r)).collect();
            let dp: Vec<f64> = pp.iter().map(|g| g.derivative(r)).collect();
            let a: Vec<f64> = ap.iter().map(|g| g.value(r)).collect();
            let da: Vec<f64> = ap.iter().map(|g| g.derivative(r)).collect();
            let mut mp = vec![0.0; ab.len()];
            let mut mta = vec![0.0; pb.len()];
            for &(t, s) in &wedge {
                mp[t] += m * p[s];
                mta[s] += m * a[t];
            }
            let (wp, wa) = ((ep * r).exp(), (ea * r).exp());
            let e2 = (-2.0 * r).exp();
            // ι_X α = -p, tangential δα = -p' - ε p + e^{-2r} mᵀa, ι_X dα = -(a' - m∧p)
            let mut lhs = 0.0;
            for i in 0..pb.len() {
                let delta = -dp[i] - ep * p[i] + e2 * mta[i];
                lhs += (-p[i]) * delta * wp;
            }
            for i in 0..ab.len() {
                lhs += -(da[i] - mp[i]) * a[i] * wa;
            }
            let pn: f64 = p.iter().map(|x| x * x).sum::<f64>() * wp;
            let an: f64 = a.iter().map(|x| x * x).sum::<f64>() * wa;
            [lhs, pn + an, pn]
        };
        let h = 0.01;
        let lhs = integrate(|r| integrand(r)[0], lo, hi, h);
        let norm = integrate(|r| integrand(r)[1], lo, hi, h);
        let radial = integrate(|r| integrand(r)[2], lo, hi, h);
        if norm == 0.0 {
            continue;
        }
        report.record(lhs, c * norm, norm);
        worst_identity = worst_identity.max((lhs - c * norm - radial).abs() / norm);
    }
    report.identity_residual = Some(worst_identity);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingReport {
    pub bc: RadialBc,
    /// The lower bound that applies to this degree and condition, if any.
    pub bound: Option<f64>,
    pub bottom: f64,
    pub per_mode: Vec<(f64, Vec<f64>)>,
    pub near_kernel_count: usize,
    pub threshold: f64,
}

impl VanishingReport {
    pub fn bound_holds(&self) -> bool {
        self.bound.is_none_or(|b| self.bottom >= b - VIOLATION_TOL)
    }
}

/// Bottom of the spectrum and near-kernel count in degree `k`.
///
/// Absolute conditions with `k < (n-1)/2` have the bound `½((n-1)/2 - k)²`;
/// relative ones with `k > (n+1)/2` have `½(k - (n+1)/2)²`.
pub fn vanishing_check(problem: &ModeProblem, per_mode: usize, threshold: f64) -> Result<VanishingReport, WarpedError> {
    let (n, k) = (problem.n as f64, problem.k as f64);
    let bound = match problem.bc {
        RadialBc::AbsoluteAt0 if k < (n - 1.0) / 2.0 => Some(0.5 * ((n - 1.0) / 2.0 - k).powi(2)),
        RadialBc::RelativeAt0 | RadialBc::CompactSupport if k > (n + 1.0) / 2.0 => {
            Some(0.5 * (k - (n + 1.0) / 2.0).powi(2))
        }
        _ => None,
    };
    let spec = mode_spectrum(problem, per_mode)?;
    let bottom = spec.iter().filter_map(|(_, v)| v.first().copied()).fold(f64::INFINITY, f64::min);
    let near_kernel_count = spec.iter().map(|(_, v)| v.iter().filter(|&&x| x < threshold).count()).sum();
    Ok(VanishingReport { bc: problem.bc, bound, bottom, per_mode: spec, near_kernel_count, threshold })
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimitiveReport {
    /// `‖dβ - α‖ / ‖α‖`.
    pub residual: f64,
    pub norm_ratio: f64,
    /// `2 / ((n-1)/2 - (k-1))`.
    pub bound: f64,
    /// `‖dα‖ Δr / ‖α‖`.
    pub closedness: f64,
}

impl PrimitiveReport {
    pub fn within_bound(&self, tol: f64) -> bool {
        self.norm_ratio <= self.bound + tol
    }
}

/// Primitive `β = -∫_r^L ι_X α` of a closed mode form, so that `dβ = α`.
/// Norms are taken with the free node at `r = 0`.
pub fn flow_primitive(problem: &ModeProblem, alpha: &ModeForm) -> Result<(ModeForm, PrimitiveReport), WarpedError> {
    let k = alpha.degree;
    if k == 0 {
        return Err(WarpedError::BadProblem("0-forms have no primitive".into()));
    }
    let half_eps = (problem.n as f64 - 1.0) / 2.0 - (k as f64 - 1.0);
    if half_eps <= 0.0 {
        return Err(WarpedError::NoHardyConstant(half_eps));
    }
    let abs = problem.with_bc(RadialBc::AbsoluteAt0);
    let sk = abs.space(k);
    let x = sk.normalize(alpha);
    let nx = norm2(&x);
    let sb = abs.space(k - 1);
    if nx == 0.0 {
        let report = PrimitiveReport { residual: 0.0, norm_ratio: 0.0, bound: 2.0 / half_eps, closedness: 0.0 };
        return Ok((ModeForm::zeros(&sb, alpha.mu), report));
    }
    let closedness = norm2(&mode_d(&abs, k, alpha.mu).matvec(&x)) * abs.dr / nx;
    if closedness > 1e-10 {
        return Err(WarpedError::NotClosed { residual: closedness });
    }
    let pos = dof_positions(&abs, &sk);
    let tail: f64 = x.iter().zip(&pos).filter(|(_, &r)| r > abs.length - 1.0).map(|(v, _)| v * v).sum();
    let fraction = tail / (nx * nx);
    if fraction > 1e-8 {
        return Err(WarpedError::TailTooFat { fraction });
    }
    let np = sk.p_basis.len();
    let mut beta = ModeForm::zeros(&sb, alpha.mu);
    debug_assert_eq!(sb.a_basis.len(), np);
    for b in 0..np {
        let mut acc = 0.0;
        for c in (0..abs.cells).rev() {
            acc -= alpha.p[c * np + b] * abs.dr;
            beta.a[c * np + b] = acc;
        }
    }
    let y = sb.normalize(&beta);
    let mut r = mode_d(&abs, k - 1, alpha.mu).matvec(&y);
    for (ri, xi) in r.iter_mut().zip(&x) {
        *ri -= xi;
    }
    let report = PrimitiveReport {
        residual: norm2(&r) / nx,
        norm_ratio: norm2(&y) / nx,
        bound: 2.0 / half_eps,
        closedness,
    };
    Ok((beta, report))
}

/// A closed degree-`k` mode form supported in `[1, L - 2]`: `dγ` for a random
/// smooth `γ`, plus an arbitrary radial part when `μ = 0`.
pub fn sample_closed_form(problem: &ModeProblem, mu: f64, seed: u64) -> Result<ModeForm, WarpedError> {
    let k = problem.k;
    if k == 0 {
        return Err(WarpedError::BadProblem("closed 0-forms with compact support vanish".into()));
    }
    let compact = problem.with_bc(RadialBc::CompactSupport);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1.0f64.min(0.2 * problem.length);
    let hi = problem.length - 2.0;
    if hi - lo < 10.0 * problem.dr {
        return Err(WarpedError::BadProblem("interval too short for a sample".into()));
    }
    let sg = compact.space(k - 1);
    let g = random_weighted(&compact, &sg, &mut rng, lo, hi);
    let x = mode_d(&compact, k - 1, mu).matvec(&g);
    let sk = compact.space(k);
    let mut alpha = sk.denormalize(&x, mu);
    if mu == 0.0 {
        let np = sk.p_basis.len();
        let ep = problem.weight_exponent(k as isize - 1);
        for b in 0..np {
            let prof = SmoothProfile::random(&mut rng, lo, hi, -0.5 * ep);
            for c in 0..problem.cells {
                alpha.p[c * np + b] += prof.value(problem.midpoint(c));
            }
        }
    }
    Ok(alpha)
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub shifts: Vec<f64>,
    /// `‖(Φ^t)*α‖² / ‖α‖²_{[t, L]}`.
    pub norm_ratios: Vec<f64>,
    /// `e^{-((n-1) - 2k) t}`, which bounds each norm ratio.
    pub decay_bounds: Vec<f64>,
    /// Largest `|(Φ^t)*α|²(r) / (e^{2kt} |α|²(r + t))`; at most 1.
    pub pointwise_ratio: f64,
}

impl PullbackReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.pointwise_ratio <= 1.0 + tol
            && self.norm_ratios.iter().zip(&self.decay_bounds).all(|(r, b)| *r <= b * (1.0 + tol))
    }
}

/// Pulls a mode form back along the outward radial flow `Φ^t` by whole grid
/// steps and compares norms.
pub fn pullback_check(problem: &ModeProblem, alpha: &ModeForm, steps: &[usize]) -> PullbackReport {
    let k = alpha.degree as isize;
    let kf = k as f64;
    let np = fiber_basis(problem.fiber_dim(), k - 1).len();
    let na = fiber_basis(problem.fiber_dim(), k).len();
    let (ep, ea) = (problem.weight_exponent(k - 1), problem.weight_exponent(k));
    let sq = |v: &[f64], i: usize, w: usize| -> f64 { v[i * w..(i + 1) * w].iter().map(|x| x * x).sum() };
    let mut report = PullbackReport { shifts: vec![], norm_ratios: vec![], decay_bounds: vec![], pointwise_ratio: 0.0 };
    for &s in steps.iter().filter(|&&s| s < problem.cells) {
        let t = s as f64 * problem.dr;
        let (mut pulled, mut tail) = (0.0, 0.0);
        // coefficients are unchanged by the pullback; only the point moves
        let mut visit = |v: f64, r: f64, e: f64, j: f64| {
            pulled += v * (e * (r - t)).exp();
            tail += v * (e * r).exp();
            let here = v * (-2.0 * j * (r - t)).exp();
            let there = v * (-2.0 * j * r).exp() * (2.0 * kf * t).exp();
            if there > 0.0 {
                report.pointwise_ratio = report.pointwise_ratio.max(here / there);
            }
        };
        for c in s..problem.cells {
            if np > 0 {
                visit(sq(&alpha.p, c, np), problem.midpoint(c), ep, kf - 1.0);
            }
        }
        for i in s..=problem.cells {
            if na > 0 {
                visit(sq(&alpha.a, i, na), problem.node(i), ea, kf);
            }
        }
        report.shifts.push(t);
        report.norm_ratios.push(if tail > 0.0 { pulled / tail } else { 0.0 });
        report.decay_bounds.push((-ea * t).exp());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_holds_and_is_nearly_sharp() {
        let r = hardy_check(5, 1, 30.0, 0.02, 40, 1).unwrap();
        assert!(r.passes());
        assert!(r.max_ratio > 0.9, "max ratio {}", r.max_ratio);
        assert!(r.max_ratio <= 1.0);
    }

    #[test]
    fn primitive_of_closed_form() {
        let p = ModeProblem::new(5, 1, 15.0, 0.02, vec![0.0, 1.0, 2.0], RadialBc::CompactSupport).unwrap();
        for (i, &mu) in p.modes.iter().enumerate() {
            let a = sample_closed_form(&p, mu, i as u64).unwrap();
            let (_, rep) = flow_primitive(&p, &a).unwrap();
            assert!(rep.residual < 1e-10, "{rep:?}");
            assert!(rep.within_bound(1e-6), "{rep:?}");
        }
    }

    #[test]
    fn non_closed_form_is_rejected() {
        let p = ModeProblem::new(3, 1, 10.0, 0.05, vec![1.0], RadialBc::CompactSupport).unwrap();
        let mut a = sample_closed_form(&p, 1.0, 3).unwrap();
        let na = a.a.len();
        a.a[na / 2] += 1.0;
        assert!(matches!(flow_primitive(&p, &a), Err(WarpedError::NotClosed { .. })));
    }

    #[test]
    fn pullback_decays() {
        let p = ModeProblem::new(4, 1, 12.0, 0.05, vec![1.0], RadialBc::CompactSupport).unwrap();
        let a = sample_closed_form(&p, 1.0, 5).unwrap();
        let rep = pullback_check(&p, &a, &[0, 10, 20]);
        assert!(rep.holds(1e-12), "{rep:?}");
        assert!((rep.norm_ratios[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dx_identity_and_gap() {
        let p = ModeProblem::new(6, 1, 12.0, 0.05, vec![0.0, 1.0, 3.0], RadialBc::CompactSupport).unwrap();
        let dx = donnelly_xavier_check(&p, 12, 2).unwrap();
        assert!(dx.passes(), "{dx:?}");
        assert!(dx.identity_residual.unwrap() < 1e-8, "{dx:?}");
        let g = gap_check(&p, 30, 3).unwrap();
        assert!(g.passes(), "{g:?}");
    }
}
