//! Mode-reduction results against independently computed references.

use l2hodge::ends::{capacity_curve, li_tam_harmonic, WeightedGraph};
use l2hodge::sparse::CsrMatrix;
use l2hodge::warped::{flow_primitive, mode_d, mode_lambda0, sample_closed_form, ModeProblem, RadialBc};
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum-norm least-squares solution of `D x = b` by CG on the normal
/// equations.
fn least_squares(d: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    let dt = d.transpose();
    let rhs = dt.matvec(b);
    let mut x = vec![0.0; d.ncols()];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = 1e-26 * rr;
    for _ in 0..20 * d.ncols() {
        if rr <= stop {
            break;
        }
        let ap = dt.matvec(&d.matvec(&p));
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot(&r, &r);
        for i in 0..p.len() {
            p[i] = r[i] + next / rr * p[i];
        }
        rr = next;
    }
    x
}

#[test]
fn flow_primitive_agrees_with_least_squares() {
    for (n, k) in [(5, 1), (3, 1), (4, 2)] {
        let problem = ModeProblem::new(n, k, 12.0, 0.05, vec![0.0, 1.0, 4.0], RadialBc::CompactSupport).unwrap();
        let free0 = problem.with_bc(RadialBc::AbsoluteAt0);
        for (s, &mu) in problem.modes.iter().enumerate() {
            let alpha = sample_closed_form(&problem, mu, 40 + s as u64).unwrap();
            let (beta, rep) = flow_primitive(&problem, &alpha).unwrap();
            let a = free0.space(k).normalize(&alpha);
            let d = mode_d(&free0, k - 1, mu);
            let ls = least_squares(&d, &a);
            let flow = free0.space(k - 1).normalize(&beta);
            let norm = dot(&a, &a).sqrt();
            let res_ls = d.matvec(&ls).iter().zip(&a).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() / norm;
            let diff: Vec<f64> = flow.iter().zip(&ls).map(|(x, y)| x - y).collect();
            let d_diff = dot(&d.matvec(&diff), &d.matvec(&diff)).sqrt() / norm;
            assert!(rep.residual < 1e-10 && res_ls < 1e-6, "n={n} k={k} mu={mu}: {} {res_ls}", rep.residual);
            assert!(d_diff < 1e-6, "n={n} k={k} mu={mu}: {d_diff}");
        }
    }
}

#[test]
fn cusp_surface_spectrum_approaches_one_quarter() {
    let l = |len: f64| mode_lambda0(&ModeProblem::new(2, 0, len, 0.02, vec![0.0], RadialBc::CompactSupport).unwrap()).unwrap();
    // continuum Dirichlet problem on [0, L]: 1/4 + (π/L)²
    for len in [10.0, 20.0] {
        let exact = 0.25 + (std::f64::consts::PI / len).powi(2);
        assert!((l(len) - exact).abs() < 1e-3 * exact, "L={len}: {} vs {exact}", l(len));
    }
}

#[test]
fn cosh_warp_limit_is_tanh() {
    let (r, dt) = (6.0, 0.01);
    let cells = (2.0 * r / dt) as usize;
    let g = WeightedGraph::radial_chain(|t| t.cosh().powi(2), -r, r, cells).unwrap();
    let t: Vec<f64> = (0..=cells).map(|i| -r + i as f64 * dt).collect();
    let plus: Vec<usize> = (0..t.len()).filter(|&i| t[i] > 1.0).collect();
    let minus: Vec<usize> = (0..t.len()).filter(|&i| t[i] < -1.0).collect();
    let rep = li_tam_harmonic(&g, &plus, &minus, &[3.0, r], 1.0).unwrap();
    // u'' + 2 tanh(t) u' = 0 with u(±R) = ±1
    let worst = t.iter().zip(&rep.values).map(|(x, u)| (u - x.tanh() / r.tanh()).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// For weight `t^p` on `[1, R]` the capacity is `1 / ∫_1^R t^{-p} dt`.
    #[test]
    fn radial_capacity_matches_quadrature(p in 0.0f64..3.0, big in 4.0f64..20.0) {
        let cells = ((big - 1.0) * 200.0) as usize;
        let g = WeightedGraph::radial_chain(|t| t.powf(p), 1.0, big, cells).unwrap();
        let end: Vec<usize> = (1..g.n_vertices()).collect();
        let c = capacity_curve(&g, &[0], &end, &[big])?;
        let resistance = if (p - 1.0).abs() < 1e-12 { big.ln() } else { (big.powf(1.0 - p) - 1.0) / (1.0 - p) };
        prop_assert!((c[0] * resistance - 1.0).abs() < 1e-4, "p={} R={} C={}", p, big, c[0]);
    }
}
