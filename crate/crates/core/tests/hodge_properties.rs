use proptest::prelude::*;

use l2hodge::complex::{gen_closed_surface, gen_disk, gen_torus};
use l2hodge::hodge::{assemble_laplacian, conformal_comparison, decomposition_trials, harmonic_basis, BoundaryCondition, HarmonicPolicy};
use l2hodge::metric::{mass_matrices, MetricField};
use l2hodge::sparse::CsrMatrix;
use l2hodge::warped::{mode_d, mode_laplacian, ModeProblem, RadialBc};

fn dense(m: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; m.ncols()]; m.nrows()];
    for (i, j, v) in m.triplets() {
        out[i][j] += v;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabeling_preserves_topology(perm in Just((0..36usize).collect::<Vec<_>>()).prop_shuffle()) {
        let torus = gen_torus(6).unwrap();
        let c = torus.complex.relabel(&perm).unwrap();
        prop_assert!(c.coboundary(1).unwrap().mul(&c.coboundary(0).unwrap()).is_zero_matrix());
        prop_assert_eq!(c.betti(false).unwrap(), [1, 2, 1]);
        prop_assert_eq!(c.euler_characteristic(), 0);
        prop_assert!(c.is_consistently_oriented());
    }

    #[test]
    fn harmonic_basis_is_orthonormal_under_rescaling(u in prop::collection::vec(-1.0f64..1.0, 72)) {
        let s = gen_closed_surface(1, 1).unwrap();
        let m = MetricField::from_surface(&s).unwrap().conformal_rescale(&s.complex, &u).unwrap();
        let b = mass_matrices(&s.complex, &m).unwrap();
        let h = harmonic_basis(&b, 1, BoundaryCondition::None, &HarmonicPolicy::default()).unwrap();
        prop_assert_eq!(h.dim(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let g = b.inner(1, &h.vectors[i], &h.vectors[j]);
                prop_assert!((g - f64::from(u8::from(i == j))).abs() < 1e-10, "gram[{}][{}] = {}", i, j, g);
            }
        }
        prop_assert!(h.kernel_residual < 1e-8);
    }

    #[test]
    fn degree_one_is_conformally_invariant(u in prop::collection::vec(-2.0f64..2.0, 72)) {
        let s = gen_closed_surface(1, 1).unwrap();
        let m = MetricField::from_surface(&s).unwrap();
        let c = conformal_comparison(&s.complex, &m, &u, &HarmonicPolicy::default()).unwrap();
        prop_assert_eq!(c.dims, [2, 2]);
        prop_assert!(c.mass_difference < 1e-12, "{:?}", c);
        prop_assert!(c.projector_distance < 1e-10, "{:?}", c);
    }

    #[test]
    fn laplacian_energy_identity(x in prop::collection::vec(-1.0f64..1.0, 41)) {
        // disk(2, 20): 1 + 2 * 20 vertices
        let d = gen_disk(2, 20, 1.0).unwrap();
        let b = mass_matrices(&d.complex, &MetricField::from_surface(&d).unwrap()).unwrap();
        let lap = assemble_laplacian(&b, 0, BoundaryCondition::Absolute).unwrap();
        let sx = lap.stiffness.matvec(&x);
        let quad: f64 = x.iter().zip(&sx).map(|(a, b)| a * b).sum();
        let dx = b.d(0).to_f64().matvec(&x);
        let energy = b.inner(1, &dx, &dx);
        prop_assert!((quad - energy).abs() <= 1e-12 * energy.max(1.0));
    }

    #[test]
    fn decomposition_is_orthogonal_and_complete(seed in any::<u64>(), relative in any::<bool>()) {
        let d = gen_disk(3, 12, 1.0).unwrap();
        let b = mass_matrices(&d.complex, &MetricField::from_surface(&d).unwrap()).unwrap();
        let bc = if relative { BoundaryCondition::Relative } else { BoundaryCondition::Absolute };
        let h = harmonic_basis(&b, 1, bc, &HarmonicPolicy::default()).unwrap();
        let t = decomposition_trials(&b, 1, bc, &h, 3, seed).unwrap();
        prop_assert!(t.max_residual < 1e-8 && t.max_orthogonality < 1e-8, "{:?}", t);
    }

    #[test]
    fn mode_d_squares_to_zero(n in 3usize..7, j in 0usize..5, mu in 0.0f64..9.0, bc in 0usize..3) {
        prop_assume!(j + 2 <= n);
        let bc = [RadialBc::CompactSupport, RadialBc::RelativeAt0, RadialBc::AbsoluteAt0][bc];
        let p = ModeProblem::new(n, j, 2.0, 0.1, vec![mu], bc).unwrap();
        let prod = mode_d(&p, j + 1, mu).mul(&mode_d(&p, j, mu));
        let worst = prod.triplets().iter().fold(0.0f64, |m, t| m.max(t.2.abs()));
        prop_assert!(worst < 1e-9, "worst entry {}", worst);
    }
}

#[test]
fn mode_laplacian_is_symmetric() {
    let p = ModeProblem::new(4, 1, 2.0, 0.1, vec![2.0], RadialBc::AbsoluteAt0).unwrap();
    let s = dense(&mode_laplacian(&p, 1, 2.0));
    for i in 0..s.len() {
        for j in 0..s.len() {
            assert!((s[i][j] - s[j][i]).abs() <= 1e-12 * (1.0 + s[i][j].abs()));
        }
    }
}
