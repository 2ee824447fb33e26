//! Betti numbers against ranks computed in exact rational arithmetic.

use num_rational::BigRational;
use num_traits::{One, Zero};

use l2hodge::complex::{
    gen_annulus, gen_closed_surface, gen_cylinder, gen_disk, gen_pants, SimplicialComplex,
};

fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][c].clone();
        let pivot: Vec<BigRational> = rows[r].iter().map(|x| x * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rows[r] = pivot;
        r += 1;
    }
    r
}

/// Rank of `d_k` restricted to the simplices kept by the masks.
fn restricted_rank(c: &SimplicialComplex, k: usize, relative: bool) -> usize {
    let d = c.coboundary(k).unwrap();
    let keep = |deg: usize| -> Vec<usize> {
        let mask = c.boundary_mask(deg).unwrap();
        (0..mask.len()).filter(|&i| !(relative && mask[i])).collect()
    };
    let (rows, cols) = (keep(k + 1), keep(k));
    let mut row_pos = vec![usize::MAX; d.nrows()];
    for (i, &r) in rows.iter().enumerate() {
        row_pos[r] = i;
    }
    let mut col_pos = vec![usize::MAX; d.ncols()];
    for (j, &s) in cols.iter().enumerate() {
        col_pos[s] = j;
    }
    let mut m = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (i, j, v) in d.triplets() {
        if row_pos[i] != usize::MAX && col_pos[j] != usize::MAX {
            m[row_pos[i]][col_pos[j]] = BigRational::from_integer(v.into());
        }
    }
    rank(m)
}

fn oracle(c: &SimplicialComplex, relative: bool) -> [usize; 3] {
    let n = |k: usize| -> usize {
        let mask = c.boundary_mask(k).unwrap();
        mask.iter().filter(|&&b| !(relative && b)).count()
    };
    let r0 = restricted_rank(c, 0, relative);
    let r1 = restricted_rank(c, 1, relative);
    [n(0) - r0, n(1) - r1 - r0, n(2) - r1]
}

#[test]
fn closed_surfaces_match_rational_ranks() {
    for (g, r) in [(0, 1), (1, 1), (2, 2)] {
        let s = gen_closed_surface(g, r).unwrap();
        let b = s.complex.betti(false).unwrap();
        assert_eq!(b, oracle(&s.complex, false), "genus {g}");
        assert_eq!(b, [1, 2 * g, 1]);
    }
}

#[test]
fn open_surfaces_match_rational_ranks() {
    let surfaces = [
        gen_disk(2, 8, 1.0).unwrap(),
        gen_annulus(2, 10, 1.0, 2.0).unwrap(),
        gen_cylinder(3, 8, 2.0, 0.5).unwrap(),
        gen_pants(3).unwrap(),
    ];
    for s in &surfaces {
        for relative in [false, true] {
            assert_eq!(s.complex.betti(relative).unwrap(), oracle(&s.complex, relative), "relative {relative}");
        }
    }
}

#[test]
fn euler_characteristic_is_alternating_betti_sum() {
    for g in 0..4 {
        let s = gen_closed_surface(g, 2).unwrap();
        let b = s.complex.betti(false).unwrap();
        assert_eq!(s.complex.euler_characteristic(), b[0] as i64 - b[1] as i64 + b[2] as i64);
        assert_eq!(s.complex.euler_characteristic(), 2 - 2 * g as i64);
    }
}
