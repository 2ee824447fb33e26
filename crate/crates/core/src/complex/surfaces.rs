use std::collections::HashMap;
use std::f64::consts::PI;

use super::{ComplexError, SimplicialComplex};

/// Cochain/cycle pair attached to one handle of a generated surface.
///
/// `strip` is a closed 1-cochain given as `(edge, value)` with value ±1 on the
/// edges crossing one grid row. `transverse` is a loop `(edge, ±1)` crossing
/// that row once, so the strip integrates to 1 along it.
#[derive(Debug, Clone, PartialEq)]
pub struct HandleCycles {
    pub strip: Vec<(usize, i8)>,
    pub transverse: Vec<(usize, i8)>,
}

impl HandleCycles {
    pub fn strip_cochain(&self, n_edges: usize) -> Vec<f64> {
        let mut x = vec![0.0; n_edges];
        for &(e, s) in &self.strip {
            x[e] = s as f64;
        }
        x
    }
}

/// A generated surface with a 3-D layout. Closed surfaces of genus ≥ 1 also
/// carry intrinsic flat edge lengths that differ from the layout.
#[derive(Debug, Clone)]
pub struct Surface {
    pub complex: SimplicialComplex,
    pub coords: Vec<[f64; 3]>,
    pub edge_lengths: Option<Vec<f64>>,
    pub handles: Vec<HandleCycles>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Flips triangles whose normal points against `outward(centroid)`.
fn orient(tris: &mut [[usize; 3]], coords: &[[f64; 3]], outward: impl Fn([f64; 3]) -> [f64; 3]) {
    for t in tris.iter_mut() {
        let (a, b, c) = (coords[t[0]], coords[t[1]], coords[t[2]]);
        let n = cross(sub(b, a), sub(c, a));
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0];
        if dot3(n, outward(centroid)) < 0.0 {
            t.swap(1, 2);
        }
    }
}

fn check_radii(r_in: f64, r_out: f64) -> Result<(), ComplexError> {
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(ComplexError::BadRadii(r_in, r_out));
    }
    Ok(())
}

/// Octahedron refined `refinement - 1` times by midpoint subdivision and
/// projected to the unit sphere: `8 * 4^(refinement-1)` triangles.
fn sphere(refinement: usize) -> Result<Surface, ComplexError> {
    let mut coords: Vec<[f64; 3]> =
        vec![[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]];
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    for _ in 1..refinement {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let mut m = |x: usize, y: usize| {
                *mid.entry((x.min(y), x.max(y))).or_insert_with(|| {
                    let p = coords[x];
                    let q = coords[y];
                    let s = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
                    let n = dot3(s, s).sqrt();
                    coords.push([s[0] / n, s[1] / n, s[2] / n]);
                    coords.len() - 1
                })
            };
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        tris = next;
    }
    orient(&mut tris, &coords, |p| p);
    let complex = SimplicialComplex::new(coords.len(), &tris)?;
    Ok(Surface { complex, coords, edge_lengths: None, handles: vec![] })
}

struct TorusPiece {
    tris: Vec<[usize; 3]>,
    // per triangle, the (u, v) grid position of each vertex
    grid: Vec<[(usize, usize); 3]>,
}

fn torus_piece(n: usize, offset: usize, holes: &[(usize, usize)]) -> TorusPiece {
    let id = |u: usize, v: usize| offset + (u % n) * n + (v % n);
    let mut tris = Vec::new();
    let mut grid = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if holes.contains(&(u, v)) {
                continue;
            }
            let p = [(u, v), (u + 1, v), (u + 1, v + 1)];
            let q = [(u, v), (u + 1, v + 1), (u, v + 1)];
            for t in [p, q] {
                tris.push(t.map(|(a, b)| id(a, b)));
                grid.push(t.map(|(a, b)| (a % n, b % n)));
            }
        }
    }
    TorusPiece { tris, grid }
}

fn wrapped_step(a: usize, b: usize, n: usize) -> f64 {
    let d = (b + n - a) % n;
    d.min(n - d) as f64
}

/// Flat square torus on an `n x n` grid, side 1.
pub fn gen_torus(n: usize) -> Result<Surface, ComplexError> {
    closed_chain(1, n)
}

fn closed_chain(genus: usize, n: usize) -> Result<Surface, ComplexError> {
    if n < 3 || (genus > 1 && n < 12) || n % 2 == 1 {
        return Err(ComplexError::BadParameter(format!("grid size {n} too small for genus {genus}")));
    }
    let h = 1.0 / n as f64;
    let hn = n / 2 + 1;
    let per = n * n;
    // identification of raw vertex ids
    let mut rep: Vec<usize> = (0..genus * per).collect();
    let mut pieces = Vec::with_capacity(genus);
    for j in 0..genus {
        let mut holes = Vec::new();
        if j > 0 {
            holes.push((1, 1));
        }
        if j + 1 < genus {
            holes.push((1, hn));
        }
        pieces.push(torus_piece(n, j * per, &holes));
        if j > 0 {
            let a = |u: usize, v: usize| (j - 1) * per + u * n + v;
            let b = |u: usize, v: usize| j * per + u * n + v;
            // a <-> a', b <-> d', c <-> c', d <-> b' reverses the hole orientation
            rep[b(1, 1)] = a(1, hn);
            rep[b(1, 2)] = a(2, hn);
            rep[b(2, 2)] = a(2, hn + 1);
            rep[b(2, 1)] = a(1, hn + 1);
        }
    }
    let mut compact = vec![usize::MAX; genus * per];
    let mut raw_of = Vec::new();
    for v in 0..genus * per {
        if rep[v] == v {
            compact[v] = raw_of.len();
            raw_of.push(v);
        }
    }
    let map = |v: usize| compact[rep[v]];
    let mut tris = Vec::new();
    let mut tri_grid = Vec::new();
    for p in &pieces {
        for (t, g) in p.tris.iter().zip(&p.grid) {
            tris.push(t.map(map));
            tri_grid.push(*g);
        }
    }
    let complex = SimplicialComplex::new(raw_of.len(), &tris)?;

    let mut lengths = vec![0.0; complex.n_edges()];
    for (t, g) in tris.iter().zip(&tri_grid) {
        for (i, k) in [(0, 1), (1, 2), (0, 2)] {
            let e = complex.edge_index(t[i], t[k]).expect("edge");
            let du = wrapped_step(g[i].0, g[k].0, n);
            let dv = wrapped_step(g[i].1, g[k].1, n);
            lengths[e] = h * (du * du + dv * dv).sqrt();
        }
    }

    let coords = raw_of
        .iter()
        .map(|&raw| {
            let j = raw / per;
            let (u, v) = ((raw % per) / n, raw % n);
            let th = 2.0 * PI * u as f64 / n as f64;
            let ph = 2.0 * PI * v as f64 / n as f64;
            let rr = 2.0 + ph.cos();
            [rr * th.cos() + 7.0 * j as f64, rr * th.sin(), ph.sin()]
        })
        .collect();

    let v0 = n / 4 + 1;
    let u0 = n / 2;
    let mut handles = Vec::with_capacity(genus);
    for j in 0..genus {
        let vid = |u: usize, v: usize| map(j * per + (u % n) * n + (v % n));
        let mut strip = Vec::new();
        for u in 0..n {
            for (p, q) in [((u, v0), (u, v0 + 1)), ((u, v0), (u + 1, v0 + 1))] {
                let (x, y) = (vid(p.0, p.1), vid(q.0, q.1));
                let e = complex.edge_index(x, y).expect("strip edge");
                strip.push((e, if x < y { 1 } else { -1 }));
            }
        }
        let path: Vec<usize> = (0..n).map(|v| vid(u0, v)).collect();
        let transverse = super::path_to_cycle(&complex, &path).expect("transverse loop");
        handles.push(HandleCycles { strip, transverse });
    }
    Ok(Surface { complex, coords, edge_lengths: Some(lengths), handles })
}

/// Closed orientable surface of the given genus.
///
/// Genus 0 is a refined octahedron. Genus ≥ 1 is a chain of flat
/// `6r x 6r` tori joined through square holes, carrying flat edge lengths and
/// one [`HandleCycles`] per torus.
pub fn gen_closed_surface(genus: usize, refinement: usize) -> Result<Surface, ComplexError> {
    if refinement == 0 {
        return Err(ComplexError::BadParameter("refinement must be at least 1".into()));
    }
    match genus {
        0 => sphere(refinement),
        1 => closed_chain(1, 6 * refinement),
        g => {
            if refinement < 2 {
                return Err(ComplexError::BadParameter("genus >= 2 needs refinement >= 2".into()));
            }
            closed_chain(g, 6 * refinement)
        }
    }
}

/// Planar annulus with `n_radial` radial intervals of equal width and
/// `n_angular` vertices per ring; each cell is split along a diagonal.
pub fn gen_annulus(n_radial: usize, n_angular: usize, r_in: f64, r_out: f64) -> Result<Surface, ComplexError> {
    check_radii(r_in, r_out)?;
    if n_radial == 0 || n_angular < 3 {
        return Err(ComplexError::BadParameter(format!("annulus grid {n_radial} x {n_angular}")));
    }
    let radii: Vec<f64> = (0..=n_radial).map(|i| r_in + (r_out - r_in) * i as f64 / n_radial as f64).collect();
    ring_mesh(&radii, n_angular, false, None)
}

/// Planar annulus with rings at `r_in * e^{i Δs}`. With `staggered`, every
/// other ring is rotated by half an angular step; choosing
/// `n_angular ≈ √3 π / Δs` then gives nearly equilateral triangles.
pub fn gen_log_annulus(
    r_in: f64,
    r_out: f64,
    n_rings: usize,
    n_angular: usize,
    staggered: bool,
) -> Result<Surface, ComplexError> {
    check_radii(r_in, r_out)?;
    if n_rings == 0 || n_angular < 3 {
        return Err(ComplexError::BadParameter(format!("annulus grid {n_rings} x {n_angular}")));
    }
    let ds = (r_out / r_in).ln() / n_rings as f64;
    let mut radii: Vec<f64> = (0..=n_rings).map(|i| r_in * (i as f64 * ds).exp()).collect();
    radii[n_rings] = r_out;
    ring_mesh(&radii, n_angular, staggered, None)
}

/// Staggered log annulus with ring spacing `ds` in `log r` and about
/// `√3 π / ds` vertices per ring. `r_out / r_in` must be `e^{m ds}` for an
/// integer `m`, up to `1e-6` in `m`.
pub fn gen_graded_annulus(r_in: f64, r_out: f64, ds: f64) -> Result<Surface, ComplexError> {
    check_radii(r_in, r_out)?;
    let steps = (r_out / r_in).ln() / ds;
    if !(ds > 0.0) || (steps - steps.round()).abs() > 1e-6 || steps.round() < 1.0 {
        return Err(ComplexError::BadParameter(format!("ring spacing {ds} does not divide log({r_out}/{r_in})")));
    }
    let n_angular = ((3f64.sqrt() * PI / ds).round() as usize).max(3);
    gen_log_annulus(r_in, r_out, steps.round() as usize, n_angular, true)
}

/// Flat disk: a center vertex and `n_radial` equally spaced rings.
pub fn gen_disk(n_radial: usize, n_angular: usize, radius: f64) -> Result<Surface, ComplexError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(ComplexError::BadRadii(0.0, radius));
    }
    if n_radial == 0 || n_angular < 3 {
        return Err(ComplexError::BadParameter(format!("disk grid {n_radial} x {n_angular}")));
    }
    let radii: Vec<f64> = (1..=n_radial).map(|i| radius * i as f64 / n_radial as f64).collect();
    ring_mesh(&radii, n_angular, false, Some([0.0, 0.0, 0.0]))
}

fn ring_mesh(radii: &[f64], n_ang: usize, staggered: bool, center: Option<[f64; 3]>) -> Result<Surface, ComplexError> {
    let mut coords = Vec::with_capacity(radii.len() * n_ang + 1);
    let off = usize::from(center.is_some());
    if let Some(c) = center {
        coords.push(c);
    }
    for (i, &r) in radii.iter().enumerate() {
        let shift = if staggered && i % 2 == 1 { 0.5 } else { 0.0 };
        for j in 0..n_ang {
            let th = 2.0 * PI * (j as f64 + shift) / n_ang as f64;
            coords.push([r * th.cos(), r * th.sin(), 0.0]);
        }
    }
    let id = |i: usize, j: usize| off + i * n_ang + j % n_ang;
    let mut tris = Vec::new();
    if center.is_some() {
        for j in 0..n_ang {
            tris.push([0, id(0, j), id(0, j + 1)]);
        }
    }
    for i in 0..radii.len() - 1 {
        for j in 0..n_ang {
            if !staggered {
                tris.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
            } else if i % 2 == 0 {
                // ring i+1 is rotated forward by half a step
                tris.push([id(i, j), id(i, j + 1), id(i + 1, j)]);
                tris.push([id(i, j + 1), id(i + 1, j + 1), id(i + 1, j)]);
            } else {
                tris.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
            }
        }
    }
    orient(&mut tris, &coords, |_| [0.0, 0.0, 1.0]);
    let complex = SimplicialComplex::new(coords.len(), &tris)?;
    Ok(Surface { complex, coords, edge_lengths: None, handles: vec![] })
}

/// Open round cylinder along the x axis with `n_len` intervals.
pub fn gen_cylinder(n_len: usize, n_around: usize, length: f64, radius: f64) -> Result<Surface, ComplexError> {
    if n_len == 0 || n_around < 3 || !(length > 0.0) || !(radius > 0.0) {
        return Err(ComplexError::BadParameter(format!("cylinder {n_len} x {n_around}, {length} x {radius}")));
    }
    let mut coords = Vec::new();
    for i in 0..=n_len {
        let x = length * i as f64 / n_len as f64;
        for j in 0..n_around {
            let th = 2.0 * PI * j as f64 / n_around as f64;
            coords.push([x, radius * th.cos(), radius * th.sin()]);
        }
    }
    let id = |i: usize, j: usize| i * n_around + j % n_around;
    let mut tris = Vec::new();
    for i in 0..n_len {
        for j in 0..n_around {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    orient(&mut tris, &coords, |p| [0.0, p[1], p[2]]);
    let complex = SimplicialComplex::new(coords.len(), &tris)?;
    Ok(Surface { complex, coords, edge_lengths: None, handles: vec![] })
}

/// Sphere with the vertex stars around +x, +y and +z removed: a pair of
/// pants with three boundary loops. Needs `refinement >= 3`.
pub fn gen_pants(refinement: usize) -> Result<Surface, ComplexError> {
    if refinement < 3 {
        return Err(ComplexError::BadParameter("pants need refinement >= 3".into()));
    }
    let s = sphere(refinement)?;
    let keep: Vec<usize> = (0..s.complex.n_triangles())
        .filter(|&t| !s.complex.triangles()[t].iter().any(|&v| v == 0 || v == 2 || v == 4))
        .collect();
    let (complex, old) = s.complex.sub_complex(&keep)?;
    let coords = old.iter().map(|&v| s.coords[v]).collect();
    Ok(Surface { complex, coords, edge_lengths: None, handles: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_surface_betti() {
        for (g, want) in [(0, [1, 0, 1]), (1, [1, 2, 1]), (2, [1, 4, 1]), (3, [1, 6, 1])] {
            let s = gen_closed_surface(g, 2).unwrap();
            assert!(s.complex.is_closed());
            assert!(s.complex.is_consistently_oriented(), "genus {g}");
            assert_eq!(s.complex.euler_characteristic(), 2 - 2 * g as i64);
            assert_eq!(s.complex.betti(false).unwrap(), want);
        }
    }

    #[test]
    fn strip_cochains_are_closed_and_pair_to_one() {
        let s = gen_closed_surface(2, 2).unwrap();
        let d1 = s.complex.coboundary(1).unwrap().to_f64();
        for (i, h) in s.handles.iter().enumerate() {
            let x = h.strip_cochain(s.complex.n_edges());
            assert!(d1.matvec(&x).iter().all(|v| *v == 0.0));
            for (j, other) in s.handles.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(super::super::cycle_integral(&x, &other.transverse), want);
            }
        }
    }

    #[test]
    fn annulus_counts() {
        let a = gen_annulus(2, 4, 0.5, 1.0).unwrap();
        assert_eq!(a.complex.n_vertices(), 12);
        assert_eq!(a.complex.boundary_cycles().unwrap().len(), 2);
        assert_eq!(a.complex.betti(false).unwrap(), [1, 1, 0]);
        assert!(matches!(gen_annulus(2, 4, 1.0, 0.5), Err(ComplexError::BadRadii(..))));
    }

    #[test]
    fn disk_pants_cylinder() {
        let d = gen_disk(3, 8, 1.0).unwrap();
        assert_eq!(d.complex.boundary_cycles().unwrap().len(), 1);
        assert_eq!(d.complex.betti(false).unwrap(), [1, 0, 0]);
        let p = gen_pants(3).unwrap();
        assert_eq!(p.complex.boundary_cycles().unwrap().len(), 3);
        assert_eq!(p.complex.betti(false).unwrap(), [1, 2, 0]);
        let c = gen_cylinder(4, 6, 2.0, 1.0).unwrap();
        assert!(c.complex.is_consistently_oriented());
        assert_eq!(c.complex.betti(true).unwrap(), [0, 1, 1]);
    }

    #[test]
    fn log_annulus_staggered_is_oriented() {
        let a = gen_log_annulus(0.1, 1.0, 7, 20, true).unwrap();
        assert!(a.complex.is_consistently_oriented());
        assert_eq!(a.complex.betti(false).unwrap(), [1, 1, 0]);
    }
}
