//! Oriented 2-dimensional simplicial complexes, their integer coboundaries and
//! Betti numbers.
//!
//! Edges are stored as `[lo, hi]` and oriented from `lo` to `hi`. Triangles are
//! stored with sorted vertices plus a sign recording the input orientation.

mod surfaces;

pub use surfaces::{
    gen_annulus, gen_closed_surface, gen_cylinder, gen_disk, gen_graded_annulus, gen_log_annulus, gen_pants, gen_torus, HandleCycles,
    Surface,
};

use std::collections::HashMap;

use thiserror::Error;

use crate::sparse::{pick_primes, rank_gfp, IntMatrix, SolverError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("edge ({0}, {1}) has {2} incident triangles")]
    NonManifoldEdge(usize, usize, usize),
    #[error("triangle {0} references a vertex outside 0..{1}")]
    DanglingFace(usize, usize),
    #[error("triangle {0} repeats a vertex")]
    DegenerateSimplex(usize),
    #[error("triangle {0} appears twice")]
    DuplicateSimplex(usize),
    #[error("degree {0} is outside 0..=2")]
    DegreeOutOfRange(usize),
    #[error("invalid radii: inner {0}, outer {1}")]
    BadRadii(f64, f64),
    #[error("invalid generator parameter: {0}")]
    BadParameter(String),
    #[error("ranks over GF({p1}) and GF({p2}) disagree in degree {degree}")]
    PrimeTooSmall { p1: u64, p2: u64, degree: usize },
    #[error("boundary edges do not close into loops at vertex {0}")]
    OpenBoundaryChain(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Seed used by [`SimplicialComplex::betti`] to choose its two primes.
pub const DEFAULT_PRIME_SEED: u64 = 0x6b657465;

#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    n_vertices: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    orientation: Vec<i8>,
    edge_lookup: HashMap<(usize, usize), usize>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<Vec<usize>>,
}

fn sort3(t: [usize; 3]) -> ([usize; 3], i8) {
    let mut s = t;
    let mut sign = 1i8;
    for i in 0..3 {
        for j in 0..2 - i {
            if s[j] > s[j + 1] {
                s.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (s, sign)
}

impl SimplicialComplex {
    /// Builds a complex from oriented triangles `[a, b, c]`. Edges are derived.
    /// Vertices not used by any triangle are allowed.
    pub fn new(n_vertices: usize, triangles: &[[usize; 3]]) -> Result<Self, ComplexError> {
        let mut tris = Vec::with_capacity(triangles.len());
        let mut orientation = Vec::with_capacity(triangles.len());
        let mut seen = HashMap::new();
        for (ti, &t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n_vertices) {
                return Err(ComplexError::DanglingFace(ti, n_vertices));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(ComplexError::DegenerateSimplex(ti));
            }
            let (s, sign) = sort3(t);
            if seen.insert(s, ti).is_some() {
                return Err(ComplexError::DuplicateSimplex(ti));
            }
            tris.push(s);
            orientation.push(sign);
        }
        let mut edges = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut tri_edges = Vec::with_capacity(tris.len());
        let mut edge_tris: Vec<Vec<usize>> = Vec::new();
        for (ti, &[a, b, c]) in tris.iter().enumerate() {
            let mut ids = [0usize; 3];
            for (slot, key) in [(b, c), (a, c), (a, b)].into_iter().enumerate() {
                let id = *edge_lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_tris.push(Vec::new());
                    edges.len() - 1
                });
                edge_tris[id].push(ti);
                ids[slot] = id;
            }
            tri_edges.push(ids);
        }
        for (e, ts) in edge_tris.iter().enumerate() {
            if ts.len() > 2 {
                return Err(ComplexError::NonManifoldEdge(edges[e][0], edges[e][1], ts.len()));
            }
        }
        Ok(Self { n_vertices, edges, triangles: tris, orientation, edge_lookup, tri_edges, edge_tris })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_simplices(&self, k: usize) -> Result<usize, ComplexError> {
        match k {
            0 => Ok(self.n_vertices),
            1 => Ok(self.edges.len()),
            2 => Ok(self.triangles.len()),
            _ => Err(ComplexError::DegreeOutOfRange(k)),
        }
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Sorted vertex triples.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// +1 if the sorted triple carries the input orientation, -1 otherwise.
    pub fn orientation(&self) -> &[i8] {
        &self.orientation
    }

    /// Triangles in their input orientation.
    pub fn oriented_triangles(&self) -> Vec<[usize; 3]> {
        self.triangles
            .iter()
            .zip(&self.orientation)
            .map(|(&[a, b, c], &s)| if s > 0 { [a, b, c] } else { [b, a, c] })
            .collect()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edge ids of triangle `t` opposite its sorted vertices 0, 1, 2.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_tris[e]
    }

    /// Integer coboundary `d_k : C^k -> C^{k+1}` as a `(#(k+1)-simplices) x (#k-simplices)` matrix.
    pub fn coboundary(&self, k: usize) -> Result<IntMatrix, ComplexError> {
        match k {
            0 => {
                let mut t = Vec::with_capacity(2 * self.edges.len());
                for (e, &[a, b]) in self.edges.iter().enumerate() {
                    t.push((e, a, -1));
                    t.push((e, b, 1));
                }
                Ok(IntMatrix::from_triplets(self.edges.len(), self.n_vertices, &t))
            }
            1 => {
                let mut t = Vec::with_capacity(3 * self.triangles.len());
                for (ti, ids) in self.tri_edges.iter().enumerate() {
                    let s = self.orientation[ti] as i64;
                    // ∂[a,b,c] = [b,c] - [a,c] + [a,b]
                    t.push((ti, ids[0], s));
                    t.push((ti, ids[1], -s));
                    t.push((ti, ids[2], s));
                }
                Ok(IntMatrix::from_triplets(self.triangles.len(), self.edges.len(), &t))
            }
            2 => Ok(IntMatrix::zeros(0, self.triangles.len())),
            _ => Err(ComplexError::DegreeOutOfRange(k)),
        }
    }

    pub fn boundary_edge_mask(&self) -> Vec<bool> {
        self.edge_tris.iter().map(|ts| ts.len() == 1).collect()
    }

    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices];
        for (e, ts) in self.edge_tris.iter().enumerate() {
            if ts.len() == 1 {
                mask[self.edges[e][0]] = true;
                mask[self.edges[e][1]] = true;
            }
        }
        mask
    }

    /// Simplices of degree `k` lying in the boundary.
    pub fn boundary_mask(&self, k: usize) -> Result<Vec<bool>, ComplexError> {
        match k {
            0 => Ok(self.boundary_vertex_mask()),
            1 => Ok(self.boundary_edge_mask()),
            2 => Ok(vec![false; self.triangles.len()]),
            _ => Err(ComplexError::DegreeOutOfRange(k)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.edge_tris.iter().all(|ts| ts.len() == 2)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// True when every interior edge is traversed in opposite directions by
    /// its two triangles.
    pub fn is_consistently_oriented(&self) -> bool {
        let d1 = match self.coboundary(1) {
            Ok(d) => d,
            Err(_) => return false,
        };
        let dt = d1.transpose();
        (0..self.edges.len()).all(|e| {
            let (_, vals) = dt.row(e);
            vals.len() < 2 || vals.iter().sum::<i64>() == 0
        })
    }

    /// Vertex-connected components counted over edges; isolated vertices count.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &[a, b] in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..self.n_vertices).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// Betti numbers `b_0, b_1, b_2` of the complex, or of the pair
    /// `(K, ∂K)` when `relative`. Ranks are computed over two large primes.
    pub fn betti(&self, relative: bool) -> Result<[usize; 3], ComplexError> {
        self.betti_with_seed(relative, DEFAULT_PRIME_SEED)
    }

    pub fn betti_with_seed(&self, relative: bool, seed: u64) -> Result<[usize; 3], ComplexError> {
        let [p1, p2] = pick_primes(seed);
        let keep: Vec<Vec<usize>> = (0..3)
            .map(|k| {
                let mask = if relative { self.boundary_mask(k) } else { Ok(vec![false; self.n_simplices(k).unwrap()]) };
                mask.unwrap().iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| i).collect()
            })
            .collect();
        let mut ranks = [0usize; 2];
        for k in 0..2 {
            let d = self.coboundary(k)?.select(&keep[k + 1], &keep[k]);
            let r1 = rank_gfp(&d, p1)?;
            let r2 = rank_gfp(&d, p2)?;
            if r1 != r2 {
                return Err(ComplexError::PrimeTooSmall { p1, p2, degree: k });
            }
            ranks[k] = r1;
        }
        Ok([keep[0].len() - ranks[0], keep[1].len() - ranks[0] - ranks[1], keep[2].len() - ranks[1]])
    }

    /// Boundary loops as vertex cycles, each traversed in the direction
    /// induced by the triangle orientation.
    pub fn boundary_cycles(&self) -> Result<Vec<Vec<usize>>, ComplexError> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (ti, tri) in self.oriented_triangles().iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let e = self.edge_index(a, b).expect("edge of triangle");
                if self.edge_tris[e].len() == 1 {
                    debug_assert_eq!(self.edge_tris[e][0], ti);
                    if next.insert(a, b).is_some() {
                        return Err(ComplexError::OpenBoundaryChain(a));
                    }
                }
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut used = std::collections::HashSet::new();
        let mut loops = Vec::new();
        for s in starts {
            if used.contains(&s) {
                continue;
            }
            let mut cycle = vec![s];
            used.insert(s);
            let mut v = s;
            loop {
                let w = *next.get(&v).ok_or(ComplexError::OpenBoundaryChain(v))?;
                if w == s {
                    break;
                }
                if !used.insert(w) {
                    return Err(ComplexError::OpenBoundaryChain(w));
                }
                cycle.push(w);
                v = w;
            }
            loops.push(cycle);
        }
        Ok(loops)
    }

    /// The subcomplex spanned by the given triangles, with vertices renumbered
    /// compactly. Returns the subcomplex and `old_vertex[new]`.
    pub fn sub_complex(&self, triangle_ids: &[usize]) -> Result<(SimplicialComplex, Vec<usize>), ComplexError> {
        let mut new_of = HashMap::new();
        let mut old_of = Vec::new();
        let mut tris = Vec::with_capacity(triangle_ids.len());
        let oriented = self.oriented_triangles();
        let mut ids: Vec<usize> = triangle_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        for t in ids {
            let tri = oriented[t].map(|v| {
                *new_of.entry(v).or_insert_with(|| {
                    old_of.push(v);
                    old_of.len() - 1
                })
            });
            tris.push(tri);
        }
        Ok((SimplicialComplex::new(old_of.len(), &tris)?, old_of))
    }

    /// Same complex with vertex `v` renamed `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<SimplicialComplex, ComplexError> {
        let tris: Vec<[usize; 3]> = self.oriented_triangles().iter().map(|t| t.map(|v| perm[v])).collect();
        SimplicialComplex::new(self.n_vertices, &tris)
    }
}

/// Signed sum of a 1-cochain along a cycle given as `(edge, ±1)` pairs.
pub fn cycle_integral(cochain: &[f64], cycle: &[(usize, i8)]) -> f64 {
    cycle.iter().map(|&(e, s)| s as f64 * cochain[e]).sum()
}

/// Converts a closed vertex path into `(edge, ±1)` pairs, +1 when the path
/// runs along the edge's `lo -> hi` direction.
pub fn path_to_cycle(complex: &SimplicialComplex, path: &[usize]) -> Option<Vec<(usize, i8)>> {
    let mut out = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let (a, b) = (path[i], path[(i + 1) % path.len()]);
        let e = complex.edge_index(a, b)?;
        out.push((e, if a < b { 1 } else { -1 }));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> SimplicialComplex {
        SimplicialComplex::new(4, &[[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]).unwrap()
    }

    #[test]
    fn tetrahedron_is_a_sphere() {
        let k = tetra();
        assert!(k.is_closed());
        assert!(k.is_consistently_oriented());
        assert_eq!(k.betti(false).unwrap(), [1, 0, 1]);
        assert_eq!(k.euler_characteristic(), 2);
    }

    #[test]
    fn coboundaries_compose_to_zero() {
        let k = tetra();
        let d0 = k.coboundary(0).unwrap();
        let d1 = k.coboundary(1).unwrap();
        assert!(d1.mul(&d0).is_zero_matrix());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SimplicialComplex::new(3, &[[0, 1, 3]]).unwrap_err(), ComplexError::DanglingFace(0, 3));
        assert_eq!(SimplicialComplex::new(3, &[[0, 1, 1]]).unwrap_err(), ComplexError::DegenerateSimplex(0));
        assert_eq!(SimplicialComplex::new(3, &[[0, 1, 2], [2, 1, 0]]).unwrap_err(), ComplexError::DuplicateSimplex(1));
        let fan = [[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        assert_eq!(SimplicialComplex::new(5, &fan).unwrap_err(), ComplexError::NonManifoldEdge(0, 1, 3));
        assert_eq!(tetra().coboundary(3).unwrap_err(), ComplexError::DegreeOutOfRange(3));
    }

    #[test]
    fn single_triangle_relative_betti() {
        let k = SimplicialComplex::new(3, &[[0, 1, 2]]).unwrap();
        assert_eq!(k.betti(false).unwrap(), [1, 0, 0]);
        assert_eq!(k.betti(true).unwrap(), [0, 0, 1]);
        let loops = k.boundary_cycles().unwrap();
        assert_eq!(loops, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn bowtie_boundary_is_rejected() {
        let k = SimplicialComplex::new(5, &[[0, 1, 2], [0, 3, 4]]).unwrap();
        assert_eq!(k.boundary_cycles().unwrap_err(), ComplexError::OpenBoundaryChain(0));
    }
}
