//! Piecewise flat metrics, conformal factors and diagonal mass matrices.
//!
//! A metric is a length per edge plus a conformal factor `u_t` per triangle;
//! inside triangle `t` every edge length is scaled by `e^{u_t}`. Masses use the
//! barycentric dual: the dual of an edge inside a triangle runs from the edge
//! midpoint to the centroid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{gen_annulus, ComplexError, SimplicialComplex, Surface};
use crate::sparse::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("triangle {triangle} has aspect ratio {aspect:e}")]
    AspectBlowup { triangle: usize, aspect: f64 },
    #[error("edge {edge} has invalid length {length}")]
    BadLength { edge: usize, length: f64 },
    #[error("expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("conformal factor {value} on triangle {triangle} is not finite")]
    BadConformalFactor { triangle: usize, value: f64 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Where a metric came from, kept for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSource {
    Embedding,
    EdgeLengths,
    WarpedAnnulus { length: f64, rate: f64 },
}

/// Largest accepted `ℓ_max² √3 / (4 · area)`; equilateral triangles give 1.
pub const MAX_ASPECT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    edge_length: Vec<f64>,
    conformal_factor: Vec<f64>,
    source: MetricSource,
}

/// Area from three side lengths, stable for needle-like triangles. Returns a
/// negative value when the triangle inequality fails.
pub fn heron_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p < 0.0 {
        return -1.0;
    }
    0.25 * p.sqrt()
}

impl MetricField {
    pub fn from_edge_lengths(complex: &SimplicialComplex, lengths: Vec<f64>) -> Result<Self, MetricError> {
        if lengths.len() != complex.n_edges() {
            return Err(MetricError::SizeMismatch { expected: complex.n_edges(), got: lengths.len() });
        }
        for (edge, &length) in lengths.iter().enumerate() {
            if !(length > 0.0 && length.is_finite()) {
                return Err(MetricError::BadLength { edge, length });
            }
        }
        let m = Self {
            edge_length: lengths,
            conformal_factor: vec![0.0; complex.n_triangles()],
            source: MetricSource::EdgeLengths,
        };
        m.validate(complex)?;
        Ok(m)
    }

    pub fn from_embedding(complex: &SimplicialComplex, coords: &[[f64; 3]]) -> Result<Self, MetricError> {
        if coords.len() != complex.n_vertices() {
            return Err(MetricError::SizeMismatch { expected: complex.n_vertices(), got: coords.len() });
        }
        let lengths = complex
            .edges()
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (coords[a], coords[b]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            })
            .collect();
        let mut m = Self::from_edge_lengths(complex, lengths)?;
        m.source = MetricSource::Embedding;
        Ok(m)
    }

    /// Intrinsic lengths when the surface has them, else the embedding.
    pub fn from_surface(surface: &Surface) -> Result<Self, MetricError> {
        match &surface.edge_lengths {
            Some(l) => Self::from_edge_lengths(&surface.complex, l.clone()),
            None => Self::from_embedding(&surface.complex, &surface.coords),
        }
    }

    pub fn source(&self) -> &MetricSource {
        &self.source
    }

    pub fn with_source(mut self, source: MetricSource) -> Self {
        self.source = source;
        self
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_length
    }

    pub fn conformal_factor(&self) -> &[f64] {
        &self.conformal_factor
    }

    /// Replaces the per-triangle conformal factor.
    pub fn with_conformal_factor(&self, complex: &SimplicialComplex, u: Vec<f64>) -> Result<Self, MetricError> {
        if u.len() != complex.n_triangles() {
            return Err(MetricError::SizeMismatch { expected: complex.n_triangles(), got: u.len() });
        }
        for (triangle, &value) in u.iter().enumerate() {
            if !value.is_finite() {
                return Err(MetricError::BadConformalFactor { triangle, value });
            }
        }
        let m = Self { edge_length: self.edge_length.clone(), conformal_factor: u, source: self.source.clone() };
        m.validate(complex)?;
        Ok(m)
    }

    /// Multiplies the metric on each triangle by `e^{2u_t}`, on top of any
    /// existing factor.
    pub fn conformal_rescale(&self, complex: &SimplicialComplex, u: &[f64]) -> Result<Self, MetricError> {
        if u.len() != self.conformal_factor.len() {
            return Err(MetricError::SizeMismatch { expected: self.conformal_factor.len(), got: u.len() });
        }
        let total = self.conformal_factor.iter().zip(u).map(|(a, b)| a + b).collect();
        self.with_conformal_factor(complex, total)
    }

    /// Scaled lengths of triangle `t`, opposite its sorted vertices 0, 1, 2.
    pub fn triangle_lengths(&self, complex: &SimplicialComplex, t: usize) -> [f64; 3] {
        let s = self.conformal_factor[t].exp();
        complex.triangle_edges(t).map(|e| self.edge_length[e] * s)
    }

    pub fn triangle_area(&self, complex: &SimplicialComplex, t: usize) -> f64 {
        let [a, b, c] = self.triangle_lengths(complex, t);
        heron_area(a, b, c)
    }

    pub fn total_area(&self, complex: &SimplicialComplex) -> f64 {
        (0..complex.n_triangles()).map(|t| self.triangle_area(complex, t)).sum()
    }

    /// Edge lengths with the conformal factor averaged over adjacent triangles.
    pub fn effective_edge_lengths(&self, complex: &SimplicialComplex) -> Vec<f64> {
        (0..complex.n_edges())
            .map(|e| {
                let ts = complex.edge_triangles(e);
                if ts.is_empty() {
                    return self.edge_length[e];
                }
                let f: f64 = ts.iter().map(|&t| self.conformal_factor[t].exp()).sum::<f64>() / ts.len() as f64;
                self.edge_length[e] * f
            })
            .collect()
    }

    pub fn aspect_ratio(&self, complex: &SimplicialComplex, t: usize) -> f64 {
        let l = self.triangle_lengths(complex, t);
        let lmax = l.iter().fold(0.0f64, |m, &x| m.max(x));
        lmax * lmax * 3f64.sqrt() / (4.0 * heron_area(l[0], l[1], l[2]))
    }

    /// Metric on a subcomplex built by [`SimplicialComplex::sub_complex`] from
    /// `parent_triangles` (in any order), with vertex map `old_vertex`.
    pub fn restrict(
        &self,
        parent: &SimplicialComplex,
        sub: &SimplicialComplex,
        old_vertex: &[usize],
        parent_triangles: &[usize],
    ) -> Result<Self, MetricError> {
        let mut tris = parent_triangles.to_vec();
        tris.sort_unstable();
        tris.dedup();
        if tris.len() != sub.n_triangles() {
            return Err(MetricError::SizeMismatch { expected: sub.n_triangles(), got: tris.len() });
        }
        let mut lengths = Vec::with_capacity(sub.n_edges());
        for &[a, b] in sub.edges() {
            let e = parent
                .edge_index(old_vertex[a], old_vertex[b])
                .ok_or_else(|| ComplexError::BadParameter(format!("edge ({a}, {b}) not in parent")))?;
            lengths.push(self.edge_length[e]);
        }
        let u = tris.iter().map(|&t| self.conformal_factor[t]).collect();
        let m = Self { edge_length: lengths, conformal_factor: u, source: self.source.clone() };
        m.validate(sub)?;
        Ok(m)
    }

    fn validate(&self, complex: &SimplicialComplex) -> Result<(), MetricError> {
        for t in 0..complex.n_triangles() {
            let l = self.triangle_lengths(complex, t);
            let area = heron_area(l[0], l[1], l[2]);
            let mean = (l[0] + l[1] + l[2]) / 3.0;
            if !(area >= 1e-14 * mean * mean) {
                return Err(MetricError::DegenerateTriangle { triangle: t, area });
            }
            let aspect = self.aspect_ratio(complex, t);
            if aspect > MAX_ASPECT {
                return Err(MetricError::AspectBlowup { triangle: t, aspect });
            }
        }
        Ok(())
    }
}

/// Annulus `[0, L] x S¹` with metric `dr² + e^{2ar} dθ²`, triangulated on an
/// `n_radial x n_angular` grid. Each quad is an isosceles trapezoid, so its
/// diagonal is `√(h² + A_i A_{i+1})`.
pub fn warped_annulus_metric(
    n_radial: usize,
    n_angular: usize,
    length: f64,
    rate: f64,
) -> Result<(SimplicialComplex, MetricField), MetricError> {
    if n_radial < 3 || n_angular < 3 {
        return Err(MetricError::Complex(ComplexError::BadParameter(format!(
            "warped annulus grid {n_radial} x {n_angular}, need at least 3 x 3"
        ))));
    }
    if !(length > 0.0 && length.is_finite() && rate.is_finite()) {
        return Err(MetricError::Complex(ComplexError::BadParameter(format!("length {length}, rate {rate}"))));
    }
    let complex = gen_annulus(n_radial, n_angular, 1.0, 2.0)?.complex;
    let h = length / n_radial as f64;
    let ring = |v: usize| v / n_angular;
    let arc = |i: usize| 2.0 * std::f64::consts::PI / n_angular as f64 * (rate * h * i as f64).exp();
    let lengths = complex
        .edges()
        .iter()
        .map(|&[a, b]| {
            let (ia, ib) = (ring(a), ring(b));
            if ia == ib {
                arc(ia)
            } else if a % n_angular == b % n_angular {
                h
            } else {
                (h * h + arc(ia) * arc(ib)).sqrt()
            }
        })
        .collect();
    let mut metric = MetricField::from_edge_lengths(&complex, lengths)?;
    metric.source = MetricSource::WarpedAnnulus { length, rate };
    Ok((complex, metric))
}

/// Coboundaries and diagonal mass matrices of a complex with a metric.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    complex: SimplicialComplex,
    d: [IntMatrix; 2],
    mass: [Vec<f64>; 3],
    source: MetricSource,
}

/// Builds `d_0, d_1` and the barycentric masses `M_0, M_1, M_2`.
pub fn mass_matrices(complex: &SimplicialComplex, metric: &MetricField) -> Result<OperatorBundle, MetricError> {
    metric.validate(complex)?;
    let mut m0 = vec![0.0; complex.n_vertices()];
    let mut m1 = vec![0.0; complex.n_edges()];
    let mut m2 = vec![0.0; complex.n_triangles()];
    for t in 0..complex.n_triangles() {
        let l = metric.triangle_lengths(complex, t);
        let area = heron_area(l[0], l[1], l[2]);
        for &v in &complex.triangles()[t] {
            m0[v] += area / 3.0;
        }
        let edges = complex.triangle_edges(t);
        for i in 0..3 {
            let (a, b, c) = (l[(i + 1) % 3], l[(i + 2) % 3], l[i]);
            // a third of the median onto edge c
            let dual = (2.0 * a * a + 2.0 * b * b - c * c).sqrt() / 6.0;
            m1[edges[i]] += dual / c;
        }
        m2[t] = 1.0 / area;
    }
    for m in m0.iter_mut().filter(|m| **m == 0.0) {
        // isolated vertex: unit mass keeps the pencil definite
        *m = 1.0;
    }
    Ok(OperatorBundle {
        complex: complex.clone(),
        d: [complex.coboundary(0)?, complex.coboundary(1)?],
        mass: [m0, m1, m2],
        source: metric.source.clone(),
    })
}

impl OperatorBundle {
    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    /// `d_k` for `k = 0, 1`.
    pub fn d(&self, k: usize) -> &IntMatrix {
        &self.d[k]
    }

    pub fn mass(&self, k: usize) -> &[f64] {
        &self.mass[k]
    }

    pub fn source(&self) -> &MetricSource {
        &self.source
    }

    /// `⟨x, y⟩_{M_k}`.
    pub fn inner(&self, k: usize, x: &[f64], y: &[f64]) -> f64 {
        crate::sparse::m_dot(x, y, &self.mass[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::gen_closed_surface;

    #[test]
    fn heron_matches_right_triangle() {
        assert!((heron_area(3.0, 4.0, 5.0) - 6.0).abs() < 1e-14);
        assert!(heron_area(1.0, 1.0, 3.0) < 0.0);
    }

    #[test]
    fn flat_torus_masses() {
        let s = gen_closed_surface(1, 1).unwrap();
        let m = MetricField::from_surface(&s).unwrap();
        let b = mass_matrices(&s.complex, &m).unwrap();
        let area: f64 = b.mass(0).iter().sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert!((m.total_area(&s.complex) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warped_annulus_checks() {
        let (k, m) = warped_annulus_metric(4, 32, 2.0, 1.0).unwrap();
        assert_eq!(k.n_vertices(), 160);
        let total: f64 = m.total_area(&k);
        // trapezoids exactly tile the piecewise-linear warped strip
        let h = 0.5;
        let mut want = 0.0;
        for i in 0..4 {
            let a0 = 2.0 * std::f64::consts::PI * (h * i as f64).exp();
            let a1 = 2.0 * std::f64::consts::PI * (h * (i + 1) as f64).exp();
            let w = (a1 - a0) / 64.0;
            want += 0.5 * (a0 + a1) * (h * h - w * w).sqrt();
        }
        assert!((total - want).abs() < 1e-10 * want);
        assert!(matches!(warped_annulus_metric(2, 8, 1.0, 1.0), Err(MetricError::Complex(_))));
        assert!(matches!(warped_annulus_metric(3, 3, 6.0, -5.0), Err(MetricError::AspectBlowup { .. })));
    }

    #[test]
    fn rejects_degenerate_lengths() {
        let k = SimplicialComplex::new(3, &[[0, 1, 2]]).unwrap();
        assert!(matches!(
            MetricField::from_edge_lengths(&k, vec![1.0, 1.0, 2.0]),
            Err(MetricError::DegenerateTriangle { .. })
        ));
        assert!(matches!(MetricField::from_edge_lengths(&k, vec![1.0, -1.0, 1.0]), Err(MetricError::BadLength { .. })));
    }
}
