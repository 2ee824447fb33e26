//! Ends of a surface or a radial model: detection relative to a core,
//! capacities of truncated ends, parabolicity, and harmonic functions built
//! by Dirichlet exhaustion.
//!
//! Everything runs on a [`WeightedGraph`]: vertex masses, symmetric edge
//! weights and an exhaustion function. A mesh gives one through its lumped
//! mass matrices; a 1-D rotationally symmetric model gives a chain.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::complex::SimplicialComplex;
use crate::metric::OperatorBundle;
use crate::sparse::{smallest_eigenpairs, CsrMatrix, EigenOptions, SolverError, SymmetricFactor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EndsError {
    #[error("core is empty")]
    EmptyCore,
    #[error("nothing outside the core")]
    EmptyComplement,
    #[error("truncation at R = {radius} leaves no {what}")]
    TruncationTooTight { radius: f64, what: &'static str },
    #[error("core values still move by {change:e} between the last two radii")]
    NonConvergent { change: f64 },
    #[error("radii must be positive and strictly increasing")]
    BadRadii,
    #[error("invalid graph: {0}")]
    BadGraph(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Vertex masses, edges `(i, j, w)` with `w > 0`, and an exhaustion function.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub mass: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
    pub exhaustion: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(mass: Vec<f64>, edges: Vec<(usize, usize, f64)>, exhaustion: Vec<f64>) -> Result<Self, EndsError> {
        let n = mass.len();
        if exhaustion.len() != n {
            return Err(EndsError::BadGraph(format!("{} exhaustion values for {n} vertices", exhaustion.len())));
        }
        if let Some(&(i, j, w)) = edges.iter().find(|&&(i, j, w)| i >= n || j >= n || i == j || !(w > 0.0)) {
            return Err(EndsError::BadGraph(format!("edge ({i}, {j}) with weight {w}")));
        }
        if mass.iter().any(|m| !(*m > 0.0)) {
            return Err(EndsError::BadGraph("vertex masses must be positive".into()));
        }
        Ok(Self { mass, edges, exhaustion })
    }

    /// The 0-form Dirichlet energy of a mesh: edge weights are the diagonal
    /// 1-form masses, vertex masses the 0-form masses.
    pub fn from_bundle(bundle: &OperatorBundle, exhaustion: Vec<f64>) -> Result<Self, EndsError> {
        let m1 = bundle.mass(1);
        let edges = bundle
            .complex()
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| m1[*e] > 0.0)
            .map(|(e, &[a, b])| (a, b, m1[e]))
            .collect();
        Self::new(bundle.mass(0).to_vec(), edges, exhaustion)
    }

    /// Finite-volume chain for `(w u')' = 0` on `[t0, t1]` with `intervals`
    /// equal cells: edge weights `w(t_{i+½}) / Δt`, masses `w(t_i) Δt` (half
    /// at the ends). The exhaustion is `|t|`.
    pub fn radial_chain(weight: impl Fn(f64) -> f64, t0: f64, t1: f64, intervals: usize) -> Result<Self, EndsError> {
        if !(t1 > t0) || intervals < 2 {
            return Err(EndsError::BadGraph(format!("chain on [{t0}, {t1}] with {intervals} cells")));
        }
        let dt = (t1 - t0) / intervals as f64;
        let t: Vec<f64> = (0..=intervals).map(|i| t0 + i as f64 * dt).collect();
        let mass = t
            .iter()
            .enumerate()
            .map(|(i, &x)| weight(x) * dt * if i == 0 || i == intervals { 0.5 } else { 1.0 })
            .collect();
        let edges = (0..intervals).map(|i| (i, i + 1, weight(t[i] + 0.5 * dt) / dt)).collect();
        Self::new(mass, edges, t.iter().map(|x| x.abs()).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.mass.len()
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.edges.iter().map(|&(i, j, w)| w * (u[i] - u[j]).powi(2)).sum()
    }

    /// Solves the graph Laplace equation on the vertices with `fixed[v] ==
    /// None`, keeping the others at their given values. Edges leaving `keep`
    /// are ignored.
    fn harmonic_extension(&self, fixed: &[Option<f64>], keep: &[bool]) -> Result<Vec<f64>, EndsError> {
        let n = self.n_vertices();
        let mut local = vec![usize::MAX; n];
        let mut free = Vec::new();
        for v in 0..n {
            if keep[v] && fixed[v].is_none() {
                local[v] = free.len();
                free.push(v);
            }
        }
        let mut u: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        if free.is_empty() {
            return Ok(u);
        }
        let mut trip = Vec::new();
        let mut rhs = vec![0.0; free.len()];
        for &(i, j, w) in &self.edges {
            if !(keep[i] && keep[j]) {
                continue;
            }
            for (a, b) in [(i, j), (j, i)] {
                if local[a] == usize::MAX {
                    continue;
                }
                trip.push((local[a], local[a], w));
                match fixed[b] {
                    Some(val) => rhs[local[a]] += w * val,
                    None => trip.push((local[a], local[b], -w)),
                }
            }
        }
        let lap = CsrMatrix::from_triplets(free.len(), free.len(), &trip);
        let x = SymmetricFactor::new(&lap)?.solve(&rhs);
        for (k, &v) in free.iter().enumerate() {
            u[v] = x[k];
        }
        Ok(u)
    }

    /// `max |Δu|` over `free` vertices relative to the largest weighted degree.
    fn laplacian_residual(&self, u: &[f64], free: &[bool], keep: &[bool]) -> f64 {
        let mut r = vec![0.0; self.n_vertices()];
        let mut deg = vec![0.0; self.n_vertices()];
        for &(i, j, w) in &self.edges {
            if keep[i] && keep[j] {
                r[i] += w * (u[i] - u[j]);
                r[j] += w * (u[j] - u[i]);
                deg[i] += w;
                deg[j] += w;
            }
        }
        let scale = deg.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        (0..r.len()).filter(|&v| free[v]).map(|v| r[v].abs()).fold(0.0, f64::max) / scale
    }
}

/// Euclidean distance of each vertex from `center`.
pub fn radial_exhaustion(coords: &[[f64; 3]], center: [f64; 3]) -> Vec<f64> {
    coords
        .iter()
        .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) + (p[2] - center[2]).powi(2)).sqrt())
        .collect()
}

/// Edge-hop distance of every vertex to the nearest source vertex;
/// `usize::MAX` when unreachable.
pub fn hop_distance(complex: &SimplicialComplex, sources: &[usize]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); complex.n_vertices()];
    for &[a, b] in complex.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![usize::MAX; complex.n_vertices()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// One connected component of the complement of the core.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndRegion {
    pub id: usize,
    pub triangles: Vec<usize>,
    /// Vertices of the end that do not touch the core.
    pub vertices: Vec<usize>,
    /// Vertices shared with the core.
    pub interface: Vec<usize>,
    /// Edges shared by a core triangle and an end triangle.
    pub interface_edges: Vec<usize>,
}

/// Components of the triangles outside `core`, glued along shared edges.
pub fn detect_ends(complex: &SimplicialComplex, core: &[usize]) -> Result<Vec<EndRegion>, EndsError> {
    let nt = complex.n_triangles();
    let mut in_core = vec![false; nt];
    for &t in core {
        if t >= nt {
            return Err(EndsError::BadGraph(format!("core triangle {t} out of range")));
        }
        in_core[t] = true;
    }
    if !in_core.contains(&true) {
        return Err(EndsError::EmptyCore);
    }
    if !in_core.contains(&false) {
        return Err(EndsError::EmptyComplement);
    }
    let mut core_vertex = vec![false; complex.n_vertices()];
    for t in (0..nt).filter(|&t| in_core[t]) {
        for v in complex.triangles()[t] {
            core_vertex[v] = true;
        }
    }
    let mut label = vec![usize::MAX; nt];
    let mut ends = Vec::new();
    for start in 0..nt {
        if in_core[start] || label[start] != usize::MAX {
            continue;
        }
        let id = ends.len();
        let mut tris = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < tris.len() {
            let t = tris[head];
            head += 1;
            for e in complex.triangle_edges(t) {
                for &s in complex.edge_triangles(e) {
                    if !in_core[s] && label[s] == usize::MAX {
                        label[s] = id;
                        tris.push(s);
                    }
                }
            }
        }
        tris.sort_unstable();
        let mut verts: Vec<usize> = tris.iter().flat_map(|&t| complex.triangles()[t]).collect();
        verts.sort_unstable();
        verts.dedup();
        let (interface, vertices): (Vec<usize>, Vec<usize>) = verts.into_iter().partition(|&v| core_vertex[v]);
        let mut interface_edges: Vec<usize> = tris
            .iter()
            .flat_map(|&t| complex.triangle_edges(t))
            .filter(|&e| complex.edge_triangles(e).iter().any(|&s| in_core[s]))
            .collect();
        interface_edges.sort_unstable();
        interface_edges.dedup();
        ends.push(EndRegion { id, triangles: tris, vertices, interface, interface_edges });
    }
    Ok(ends)
}

fn check_radii(radii: &[f64]) -> Result<(), EndsError> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EndsError::BadRadii);
    }
    Ok(())
}

// exhaustion comparisons tolerate rounding in mesh coordinates
fn beyond(x: f64, radius: f64) -> bool {
    x >= radius * (1.0 - 1e-9)
}

/// Capacity `C(R)` of an end truncated at each radius: the energy of the
/// function that is 1 on `interface`, 0 on end vertices with exhaustion
/// `≥ R`, and harmonic in between. Only edges inside `end ∪ interface` count.
pub fn capacity_curve(
    graph: &WeightedGraph,
    interface: &[usize],
    end: &[usize],
    radii: &[f64],
) -> Result<Vec<f64>, EndsError> {
    check_radii(radii)?;
    let n = graph.n_vertices();
    if interface.is_empty() || end.is_empty() {
        return Err(EndsError::BadGraph("end and interface must be nonempty".into()));
    }
    let mut keep = vec![false; n];
    let mut fixed_base = vec![None; n];
    for &v in interface {
        keep[v] = true;
        fixed_base[v] = Some(1.0);
    }
    for &v in end {
        keep[v] = true;
    }
    let mut out = Vec::with_capacity(radii.len());
    for &radius in radii {
        let mut fixed = fixed_base.clone();
        let (mut zeros, mut free) = (0, 0);
        for &v in end {
            if fixed[v].is_some() {
                continue;
            }
            if beyond(graph.exhaustion[v], radius) {
                fixed[v] = Some(0.0);
                zeros += 1;
            } else {
                free += 1;
            }
        }
        if zeros == 0 {
            return Err(EndsError::TruncationTooTight { radius, what: "vertices beyond the truncation radius" });
        }
        if free == 0 {
            return Err(EndsError::TruncationTooTight { radius, what: "free vertices inside the truncation" });
        }
        let u = graph.harmonic_extension(&fixed, &keep)?;
        let energy = graph
            .edges
            .iter()
            .filter(|&&(i, j, _)| keep[i] && keep[j])
            .map(|&(i, j, w)| w * (u[i] - u[j]).powi(2))
            .sum();
        out.push(energy);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parabolicity {
    Parabolic,
    NonParabolic,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndClassification {
    pub classification: Parabolicity,
    /// Least-squares slope of `log C` against `log R` over the window.
    pub trend_exponent: f64,
    /// Successive ratios of the increments of `1 / C(R)`.
    pub increment_ratios: Vec<f64>,
    /// Geometric extrapolation of the capacity when the increments contract.
    pub extrapolated_capacity: Option<f64>,
    pub floor: f64,
}

/// Classifies a capacity curve sampled on a geometric radii schedule.
///
/// The resistance `1 / C(R)` grows by increments `δ_j`. Increments that
/// contract geometrically (every ratio `≤ 0.75`) give a finite limiting
/// resistance; if the extrapolated capacity then exceeds `floor` the end is
/// non-parabolic. Increments that do not contract (every ratio `≥ 0.9`) mean
/// unbounded resistance and a parabolic end. Everything else, and curves
/// with fewer than four points in the window, is undetermined.
///
/// `floor` defaults to `1e-3 · C(R_0)`.
pub fn classify_parabolic(
    radii: &[f64],
    capacities: &[f64],
    floor: Option<f64>,
    window: Option<usize>,
) -> EndClassification {
    let n = radii.len().min(capacities.len());
    let floor = floor.unwrap_or_else(|| 1e-3 * capacities.first().copied().unwrap_or(0.0));
    let w = window.unwrap_or(n).clamp(0, n);
    let (r, c) = (&radii[n - w..n], &capacities[n - w..n]);
    let trend_exponent = if w >= 2 {
        let xs: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = c.iter().map(|x| x.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / w as f64, ys.iter().sum::<f64>() / w as f64);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    let resist: Vec<f64> = c.iter().map(|x| 1.0 / x).collect();
    let inc: Vec<f64> = resist.windows(2).map(|p| p[1] - p[0]).collect();
    let scale = resist.last().copied().unwrap_or(0.0).abs();
    let increment_ratios: Vec<f64> = inc
        .windows(2)
        .map(|p| if p[0] <= 1e-14 * scale { 0.0 } else { p[1] / p[0] })
        .collect();
    let mut out = EndClassification {
        classification: Parabolicity::Undetermined,
        trend_exponent,
        increment_ratios,
        extrapolated_capacity: None,
        floor,
    };
    if w < 4 || c.iter().any(|x| !(*x > 0.0)) {
        return out;
    }
    let rho_max = out.increment_ratios.iter().copied().fold(0.0, f64::max);
    if out.increment_ratios.iter().all(|&q| q <= 0.75) {
        let limit = resist[w - 1] + inc[w - 2].max(0.0) * rho_max / (1.0 - rho_max);
        let cap = 1.0 / limit;
        out.extrapolated_capacity = Some(cap);
        if cap > floor {
            out.classification = Parabolicity::NonParabolic;
        }
    } else if out.increment_ratios.iter().all(|&q| q >= 0.9) {
        out.classification = Parabolicity::Parabolic;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndReport {
    pub end_id: usize,
    pub radii: Vec<f64>,
    pub capacities: Vec<f64>,
    pub monotone: bool,
    pub classification: Parabolicity,
    pub trend_exponent: f64,
    pub extrapolated_capacity: Option<f64>,
}

/// Capacity curve and classification of one detected end.
pub fn analyze_end(graph: &WeightedGraph, end: &EndRegion, radii: &[f64]) -> Result<EndReport, EndsError> {
    let capacities = capacity_curve(graph, &end.interface, &end.vertices, radii)?;
    let monotone = capacities.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-10));
    let cls = classify_parabolic(radii, &capacities, None, None);
    Ok(EndReport {
        end_id: end.id,
        radii: radii.to_vec(),
        capacities,
        monotone,
        classification: cls.classification,
        trend_exponent: cls.trend_exponent,
        extrapolated_capacity: cls.extrapolated_capacity,
    })
}

/// Harmonic function from Dirichlet exhaustion between two ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicFunctionReport {
    pub radii: Vec<f64>,
    /// Solution at the largest radius; vertices beyond it hold their level.
    pub values: Vec<f64>,
    /// Dirichlet energy per radius.
    pub energies: Vec<f64>,
    pub laplacian_residual: f64,
    /// Mass-weighted mean of the solution on the outermost shell of each end.
    pub end_values: [f64; 2],
    /// `Σ m (u - level)²` over each end inside the truncation, per radius.
    pub end_deviation: Vec<[f64; 2]>,
    /// `max - min` over the core, per radius.
    pub oscillation: Vec<f64>,
    /// Largest change of a core value between the last two radii.
    pub core_change: f64,
    pub max_principle: bool,
    /// Core oscillation shrinks at every radius and ends below half its
    /// first value: the limit is constant.
    pub degenerating: bool,
}

impl HarmonicFunctionReport {
    pub fn final_oscillation(&self) -> f64 {
        self.oscillation.last().copied().unwrap_or(0.0)
    }

    pub fn energies_non_increasing(&self) -> bool {
        self.energies.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-10))
    }
}

/// Solves `Δu = 0` where the exhaustion is below `R`, with `u = +1` on the
/// `plus` end and `-1` on the `minus` end beyond `R`, for each radius.
/// Vertices in neither end form the core, which must lie inside the first
/// radius.
///
/// Fails with `NonConvergent` when the core values move by more than `tol`
/// between the last two radii, unless the sequence is degenerating.
pub fn li_tam_harmonic(
    graph: &WeightedGraph,
    plus: &[usize],
    minus: &[usize],
    radii: &[f64],
    tol: f64,
) -> Result<HarmonicFunctionReport, EndsError> {
    check_radii(radii)?;
    let n = graph.n_vertices();
    let mut side = vec![0i8; n];
    for &v in plus {
        side[v] = 1;
    }
    for &v in minus {
        if side[v] == 1 {
            return Err(EndsError::BadGraph(format!("vertex {v} is in both ends")));
        }
        side[v] = -1;
    }
    let core: Vec<usize> = (0..n).filter(|&v| side[v] == 0).collect();
    if core.is_empty() {
        return Err(EndsError::EmptyCore);
    }
    if core.iter().any(|&v| beyond(graph.exhaustion[v], radii[0])) {
        return Err(EndsError::TruncationTooTight { radius: radii[0], what: "room for the core" });
    }
    let keep = vec![true; n];
    let mut energies = Vec::new();
    let mut oscillation = Vec::new();
    let mut end_deviation = Vec::new();
    let mut max_principle = true;
    let mut prev_core: Option<Vec<f64>> = None;
    let mut core_change = 0.0;
    let mut last = (Vec::new(), vec![false; n]);
    for &radius in radii {
        let fixed: Vec<Option<f64>> = (0..n)
            .map(|v| (side[v] != 0 && beyond(graph.exhaustion[v], radius)).then_some(side[v] as f64))
            .collect();
        for s in [1i8, -1] {
            if !(0..n).any(|v| side[v] == s && fixed[v].is_some()) {
                return Err(EndsError::TruncationTooTight { radius, what: "boundary vertices on one end" });
            }
        }
        let u = graph.harmonic_extension(&fixed, &keep)?;
        max_principle &= u.iter().all(|x| x.abs() <= 1.0 + 1e-12);
        energies.push(graph.energy(&u));
        let cv: Vec<f64> = core.iter().map(|&v| u[v]).collect();
        let (lo, hi) = cv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        oscillation.push(hi - lo);
        let mut dev = [0.0; 2];
        for v in 0..n {
            if side[v] != 0 && fixed[v].is_none() {
                let idx = usize::from(side[v] < 0);
                dev[idx] += graph.mass[v] * (u[v] - side[v] as f64).powi(2);
            }
        }
        end_deviation.push(dev);
        if let Some(p) = &prev_core {
            core_change = p.iter().zip(&cv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        }
        prev_core = Some(cv);
        let free: Vec<bool> = fixed.iter().map(Option::is_none).collect();
        last = (u, free);
    }
    let (values, free) = last;
    let laplacian_residual = graph.laplacian_residual(&values, &free, &keep);
    let r_last = radii[radii.len() - 1];
    let r_shell = if radii.len() > 1 { radii[radii.len() - 2] } else { 0.5 * r_last };
    let mut end_values = [0.0; 2];
    for (idx, s) in [1i8, -1].into_iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for v in 0..n {
            let x = graph.exhaustion[v];
            if side[v] == s && free[v] && x >= r_shell {
                num += graph.mass[v] * values[v];
                den += graph.mass[v];
            }
        }
        end_values[idx] = if den > 0.0 { num / den } else { s as f64 };
    }
    let degenerating = oscillation.len() >= 2
        && oscillation.windows(2).all(|p| p[1] < p[0])
        && oscillation[oscillation.len() - 1] < 0.5 * oscillation[0];
    if radii.len() >= 2 && core_change > tol && !degenerating {
        return Err(EndsError::NonConvergent { change: core_change });
    }
    Ok(HarmonicFunctionReport {
        radii: radii.to_vec(),
        values,
        energies,
        laplacian_residual,
        end_values,
        end_deviation,
        oscillation,
        core_change,
        max_principle,
        degenerating,
    })
}

/// Bottom of the spectrum of the graph Laplacian on `domain` with
/// Dirichlet conditions outside it.
pub fn lambda0_estimate(graph: &WeightedGraph, domain: &[bool]) -> Result<f64, EndsError> {
    let n = graph.n_vertices();
    if domain.len() != n {
        return Err(EndsError::BadGraph(format!("mask of length {} for {n} vertices", domain.len())));
    }
    let mut local = vec![usize::MAX; n];
    let mut ids = Vec::new();
    for v in (0..n).filter(|&v| domain[v]) {
        local[v] = ids.len();
        ids.push(v);
    }
    if ids.is_empty() {
        return Err(EndsError::BadGraph("empty domain".into()));
    }
    let mut trip = Vec::new();
    for &(i, j, w) in &graph.edges {
        for (a, b) in [(i, j), (j, i)] {
            if local[a] != usize::MAX {
                trip.push((local[a], local[a], w));
                if local[b] != usize::MAX {
                    trip.push((local[a], local[b], -w));
                }
            }
        }
    }
    let s = CsrMatrix::from_triplets(ids.len(), ids.len(), &trip);
    let mass: Vec<f64> = ids.iter().map(|&v| graph.mass[v]).collect();
    let e = smallest_eigenpairs(&s, &mass, 1, &EigenOptions::default())?;
    Ok(e.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chain_capacity_matches_series_resistance() {
        let g = WeightedGraph::radial_chain(|t| 4.0 * PI * t * t, 1.0, 8.0, 700).unwrap();
        let c = capacity_curve(&g, &[0], &(1..g.n_vertices()).collect::<Vec<_>>(), &[2.0, 4.0, 8.0]).unwrap();
        for (cap, r) in c.iter().zip([2.0, 4.0, 8.0]) {
            let exact = 4.0 * PI / (1.0 - 1.0 / r);
            assert!((cap - exact).abs() / exact < 1e-4, "{cap} vs {exact}");
        }
    }

    #[test]
    fn short_curves_are_undetermined() {
        let cls = classify_parabolic(&[1.0, 2.0, 4.0], &[3.0, 2.0, 1.5], None, None);
        assert_eq!(cls.classification, Parabolicity::Undetermined);
    }

    #[test]
    fn truncation_beyond_the_end_is_rejected() {
        let g = WeightedGraph::radial_chain(|_| 1.0, 0.0, 4.0, 40).unwrap();
        let err = capacity_curve(&g, &[0], &(1..41).collect::<Vec<_>>(), &[8.0]).unwrap_err();
        assert!(matches!(err, EndsError::TruncationTooTight { .. }));
    }

    #[test]
    fn interval_lambda0() {
        let g = WeightedGraph::radial_chain(|_| 1.0, 0.0, PI, 400).unwrap();
        let mut dom = vec![true; g.n_vertices()];
        dom[0] = false;
        dom[400] = false;
        let l = lambda0_estimate(&g, &dom).unwrap();
        assert!((l - 1.0).abs() < 1e-4, "{l}");
    }
}
