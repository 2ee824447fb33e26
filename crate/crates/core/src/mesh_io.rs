//! Text formats for meshes and metrics.
//!
//! A mesh is an OFF file: the header `OFF`, a count line `nv nt 0`, one
//! `x y z` line per vertex and one `3 a b c` line per oriented triangle.
//! `#` starts a comment. Boundary marks and metrics live in JSON sidecars.
//! Floats are written in shortest round-trip form, so nothing is lost.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex};
use crate::metric::{MetricError, MetricField, MetricSource};

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid data: {0}")]
    Validation(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn io_err(path: &Path, e: std::io::Error) -> MeshIoError {
    MeshIoError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_off(complex: &SimplicialComplex, coords: &[[f64; 3]]) -> Result<String, MeshIoError> {
    if coords.len() != complex.n_vertices() {
        return Err(MeshIoError::Validation(format!(
            "{} coordinates for {} vertices",
            coords.len(),
            complex.n_vertices()
        )));
    }
    let mut out = String::new();
    let _ = writeln!(out, "OFF\n{} {} 0", complex.n_vertices(), complex.n_triangles());
    for p in coords {
        let _ = writeln!(out, "{:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for [a, b, c] in complex.oriented_triangles() {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    Ok(out)
}

struct Tokens<'a> {
    items: Vec<(usize, usize, &'a str)>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        let mut end = (1, 1);
        for (ln, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            let mut start = None;
            for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(i),
                    (true, Some(s)) => {
                        items.push((ln + 1, body[..s].chars().count() + 1, &body[s..i]));
                        start = None;
                    }
                    _ => {}
                }
            }
            end = (ln + 1, line.chars().count() + 1);
        }
        Self { items, pos: 0, end }
    }

    fn next(&mut self, what: &str) -> Result<(usize, usize, &'a str), MeshIoError> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| MeshIoError::Parse {
            line: self.end.0,
            column: self.end.1,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, MeshIoError> {
        let (line, column, s) = self.next(what)?;
        s.parse()
            .map_err(|_| MeshIoError::Parse { line, column, message: format!("expected {what}, found {s:?}") })
    }
}

/// Parses an OFF mesh; incidence is rebuilt from the triangle list.
pub fn read_off(text: &str) -> Result<(SimplicialComplex, Vec<[f64; 3]>), MeshIoError> {
    let mut tok = Tokens::new(text);
    let (line, column, head) = tok.next("OFF header")?;
    if head != "OFF" {
        return Err(MeshIoError::Parse { line, column, message: format!("expected OFF header, found {head:?}") });
    }
    let nv: usize = tok.parse("vertex count")?;
    let nt: usize = tok.parse("face count")?;
    let _edges: usize = tok.parse("edge count")?;
    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut p = [0.0; 3];
        for x in &mut p {
            let (line, column, s) = tok.next("coordinate")?;
            *x = s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| MeshIoError::Parse {
                line,
                column,
                message: format!("expected finite coordinate, found {s:?}"),
            })?;
        }
        coords.push(p);
    }
    let mut tris = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, column, s) = tok.next("face size")?;
        if s != "3" {
            return Err(MeshIoError::Parse { line, column, message: format!("only triangles are supported, found {s:?}") });
        }
        let mut t = [0usize; 3];
        for v in &mut t {
            let (line, column, s) = tok.next("vertex index")?;
            *v = s.parse::<usize>().ok().filter(|&i| i < nv).ok_or_else(|| MeshIoError::Parse {
                line,
                column,
                message: format!("expected vertex index below {nv}, found {s:?}"),
            })?;
        }
        tris.push(t);
    }
    if let Some(&(line, column, s)) = tok.items.get(tok.pos) {
        return Err(MeshIoError::Parse { line, column, message: format!("trailing token {s:?}") });
    }
    Ok((SimplicialComplex::new(nv, &tris)?, coords))
}

/// Optional marks on boundary simplices, e.g. to name boundary components.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryMarks {
    #[serde(default)]
    pub vertices: Vec<(usize, String)>,
    #[serde(default)]
    pub edges: Vec<([usize; 2], String)>,
}

impl BoundaryMarks {
    /// Every boundary vertex and edge marked with `label`.
    pub fn whole_boundary(complex: &SimplicialComplex, label: &str) -> Self {
        let vmask = complex.boundary_vertex_mask();
        let emask = complex.boundary_edge_mask();
        Self {
            vertices: (0..vmask.len()).filter(|&v| vmask[v]).map(|v| (v, label.to_string())).collect(),
            edges: (0..emask.len()).filter(|&e| emask[e]).map(|e| (complex.edges()[e], label.to_string())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("marks serialize")
    }

    /// Parses marks and checks that they sit on boundary simplices.
    pub fn from_json(complex: &SimplicialComplex, text: &str) -> Result<Self, MeshIoError> {
        let marks: Self = serde_json::from_str(text).map_err(json_err)?;
        let vmask = complex.boundary_vertex_mask();
        let emask = complex.boundary_edge_mask();
        for (v, _) in &marks.vertices {
            if !vmask.get(*v).copied().unwrap_or(false) {
                return Err(MeshIoError::Validation(format!("marked vertex {v} is not on the boundary")));
            }
        }
        for ([a, b], _) in &marks.edges {
            match complex.edge_index(*a, *b) {
                Some(e) if emask[e] => {}
                _ => return Err(MeshIoError::Validation(format!("marked edge ({a}, {b}) is not a boundary edge"))),
            }
        }
        Ok(marks)
    }
}

fn json_err(e: serde_json::Error) -> MeshIoError {
    MeshIoError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

#[derive(Serialize, Deserialize)]
struct MetricFile {
    source: MetricSource,
    /// `[a, b, length]` per edge.
    edges: Vec<(usize, usize, f64)>,
    /// Per-triangle conformal factor, triangles in sorted order.
    conformal_factor: Vec<f64>,
}

pub fn metric_to_json(complex: &SimplicialComplex, metric: &MetricField) -> String {
    let file = MetricFile {
        source: metric.source().clone(),
        edges: complex.edges().iter().zip(metric.edge_lengths()).map(|(&[a, b], &l)| (a, b, l)).collect(),
        conformal_factor: metric.conformal_factor().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("metric serializes")
}

pub fn metric_from_json(complex: &SimplicialComplex, text: &str) -> Result<MetricField, MeshIoError> {
    let file: MetricFile = serde_json::from_str(text).map_err(json_err)?;
    if file.edges.len() != complex.n_edges() {
        return Err(MeshIoError::Validation(format!(
            "{} edge lengths for {} edges",
            file.edges.len(),
            complex.n_edges()
        )));
    }
    let mut lengths = vec![f64::NAN; complex.n_edges()];
    let mut seen = HashMap::new();
    for &(a, b, l) in &file.edges {
        let e = complex
            .edge_index(a.min(b), a.max(b))
            .ok_or_else(|| MeshIoError::Validation(format!("({a}, {b}) is not an edge")))?;
        if seen.insert(e, ()).is_some() {
            return Err(MeshIoError::Validation(format!("edge ({a}, {b}) listed twice")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(MeshIoError::Validation(format!("edge ({a}, {b}) has length {l}")));
        }
        lengths[e] = l;
    }
    let metric = MetricField::from_edge_lengths(complex, lengths)?
        .with_conformal_factor(complex, file.conformal_factor)?
        .with_source(file.source);
    Ok(metric)
}

pub fn save_off(path: &Path, complex: &SimplicialComplex, coords: &[[f64; 3]]) -> Result<(), MeshIoError> {
    std::fs::write(path, write_off(complex, coords)?).map_err(|e| io_err(path, e))
}

pub fn load_off(path: &Path) -> Result<(SimplicialComplex, Vec<[f64; 3]>), MeshIoError> {
    read_off(&std::fs::read_to_string(path).map_err(|e| io_err(path, e))?)
}

pub fn save_metric(path: &Path, complex: &SimplicialComplex, metric: &MetricField) -> Result<(), MeshIoError> {
    std::fs::write(path, metric_to_json(complex, metric)).map_err(|e| io_err(path, e))
}

pub fn load_metric(path: &Path, complex: &SimplicialComplex) -> Result<MetricField, MeshIoError> {
    metric_from_json(complex, &std::fs::read_to_string(path).map_err(|e| io_err(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::gen_disk;

    #[test]
    fn truncated_file_reports_position() {
        let err = read_off("OFF\n3 1 0\n0 0 0\n1 0 0\n").unwrap_err();
        match err {
            MeshIoError::Parse { line, column, .. } => assert_eq!((line, column), (4, 6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_token_column() {
        let err = read_off("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n").unwrap_err();
        match err {
            MeshIoError::Parse { line, column, .. } => assert_eq!((line, column), (4, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundary_marks_round_trip() {
        let d = gen_disk(2, 6, 1.0).unwrap();
        let marks = BoundaryMarks::whole_boundary(&d.complex, "rim");
        assert_eq!(marks.edges.len(), 6);
        let back = BoundaryMarks::from_json(&d.complex, &marks.to_json()).unwrap();
        assert_eq!(back, marks);
        let bad = r#"{"vertices": [[0, "center"]]}"#;
        assert!(matches!(BoundaryMarks::from_json(&d.complex, bad), Err(MeshIoError::Validation(_))));
    }
}
