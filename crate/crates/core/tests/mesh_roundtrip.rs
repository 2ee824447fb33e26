use l2hodge::complex::{gen_closed_surface, gen_pants};
use l2hodge::mesh_io::{load_metric, load_off, metric_from_json, metric_to_json, read_off, save_metric, save_off, write_off, MeshIoError};
use l2hodge::metric::MetricField;

#[test]
fn torus_round_trip_is_lossless() {
    let s = gen_closed_surface(1, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("torus.off");
    let metric_path = dir.path().join("torus.metric.json");
    let metric = MetricField::from_surface(&s).unwrap().conformal_rescale(&s.complex, &vec![0.1; s.complex.n_triangles()]).unwrap();
    save_off(&mesh, &s.complex, &s.coords).unwrap();
    save_metric(&metric_path, &s.complex, &metric).unwrap();
    let (c, coords) = load_off(&mesh).unwrap();
    assert_eq!(c.triangles(), s.complex.triangles());
    assert_eq!(c.edges(), s.complex.edges());
    assert_eq!(c.oriented_triangles(), s.complex.oriented_triangles());
    assert_eq!(coords, s.coords);
    assert_eq!(load_metric(&metric_path, &c).unwrap(), metric);
}

#[test]
fn written_text_is_stable() {
    let s = gen_pants(3).unwrap();
    let text = write_off(&s.complex, &s.coords).unwrap();
    let (c, coords) = read_off(&text).unwrap();
    assert_eq!(write_off(&c, &coords).unwrap(), text);
}

#[test]
fn truncated_file_is_a_parse_error() {
    let s = gen_closed_surface(1, 1).unwrap();
    let text = write_off(&s.complex, &s.coords).unwrap();
    let cut = &text[..text.len() * 2 / 3];
    assert!(matches!(read_off(cut), Err(MeshIoError::Parse { .. })));
}

#[test]
fn negative_length_is_a_validation_error() {
    let s = gen_closed_surface(1, 1).unwrap();
    let m = MetricField::from_surface(&s).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&metric_to_json(&s.complex, &m)).unwrap();
    v["edges"][3][2] = serde_json::json!(-0.5);
    let err = metric_from_json(&s.complex, &v.to_string()).unwrap_err();
    assert!(matches!(err, MeshIoError::Validation(_)), "{err}");
}
