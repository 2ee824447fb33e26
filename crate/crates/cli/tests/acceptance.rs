//! Runs the cookbook and prints one PASS/FAIL line per acceptance criterion.
//! Exits 1 if any criterion fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use l2hodge::complex::{
    gen_annulus, gen_closed_surface, gen_cylinder, gen_disk, gen_graded_annulus, gen_log_annulus, gen_pants,
    gen_torus, Surface,
};
use l2hodge_cli::config::Scenario;
use l2hodge_cli::report::{emit, Format, Report, Series};
use l2hodge_cli::scenarios;

fn cookbook() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../cookbook")
}

struct Run {
    report: Report,
    series: Vec<Series>,
    seconds: f64,
}

fn run(name: &str) -> Result<Run, String> {
    let path = cookbook().join(format!("{name}.toml"));
    let scenario = Scenario::from_file(&path).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (report, series) = scenarios::run(&scenario);
    Ok(Run { report, series, seconds: start.elapsed().as_secs_f64() })
}

fn describe(r: &Run) -> String {
    let failed: Vec<String> = r
        .report
        .failed()
        .map(|c| format!("{} (expected {}, got {})", c.name, c.expected, c.actual))
        .collect();
    if failed.is_empty() {
        format!("{} ok", r.report.scenario)
    } else {
        format!("{} failed: {}", r.report.scenario, failed.join("; "))
    }
}

fn series_value(r: &Run, series: &str, column: &str) -> Option<f64> {
    let s = r.series.iter().find(|s| s.name == series)?;
    let c = s.columns.iter().position(|x| x == column)?;
    s.rows.first().map(|row| row[c])
}

/// Runs the named scenarios; passes when every report passes and `extra`
/// accepts the runs.
fn criterion(
    runs: &mut BTreeMap<String, Run>,
    names: &[&str],
    extra: impl Fn(&BTreeMap<String, Run>) -> Result<String, String>,
) -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for &name in names {
        if !runs.contains_key(name) {
            match run(name) {
                Ok(r) => {
                    runs.insert(name.to_string(), r);
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("{name}: {e}"));
                    continue;
                }
            }
        }
        let r = &runs[name];
        ok &= r.report.pass;
        notes.push(describe(r));
    }
    if ok {
        match extra(runs) {
            Ok(msg) if !msg.is_empty() => notes.push(msg),
            Ok(_) => {}
            Err(msg) => {
                ok = false;
                notes.push(msg);
            }
        }
    }
    (ok, notes.join(", "))
}

fn none(_: &BTreeMap<String, Run>) -> Result<String, String> {
    Ok(String::new())
}

fn generated_meshes() -> Vec<(String, Surface)> {
    let mut out = Vec::new();
    let mut add = |name: &str, s: Result<Surface, l2hodge::complex::ComplexError>| match s {
        Ok(s) => out.push((name.to_string(), s)),
        Err(e) => panic!("{name}: {e}"),
    };
    for g in 0..=3 {
        add(&format!("closed_g{g}"), gen_closed_surface(g, 2));
    }
    add("torus", gen_torus(8));
    add("disk", gen_disk(4, 16, 1.0));
    add("annulus", gen_annulus(4, 24, 1.0, 2.0));
    add("log_annulus", gen_log_annulus(0.1, 1.0, 10, 20, true));
    add("graded_annulus", gen_graded_annulus(1.0 / 16.0, 1.0, 4f64.ln() / 15.0));
    add("cylinder", gen_cylinder(8, 16, 2.0, 0.5));
    add("pants", gen_pants(3));
    out
}

fn main() -> ExitCode {
    let mut runs = BTreeMap::new();
    let mut lines: Vec<(bool, String)> = Vec::new();

    lines.push(criterion(&mut runs, &["hodge_sphere", "hodge_torus", "hodge_genus2"], |runs| {
        let names = ["hodge_sphere", "hodge_torus", "hodge_genus2"];
        let total: f64 = names.iter().map(|n| runs[*n].seconds).sum();
        let small: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| series_value(&runs[*n], "mesh", "triangles").unwrap_or(0.0) < 200.0)
            .collect();
        if !small.is_empty() {
            return Err(format!("fewer than 200 triangles: {small:?}"));
        }
        if total >= 30.0 {
            return Err(format!("runtime {total:.1} s"));
        }
        Ok(format!("runtime {total:.2} s"))
    }));

    lines.push(criterion(&mut runs, &["hodge_sphere", "hodge_torus", "hodge_genus2", "hodge_annulus", "hodge_pants"], |_| {
        let meshes = generated_meshes();
        let bad: Vec<&str> = meshes
            .iter()
            .filter(|(_, s)| {
                let d0 = s.complex.coboundary(0).expect("d0");
                let d1 = s.complex.coboundary(1).expect("d1");
                !d1.mul(&d0).is_zero_matrix()
            })
            .map(|(n, _)| n.as_str())
            .collect();
        if bad.is_empty() {
            Ok(format!("d1 d0 = 0 on {} generated meshes", meshes.len()))
        } else {
            Err(format!("d1 d0 != 0 on {bad:?}"))
        }
    }));

    lines.push(criterion(&mut runs, &["conformal_torus"], none));
    lines.push(criterion(&mut runs, &["cutoff"], none));
    lines.push(criterion(&mut runs, &["lambda0_sigma"], none));
    lines.push(criterion(&mut runs, &["hardy_3_1", "hardy_5_1", "hardy_5_2"], none));
    lines.push(criterion(&mut runs, &["gap_5_1", "gap_3_0", "dx_5_1", "dx_3_0"], none));
    lines.push(criterion(&mut runs, &["primitive_5_1", "primitive_3_1"], none));
    lines.push(criterion(&mut runs, &["ends_flat2d", "ends_radial3d"], none));
    lines.push(criterion(&mut runs, &["litam_radial3d", "litam_cosh", "litam_sigma"], none));
    lines.push(criterion(&mut runs, &["lott_torus", "lott_sphere"], none));
    lines.push(criterion(&mut runs, &["vanish_5_1"], none));

    let determinism = (|| -> Result<String, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut entries: Vec<_> = std::fs::read_dir(cookbook())
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        entries.sort();
        for path in &entries {
            let scenario = Scenario::from_file(path).map_err(|e| e.to_string())?;
            let mut outputs = Vec::new();
            for pass in 0..2 {
                let sub = dir.path().join(pass.to_string());
                let (mut report, series) = scenarios::run(&scenario);
                let files = emit(&sub, &mut report, &series, Format::Both).map_err(|e| e.to_string())?;
                let bytes: Vec<(String, Vec<u8>)> = files
                    .iter()
                    .filter(|f| !f.to_string_lossy().ends_with(".meta.json"))
                    .map(|f| (f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(f).unwrap()))
                    .collect();
                outputs.push(bytes);
            }
            if outputs[0] != outputs[1] {
                return Err(format!("{} differs between runs", scenario.name));
            }
        }
        Ok(format!("{} scenarios reproduce byte-identical reports", entries.len()))
    })();
    lines.push(match determinism {
        Ok(m) => (true, m),
        Err(m) => (false, m),
    });

    let titles = [
        "Hodge theorem on closed surfaces",
        "exactness and decomposition",
        "conformal invariance",
        "cutoff energy",
        "bottom of the spectrum of the cusp surface",
        "Hardy inequality",
        "gap and Donnelly-Xavier inequalities",
        "flow primitive",
        "capacity and parabolicity",
        "Li-Tam harmonic functions",
        "Lott dimension bounds",
        "vanishing and middle-degree growth",
        "determinism",
    ];
    let mut all = true;
    for (i, ((ok, note), title)) in lines.iter().zip(titles).enumerate() {
        all &= ok;
        println!("{} criterion {:2} {title}: {note}", if *ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
