use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use l2hodge::complex::{gen_annulus, gen_closed_surface, gen_cylinder, gen_disk, gen_pants, Surface};
use l2hodge::ends::{analyze_end, detect_ends, radial_exhaustion, WeightedGraph};
use l2hodge::hodge::{harmonic_basis, BoundaryCondition, HarmonicPolicy};
use l2hodge::mesh_io::{load_metric, load_off, save_metric, save_off, BoundaryMarks};
use l2hodge::metric::{mass_matrices, MetricField};
use l2hodge::warped::{mode_spectrum, ModeProblem, RadialBc};
use l2hodge_cli::config::Scenario;
use l2hodge_cli::report::{emit, Format};
use l2hodge_cli::scenarios;

#[derive(Parser)]
#[command(name = "l2hodge", version, about = "Discrete L2 Hodge theory experiments")]
struct Cli {
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "both")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceKind {
    Closed,
    Disk,
    Annulus,
    Cylinder,
    Pants,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    CompactSupport,
    RelativeAt0,
    AbsoluteAt0,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh; writes `<surface>.off` plus metric and boundary sidecars.
    Gen {
        surface: SurfaceKind,
        #[arg(long, default_value_t = 2)]
        refinement: usize,
        #[arg(long, default_value_t = 1)]
        genus: usize,
    },
    /// Betti numbers over GF(p).
    Betti { mesh: PathBuf },
    /// Harmonic dimensions and spectral gaps in every degree.
    Hodge {
        mesh: PathBuf,
        #[arg(long)]
        metric: Option<PathBuf>,
        #[arg(long, default_value_t = 100.0)]
        gap_min: f64,
    },
    /// Capacity curves of the ends outside a ball around `center`.
    Ends {
        mesh: PathBuf,
        #[arg(long)]
        core_radius: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0,0")]
        center: Vec<f64>,
    },
    /// Bottom of the mode spectrum of a warped product.
    Warped {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 0.05)]
        dr: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4")]
        modes: Vec<f64>,
        #[arg(long, value_enum, default_value = "compact-support")]
        bc: Bc,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Scenario files.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Run a scenario and write its report; exit 1 if a check fails.
    Run { config: PathBuf },
}

enum Failure {
    Usage(String),
    Checks,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn print(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
}

fn load(mesh: &Path, metric: Option<&Path>) -> Result<(l2hodge::complex::SimplicialComplex, Vec<[f64; 3]>, MetricField), Failure> {
    let (complex, coords) = load_off(mesh)?;
    let m = match metric {
        Some(p) => load_metric(p, &complex)?,
        None => MetricField::from_embedding(&complex, &coords)?,
    };
    Ok((complex, coords, m))
}

fn generate(kind: SurfaceKind, r: usize, genus: usize) -> Result<(Surface, &'static str), Failure> {
    Ok(match kind {
        SurfaceKind::Closed => (gen_closed_surface(genus, r)?, "closed"),
        SurfaceKind::Disk => (gen_disk(2 * r, 8 * r, 1.0)?, "disk"),
        SurfaceKind::Annulus => (gen_annulus(2 * r, 12 * r, 1.0, 2.0)?, "annulus"),
        SurfaceKind::Cylinder => (gen_cylinder(4 * r, 8 * r, 2.0, 0.5)?, "cylinder"),
        SurfaceKind::Pants => (gen_pants(r)?, "pants"),
    })
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen { surface, refinement, genus } => {
            let (s, name) = generate(*surface, *refinement, *genus)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            let mesh = dir.join(format!("{name}.off"));
            save_off(&mesh, &s.complex, &s.coords)?;
            let metric = dir.join(format!("{name}.metric.json"));
            save_metric(&metric, &s.complex, &MetricField::from_surface(&s)?)?;
            let mut files = vec![mesh.display().to_string(), metric.display().to_string()];
            if !s.complex.is_closed() {
                let marks = dir.join(format!("{name}.marks.json"));
                std::fs::write(&marks, BoundaryMarks::whole_boundary(&s.complex, "boundary").to_json())?;
                files.push(marks.display().to_string());
            }
            print(json!({
                "vertices": s.complex.n_vertices(),
                "triangles": s.complex.n_triangles(),
                "files": files,
            }));
        }
        Command::Betti { mesh } => {
            let (complex, _) = load_off(mesh)?;
            let relative = if complex.is_closed() { None } else { Some(complex.betti(true)?) };
            print(json!({
                "vertices": complex.n_vertices(),
                "edges": complex.n_edges(),
                "triangles": complex.n_triangles(),
                "euler_characteristic": complex.euler_characteristic(),
                "closed": complex.is_closed(),
                "betti": complex.betti(false)?,
                "betti_relative": relative,
            }));
        }
        Command::Hodge { mesh, metric, gap_min } => {
            let (complex, _, m) = load(mesh, metric.as_deref())?;
            let bundle = mass_matrices(&complex, &m)?;
            let policy = HarmonicPolicy { gap_min: *gap_min, ..Default::default() };
            let bcs: &[BoundaryCondition] = if complex.is_closed() {
                &[BoundaryCondition::None]
            } else {
                &[BoundaryCondition::Absolute, BoundaryCondition::Relative]
            };
            let mut rows = Vec::new();
            for &bc in bcs {
                for k in 0..3 {
                    let b = harmonic_basis(&bundle, k, bc, &policy)?;
                    rows.push(json!({
                        "degree": k,
                        "bc": bc,
                        "dim": b.dim(),
                        "betti": b.betti,
                        "gap": if b.gap.is_finite() { json!(b.gap) } else { json!(null) },
                        "eigenvalues": b.eigenvalues,
                    }));
                }
            }
            print(json!({ "harmonic": rows }));
        }
        Command::Ends { mesh, core_radius, radii, center } => {
            let c: [f64; 3] = center.as_slice().try_into().map_err(|_| Failure::Usage("center needs 3 values".into()))?;
            let (complex, coords, m) = load(mesh, None)?;
            let r = radial_exhaustion(&coords, c);
            let core: Vec<usize> = (0..complex.n_triangles())
                .filter(|&t| complex.triangles()[t].iter().all(|&v| r[v] <= core_radius * (1.0 + 1e-9)))
                .collect();
            let ends = detect_ends(&complex, &core)?;
            let graph = WeightedGraph::from_bundle(&mass_matrices(&complex, &m)?, r)?;
            let reports = ends.iter().map(|e| analyze_end(&graph, e, radii)).collect::<Result<Vec<_>, _>>()?;
            print(json!({ "ends": reports }));
        }
        Command::Warped { n, k, length, dr, modes, bc, count } => {
            let bc = match bc {
                Bc::CompactSupport => RadialBc::CompactSupport,
                Bc::RelativeAt0 => RadialBc::RelativeAt0,
                Bc::AbsoluteAt0 => RadialBc::AbsoluteAt0,
            };
            let problem = ModeProblem::new(*n, *k, *length, *dr, modes.clone(), bc)?;
            let spec = mode_spectrum(&problem, *count)?;
            let rows: Vec<_> = spec.iter().map(|(mu, v)| json!({ "mu": mu, "eigenvalues": v })).collect();
            print(json!({ "n": n, "k": k, "length": length, "dr": problem.length / problem.cells as f64, "modes": rows }));
        }
        Command::Scenario { action: ScenarioAction::Run { config } } => {
            let mut scenario = Scenario::from_file(config)?;
            if cli.seed.is_some() {
                scenario.seed = cli.seed;
            }
            let dir = cli.out.clone().or_else(|| scenario.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let (mut report, series) = scenarios::run(&scenario);
            emit(&dir, &mut report, &series, cli.format)?;
            for c in report.failed() {
                eprintln!("FAIL {}: expected {} got {}", c.name, c.expected, c.actual);
            }
            println!("{} {}", if report.pass { "PASS" } else { "FAIL" }, report.scenario);
            if !report.pass {
                return Err(Failure::Checks);
            }
        }
    }
    Ok(())
}
