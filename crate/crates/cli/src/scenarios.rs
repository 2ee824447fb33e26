//! One runner per scenario kind. Each produces named checks and plot-ready
//! series; a computation that fails becomes a failed check, not an abort.

use std::f64::consts::{LN_2, PI};

use l2hodge::complex::{
    gen_annulus, gen_closed_surface, gen_cylinder, gen_disk, gen_graded_annulus, gen_pants, Surface,
};
use l2hodge::ends::{
    analyze_end, capacity_curve, classify_parabolic, detect_ends, hop_distance, li_tam_harmonic, radial_exhaustion,
    Parabolicity, WeightedGraph,
};
use l2hodge::hodge::{
    conformal_trials, cutoff_energy, decomposition_trials, harmonic_basis, lott_dimension_check, BoundaryCondition,
    HarmonicPolicy,
};
use l2hodge::metric::{mass_matrices, MetricField};
use l2hodge::warped::{
    donnelly_xavier_check, flow_primitive, gap_check, hardy_check, pullback_check, sample_closed_form,
    vanishing_check, InequalityReport, VIOLATION_TOL,
};
use l2hodge::warped::{mode_lambda0, ModeProblem, RadialBc};

use crate::config::{self, Kind, OpenSurface, Params, Scenario, Split, TwoEndedModel};
use crate::report::{Check, Report, Series};

type Run = Result<(), String>;

struct Sink {
    checks: Vec<Check>,
    series: Vec<Series>,
}

impl Sink {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs a validated scenario. The report's `pass` is the conjunction of its
/// checks.
pub fn run(s: &Scenario) -> (Report, Vec<Series>) {
    let mut sink = Sink { checks: vec![], series: vec![] };
    let seed = s.seed.unwrap_or(0);
    let outcome = match (&s.params, s.kind) {
        (Params::HodgeClosed(p), _) => hodge_closed(p, seed, &mut sink),
        (Params::HodgeBoundary(p), _) => hodge_boundary(p, seed, &mut sink),
        (Params::Conformal(p), _) => conformal(p, seed, &mut sink),
        (Params::Cutoff(p), _) => cutoff(p, &mut sink),
        (Params::Ends(p), _) => ends(p, &mut sink),
        (Params::LiTam(p), _) => li_tam(p, &mut sink),
        (Params::Lambda0(p), _) => lambda0(p, &mut sink),
        (Params::Warped(p), Kind::WarpedGap) => warped_inequality(p, seed, Inequality::Gap, &mut sink),
        (Params::Warped(p), Kind::WarpedHardy) => warped_inequality(p, seed, Inequality::Hardy, &mut sink),
        (Params::Warped(p), Kind::DxCheck) => warped_inequality(p, seed, Inequality::DonnellyXavier, &mut sink),
        (Params::Warped(p), _) => warped_primitive(p, seed, &mut sink),
        (Params::WarpedVanish(p), _) => warped_vanish(p, &mut sink),
        (Params::Lott(p), _) => lott(p, &mut sink),
    };
    if let Err(message) = outcome {
        sink.check(Check::error("computation", message));
    }
    let kind = serde_json::to_value(s.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let params = serde_json::to_value(&s.params).unwrap_or(serde_json::Value::Null);
    let report = Report::new(&s.name, &kind, s.seed, params, sink.checks);
    (report, sink.series)
}

fn policy(gap_min: f64) -> HarmonicPolicy {
    HarmonicPolicy { gap_min, ..Default::default() }
}

fn metric_of(surface: &Surface) -> Result<MetricField, String> {
    MetricField::from_surface(surface).map_err(err)
}

fn hodge_closed(p: &config::HodgeClosed, seed: u64, out: &mut Sink) -> Run {
    let surface = gen_closed_surface(p.genus, p.refinement).map_err(err)?;
    let complex = &surface.complex;
    let bundle = mass_matrices(complex, &metric_of(&surface)?).map_err(err)?;
    let mut mesh = Series::new("mesh", &["vertices", "edges", "triangles"]);
    mesh.push(vec![complex.n_vertices() as f64, complex.n_edges() as f64, complex.n_triangles() as f64]);
    out.series.push(mesh);
    out.check(Check::holds("d1_d0_is_zero", bundle.d(1).mul(bundle.d(0)).is_zero_matrix()));
    let betti = complex.betti(false).map_err(err)?;
    out.check(Check::eq("betti", [1, 2 * p.genus, 1], betti));
    let pol = policy(p.gap_min);
    let mut spectrum = Series::new("spectrum", &["degree", "index", "eigenvalue"]);
    for k in 0..3 {
        let basis = harmonic_basis(&bundle, k, BoundaryCondition::None, &pol).map_err(err)?;
        out.check(Check::eq(format!("harmonic_dim_{k}"), betti[k], basis.dim()));
        out.check(Check::ge(format!("gap_{k}"), p.gap_min, basis.gap));
        for (i, v) in basis.eigenvalues.iter().enumerate() {
            spectrum.push(vec![k as f64, i as f64, *v]);
        }
        if k == 1 {
            let t = decomposition_trials(&bundle, 1, BoundaryCondition::None, &basis, p.samples, seed).map_err(err)?;
            out.check(Check::le("decomposition_residual", p.decomposition_tol, t.max_residual));
            out.check(Check::le("decomposition_orthogonality", p.decomposition_tol, t.max_orthogonality));
        }
    }
    out.series.push(spectrum);
    Ok(())
}

fn open_surface(kind: OpenSurface, r: usize) -> Result<Surface, String> {
    match kind {
        OpenSurface::Disk => gen_disk(2 * r, 8 * r, 1.0),
        OpenSurface::Annulus => gen_annulus(2 * r, 12 * r, 1.0, 2.0),
        OpenSurface::Cylinder => gen_cylinder(4 * r, 8 * r, 2.0, 0.5),
        OpenSurface::Pants => gen_pants(r),
    }
    .map_err(err)
}

fn hodge_boundary(p: &config::HodgeBoundary, seed: u64, out: &mut Sink) -> Run {
    let surface = open_surface(p.surface, p.refinement)?;
    let complex = &surface.complex;
    let bundle = mass_matrices(complex, &metric_of(&surface)?).map_err(err)?;
    out.check(Check::holds("d1_d0_is_zero", bundle.d(1).mul(bundle.d(0)).is_zero_matrix()));
    let pol = policy(p.gap_min);
    let mut spectrum = Series::new("spectrum", &["relative", "degree", "index", "eigenvalue"]);
    for (bc, tag) in [(BoundaryCondition::Absolute, "absolute"), (BoundaryCondition::Relative, "relative")] {
        let rel = bc == BoundaryCondition::Relative;
        let betti = complex.betti(rel).map_err(err)?;
        for k in 0..3 {
            let basis = harmonic_basis(&bundle, k, bc, &pol).map_err(err)?;
            out.check(Check::eq(format!("{tag}_harmonic_dim_{k}"), betti[k], basis.dim()));
            out.check(Check::ge(format!("{tag}_gap_{k}"), p.gap_min, basis.gap));
            for (i, v) in basis.eigenvalues.iter().enumerate() {
                spectrum.push(vec![f64::from(u8::from(rel)), k as f64, i as f64, *v]);
            }
            if k == 1 {
                let t = decomposition_trials(&bundle, 1, bc, &basis, p.samples, seed).map_err(err)?;
                out.check(Check::le(format!("{tag}_decomposition_residual"), p.decomposition_tol, t.max_residual));
                out.check(Check::le(
                    format!("{tag}_decomposition_orthogonality"),
                    p.decomposition_tol,
                    t.max_orthogonality,
                ));
            }
        }
    }
    out.series.push(spectrum);
    Ok(())
}

fn conformal(p: &config::Conformal, seed: u64, out: &mut Sink) -> Run {
    let surface = gen_closed_surface(p.genus, p.refinement).map_err(err)?;
    let metric = metric_of(&surface)?;
    let trials =
        conformal_trials(&surface.complex, &metric, p.samples, p.amplitude, seed, &HarmonicPolicy::default())
            .map_err(err)?;
    let mut series = Series::new("rescalings", &["sample", "mass_difference", "projector_distance"]);
    for (i, t) in trials.iter().enumerate() {
        series.push(vec![i as f64, t.mass_difference, t.projector_distance]);
        out.check(Check::eq(format!("dims_{i}"), [2 * p.genus; 2], t.dims));
    }
    let worst = |f: fn(&l2hodge::hodge::ConformalComparison) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    out.check(Check::eq("samples", p.samples, trials.len()));
    out.check(Check::le("mass_difference", p.mass_tol, worst(|t| t.mass_difference)));
    out.check(Check::le("projector_distance", p.projector_tol, worst(|t| t.projector_distance)));
    out.series.push(series);
    Ok(())
}

fn cutoff(p: &config::Cutoff, out: &mut Sink) -> Run {
    let mut series = Series::new("energy", &["n", "energy", "exact", "relative_error", "rings_per_decade"]);
    let mut energies = Vec::new();
    for &n in &p.n_values {
        let rings = (p.rings_per_decade * n.ln() / std::f64::consts::LN_10).ceil();
        let ds = n.ln() / rings;
        let surface = gen_graded_annulus(1.0 / (n * n), 1.0, ds).map_err(err)?;
        let bundle = mass_matrices(&surface.complex, &metric_of(&surface)?).map_err(err)?;
        let e = cutoff_energy(&bundle, &surface.coords, [0.0; 3], n).map_err(err)?;
        out.check(Check::within(format!("energy_n{n}"), e.exact, e.energy, p.tolerance));
        out.check(Check::ge(format!("rings_per_decade_n{n}"), 8.0, e.rings_per_decade));
        series.push(vec![n, e.energy, e.exact, e.relative_error, e.rings_per_decade]);
        energies.push(e.energy);
    }
    out.check(Check::holds("strictly_decreasing", energies.windows(2).all(|w| w[1] < w[0])));
    out.series.push(series);
    Ok(())
}

fn capacity_series(radii: &[f64], caps: &[f64], exact: impl Fn(f64) -> f64) -> Series {
    let mut s = Series::new("capacity", &["radius", "capacity", "exact"]);
    for (&r, &c) in radii.iter().zip(caps) {
        s.push(vec![r, c, exact(r)]);
    }
    s
}

fn ends(p: &config::Ends, out: &mut Sink) -> Run {
    let rmax = *p.radii.last().expect("validated radii");
    let (caps, expected, exact): (Vec<f64>, Parabolicity, Box<dyn Fn(f64) -> f64>) = match p.model {
        config::EndModel::Flat2d => {
            let ds = LN_2 / p.resolution as f64;
            let steps = ((rmax / 0.5).ln() / ds - 1e-9).ceil();
            let surface = gen_graded_annulus(0.5, 0.5 * (steps * ds).exp(), ds).map_err(err)?;
            let r = radial_exhaustion(&surface.coords, [0.0; 3]);
            let core: Vec<usize> = (0..surface.complex.n_triangles())
                .filter(|&t| surface.complex.triangles()[t].iter().all(|&v| r[v] <= 1.0 + 1e-9))
                .collect();
            let found = detect_ends(&surface.complex, &core).map_err(err)?;
            out.check(Check::eq("end_count", 1, found.len()));
            let bundle = mass_matrices(&surface.complex, &metric_of(&surface)?).map_err(err)?;
            let graph = WeightedGraph::from_bundle(&bundle, r).map_err(err)?;
            let rep = analyze_end(&graph, &found[0], &p.radii).map_err(err)?;
            (rep.capacities, Parabolicity::Parabolic, Box::new(|r: f64| 2.0 * PI / r.ln()))
        }
        config::EndModel::Radial3d => {
            let cells = ((rmax - 1.0) * p.resolution as f64).ceil() as usize;
            let graph = WeightedGraph::radial_chain(|t| 4.0 * PI * t * t, 1.0, rmax, cells).map_err(err)?;
            let end: Vec<usize> = (1..graph.n_vertices()).collect();
            let caps = capacity_curve(&graph, &[0], &end, &p.radii).map_err(err)?;
            (caps, Parabolicity::NonParabolic, Box::new(|r: f64| 4.0 * PI / (1.0 - 1.0 / r)))
        }
        config::EndModel::Funnel => {
            let cells = (rmax * p.resolution as f64).ceil() as usize;
            let graph = WeightedGraph::radial_chain(|t| 2.0 * PI * t.exp(), 0.0, rmax, cells).map_err(err)?;
            let end: Vec<usize> = (1..graph.n_vertices()).collect();
            let caps = capacity_curve(&graph, &[0], &end, &p.radii).map_err(err)?;
            (caps, Parabolicity::NonParabolic, Box::new(|r: f64| 2.0 * PI / (1.0 - (-r).exp())))
        }
    };
    for (&r, &c) in p.radii.iter().zip(&caps) {
        out.check(Check::within(format!("capacity_r{r}"), exact(r), c, p.tolerance));
    }
    out.check(Check::holds("non_increasing", caps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10))));
    let cls = classify_parabolic(&p.radii, &caps, None, None);
    out.check(Check::eq("classification", expected, cls.classification));
    out.series.push(capacity_series(&p.radii, &caps, exact));
    Ok(())
}

fn li_tam(p: &config::LiTam, out: &mut Sink) -> Run {
    let rmax = *p.radii.last().expect("validated radii");
    let weight: fn(f64) -> f64 = match p.model {
        TwoEndedModel::Radial3d => |t| 4.0 * PI * (1.0 + t.abs()).powi(2),
        TwoEndedModel::Cosh => |t| 4.0 * PI * t.cosh().powi(2),
        TwoEndedModel::Sigma => |t| 2.0 * PI * t.exp(),
        TwoEndedModel::Flat2d => |_| 2.0 * PI,
    };
    let cells = (2.0 * rmax / p.dt).round() as usize;
    let graph = WeightedGraph::radial_chain(weight, -rmax, rmax, cells).map_err(err)?;
    let h = 2.0 * rmax / cells as f64;
    let t: Vec<f64> = (0..=cells).map(|i| -rmax + i as f64 * h).collect();
    let plus: Vec<usize> = (0..t.len()).filter(|&i| t[i] > p.core).collect();
    let minus: Vec<usize> = (0..t.len()).filter(|&i| t[i] < -p.core).collect();
    let rep = li_tam_harmonic(&graph, &plus, &minus, &p.radii, p.tol).map_err(err)?;
    out.check(Check::le("laplacian_residual", p.residual_tol, rep.laplacian_residual));
    out.check(Check::holds("max_principle", rep.max_principle));
    out.check(Check::holds("energies_non_increasing", rep.energies_non_increasing()));
    match p.model {
        TwoEndedModel::Radial3d => {
            out.check(Check::ge("oscillation", p.min_oscillation, rep.final_oscillation()));
            out.check(Check::le("core_change", p.tol, rep.core_change));
        }
        TwoEndedModel::Cosh => {
            let sup = t.iter().zip(&rep.values).map(|(x, u)| (u - x.tanh()).abs()).fold(0.0, f64::max);
            out.check(Check::le("sup_distance_to_tanh", p.limit_tol, sup));
            out.check(Check::le("core_change", p.tol, rep.core_change));
        }
        TwoEndedModel::Sigma | TwoEndedModel::Flat2d => {
            out.check(Check::holds("degenerating", rep.degenerating));
            if p.model == TwoEndedModel::Sigma {
                out.check(Check::le("oscillation", p.degenerate_oscillation, rep.final_oscillation()));
            }
        }
    }
    let mut limit = Series::new("limit", &["t", "u"]);
    for (x, u) in t.iter().zip(&rep.values) {
        limit.push(vec![*x, *u]);
    }
    let mut radii = Series::new("radii", &["radius", "energy", "oscillation"]);
    for ((r, e), o) in p.radii.iter().zip(&rep.energies).zip(&rep.oscillation) {
        radii.push(vec![*r, *e, *o]);
    }
    out.series.extend([limit, radii]);
    Ok(())
}

fn lambda0(p: &config::Lambda0, out: &mut Sink) -> Run {
    let mut series = Series::new("lambda0", &["length", "lambda0"]);
    let mut values = Vec::new();
    for &l in &p.lengths {
        let problem = ModeProblem::new(2, 0, l, p.dr, vec![0.0], RadialBc::CompactSupport).map_err(err)?;
        let v = mode_lambda0(&problem).map_err(err)?;
        out.check(Check::ge(format!("floor_l{l}"), p.floor, v));
        series.push(vec![l, v]);
        values.push(v);
    }
    out.check(Check::between("lambda0_at_largest_length", p.lower, p.upper, *values.last().expect("validated")));
    out.check(Check::holds("non_increasing", values.windows(2).all(|w| w[1] <= w[0] + VIOLATION_TOL)));
    out.series.push(series);
    Ok(())
}

#[derive(Clone, Copy)]
enum Inequality {
    Gap,
    Hardy,
    DonnellyXavier,
}

fn inequality_checks(rep: &InequalityReport, out: &mut Sink) {
    out.check(Check::eq("violations", 0, rep.violations));
    out.check(Check::ge("min_margin", -VIOLATION_TOL, rep.min_margin));
    if let Some(e) = rep.eigen_min {
        out.check(Check::ge("eigen_min", rep.constant - VIOLATION_TOL, e));
    }
    if let Some(r) = rep.identity_residual {
        out.check(Check::le("identity_residual", VIOLATION_TOL, r));
    }
    let mut s = Series::new("summary", &["constant", "samples", "violations", "min_margin", "max_ratio"]);
    s.push(vec![rep.constant, rep.samples as f64, rep.violations as f64, rep.min_margin, rep.max_ratio]);
    out.series.push(s);
}

fn warped_inequality(p: &config::Warped, seed: u64, which: Inequality, out: &mut Sink) -> Run {
    let problem = || ModeProblem::new(p.n, p.k, p.length, p.dr, p.modes.clone(), RadialBc::CompactSupport);
    let rep = match which {
        Inequality::Gap => gap_check(&problem().map_err(err)?, p.samples, seed),
        Inequality::Hardy => hardy_check(p.n, p.k, p.length, p.dr, p.samples, seed),
        Inequality::DonnellyXavier => donnelly_xavier_check(&problem().map_err(err)?, p.samples, seed),
    }
    .map_err(err)?;
    out.check(Check::eq("sample_count", p.samples, rep.samples));
    inequality_checks(&rep, out);
    Ok(())
}

fn warped_primitive(p: &config::Warped, seed: u64, out: &mut Sink) -> Run {
    let problem = ModeProblem::new(p.n, p.k, p.length, p.dr, p.modes.clone(), RadialBc::CompactSupport).map_err(err)?;
    let mut series = Series::new("primitives", &["sample", "mu", "residual", "norm_ratio", "bound"]);
    let (mut residual, mut excess, mut pullback) = (0.0f64, f64::NEG_INFINITY, true);
    let steps = [0, problem.cells / 8, problem.cells / 4];
    for s in 0..p.samples {
        let mu = p.modes[s % p.modes.len()];
        let alpha = sample_closed_form(&problem, mu, seed.wrapping_add(s as u64)).map_err(err)?;
        let (_, rep) = flow_primitive(&problem, &alpha).map_err(err)?;
        residual = residual.max(rep.residual);
        excess = excess.max(rep.norm_ratio - rep.bound);
        pullback &= pullback_check(&problem, &alpha, &steps).holds(1e-9);
        series.push(vec![s as f64, mu, rep.residual, rep.norm_ratio, rep.bound]);
    }
    out.check(Check::le("residual", p.tol, residual));
    out.check(Check::le("norm_ratio_minus_bound", p.tol, excess));
    out.check(Check::holds("pullback_decay", pullback));
    out.series.push(series);
    Ok(())
}

fn warped_vanish(p: &config::WarpedVanish, out: &mut Sink) -> Run {
    let mut bottoms = Series::new("bottom", &["length", "bottom"]);
    for &l in &p.lengths {
        let problem = ModeProblem::new(p.n, p.k, l, p.dr, p.modes.clone(), p.bc).map_err(err)?;
        let rep = vanishing_check(&problem, 1, p.threshold).map_err(err)?;
        out.check(Check::ge(format!("bottom_l{l}"), p.threshold, rep.bottom));
        if let Some(b) = rep.bound {
            out.check(Check::ge(format!("bound_l{l}"), b - VIOLATION_TOL, rep.bottom));
        }
        bottoms.push(vec![l, rep.bottom]);
    }
    out.series.push(bottoms);
    if !p.growth_mode_counts.is_empty() {
        let mut growth = Series::new("growth", &["modes", "near_kernel"]);
        let mut counts = Vec::new();
        for &m in &p.growth_mode_counts {
            let modes: Vec<f64> = (0..m).map(|j| (j * j) as f64).collect();
            let length = *p.lengths.last().expect("validated");
            let problem = ModeProblem::new(2, 1, length, p.dr, modes, RadialBc::AbsoluteAt0).map_err(err)?;
            let rep = vanishing_check(&problem, 2, p.kernel_threshold).map_err(err)?;
            growth.push(vec![m as f64, rep.near_kernel_count as f64]);
            counts.push(rep.near_kernel_count);
        }
        out.check(Check::holds("middle_degree_growth", counts.windows(2).all(|w| w[1] > w[0])));
        out.series.push(growth);
    }
    Ok(())
}

fn lott(p: &config::Lott, out: &mut Sink) -> Run {
    let genus = match p.split {
        Split::Torus => 1,
        Split::Sphere => 0,
    };
    let surface = gen_closed_surface(genus, p.refinement).map_err(err)?;
    let complex = &surface.complex;
    let dist = hop_distance(complex, &[0]);
    let k_tris: Vec<usize> = (0..complex.n_triangles())
        .filter(|&t| complex.triangles()[t].iter().all(|&v| dist[v] <= p.core_hops))
        .collect();
    let rep = lott_dimension_check(complex, &metric_of(&surface)?, &k_tris, &HarmonicPolicy::default()).map_err(err)?;
    let mut series = Series::new(
        "dimensions",
        &["k", "dim_m", "dim_abs_omega", "dim_rel_omega", "betti_k", "betti_k_rel", "betti_k_plus_1_rel"],
    );
    for d in &rep.degrees {
        let k = d.k;
        out.check(Check::le(format!("relative_bound_{k}"), d.relative_bound as f64, d.dim_m as f64));
        out.check(Check::le(format!("absolute_bound_{k}"), d.absolute_bound as f64, d.dim_m as f64));
        out.check(Check::le(format!("restriction_bound_{k}"), d.restriction_bound as f64, d.dim_abs_omega as f64));
        series.push(
            [k, d.dim_m, d.dim_abs_omega, d.dim_rel_omega, d.betti_k, d.betti_k_rel, d.betti_k_plus_1_rel]
                .iter()
                .map(|&x| x as f64)
                .collect(),
        );
    }
    if p.expect_equality {
        out.check(Check::holds("equality", rep.equality()));
    }
    out.series.push(series);
    Ok(())
}
