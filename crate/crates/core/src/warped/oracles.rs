use rand::Rng;
use serde::Serialize;

use super::WarpedError;

/// `e^{tilt r} Σ c_i φ((r - r_i) / s_i)` with the standard bump
/// `φ(x) = exp(-1 / (1 - x²))` on `|x| < 1`. Values and derivatives are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothProfile {
    pub terms: Vec<(f64, f64, f64)>,
    pub tilt: f64,
}

fn bump(x: f64) -> (f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - x * x;
    let v = (-1.0 / q).exp();
    (v, v * (-2.0 * x / (q * q)))
}

impl SmoothProfile {
    /// One to four bumps with centers and widths inside `[lo, hi]`.
    pub fn random<R: Rng>(rng: &mut R, lo: f64, hi: f64, tilt: f64) -> Self {
        let count = rng.gen_range(1..=4);
        let span = hi - lo;
        let terms = (0..count)
            .map(|_| {
                let width = rng.gen_range(0.05..=0.5) * span;
                let center = rng.gen_range(lo + width..=hi - width);
                (rng.gen_range(-1.0..1.0), center, width)
            })
            .collect();
        Self { terms, tilt }
    }

    /// A single bump filling `[lo, hi]`.
    pub fn broad(lo: f64, hi: f64, tilt: f64) -> Self {
        Self { terms: vec![(1.0, 0.5 * (lo + hi), 0.5 * (hi - lo))], tilt }
    }

    pub fn value(&self, r: f64) -> f64 {
        let s: f64 = self.terms.iter().map(|&(c, m, w)| c * bump((r - m) / w).0).sum();
        s * (self.tilt * r).exp()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let (mut s, mut ds) = (0.0, 0.0);
        for &(c, m, w) in &self.terms {
            let (v, dv) = bump((r - m) / w);
            s += c * v;
            ds += c * dv / w;
        }
        (self.tilt * s + ds) * (self.tilt * r).exp()
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.terms.iter().map(|&(_, m, w)| m - w).fold(f64::INFINITY, f64::min);
        let hi = self.terms.iter().map(|&(_, m, w)| m + w).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss–Legendre rule with panels no wider than `h`.
pub(crate) fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) / h).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        total += GL8.iter().map(|&(x, wt)| wt * f(mid + 0.5 * w * x)).sum::<f64>() * 0.5 * w;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGrid {
    pub t0: f64,
    pub t1: f64,
    pub points: usize,
}

/// Closed-form solution of `(w u')' = 0` sampled on a grid, with the
/// discrete residual of that equation as a consistency check.
#[derive(Debug, Clone, Serialize)]
pub struct OracleTable {
    pub name: String,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub weight: Vec<f64>,
    /// Largest interior `|(w u')'|` in flux-difference form, relative to
    /// `(w_{i+½} + w_{i-½}) max|u| / Δt²`.
    pub residual: f64,
}

/// Known harmonic functions of one-dimensional models:
///
/// * `sigma_harmonic`: `w = e^t`, `u = e^{-t}`
/// * `cosh_tanh`: `w = cosh² t`, `u = tanh t`
/// * `flat_log`: `w = 2πt`, `u = log t`
/// * `r3_capacity`: `w = 4πt²`, `u = 1/t`
pub fn analytic_oracles(name: &str, grid: OracleGrid) -> Result<OracleTable, WarpedError> {
    type Pair = (fn(f64) -> f64, fn(f64) -> f64);
    let (w, u): Pair = match name {
        "sigma_harmonic" => (|t: f64| t.exp(), |t: f64| (-t).exp()),
        "cosh_tanh" => (|t: f64| t.cosh().powi(2), |t: f64| t.tanh()),
        "flat_log" => (|t: f64| 2.0 * std::f64::consts::PI * t, |t: f64| t.ln()),
        "r3_capacity" => (|t: f64| 4.0 * std::f64::consts::PI * t * t, |t: f64| 1.0 / t),
        other => return Err(WarpedError::UnknownOracle(other.to_string())),
    };
    if grid.points < 3 || !(grid.t1 > grid.t0) {
        return Err(WarpedError::BadProblem(format!("oracle grid {grid:?}")));
    }
    if matches!(name, "flat_log" | "r3_capacity") && grid.t0 <= 0.0 {
        return Err(WarpedError::BadProblem(format!("{name} needs t0 > 0")));
    }
    let dt = (grid.t1 - grid.t0) / (grid.points - 1) as f64;
    let t: Vec<f64> = (0..grid.points).map(|i| grid.t0 + i as f64 * dt).collect();
    let uv: Vec<f64> = t.iter().map(|&x| u(x)).collect();
    let umax = uv.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut residual = 0.0f64;
    for i in 1..grid.points - 1 {
        let (wp, wm) = (w(t[i] + 0.5 * dt), w(t[i] - 0.5 * dt));
        let flux = wp * (uv[i + 1] - uv[i]) - wm * (uv[i] - uv[i - 1]);
        residual = residual.max(flux.abs() / ((wp + wm) * umax));
    }
    Ok(OracleTable { name: name.to_string(), weight: t.iter().map(|&x| w(x)).collect(), t, u: uv, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivative_matches_difference_quotient() {
        let p = SmoothProfile { terms: vec![(1.0, 2.0, 1.0), (-0.5, 2.5, 0.4)], tilt: -1.5 };
        for &r in &[1.3, 2.0, 2.4, 2.8] {
            let h = 1e-6;
            let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            assert!((fd - p.derivative(r)).abs() < 1e-7);
        }
        assert_eq!(p.value(3.5), 0.0);
    }

    #[test]
    fn gauss_legendre_polynomial_exact() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1.0);
        assert!((v - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn oracle_residuals_are_second_order() {
        for name in ["sigma_harmonic", "cosh_tanh", "flat_log", "r3_capacity"] {
            let coarse = analytic_oracles(name, OracleGrid { t0: 1.0, t1: 3.0, points: 21 }).unwrap().residual;
            let fine = analytic_oracles(name, OracleGrid { t0: 1.0, t1: 3.0, points: 41 }).unwrap().residual;
            assert!(fine < coarse / 3.0 || fine < 1e-14, "{name}: {coarse} -> {fine}");
        }
        assert_eq!(
            analytic_oracles("nope", OracleGrid { t0: 0.0, t1: 1.0, points: 5 }).unwrap_err(),
            WarpedError::UnknownOracle("nope".into())
        );
    }
}
