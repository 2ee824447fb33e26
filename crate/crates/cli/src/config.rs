//! Scenario files.
//!
//! ```toml
//! name = "genus2"
//! kind = "hodge_closed"
//! seed = 7
//!
//! [params]
//! genus = 2
//! refinement = 3
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use l2hodge::warped::RadialBc;

#[derive(Debug, Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    HodgeClosed,
    HodgeBoundary,
    Conformal,
    Cutoff,
    Ends,
    LiTam,
    Lambda0,
    WarpedGap,
    WarpedHardy,
    WarpedPrimitive,
    WarpedVanish,
    Lott,
    DxCheck,
}

impl Kind {
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Kind::HodgeClosed
                | Kind::HodgeBoundary
                | Kind::Conformal
                | Kind::WarpedGap
                | Kind::WarpedHardy
                | Kind::WarpedPrimitive
                | Kind::DxCheck
        )
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    kind: Kind,
    seed: Option<u64>,
    #[serde(default)]
    params: toml::Table,
    #[serde(default)]
    output: OutputSpec,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub seed: Option<u64>,
    pub params: Params,
    pub output: OutputSpec,
}

fn default_seed_samples() -> usize {
    20
}
fn default_gap_min() -> f64 {
    100.0
}
fn default_decomposition_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeClosed {
    pub genus: usize,
    pub refinement: usize,
    #[serde(default = "default_seed_samples")]
    pub samples: usize,
    #[serde(default = "default_gap_min")]
    pub gap_min: f64,
    /// Bound on decomposition residual and orthogonality.
    #[serde(default = "default_decomposition_tol")]
    pub decomposition_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenSurface {
    Disk,
    Annulus,
    Cylinder,
    Pants,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeBoundary {
    pub surface: OpenSurface,
    pub refinement: usize,
    #[serde(default = "default_seed_samples")]
    pub samples: usize,
    #[serde(default = "default_gap_min")]
    pub gap_min: f64,
    /// Bound on decomposition residual and orthogonality.
    #[serde(default = "default_decomposition_tol")]
    pub decomposition_tol: f64,
}

fn default_genus_torus() -> usize {
    1
}
fn default_conformal_samples() -> usize {
    10
}
fn default_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conformal {
    #[serde(default = "default_genus_torus")]
    pub genus: usize,
    pub refinement: usize,
    #[serde(default = "default_conformal_samples")]
    pub samples: usize,
    /// Rescalings are uniform in `[-amplitude, amplitude]` per triangle.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_mass_tol")]
    pub mass_tol: f64,
    #[serde(default = "default_projector_tol")]
    pub projector_tol: f64,
}
fn default_mass_tol() -> f64 {
    1e-12
}
fn default_projector_tol() -> f64 {
    1e-10
}

fn default_rpd() -> f64 {
    24.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub n_values: Vec<f64>,
    #[serde(default = "default_rpd")]
    pub rings_per_decade: f64,
    #[serde(default = "default_cutoff_tol")]
    pub tolerance: f64,
}
fn default_cutoff_tol() -> f64 {
    0.03
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndModel {
    /// Flat plane outside the unit disk, meshed.
    Flat2d,
    /// Weight `4π r²` on `[1, ∞)`.
    Radial3d,
    /// Weight `2π e^r`, the expanding end of the hyperbolic cusp surface.
    Funnel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ends {
    pub model: EndModel,
    pub radii: Vec<f64>,
    #[serde(default = "default_capacity_tol")]
    pub tolerance: f64,
    /// Grid cells per unit length for the radial models, rings per `log 2`
    /// for the mesh.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}
fn default_capacity_tol() -> f64 {
    0.02
}
fn default_resolution() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoEndedModel {
    /// Weight `4π (1 + |t|)²`: two non-parabolic ends.
    Radial3d,
    /// Weight `4π cosh² t`.
    Cosh,
    /// Weight `2π e^t`: a funnel and a cusp.
    Sigma,
    /// Weight `2π`: a flat cylinder, two parabolic ends.
    Flat2d,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiTam {
    pub model: TwoEndedModel,
    pub radii: Vec<f64>,
    /// Half-width of the core `|t| ≤ core`.
    pub core: f64,
    pub dt: f64,
    /// Allowed movement of core values between the last two radii.
    #[serde(default = "default_litam_tol")]
    pub tol: f64,
    /// Two non-parabolic ends: the limit must oscillate at least this much.
    #[serde(default = "default_min_oscillation")]
    pub min_oscillation: f64,
    /// Degenerating models: oscillation at the largest radius stays below this.
    #[serde(default = "default_degenerate_oscillation")]
    pub degenerate_oscillation: f64,
    /// Relative sup-norm distance to the closed-form limit, where one exists.
    #[serde(default = "default_limit_tol")]
    pub limit_tol: f64,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}
fn default_litam_tol() -> f64 {
    0.02
}
fn default_min_oscillation() -> f64 {
    1.5
}
fn default_degenerate_oscillation() -> f64 {
    1e-2
}
fn default_limit_tol() -> f64 {
    0.01
}
fn default_residual_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambda0 {
    pub lengths: Vec<f64>,
    pub dr: f64,
    pub lower: f64,
    pub upper: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Warped {
    pub n: usize,
    pub k: usize,
    pub length: f64,
    pub dr: f64,
    #[serde(default = "default_modes")]
    pub modes: Vec<f64>,
    pub samples: usize,
    /// Primitive residual and bound slack.
    #[serde(default = "default_primitive_tol")]
    pub tol: f64,
}
fn default_primitive_tol() -> f64 {
    1e-6
}
fn default_modes() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 4.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpedVanish {
    pub n: usize,
    pub k: usize,
    pub bc: RadialBc,
    pub lengths: Vec<f64>,
    pub dr: f64,
    #[serde(default = "default_modes")]
    pub modes: Vec<f64>,
    pub threshold: f64,
    /// Middle-degree contrast: near-kernel counts of `n = 2, k = 1` at the
    /// largest length with the first `m` modes, for each `m` listed.
    #[serde(default)]
    pub growth_mode_counts: Vec<usize>,
    /// Eigenvalues below this count as near-kernel in the growth contrast.
    #[serde(default = "default_kernel_threshold")]
    pub kernel_threshold: f64,
}
fn default_kernel_threshold() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Torus,
    Sphere,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lott {
    pub split: Split,
    pub refinement: usize,
    /// The compact piece is the set of triangles within this many edge hops
    /// of vertex 0.
    pub core_hops: usize,
    #[serde(default)]
    pub expect_equality: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Params {
    HodgeClosed(HodgeClosed),
    HodgeBoundary(HodgeBoundary),
    Conformal(Conformal),
    Cutoff(Cutoff),
    Ends(Ends),
    LiTam(LiTam),
    Lambda0(Lambda0),
    Warped(Warped),
    WarpedVanish(WarpedVanish),
    Lott(Lott),
}

fn parse<T: DeserializeOwned>(table: &toml::Table) -> Result<T, ConfigError> {
    table.clone().try_into().map_err(|e: toml::de::Error| ConfigError(format!("params: {e}")))
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError(msg()))
    }
}

fn increasing(v: &[f64]) -> bool {
    !v.is_empty() && v.iter().all(|x| x.is_finite() && *x > 0.0) && v.windows(2).all(|w| w[1] > w[0])
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        need(!raw.name.is_empty() && raw.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)), || {
            format!("name {:?} must be nonempty and use only [A-Za-z0-9-_.]", raw.name)
        })?;
        let params = match raw.kind {
            Kind::HodgeClosed => Params::HodgeClosed(parse(&raw.params)?),
            Kind::HodgeBoundary => Params::HodgeBoundary(parse(&raw.params)?),
            Kind::Conformal => Params::Conformal(parse(&raw.params)?),
            Kind::Cutoff => Params::Cutoff(parse(&raw.params)?),
            Kind::Ends => Params::Ends(parse(&raw.params)?),
            Kind::LiTam => Params::LiTam(parse(&raw.params)?),
            Kind::Lambda0 => Params::Lambda0(parse(&raw.params)?),
            Kind::WarpedGap | Kind::WarpedHardy | Kind::WarpedPrimitive | Kind::DxCheck => {
                Params::Warped(parse(&raw.params)?)
            }
            Kind::WarpedVanish => Params::WarpedVanish(parse(&raw.params)?),
            Kind::Lott => Params::Lott(parse(&raw.params)?),
        };
        let s = Scenario { name: raw.name, kind: raw.kind, seed: raw.seed, params, output: raw.output };
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        need(!self.kind.randomized() || self.seed.is_some(), || format!("kind {:?} needs a seed", self.kind))?;
        match &self.params {
            Params::HodgeClosed(p) => {
                need(p.genus <= 6, || format!("genus {} outside 0..=6", p.genus))?;
                let lo = if p.genus >= 2 { 2 } else { 1 };
                need((lo..=6).contains(&p.refinement), || format!("refinement {} outside {lo}..=6", p.refinement))?;
                need(p.gap_min > 1.0, || "gap_min must exceed 1".into())?;
            }
            Params::HodgeBoundary(p) => {
                let lo = if p.surface == OpenSurface::Pants { 3 } else { 1 };
                need((lo..=8).contains(&p.refinement), || format!("refinement {} outside {lo}..=8", p.refinement))?;
                need(p.gap_min > 1.0, || "gap_min must exceed 1".into())?;
            }
            Params::Conformal(p) => {
                need(p.genus <= 3 && (1..=5).contains(&p.refinement), || "genus <= 3, refinement in 1..=5".into())?;
                need(p.amplitude > 0.0 && p.amplitude <= 3.0, || "amplitude in (0, 3]".into())?;
            }
            Params::Cutoff(p) => {
                need(increasing(&p.n_values) && p.n_values[0] > 1.0, || "n_values must increase and exceed 1".into())?;
                need(p.n_values.iter().all(|&n| n <= 4096.0), || "n_values at most 4096".into())?;
                need(p.rings_per_decade >= 8.0 && p.rings_per_decade <= 64.0, || "rings_per_decade in [8, 64]".into())?;
            }
            Params::Ends(p) => {
                need(increasing(&p.radii) && p.radii[0] > 1.0, || "radii must increase and exceed 1".into())?;
                need(*p.radii.last().unwrap() <= 4096.0, || "radii at most 4096".into())?;
                need((2..=64).contains(&p.resolution), || "resolution in 2..=64".into())?;
            }
            Params::LiTam(p) => {
                need(increasing(&p.radii), || "radii must increase".into())?;
                need(p.core > 0.0 && p.core < p.radii[0], || "core must lie inside the first radius".into())?;
                need(p.dt > 0.0 && p.dt <= 0.5, || "dt in (0, 0.5]".into())?;
                need(2.0 * p.radii.last().unwrap() / p.dt <= 2e6, || "grid too large".into())?;
            }
            Params::Lambda0(p) => {
                need(increasing(&p.lengths), || "lengths must increase".into())?;
                need(p.dr > 0.0 && p.dr <= 0.1 && p.lower <= p.upper, || "dr in (0, 0.1] and lower <= upper".into())?;
            }
            Params::Warped(p) => {
                need((2..=8).contains(&p.n) && p.k <= p.n, || format!("need 2 <= n <= 8 and k <= n, got {}, {}", p.n, p.k))?;
                need(p.length > 0.0 && p.dr > 0.0 && p.dr <= 0.1, || "length > 0 and dr in (0, 0.1]".into())?;
                need(p.samples >= 1 && p.samples <= 10_000, || "samples in 1..=10000".into())?;
                need(!p.modes.is_empty() && p.modes.iter().all(|m| *m >= 0.0), || "modes must be >= 0".into())?;
            }
            Params::WarpedVanish(p) => {
                need((2..=8).contains(&p.n) && p.k <= p.n, || "need 2 <= n <= 8 and k <= n".into())?;
                need(increasing(&p.lengths) && p.dr > 0.0 && p.dr <= 0.1, || "lengths must increase, dr in (0, 0.1]".into())?;
                need(p.growth_mode_counts.windows(2).all(|w| w[1] > w[0]), || "growth_mode_counts must increase".into())?;
            }
            Params::Lott(p) => {
                need((1..=4).contains(&p.refinement) && p.core_hops >= 1, || "refinement in 1..=4, core_hops >= 1".into())?;
            }
        }
        Ok(())
    }
}
