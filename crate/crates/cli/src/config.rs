//! Scenario configuration: a single TOML file per run.
//!
//! The schema is part of the tool's contract (see `configs/` for worked
//! examples):
//!
//! ```toml
//! kind = "quantization"            # quantization | spuriosity | equivalence | sum-rule
//! output_dir = "verify-out"        # overridden by --out or VERIFY_OUT_DIR
//! seed = 42                        # overridden by --seed
//!
//! [constants]                      # optional, natural units by default
//! hbar = 1.0
//! mass = 1.0
//!
//! [potential]                      # free | harmonic (omega) | polynomial (coefficients)
//! name = "harmonic"
//! omega = 1.0
//!
//! [grid]                           # cartesian (half_width, n) | polar (r_max, nr, nphi[, r_min])
//! type = "cartesian"
//! half_width = 6.0
//! n = 256
//!
//! [params]
//! nu_list = [-2.0, -1.0, 0.0, 1.0, 2.0]
//! n_list = [0]                     # radial node counts
//! r_max = 12.0                     # radial solve domain
//! wavenumber = 1.0                 # spuriosity
//! coefficient_counts = [64, 128, 256]
//! annulus = [0.3, 4.2]             # equivalence residual window
//! levels = [[64, 128], [128, 256], [256, 512]]
//! trials = 100                     # sum-rule
//! max_vortices = 4
//! probe = true                     # sum-rule singularity probe
//!
//! [[loops]]
//! center = [0.0, 0.0]
//! radius = 2.0
//! samples = 720
//!
//! [tolerances]                     # all optional, defaults below
//! quantization_defect = 1e-3
//! loop_spread = 1e-6
//! branch_jump = 1e-8
//! expansion_error = 1e-6
//! residual_order = 1.9
//! slope_band = 0.1
//! cancellation_ratio = 0.05
//! eigenvalue_rel = 1e-6
//! ```
//!
//! Validation failures name the offending field path.

use anyhow::{bail, Context, Result};
use madelung::{CartesianGrid, Grid2D, PhysicalConstants, PolarGrid, Potential};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Quantization,
    Spuriosity,
    Equivalence,
    SumRule,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScenarioKind::Quantization => "quantization",
            ScenarioKind::Spuriosity => "spuriosity",
            ScenarioKind::Equivalence => "equivalence",
            ScenarioKind::SumRule => "sum-rule",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub name: String,
    pub omega: Option<f64>,
    pub coefficients: Option<Vec<f64>>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { name: "free".into(), omega: None, coefficients: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub half_width: Option<f64>,
    pub n: Option<usize>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub nr: Option<usize>,
    pub nphi: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_loop_samples")]
    pub samples: usize,
}

fn default_loop_samples() -> usize {
    720
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub nu_list: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub r_max: Option<f64>,
    pub wavenumber: Option<f64>,
    pub coefficient_counts: Option<Vec<usize>>,
    pub annulus: Option<[f64; 2]>,
    pub levels: Option<Vec<[usize; 2]>>,
    pub trials: Option<usize>,
    pub max_vortices: Option<usize>,
    pub probe: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesConfig {
    #[serde(default = "default_quantization_defect")]
    pub quantization_defect: f64,
    /// Allowed circulation spread over a loop sweep, in units of 2 pi hbar.
    #[serde(default = "default_loop_spread")]
    pub loop_spread: f64,
    #[serde(default = "default_branch_jump")]
    pub branch_jump: f64,
    #[serde(default = "default_expansion_error")]
    pub expansion_error: f64,
    #[serde(default = "default_residual_order")]
    pub residual_order: f64,
    #[serde(default = "default_slope_band")]
    pub slope_band: f64,
    #[serde(default = "default_cancellation_ratio")]
    pub cancellation_ratio: f64,
    #[serde(default = "default_eigenvalue_rel")]
    pub eigenvalue_rel: f64,
}

fn default_quantization_defect() -> f64 {
    1e-3
}
fn default_loop_spread() -> f64 {
    1e-6
}
fn default_branch_jump() -> f64 {
    1e-8
}
fn default_expansion_error() -> f64 {
    1e-6
}
fn default_residual_order() -> f64 {
    1.9
}
fn default_slope_band() -> f64 {
    0.1
}
fn default_cancellation_ratio() -> f64 {
    0.05
}
fn default_eigenvalue_rel() -> f64 {
    1e-6
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        Self {
            quantization_defect: default_quantization_defect(),
            loop_spread: default_loop_spread(),
            branch_jump: default_branch_jump(),
            expansion_error: default_expansion_error(),
            residual_order: default_residual_order(),
            slope_band: default_slope_band(),
            cancellation_ratio: default_cancellation_ratio(),
            eigenvalue_rel: default_eigenvalue_rel(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub loops: Vec<LoopConfig>,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
}

fn default_output_dir() -> String {
    "verify-out".into()
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ScenarioConfig =
            toml::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.quantization_defect", t.quantization_defect),
            ("tolerances.loop_spread", t.loop_spread),
            ("tolerances.branch_jump", t.branch_jump),
            ("tolerances.expansion_error", t.expansion_error),
            ("tolerances.residual_order", t.residual_order),
            ("tolerances.slope_band", t.slope_band),
            ("tolerances.cancellation_ratio", t.cancellation_ratio),
            ("tolerances.eigenvalue_rel", t.eigenvalue_rel),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name}: must be positive, got {v}");
            }
        }
        self.build_constants()?;
        self.build_potential()?;
        match self.kind {
            ScenarioKind::Quantization => {
                self.require_nu_list()?;
                for (i, nu) in self.params.nu_list.as_ref().unwrap().iter().enumerate() {
                    if nu.fract() != 0.0 {
                        bail!("params.nu_list[{i}]: quantization needs integer winding targets, got {nu}");
                    }
                }
                for lp in &self.loops {
                    if !(lp.radius.is_finite() && lp.radius > 0.0) {
                        bail!("loops.radius: must be positive, got {}", lp.radius);
                    }
                }
            }
            ScenarioKind::Spuriosity => {
                self.require_nu_list()?;
                if let Some(k) = self.params.wavenumber {
                    if !(k.is_finite() && k > 0.0) {
                        bail!("params.wavenumber: must be positive, got {k}");
                    }
                }
            }
            ScenarioKind::Equivalence => {
                self.require_nu_list()?;
                if let Some(a) = self.params.annulus {
                    if !(a[0] > 0.0 && a[1] > a[0]) {
                        bail!("params.annulus: need 0 < lo < hi, got {a:?}");
                    }
                }
            }
            ScenarioKind::SumRule => {}
        }
        Ok(())
    }

    fn require_nu_list(&self) -> Result<()> {
        let list = self
            .params
            .nu_list
            .as_ref()
            .with_context(|| format!("params.nu_list: required for the {} scenario", self.kind))?;
        if list.is_empty() {
            bail!("params.nu_list: must not be empty");
        }
        Ok(())
    }

    pub fn build_constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::new(self.constants.hbar, self.constants.mass)
            .map_err(|e| anyhow::anyhow!("constants: {e}"))
    }

    pub fn build_potential(&self) -> Result<Potential> {
        match self.potential.name.as_str() {
            "free" => Ok(Potential::free()),
            "harmonic" => {
                let omega = self
                    .potential
                    .omega
                    .context("potential.omega: required for the harmonic potential")?;
                if !(omega.is_finite() && omega > 0.0) {
                    bail!("potential.omega: must be positive, got {omega}");
                }
                Ok(Potential::harmonic(self.constants.mass, omega))
            }
            "polynomial" => {
                let coeffs = self
                    .potential
                    .coefficients
                    .as_ref()
                    .context("potential.coefficients: required for the polynomial potential")?;
                if coeffs.iter().any(|c| !c.is_finite()) {
                    bail!("potential.coefficients: entries must be finite");
                }
                Ok(Potential::radial_polynomial(coeffs))
            }
            other => bail!(
                "potential.name: unknown potential {other:?} (expected free, harmonic, or polynomial)"
            ),
        }
    }

    /// The grid for scenarios that sample a single field. Defaults depend on
    /// the scenario kind.
    pub fn build_grid(&self) -> Result<Grid2D> {
        match &self.grid {
            None => Ok(match self.kind {
                ScenarioKind::Spuriosity | ScenarioKind::Equivalence => {
                    PolarGrid::half_cell(8.0, 96, 256)
                        .map_err(|e| anyhow::anyhow!("grid: {e}"))?
                        .into()
                }
                ScenarioKind::SumRule => CartesianGrid::centered_square(3.0, 192)
                    .map_err(|e| anyhow::anyhow!("grid: {e}"))?
                    .into(),
                ScenarioKind::Quantization => CartesianGrid::centered_square(6.0, 256)
                    .map_err(|e| anyhow::anyhow!("grid: {e}"))?
                    .into(),
            }),
            Some(g) => match g.kind.as_str() {
                "cartesian" => {
                    let half = g.half_width.context("grid.half_width: required for cartesian grids")?;
                    let n = g.n.context("grid.n: required for cartesian grids")?;
                    Ok(CartesianGrid::centered_square(half, n)
                        .map_err(|e| anyhow::anyhow!("grid: {e}"))?
                        .into())
                }
                "polar" => {
                    let r_max = g.r_max.context("grid.r_max: required for polar grids")?;
                    let nr = g.nr.context("grid.nr: required for polar grids")?;
                    let nphi = g.nphi.context("grid.nphi: required for polar grids")?;
                    let grid = match g.r_min {
                        Some(r_min) => PolarGrid::new(r_min, r_max, nr, nphi),
                        None => PolarGrid::half_cell(r_max, nr, nphi),
                    }
                    .map_err(|e| anyhow::anyhow!("grid: {e}"))?;
                    Ok(grid.into())
                }
                other => bail!("grid.type: unknown grid type {other:?} (expected cartesian or polar)"),
            },
        }
    }
}
