//! Run configuration: the family (a path or an inline object) plus one
//! optional parameter block per mode.
//!
//! ```json
//! {
//!   "family": "arnold-0.8.json",
//!   "seed": 7,
//!   "staircase": {
//!     "tau": { "start": 0.0, "end": 1.0, "points": 1000 },
//!     "estimator": { "n_iter": 100000 }
//!   }
//! }
//! ```

use std::path::{Path, PathBuf};

use qpf_core::config::FamilyFile;
use qpf_core::lyapunov::SnaThresholds;
use qpf_core::multiscale::{AssumptionGrid, BuildSpec, HookSpec};
use qpf_core::rotation::{EstimatorParams, TauGrid};
use serde::{Deserialize, Serialize};

use crate::output::{ErrorKind, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RhoSweep,
    Staircase,
    Tongues,
    SnaSearch,
    Multiscale,
    Hooks,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::RhoSweep => "rho-sweep",
            Mode::Staircase => "staircase",
            Mode::Tongues => "tongues",
            Mode::SnaSearch => "sna-search",
            Mode::Multiscale => "multiscale",
            Mode::Hooks => "hooks",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyRef {
    /// relative paths resolve against the config file's directory
    Path(PathBuf),
    Inline(Box<FamilyFile>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorCfg {
    pub n_iter: u64,
    pub burn_in: u64,
    pub n_starts: usize,
}

impl Default for EstimatorCfg {
    fn default() -> Self {
        let d = EstimatorParams::default();
        EstimatorCfg {
            n_iter: d.n_iter,
            burn_in: d.burn_in,
            n_starts: d.n_starts,
        }
    }
}

impl EstimatorCfg {
    pub fn params(&self, seed: u64) -> EstimatorParams {
        EstimatorParams {
            n_iter: self.n_iter,
            burn_in: self.burn_in,
            n_starts: self.n_starts,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSweepCfg {
    pub tau: TauGrid,
    #[serde(default)]
    pub estimator: EstimatorCfg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseCfg {
    pub tau: TauGrid,
    #[serde(default)]
    pub estimator: EstimatorCfg,
    /// defaults to `10 / n_iter`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_tol: Option<f64>,
    #[serde(default)]
    pub refine_edges: bool,
    #[serde(default = "default_bisect_tol")]
    pub bisect_tol: f64,
    #[serde(default = "default_max_denominator")]
    pub max_denominator: i64,
}

fn default_bisect_tol() -> f64 {
    1e-6
}

fn default_max_denominator() -> i64 {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TonguesCfg {
    /// family parameter varied along the vertical axis
    pub parameter: String,
    pub values: TauGrid,
    pub tau: TauGrid,
    #[serde(default)]
    pub estimator: EstimatorCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_tol: Option<f64>,
    /// plateaus narrower than this are left out
    #[serde(default)]
    pub min_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinkSourceCfg {
    pub n_theta: usize,
    pub n_x: usize,
    pub horizon: u64,
    pub lambda_min: f64,
}

impl Default for SinkSourceCfg {
    fn default() -> Self {
        SinkSourceCfg {
            n_theta: 16,
            n_x: 16,
            horizon: 500,
            lambda_min: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformCfg {
    pub iterations: u64,
    pub grid: usize,
}

impl Default for UniformCfg {
    fn default() -> Self {
        UniformCfg {
            iterations: 20_000,
            grid: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnaSearchCfg {
    pub tau: TauGrid,
    #[serde(default = "default_pullback")]
    pub n_pullback: u64,
    #[serde(default = "default_graph_grid")]
    pub grid_size: usize,
    /// starting section; the midpoint of `C` when the family has constants, else 0.5
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_init: Option<f64>,
    #[serde(default)]
    pub thresholds: SnaThresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink_source: Option<SinkSourceCfg>,
    /// needs family constants
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformCfg>,
    /// τ whose graph is plotted; the first grid point by default
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_tau: Option<f64>,
}

fn default_pullback() -> u64 {
    2000
}

fn default_graph_grid() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiscaleCfg {
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// levels of `ℐ_n` to build beyond `ℐ₀`
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// explicit `M_0, …`; the windowed schedule when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<u64>>,
    /// explicit `ε_0, …, ε_{levels}` for an explicit `m`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Diophantine exponent; the family's by default
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default)]
    pub build: BuildSpec,
    #[serde(default = "default_strip_samples")]
    pub strip_samples: usize,
}

fn default_tau() -> f64 {
    0.5
}

fn default_levels() -> usize {
    2
}

fn default_strip_samples() -> usize {
    512
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HookCfg {
    pub k: u64,
    #[serde(default = "default_hook_samples")]
    pub samples: usize,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default = "default_x_tol")]
    pub x_tol: f64,
    #[serde(default = "default_theta_tol")]
    pub theta_tol: f64,
}

fn default_hook_samples() -> usize {
    HookSpec::new(1).samples
}

fn default_smoothing() -> f64 {
    HookSpec::new(1).smoothing
}

fn default_x_tol() -> f64 {
    HookSpec::new(1).x_tol
}

fn default_theta_tol() -> f64 {
    HookSpec::new(1).theta_tol
}

impl HookCfg {
    pub fn spec(&self) -> HookSpec {
        HookSpec {
            k: self.k,
            samples: self.samples,
            smoothing: self.smoothing,
            x_tol: self.x_tol,
            theta_tol: self.theta_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HooksCfg {
    /// diagnostics at one τ; ignored when a bracket is given
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// `[τ⁻, τ⁺]` for the gap scan
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(default = "default_hook_level")]
    pub level: usize,
    pub m: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default)]
    pub build: BuildSpec,
    pub hook: HookCfg,
    #[serde(default = "default_bisections")]
    pub max_bisections: usize,
    #[serde(default = "default_tau_tol")]
    pub tau_tol: f64,
    #[serde(default)]
    pub uniform: UniformCfg,
}

fn default_hook_level() -> usize {
    1
}

fn default_bisections() -> usize {
    40
}

fn default_tau_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyCfg {
    pub grid: AssumptionGrid,
    /// treat any failed condition as a family-structure error
    pub require_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// worker threads; available parallelism by default
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// plot kinds to emit (staircase, tongues, graph, strips); all that apply by default
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plots: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_sweep: Option<RhoSweepCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staircase: Option<StaircaseCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tongues: Option<TonguesCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sna_search: Option<SnaSearchCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiscale: Option<MultiscaleCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hooks: Option<HooksCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyCfg>,
}

pub const PLOT_KINDS: [&str; 4] = ["staircase", "tongues", "graph", "strips"];

fn bad(msg: impl Into<String>) -> RunError {
    RunError::new(ErrorKind::Config, msg)
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive, got {v}")))
    }
}

fn grid_ok(name: &str, g: &TauGrid, min_points: usize) -> Result<(), RunError> {
    if g.points < min_points {
        return Err(bad(format!("{name} needs at least {min_points} points")));
    }
    if !g.start.is_finite() || !g.end.is_finite() || (g.points > 1 && g.end <= g.start) {
        return Err(bad(format!("{name} needs finite start < end")));
    }
    Ok(())
}

fn estimator_ok(e: &EstimatorCfg) -> Result<(), RunError> {
    if e.n_iter == 0 || e.n_starts == 0 {
        return Err(bad("estimator needs n_iter ≥ 1 and n_starts ≥ 1"));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The family file, reading it relative to `base` when given as a path.
    pub fn family_file(&self, base: &Path) -> Result<FamilyFile, RunError> {
        match &self.family {
            FamilyRef::Inline(f) => Ok((**f).clone()),
            FamilyRef::Path(p) => {
                let full = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| bad(format!("reading family file {}: {e}", full.display())))?;
                FamilyFile::from_json(&text).map_err(|e| bad(e.to_string()))
            }
        }
    }

    pub fn wants_plot(&self, kind: &str) -> bool {
        self.plots.as_ref().map_or(true, |v| v.iter().any(|k| k == kind))
    }

    /// Checks the block of `mode` (which must be present) and the shared fields.
    pub fn validate(&self, mode: Mode) -> Result<(), RunError> {
        if let Some(kinds) = &self.plots {
            if let Some(k) = kinds.iter().find(|k| !PLOT_KINDS.contains(&k.as_str())) {
                return Err(bad(format!("unknown plot kind '{k}'")));
            }
        }
        if self.workers == Some(0) {
            return Err(bad("workers must be at least 1"));
        }
        let missing = || bad(format!("config has no '{}' block", mode.name().replace('-', "_")));
        match mode {
            Mode::RhoSweep => {
                let c = self.rho_sweep.as_ref().ok_or_else(missing)?;
                grid_ok("rho_sweep.tau", &c.tau, 1)?;
                estimator_ok(&c.estimator)
            }
            Mode::Staircase => {
                let c = self.staircase.as_ref().ok_or_else(missing)?;
                grid_ok("staircase.tau", &c.tau, 2)?;
                estimator_ok(&c.estimator)?;
                if let Some(t) = c.flat_tol {
                    positive("staircase.flat_tol", t)?;
                }
                positive("staircase.bisect_tol", c.bisect_tol)?;
                if c.max_denominator < 1 {
                    return Err(bad("staircase.max_denominator must be at least 1"));
                }
                Ok(())
            }
            Mode::Tongues => {
                let c = self.tongues.as_ref().ok_or_else(missing)?;
                grid_ok("tongues.values", &c.values, 1)?;
                grid_ok("tongues.tau", &c.tau, 2)?;
                estimator_ok(&c.estimator)?;
                if let Some(t) = c.flat_tol {
                    positive("tongues.flat_tol", t)?;
                }
                if !(c.min_width >= 0.0) {
                    return Err(bad("tongues.min_width must be ≥ 0"));
                }
                Ok(())
            }
            Mode::SnaSearch => {
                let c = self.sna_search.as_ref().ok_or_else(missing)?;
                grid_ok("sna_search.tau", &c.tau, 1)?;
                if c.n_pullback == 0 || c.grid_size < 16 {
                    return Err(bad("sna_search needs n_pullback ≥ 1 and grid_size ≥ 16"));
                }
                positive("sna_search.thresholds.decay_factor", c.thresholds.decay_factor)?;
                if let Some(s) = &c.sink_source {
                    positive("sna_search.sink_source.lambda_min", s.lambda_min)?;
                    if s.n_theta == 0 || s.n_x == 0 || s.horizon == 0 {
                        return Err(bad("sna_search.sink_source needs a non-empty grid and horizon"));
                    }
                }
                if let Some(u) = &c.uniform {
                    if u.iterations == 0 || u.grid < 4 {
                        return Err(bad("sna_search.uniform needs iterations ≥ 1 and grid ≥ 4"));
                    }
                }
                Ok(())
            }
            Mode::Multiscale => {
                let c = self.multiscale.as_ref().ok_or_else(missing)?;
                if c.levels == 0 {
                    return Err(bad("multiscale.levels must be at least 1"));
                }
                if c.eps.is_some() && c.m.is_none() {
                    return Err(bad("multiscale.eps needs an explicit m"));
                }
                build_ok("multiscale.build", &c.build)?;
                if c.strip_samples < 2 {
                    return Err(bad("multiscale.strip_samples must be at least 2"));
                }
                Ok(())
            }
            Mode::Hooks => {
                let c = self.hooks.as_ref().ok_or_else(missing)?;
                if c.tau.is_none() && c.bracket.is_none() {
                    return Err(bad("hooks needs tau or bracket"));
                }
                if let Some([a, b]) = c.bracket {
                    if !(a < b) {
                        return Err(bad("hooks.bracket needs τ⁻ < τ⁺"));
                    }
                }
                if c.level == 0 || c.m.len() <= c.level {
                    return Err(bad("hooks needs level ≥ 1 and more than `level` entries in m"));
                }
                build_ok("hooks.build", &c.build)?;
                positive("hooks.tau_tol", c.tau_tol)?;
                positive("hooks.hook.x_tol", c.hook.x_tol)?;
                positive("hooks.hook.theta_tol", c.hook.theta_tol)?;
                positive("hooks.hook.smoothing", c.hook.smoothing)?;
                Ok(())
            }
            Mode::Verify => {
                let c = self.verify.clone().unwrap_or_default();
                let g = &c.grid;
                if g.n_theta == 0 || g.n_x == 0 || g.taus.is_empty() || g.i0_cells < 2 {
                    return Err(bad("verify.grid must be non-empty"));
                }
                positive("verify.grid.tau_step", g.tau_step)
            }
        }
    }
}

fn build_ok(name: &str, b: &BuildSpec) -> Result<(), RunError> {
    if b.cells < 2 || b.i0_cells < 2 {
        return Err(bad(format!("{name} needs at least 2 scan cells")));
    }
    positive(&format!("{name}.tol"), b.tol)
}
