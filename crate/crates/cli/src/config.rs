//! Experiment configuration: JSON file plus command-line overrides.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable that overrides the output directory everywhere.
pub const OUT_DIR_ENV: &str = "LYAPBAND_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration: exit code 2.
    Config(String),
    /// A runtime failure while executing points: exit code 1.
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Heat2d,
    Heat3d,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Subsystem count N (heat2d, random).
    #[serde(default)]
    pub n: Option<usize>,
    /// Grid side N1 (heat3d).
    #[serde(default)]
    pub n1: Option<usize>,
    /// Coupling strength e (heat2d); default 0.34.
    #[serde(default)]
    pub coupling: Option<f64>,
    /// RNG seed (random).
    #[serde(default)]
    pub seed: Option<u64>,
    /// Stability margin (random); default 5% of the mean diagonal.
    #[serde(default)]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Cgls,
    ChebGp,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    /// A priori bandwidth y (even) for a banded pattern.
    #[serde(default)]
    pub y: Option<usize>,
    /// Operator-power count for the predicted multi-banded pattern.
    #[serde(default)]
    pub z1: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CglsParams {
    pub eta_tol: f64,
    pub max_iter: usize,
}

impl Default for CglsParams {
    fn default() -> Self {
        CglsParams {
            eta_tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChebParams {
    /// Fixed series degree M; when absent the degree is chosen from `tol`.
    pub order: Option<usize>,
    /// Tail-bound target for automatic degree selection.
    pub tol: f64,
    /// Cap for automatic degree selection.
    pub max_order: usize,
    /// Cosine-sum node count R; default max(2M, 64).
    pub nodes: Option<usize>,
    /// Drop bandwidth d (even); absent disables dropping.
    pub drop: Option<usize>,
    pub drop_period: usize,
}

impl Default for ChebParams {
    fn default() -> Self {
        ChebParams {
            order: None,
            tol: 1e-6,
            max_order: 200,
            nodes: None,
            drop: None,
            drop_period: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadParams {
    /// Half node count q (the rule has 2q + 1 nodes).
    pub q: usize,
    /// Spectral shift as a fraction of |b|: eps1 = eps1_rel * |b|.
    pub eps1_rel: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            q: 36,
            eps1_rel: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpParams {
    pub iters: usize,
    pub sigma: f64,
    pub zeta: f64,
    /// Initial step; default 10 / (8 a^2) from the model spectrum.
    pub delta_bar: Option<f64>,
    /// Projection bandwidth d1; default 2 * drop + bandwidth(P).
    pub band: Option<usize>,
    pub max_backtracks: usize,
    pub rel_decrease_tol: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams {
            iters: 50,
            sigma: 1e-4,
            zeta: 0.5,
            delta_bar: None,
            band: None,
            max_backtracks: 60,
            rel_decrease_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    /// Subsystem count (rebuilds the model per point).
    N,
    /// A priori bandwidth y.
    Y,
    /// Quadrature half node count q.
    Q,
    /// Predicted-pattern power count z1.
    Z1,
    /// Gradient projection iteration budget.
    GpIters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub method: MethodChoice,
    pub pattern: PatternSpec,
    pub cgls: CglsParams,
    pub cheb: ChebParams,
    pub quad: QuadParams,
    pub gp: GpParams,
    pub sweep: Option<SweepSpec>,
    pub oracle: bool,
    /// Relative tolerance of the extreme-eigenvalue estimates.
    pub eig_rel_tol: f64,
    pub out_dir: PathBuf,
    /// Write the approximate solution of every point as .mtx.
    pub write_solutions: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSpec {
                kind: ModelKind::Heat2d,
                n: Some(20),
                n1: None,
                coupling: None,
                seed: None,
                margin: None,
            },
            method: MethodChoice::Cgls,
            pattern: PatternSpec {
                y: Some(20),
                z1: None,
            },
            cgls: CglsParams::default(),
            cheb: ChebParams::default(),
            quad: QuadParams::default(),
            gp: GpParams::default(),
            sweep: None,
            oracle: true,
            eig_rel_tol: 1e-6,
            out_dir: PathBuf::from("."),
            write_solutions: true,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| config_err(format!("cannot parse {}: {e}", path.display())))
    }

    /// Resolve the output directory, honoring the environment override.
    pub fn effective_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out_dir.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self.model.kind {
            ModelKind::Heat2d | ModelKind::Random => {
                if self.model.n.is_none() && !self.sweeps_model_size() {
                    return Err(config_err("model.n is required for this model kind"));
                }
            }
            ModelKind::Heat3d => {
                if self.model.n1.is_none() && !self.sweeps_model_size() {
                    return Err(config_err("model.n1 is required for heat3d"));
                }
            }
        }
        if self.pattern.y.is_some() && self.pattern.z1.is_some() {
            return Err(config_err("pattern: set either y or z1, not both"));
        }
        if let Some(y) = self.pattern.y {
            if y % 2 != 0 {
                return Err(config_err(format!("pattern.y must be even, got {y}")));
            }
        }
        if self.pattern.y.is_none()
            && self.pattern.z1.is_none()
            && !matches!(
                self.sweep.as_ref().map(|s| s.variable),
                Some(SweepVariable::Y) | Some(SweepVariable::Z1)
            )
        {
            return Err(config_err("pattern: one of y or z1 is required"));
        }
        if self.cgls.eta_tol <= 0.0 {
            return Err(config_err("cgls.eta_tol must be positive"));
        }
        if self.quad.q == 0 {
            return Err(config_err("quad.q must be positive"));
        }
        if self.quad.eps1_rel < 0.0 {
            return Err(config_err("quad.eps1_rel must be nonnegative"));
        }
        if !(self.gp.sigma > 0.0 && self.gp.sigma < 1.0) {
            return Err(config_err("gp.sigma must lie in (0, 1)"));
        }
        if !(self.gp.zeta > 0.0 && self.gp.zeta < 1.0) {
            return Err(config_err("gp.zeta must lie in (0, 1)"));
        }
        if let Some(d) = self.gp.delta_bar {
            if d <= 0.0 {
                return Err(config_err("gp.delta_bar must be positive"));
            }
        }
        if self.eig_rel_tol <= 0.0 {
            return Err(config_err("eig_rel_tol must be positive"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(config_err("sweep.values must not be empty"));
            }
            if sweep.values.contains(&0) {
                return Err(config_err("sweep values must be positive"));
            }
            if sweep.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(config_err("sweep values must be strictly increasing"));
            }
            if matches!(sweep.variable, SweepVariable::Y)
                && sweep.values.iter().any(|&v| v % 2 != 0)
            {
                return Err(config_err("swept bandwidths must be even"));
            }
        }
        Ok(())
    }

    fn sweeps_model_size(&self) -> bool {
        matches!(
            self.sweep.as_ref().map(|s| s.variable),
            Some(SweepVariable::N)
        )
    }
}
