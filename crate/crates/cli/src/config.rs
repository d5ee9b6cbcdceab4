//! Run configuration, read from JSON.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use biphoton::coincidence::InputEnvelope;
use biphoton::cumulants::{KuboParams, Mode, TimeQuad};
use biphoton::quadrature::FrequencyGrid;
use biphoton::schmidt::{geometric_grid, DEFAULT_LAGUERRE_ORDER};
use biphoton::spectral::{CouplingModel, SpectralParams};
use biphoton::stochastic::Query;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Size limits checked by [`RunConfig::validate`].
pub const MAX_GRID_POINTS: usize = 4096;
pub const MAX_LAGUERRE_ORDER: usize = 512;
pub const MAX_SCAN_POINTS: usize = 100_000;
pub const MAX_MODE_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_spectral")]
    pub spectral: SpectralParams,
    /// Resonance seen by photon 2; defaults to `spectral`.
    #[serde(default)]
    pub spectral2: Option<SpectralParams>,
    #[serde(default)]
    pub couplings: Vec<CouplingModel>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Truncation threshold of the phase-averaged series.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub envelope: InputEnvelope,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    #[serde(default)]
    pub schmidt: SchmidtConfig,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_spectral() -> SpectralParams {
    SpectralParams {
        omega0: std::f64::consts::PI,
        b: 1.0,
        gamma: 2.0,
    }
}

fn default_tol() -> f64 {
    1e-14
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRule {
    #[default]
    GaussLegendre,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid_n")]
    pub n: usize,
    /// Window edges; default `omega0 -+ 4 gamma`.
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub rule: GridRule,
}

fn default_grid_n() -> usize {
    64
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: default_grid_n(),
            lo: None,
            hi: None,
            rule: GridRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    Xi,
    SigmaPhase,
    Sigma12,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::Xi => "xi",
            ScanAxis::SigmaPhase => "sigma_phase",
            ScanAxis::Sigma12 => "sigma12",
        }
    }
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "xi" => Ok(ScanAxis::Xi),
            "sigma_phase" => Ok(ScanAxis::SigmaPhase),
            "sigma12" => Ok(ScanAxis::Sigma12),
            other => Err(CliError::Config(format!(
                "scan.axis: unknown axis `{other}`, expected one of xi, sigma_phase, sigma12"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometric {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub axis: ScanAxis,
    /// Explicit axis values; takes precedence over `geometric`.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub geometric: Option<Geometric>,
    /// Coupling held fixed on the `sigma_phase` axis.
    #[serde(default)]
    pub xi: Option<f64>,
    /// Phase width held fixed on the `xi` axis.
    #[serde(default)]
    pub sigma_phase: Option<f64>,
}

impl ScanConfig {
    pub fn resolved_values(&self) -> Result<Vec<f64>, CliError> {
        let values = match (&self.values, &self.geometric) {
            (Some(v), _) => v.clone(),
            (None, Some(g)) => {
                if g.count > MAX_SCAN_POINTS {
                    return Err(CliError::Config(format!(
                        "scan.geometric.count: at most {MAX_SCAN_POINTS}, got {}",
                        g.count
                    )));
                }
                geometric_grid(g.from, g.to, g.count).map_err(|e| CliError::Config(format!("scan.geometric: {e}")))?
            }
            (None, None) => return Err(CliError::Config("scan: give either `values` or `geometric`".into())),
        };
        if values.len() > MAX_SCAN_POINTS {
            return Err(CliError::Config(format!(
                "scan.values: at most {MAX_SCAN_POINTS} entries"
            )));
        }
        if values.is_empty() {
            return Err(CliError::Config("scan.values: the scan list is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(CliError::Config(format!(
                "scan.values: entries must be finite and >= 0, got {v}"
            )));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtConfig {
    #[serde(default = "default_order")]
    pub order: usize,
    /// Number of leading modes written by `schmidt-modes`.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_sigma12_sq")]
    pub sigma12_sq: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_order() -> usize {
    DEFAULT_LAGUERRE_ORDER
}
fn default_modes() -> usize {
    4
}
fn default_sigma12_sq() -> f64 {
    1.33
}
fn default_x_max() -> f64 {
    10.0
}
fn default_samples() -> usize {
    201
}

impl Default for SchmidtConfig {
    fn default() -> Self {
        Self {
            order: default_order(),
            modes: default_modes(),
            sigma12_sq: default_sigma12_sq(),
            x_max: default_x_max(),
            samples: default_samples(),
        }
    }
}

/// One noise model with the dephasing factors to check against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McCase {
    pub label: String,
    pub params: KuboParams,
    pub dt: f64,
    pub horizon: f64,
    pub queries: Vec<Query>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    /// Empty means the built-in battery.
    #[serde(default)]
    pub battery: Vec<McCase>,
    /// Pass threshold on `|z|`.
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

fn default_n_traj() -> usize {
    100_000
}
fn default_z_max() -> f64 {
    3.0
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_traj: default_n_traj(),
            battery: Vec::new(),
            z_max: default_z_max(),
        }
    }
}

fn kubo(sigma: f64, tau: f64, sigma12_sq: f64) -> KuboParams {
    KuboParams {
        sigma1: sigma,
        sigma2: sigma,
        tau1: tau,
        tau2: tau,
        sigma12_sq,
        tau12: tau,
    }
}

fn pair(t1: f64, t1p: f64, t2: f64, t2p: f64) -> Query {
    Query::Pair(TimeQuad { t1, t1p, t2, t2p })
}

fn single(mode: Mode, t: f64, tp: f64) -> Query {
    Query::Single { mode, t, tp }
}

/// Twelve checks at `sigma tau` = 0.1, 1 and 10, each with a zero-length
/// window, an overlapping pair and a disjoint pair.
pub fn default_battery() -> Vec<McCase> {
    vec![
        McCase {
            label: "sigma_tau_0.1".into(),
            params: kubo(1.0, 0.1, 0.5),
            dt: 0.005,
            horizon: 1.0,
            queries: vec![
                single(Mode::One, 0.5, 0.1),
                single(Mode::Two, 0.3, 0.3),
                pair(0.6, 0.1, 0.5, 0.2),
                pair(0.3, 0.0, 0.9, 0.6),
            ],
        },
        McCase {
            label: "sigma_tau_1".into(),
            params: kubo(1.0, 1.0, 0.8),
            dt: 0.05,
            horizon: 4.0,
            queries: vec![
                single(Mode::One, 2.0, 0.5),
                single(Mode::One, 1.0, 1.0),
                pair(2.0, 0.5, 1.5, 1.0),
                pair(3.0, 2.0, 1.0, 0.0),
            ],
        },
        McCase {
            label: "sigma_tau_10".into(),
            params: kubo(10.0, 1.0, 80.0),
            dt: 0.01,
            horizon: 1.0,
            queries: vec![
                single(Mode::One, 0.2, 0.05),
                single(Mode::Two, 0.5, 0.5),
                pair(0.3, 0.1, 0.25, 0.05),
                pair(0.15, 0.0, 0.15, 0.0),
            ],
        },
    ]
}

pub fn parse_config(bytes: &[u8]) -> Result<RunConfig, CliError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })?;
    de.end()
        .map_err(|e| CliError::Config(format!("trailing characters: {e}")))?;
    Ok(cfg)
}

impl RunConfig {
    pub fn spectral2(&self) -> SpectralParams {
        self.spectral2.unwrap_or(self.spectral)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let ctx = |key: &'static str| move |e: biphoton::Error| CliError::Config(format!("{key}: {e}"));
        self.spectral.validate().map_err(ctx("spectral"))?;
        if let Some(p) = &self.spectral2 {
            p.validate().map_err(ctx("spectral2"))?;
        }
        for (i, c) in self.couplings.iter().enumerate() {
            c.validate()
                .map_err(|e| CliError::Config(format!("couplings[{i}]: {e}")))?;
        }
        self.grids()?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Config(format!("tol: must be > 0, got {}", self.tol)));
        }
        self.envelope.validate().map_err(ctx("envelope"))?;
        if let Some(scan) = &self.scan {
            scan.resolved_values()?;
            for (key, v) in [("scan.xi", scan.xi), ("scan.sigma_phase", scan.sigma_phase)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(CliError::Config(format!("{key}: must be >= 0, got {v}")));
                    }
                }
            }
        }
        let s = &self.schmidt;
        if !(2..=MAX_LAGUERRE_ORDER).contains(&s.order) {
            return Err(CliError::Config(format!(
                "schmidt.order: must be in 2..={MAX_LAGUERRE_ORDER}, got {}",
                s.order
            )));
        }
        if s.modes == 0 {
            return Err(CliError::Config("schmidt.modes: must be >= 1".into()));
        }
        if !(s.sigma12_sq.is_finite() && s.sigma12_sq >= 0.0) {
            return Err(CliError::Config(format!(
                "schmidt.sigma12_sq: must be >= 0, got {}",
                s.sigma12_sq
            )));
        }
        if !(s.x_max.is_finite() && s.x_max > 0.0) {
            return Err(CliError::Config(format!("schmidt.x_max: must be > 0, got {}", s.x_max)));
        }
        if !(2..=MAX_MODE_SAMPLES).contains(&s.samples) {
            return Err(CliError::Config(format!(
                "schmidt.samples: must be in 2..={MAX_MODE_SAMPLES}, got {}",
                s.samples
            )));
        }
        if self.mc.n_traj == 0 {
            return Err(CliError::Config("mc.n_traj: need at least one trajectory".into()));
        }
        if self.mc.z_max.is_nan() || self.mc.z_max <= 0.0 {
            return Err(CliError::Config("mc.z_max: must be > 0".into()));
        }
        for (i, case) in self.mc.battery.iter().enumerate() {
            self.mc_config(i, case)
                .validate()
                .map_err(|e| CliError::Config(format!("mc.battery[{i}]: {e}")))?;
            if case.queries.is_empty() {
                return Err(CliError::Config(format!("mc.battery[{i}].queries: empty")));
            }
        }
        Ok(())
    }

    pub fn grids(&self) -> Result<(FrequencyGrid, FrequencyGrid), CliError> {
        let g = &self.grid;
        if !(1..=MAX_GRID_POINTS).contains(&g.n) {
            return Err(CliError::Config(format!(
                "grid.n: must be in 1..={MAX_GRID_POINTS}, got {}",
                g.n
            )));
        }
        let make = |p: &SpectralParams| {
            let (lo, hi) = p.default_window();
            let (lo, hi) = (g.lo.unwrap_or(lo), g.hi.unwrap_or(hi));
            match g.rule {
                GridRule::GaussLegendre => FrequencyGrid::gauss_legendre(g.n, lo, hi),
                GridRule::Midpoint => FrequencyGrid::midpoint(g.n, lo, hi),
            }
            .map_err(|e| CliError::Config(format!("grid: {e}")))
        };
        Ok((make(&self.spectral)?, make(&self.spectral2())?))
    }

    pub fn battery(&self) -> Vec<McCase> {
        if self.mc.battery.is_empty() {
            default_battery()
        } else {
            self.mc.battery.clone()
        }
    }

    /// Sampler settings for battery entry `index`. Each entry gets its own
    /// seed so that the cases do not share noise realizations.
    pub fn mc_config(&self, index: usize, case: &McCase) -> biphoton::stochastic::McConfig {
        biphoton::stochastic::McConfig {
            params: case.params,
            dt: case.dt,
            horizon: case.horizon,
            n_traj: self.mc.n_traj,
            seed: self.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        }
    }
}
