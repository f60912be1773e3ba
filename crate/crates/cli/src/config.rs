//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hypgraph_core::curvfunc::CurvatureFamily;
use hypgraph_core::solver::Shape;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Radial,
    Verify,
    Sigma0,
    Barriers,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Radial => "radial",
            Command::Verify => "verify",
            Command::Sigma0 => "sigma0",
            Command::Barriers => "barriers",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
    },
    Stadium {
        #[serde(default)]
        center: [f64; 2],
        half_length: f64,
        radius: f64,
    },
}

impl DomainSpec {
    pub fn shape(&self) -> Shape {
        match *self {
            DomainSpec::Disk { center, radius } => Shape::Disk { center, radius },
            DomainSpec::Ellipse { center, a, b } => Shape::Ellipse { center, a, b },
            DomainSpec::Stadium { center, half_length, radius } => Shape::Stadium { center, half_length, radius },
        }
    }
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack in `max w ≤ 1/σ`.
    pub gradient: f64,
    /// Slack in `min u ≥ ε`.
    pub height: f64,
    /// Slack in the circumscribed-sphere inclusion.
    pub inclusion: f64,
    /// `r₁` used for the boundary-angle envelope is the interior radius
    /// times `1 - r1_relative`.
    pub r1_relative: f64,
    /// Largest allowed `M₀` growth per ε stage; unset disables the check.
    pub m0_growth: Option<f64>,
    /// Newton residual tolerance.
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gradient: 1e-6, height: 1e-10, inclusion: 1e-9, r1_relative: 0.0, m0_growth: None, newton: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub h: Option<f64>,
    /// Dimension `n` of the radial problem.
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Radial mesh intervals.
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Checks that are computed and reported but do not decide the exit status.
    #[serde(default)]
    pub report_only: Vec<String>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Names of the estimate checks.
pub const CHECK_NAMES: [&str; 7] = [
    "gradient_bound",
    "height_floor",
    "boundary_angle_lower",
    "boundary_angle_upper",
    "max_principle",
    "circumscribed_inclusion",
    "m0_growth",
];

fn default_family() -> String {
    "mean".into()
}
fn default_dimension() -> usize {
    2
}
fn default_mesh() -> usize {
    2048
}
fn default_seed() -> u64 {
    42
}
fn default_samples() -> usize {
    10_000
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            domain: DomainSpec::default(),
            family: default_family(),
            sigma: None,
            eps: None,
            eps_schedule: None,
            h: None,
            dimension: default_dimension(),
            mesh: default_mesh(),
            seed: default_seed(),
            samples: default_samples(),
            tolerances: Tolerances::default(),
            report_only: Vec::new(),
            out: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s < 1.0) {
                return bad(format!("sigma must lie in (0,1), got {s}"));
            }
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("h must be positive, got {h}"));
            }
        }
        if self.eps.is_some() && self.eps_schedule.is_some() {
            return bad("give either eps or eps_schedule, not both".into());
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("eps must be positive, got {e}"));
            }
        }
        if let Some(s) = &self.eps_schedule {
            if s.is_empty() || s.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return bad("eps_schedule must be a nonempty list of positive values".into());
            }
            if s.windows(2).any(|w| !(w[1] < w[0])) {
                return bad("eps_schedule must be strictly decreasing".into());
            }
        }
        if let Err(e) = self.domain.shape().validate() {
            return bad(e.to_string());
        }
        let t = &self.tolerances;
        if [t.gradient, t.height, t.inclusion, t.newton].iter().any(|v| !(*v >= 0.0)) || !(0.0..1.0).contains(&t.r1_relative) {
            return bad("tolerances must be nonnegative and r1_relative below 1".into());
        }
        if matches!(t.m0_growth, Some(g) if !(g >= 1.0)) {
            return bad("m0_growth must be at least 1".into());
        }
        if let Some(name) = self.report_only.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
            return bad(format!("unknown check {name:?} in report_only"));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        match self.command {
            Command::Solve => {
                self.need_sigma()?;
                self.schedule()?;
                self.need_h()?;
                self.parsed_family(2)?;
            }
            Command::Radial => {
                self.need_sigma()?;
                self.schedule()?;
                if !matches!(self.domain, DomainSpec::Disk { .. }) {
                    return bad("radial runs need a disk domain".into());
                }
                if self.mesh < 4 {
                    return bad("mesh must be at least 4".into());
                }
                self.parsed_family(self.dimension)?;
            }
            Command::Barriers => {
                self.need_sigma()?;
                self.schedule()?;
            }
            Command::Verify | Command::Sigma0 => {}
        }
        Ok(())
    }

    pub fn need_sigma(&self) -> Result<f64, ConfigError> {
        self.sigma.ok_or_else(|| ConfigError::Invalid(format!("{} needs sigma", self.command.name())))
    }

    pub fn need_h(&self) -> Result<f64, ConfigError> {
        self.h.ok_or_else(|| ConfigError::Invalid(format!("{} needs h", self.command.name())))
    }

    /// The ε values to run, largest first.
    pub fn schedule(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.eps, &self.eps_schedule) {
            (Some(e), None) => Ok(vec![*e]),
            (None, Some(s)) => Ok(s.clone()),
            _ => Err(ConfigError::Invalid(format!("{} needs eps or eps_schedule", self.command.name()))),
        }
    }

    pub fn parsed_family(&self, n: usize) -> Result<CurvatureFamily, ConfigError> {
        CurvatureFamily::parse(&self.family, n).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
