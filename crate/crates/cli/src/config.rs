//! Experiment configuration: one TOML schema shared by every subcommand.

use std::path::{Path, PathBuf};

use gmfg_core::envs::{
    make_beach_env, make_cyber_env, make_hetero_cyber_env, BeachEnv, BeachParams, CyberEnv, CyberParams,
    HeteroCyberEnv, HeteroCyberParams,
};
use gmfg_core::{smooth_step, Environment, Graphon, Placement, StepFunction};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    // messages are inlined rather than chained so they print once
    #[error("cannot read config {path}: {err}")]
    Read { path: PathBuf, err: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(toml::de::Error),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentName {
    Cyber,
    HeteroCyber,
    Beach,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphonSpec {
    Constant {
        value: f64,
    },
    PowerLaw {
        exponent: f64,
    },
    CutoffPowerLaw {
        exponent: f64,
        cutoff: f64,
    },
    /// Equal parts unless `breakpoints` is given.
    Step {
        values: Vec<Vec<f64>>,
        #[serde(default)]
        breakpoints: Option<Vec<f64>>,
    },
    /// Equal-part step function blended linearly across its interior
    /// breakpoints.
    SmoothedStep {
        values: Vec<Vec<f64>>,
        border_width: f64,
    },
}

impl Default for GraphonSpec {
    fn default() -> Self {
        GraphonSpec::PowerLaw { exponent: 0.6 }
    }
}

impl GraphonSpec {
    pub fn build(&self) -> gmfg_core::Result<Graphon> {
        match self {
            GraphonSpec::Constant { value } => Graphon::constant(*value),
            GraphonSpec::PowerLaw { exponent } => Graphon::power_law(*exponent),
            GraphonSpec::CutoffPowerLaw { exponent, cutoff } => Graphon::cutoff_power_law(*exponent, *cutoff),
            GraphonSpec::Step { values, breakpoints } => {
                let step = match breakpoints {
                    Some(b) => StepFunction::new(values.clone(), b.clone())?,
                    None => StepFunction::uniform(values.clone())?,
                };
                Graphon::step(step)
            }
            GraphonSpec::SmoothedStep { values, border_width } => {
                smooth_step(&Graphon::step(StepFunction::uniform(values.clone())?)?, *border_width)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementName {
    IidUniform,
    Equispaced,
}

impl From<PlacementName> for Placement {
    fn from(p: PlacementName) -> Self {
        match p {
            PlacementName::IidUniform => Placement::IidUniform,
            PlacementName::Equispaced => Placement::Equispaced,
        }
    }
}

/// Policy played by the finite population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySource {
    /// Solve with OMD under the `[omd]` settings first.
    Equilibrium,
    Uniform,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Discretization {
    /// Defaults to 25, or 10 for the beach bar.
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmdConfig {
    pub gamma: f64,
    pub iterations: usize,
    pub eval_every: usize,
    /// Write wall-clock seconds into the trace; off keeps reruns identical.
    pub record_timing: bool,
}

impl Default for OmdConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            iterations: 200,
            eval_every: 1,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub betas: Vec<f64>,
    pub ns: Vec<usize>,
    pub samples: usize,
    pub placement: PlacementName,
    pub policy: PolicySource,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            betas: vec![0.51],
            ns: vec![8, 16, 32, 64, 128, 256],
            samples: 50,
            placement: PlacementName::Equispaced,
            policy: PolicySource::Equilibrium,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub beta: f64,
    pub placement: PlacementName,
    pub policy: PolicySource,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n: 100,
            beta: 0.51,
            placement: PlacementName::Equispaced,
            policy: PolicySource::Equilibrium,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphStatsConfig {
    pub n: usize,
    pub beta: f64,
    /// Overrides `n^-beta` when set.
    pub rho: Option<f64>,
    pub placement: PlacementName,
    /// Also write the sampled graph as `edges.txt`.
    pub write_edges: bool,
}

impl Default for GraphStatsConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            beta: 0.5,
            rho: None,
            placement: PlacementName::IidUniform,
            write_edges: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutNormConfig {
    /// Graphon subtracted from `[graphon]`.
    pub other: GraphonSpec,
    pub grid: usize,
    pub restarts: usize,
}

impl Default for CutNormConfig {
    fn default() -> Self {
        Self {
            other: GraphonSpec::Constant { value: 0.0 },
            grid: 64,
            restarts: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentName,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub graphon: GraphonSpec,
    pub discretization: Discretization,
    pub omd: OmdConfig,
    pub sweep: SweepConfig,
    pub simulate: SimulateConfig,
    pub graph_stats: GraphStatsConfig,
    pub cutnorm: CutNormConfig,
    pub cyber: CyberParams,
    pub hetero_cyber: HeteroCyberParams,
    pub beach: BeachParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environment: EnvironmentName::Cyber,
            seed: 0,
            out_dir: PathBuf::from("out"),
            graphon: GraphonSpec::default(),
            discretization: Discretization::default(),
            omd: OmdConfig::default(),
            sweep: SweepConfig::default(),
            simulate: SimulateConfig::default(),
            graph_stats: GraphStatsConfig::default(),
            cutnorm: CutNormConfig::default(),
            cyber: CyberParams::default(),
            hetero_cyber: HeteroCyberParams::default(),
            beach: BeachParams::default(),
        }
    }
}

/// The environment selected by a config.
pub enum AnyEnv {
    Cyber(CyberEnv),
    HeteroCyber(HeteroCyberEnv),
    Beach(BeachEnv),
}

impl AnyEnv {
    pub fn as_dyn(&self) -> &dyn Environment {
        match self {
            AnyEnv::Cyber(e) => e,
            AnyEnv::HeteroCyber(e) => e,
            AnyEnv::Beach(e) => e,
        }
    }
}

fn check_beta(field: &'static str, beta: f64) -> Result<(), ConfigError> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(invalid(
            field,
            format!("{beta} is out of range: beta must lie in (0,1)"),
        ))
    }
}

impl ExperimentConfig {
    pub fn classes(&self) -> usize {
        self.discretization.classes.unwrap_or(match self.environment {
            EnvironmentName::Beach => 10,
            _ => 25,
        })
    }

    pub fn build_env(&self) -> gmfg_core::Result<AnyEnv> {
        Ok(match self.environment {
            EnvironmentName::Cyber => AnyEnv::Cyber(make_cyber_env(self.cyber.clone())?),
            EnvironmentName::HeteroCyber => AnyEnv::HeteroCyber(make_hetero_cyber_env(self.hetero_cyber.clone())?),
            EnvironmentName::Beach => AnyEnv::Beach(make_beach_env(self.beach.clone())?),
        })
    }

    /// Checks every bound that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let env_name = match self.environment {
            EnvironmentName::Cyber => "cyber",
            EnvironmentName::HeteroCyber => "hetero_cyber",
            EnvironmentName::Beach => "beach",
        };
        self.build_env()
            .map_err(|e| invalid("environment", format!("{env_name}: {e}")))?;
        self.graphon.build().map_err(|e| invalid("graphon", e.to_string()))?;
        self.cutnorm
            .other
            .build()
            .map_err(|e| invalid("cutnorm.other", e.to_string()))?;
        if self.classes() == 0 {
            return Err(invalid("discretization.classes", "must be >= 1"));
        }
        let o = &self.omd;
        if !(o.gamma > 0.0 && o.gamma.is_finite()) {
            return Err(invalid(
                "omd.gamma",
                format!("{} is out of range: gamma must be > 0", o.gamma),
            ));
        }
        if o.eval_every == 0 {
            return Err(invalid("omd.eval_every", "must be >= 1"));
        }
        let s = &self.sweep;
        if s.betas.is_empty() {
            return Err(invalid("sweep.betas", "list must not be empty"));
        }
        if s.ns.is_empty() {
            return Err(invalid("sweep.ns", "list must not be empty"));
        }
        if s.ns.contains(&0) {
            return Err(invalid("sweep.ns", "every N must be >= 1"));
        }
        for &b in &s.betas {
            check_beta("sweep.betas", b)?;
        }
        if s.samples < 2 {
            return Err(invalid("sweep.samples", "must be >= 2"));
        }
        if self.simulate.n == 0 {
            return Err(invalid("simulate.n", "must be >= 1"));
        }
        check_beta("simulate.beta", self.simulate.beta)?;
        let g = &self.graph_stats;
        if g.n == 0 {
            return Err(invalid("graph_stats.n", "must be >= 1"));
        }
        match g.rho {
            Some(rho) if !(rho > 0.0 && rho.is_finite()) => {
                return Err(invalid(
                    "graph_stats.rho",
                    format!("{rho} is out of range: rho must be > 0"),
                ))
            }
            Some(_) => {}
            None => check_beta("graph_stats.beta", g.beta)?,
        }
        if self.cutnorm.grid == 0 || self.cutnorm.restarts == 0 {
            return Err(invalid("cutnorm", "grid and restarts must be >= 1"));
        }
        Ok(())
    }

    /// Short SHA-256 digest of the fully resolved config. The output
    /// directory is left out so relocated reruns stay byte-identical.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        let text = toml::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(ConfigError::Parse)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Read {
        path: path.to_path_buf(),
        err,
    })?;
    parse_config(&text)
}
