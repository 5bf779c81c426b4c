//! Experiment configuration: everything multi-field lives in a JSON file so
//! runs are reproducible artifacts; flags are only paths and command choice.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: String,
    pub basis: BasisConfig,
    pub source: SourceConfig,
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    pub outputs: PathBuf,
    /// When sampling, also export the training points as samples.csv.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub export_samples: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeConfig>,
}

fn default_truncation() -> f64 {
    kvn_core::estimator::DEFAULT_TRUNCATION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisConfig {
    Monomial { max_degree: usize },
    Rff { n: usize, bandwidth: f64, seed: u64, taper: TaperConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaperConfig {
    ConservationLaw,
    Exponential { sharpness: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Samples { m: usize, seed: u64 },
    Quadrature { grid: usize },
    Trajectories { file: PathBuf, h: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenfunction_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigenfunction_indices: Vec<usize>,
}

fn default_threshold() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub times: Vec<f64>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default = "default_fit_samples")]
    pub fit_samples: usize,
    #[serde(default)]
    pub fit_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_count: Option<usize>,
    #[serde(default)]
    pub ensemble_seed: u64,
}

fn default_grid() -> usize {
    200
}

fn default_fit_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Gaussian { center: Vec<f64>, bandwidth: f64 },
    GaussianSuperposition { centers: Vec<Vec<f64>>, bandwidth: f64 },
    SqrtInvariantDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub t: f64,
    #[serde(default)]
    pub format: CircuitFormat,
    #[serde(default = "default_structure_tol")]
    pub structure_tolerance: f64,
}

fn default_structure_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitFormat {
    #[default]
    Text,
    QasmLite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    /// log10 of the sample counts, e.g. [2.0, 2.5, ..., 5.0].
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_exponents() -> Vec<f64> {
    vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]
}

fn default_seeds() -> u64 {
    10
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> kvn_core::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| kvn_core::KvnError::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> kvn_core::Result<()> {
        use kvn_core::KvnError;
        self.system.parse::<kvn_core::systems::SystemName>()?;
        match &self.source {
            SourceConfig::Samples { m, .. } if *m == 0 => {
                return Err(KvnError::Config(
                    "source.samples.m must be >= 1 (sampler precondition)".into(),
                ))
            }
            SourceConfig::Quadrature { grid } if *grid < 2 => {
                return Err(KvnError::Config(
                    "source.quadrature.grid must be >= 2 (midpoint rule precondition)".into(),
                ))
            }
            SourceConfig::Trajectories { h, .. } if *h <= 0.0 => {
                return Err(KvnError::Config(
                    "source.trajectories.h must be positive".into(),
                ))
            }
            _ => {}
        }
        match &self.basis {
            BasisConfig::Rff { n, bandwidth, .. } => {
                if *n == 0 {
                    return Err(KvnError::Config("basis.n must be >= 1".into()));
                }
                if *bandwidth <= 0.0 {
                    return Err(KvnError::Config("basis.bandwidth must be positive".into()));
                }
            }
            BasisConfig::Monomial { .. } => {}
        }
        if !(self.truncation >= 0.0) {
            return Err(KvnError::Config("truncation must be nonnegative".into()));
        }
        Ok(())
    }
}
