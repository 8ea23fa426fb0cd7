//! Experiment configuration: a TOML file whose defaults reproduce the
//! standard evaluation protocol, so a bare run needs no file at all.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vne_core::pso::{InitSampling, SwarmParams};
use vne_core::sim::EmbedderKind;
use vne_core::topology::{ServerProfile, VirtualNetParams};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub bucket_width: f64,
    pub out_dir: PathBuf,
    pub substrate: SubstrateConfig,
    pub workload: WorkloadConfig,
    pub embedder: EmbedderConfig,
    pub distributed: DistributedConfig,
    pub input: Option<InputConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            bucket_width: 1000.0,
            out_dir: PathBuf::from("out"),
            substrate: SubstrateConfig::default(),
            workload: WorkloadConfig::default(),
            embedder: EmbedderConfig::default(),
            distributed: DistributedConfig::default(),
            input: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubstrateConfig {
    pub nodes: usize,
    pub links: usize,
    pub bw_low: f64,
    pub bw_high: f64,
    pub profiles: Vec<ProfileConfig>,
}

impl Default for SubstrateConfig {
    fn default() -> Self {
        Self {
            nodes: 100,
            links: 500,
            bw_low: 50.0,
            bw_high: 150.0,
            profiles: vec![
                // HP ProLiant ML110 G4 and G5.
                ProfileConfig {
                    cpu: 3720.0,
                    power_baseline: 86.0,
                    power_full: 117.0,
                },
                ProfileConfig {
                    cpu: 5320.0,
                    power_baseline: 93.7,
                    power_full: 135.0,
                },
            ],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub cpu: f64,
    pub power_baseline: f64,
    pub power_full: f64,
}

impl From<&ProfileConfig> for ServerProfile {
    fn from(p: &ProfileConfig) -> Self {
        ServerProfile {
            cpu_capacity: p.cpu,
            power_baseline: p.power_baseline,
            power_full: p.power_full,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub requests: usize,
    /// Requests per 100 time units.
    pub arrival_rate: f64,
    pub lifetime_low: f64,
    pub lifetime_high: f64,
    pub size_low: usize,
    pub size_high: usize,
    pub connectivity: f64,
    pub cpu_choices: Vec<f64>,
    pub bw_low: f64,
    pub bw_high: f64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            requests: 1000,
            arrival_rate: 10.0,
            lifetime_low: 300.0,
            lifetime_high: 700.0,
            size_low: 2,
            size_high: 20,
            connectivity: 0.5,
            cpu_choices: vec![2500.0, 2000.0, 1000.0, 500.0],
            bw_low: 1.0,
            bw_high: 50.0,
        }
    }
}

impl WorkloadConfig {
    pub fn vn_params(&self) -> VirtualNetParams {
        VirtualNetParams {
            connectivity: self.connectivity,
            cpu_choices: self.cpu_choices.clone(),
            bw_low: self.bw_low,
            bw_high: self.bw_high,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedderConfig {
    /// eapso | greedy | distributed
    pub kind: String,
    pub population: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub max_hops: usize,
    pub backtrack_factor: usize,
    pub no_improvement_limit: usize,
    /// weighted | uniform
    pub init_sampling: String,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            kind: "eapso".into(),
            population: 30,
            iterations: 50,
            alpha: 1.0,
            max_hops: 2,
            backtrack_factor: 3,
            no_improvement_limit: 15,
            init_sampling: "weighted".into(),
        }
    }
}

impl EmbedderConfig {
    pub fn kind(&self) -> Result<EmbedderKind, CliError> {
        self.kind.parse().map_err(CliError::from)
    }

    pub fn swarm_params(&self) -> Result<SwarmParams, CliError> {
        let init_sampling = match self.init_sampling.as_str() {
            "weighted" => InitSampling::WeightedByResource,
            "uniform" => InitSampling::Uniform,
            other => {
                return Err(CliError::input(format!(
                    "unknown init_sampling {:?} (expected weighted or uniform)",
                    other
                )))
            }
        };
        Ok(SwarmParams {
            population: self.population,
            iterations: self.iterations,
            alpha: self.alpha,
            max_hops: self.max_hops,
            backtrack_factor: self.backtrack_factor,
            no_improvement_limit: self.no_improvement_limit,
            init_sampling,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistributedConfig {
    pub dc_count: usize,
    pub nodes_per_dc: usize,
    pub links_per_dc: usize,
    pub inter_bw_low: f64,
    pub inter_bw_high: f64,
}

impl Default for DistributedConfig {
    fn default() -> Self {
        Self {
            dc_count: 3,
            nodes_per_dc: 34,
            links_per_dc: 160,
            inter_bw_low: 50.0,
            inter_bw_high: 150.0,
        }
    }
}

/// Optional pre-generated inputs; when present, simulation loads these
/// instead of generating from the parameters above.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub substrate: PathBuf,
    /// Workload index CSV; virtual network files are resolved relative to
    /// its directory.
    pub workload: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::input(format!("cannot read config {}: {}", path.display(), e))
        })?;
        let config: Self = toml::from_str(&text)
            .map_err(|e| CliError::input(format!("config {}: {}", path.display(), e)))?;
        if let Some(input) = &config.input {
            for (label, file) in [
                ("substrate", &input.substrate),
                ("workload", &input.workload),
            ] {
                if !file.exists() {
                    return Err(CliError::input(format!(
                        "config references missing {} file {}",
                        label,
                        file.display()
                    )));
                }
            }
        }
        Ok(config)
    }

    pub fn profiles(&self) -> Vec<ServerProfile> {
        self.substrate
            .profiles
            .iter()
            .map(ServerProfile::from)
            .collect()
    }
}
