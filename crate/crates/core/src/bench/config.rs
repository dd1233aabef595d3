use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BenchError;
use crate::env::BgtEnvConfig;
use crate::policy::PolicyParams;
use crate::stim::{StimParams, DEFAULT_DT_MS};

/// Reference arm used for regret when nothing better is known.
pub const DEFAULT_OPTIMAL_ARM: StimParams = StimParams { frequency: 155.0, amplitude: 1000.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    /// Calibrated stand-in; `spec = None` uses the bundled table.
    Surrogate {
        #[serde(default)]
        spec: Option<PathBuf>,
    },
    /// Full network simulation.
    Bgt {
        /// Model parameter file; the bundled parameters when absent.
        #[serde(default)]
        params: Option<PathBuf>,
        #[serde(default)]
        network: BgtEnvConfig,
    },
}

impl Default for EnvSpec {
    fn default() -> Self {
        EnvSpec::Surrogate { spec: None }
    }
}

impl EnvSpec {
    pub fn label(&self) -> &'static str {
        match self {
            EnvSpec::Surrogate { .. } => "surrogate",
            EnvSpec::Bgt { .. } => "bgt",
        }
    }
}

/// Prune `arm` from the policy right after round `round` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intervention {
    pub round: usize,
    /// Arm to remove; the experiment's optimal arm when absent.
    #[serde(default)]
    pub arm: Option<StimParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvSpec,
    pub policy: PolicyParams,
    pub rounds: usize,
    pub seeds: Vec<u64>,
    pub round_length_ms: f64,
    pub dt_ms: f64,
    pub sampling_rate_hz: f64,
    /// Regret reference. Defaults to the environment's best known arm, or
    /// [`DEFAULT_OPTIMAL_ARM`] when the environment has no arm means.
    pub optimal_arm: Option<StimParams>,
    pub interventions: Vec<Intervention>,
    /// Surrogate-format table whose reward means serve as the regret means
    /// of a network environment.
    pub arm_means: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            environment: EnvSpec::default(),
            policy: PolicyParams::t3p(),
            rounds: 75,
            seeds: (0..10).collect(),
            round_length_ms: 1000.0,
            dt_ms: DEFAULT_DT_MS,
            sampling_rate_hz: 100_000.0,
            optimal_arm: None,
            interventions: Vec::new(),
            arm_means: None,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, BenchError> {
        let cfg: Self = toml::from_str(s).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, BenchError> {
        toml::to_string(self).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.rounds == 0 {
            return Err(BenchError::Config("rounds must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::Config("seeds must not be empty".into()));
        }
        if !(self.round_length_ms > 0.0 && self.dt_ms > 0.0) {
            return Err(BenchError::Config("round length and dt must be positive".into()));
        }
        if !((self.sampling_rate_hz * self.dt_ms / 1000.0 - 1.0).abs() < 1e-9) {
            return Err(BenchError::Config(format!(
                "sampling rate {} Hz does not match dt {} ms",
                self.sampling_rate_hz, self.dt_ms
            )));
        }
        if let EnvSpec::Bgt { network, .. } = &self.environment {
            if network.round_ms != self.round_length_ms || network.dt_ms != self.dt_ms {
                return Err(BenchError::Config(format!(
                    "network round {} ms / dt {} ms disagree with the experiment's {} ms / {} ms",
                    network.round_ms, network.dt_ms, self.round_length_ms, self.dt_ms
                )));
            }
        }
        for ev in &self.interventions {
            if ev.round == 0 || ev.round >= self.rounds {
                return Err(BenchError::Config(format!(
                    "intervention round {} must lie in 1..{}",
                    ev.round, self.rounds
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 over the config serialized as JSON with sorted keys.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("json value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
