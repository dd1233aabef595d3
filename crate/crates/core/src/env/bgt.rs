use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{compute_reward, EnvError, Environment, RewardConfig, RoundResult};
use crate::neuro::{init_network_with, Condition, ModelParams, NetworkState};
use crate::signal::{region_beta_power, BetaMethod, BetaPath, BetaPower};
use crate::stim::{build_arm_space, generate_pulse_train, ArmId, ArmSpace, StimParams, DEFAULT_DT_MS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BgtEnvConfig {
    pub condition: Condition,
    pub n_per_region: usize,
    /// Unstimulated settling time before the baseline, ms.
    pub warm_in_ms: f64,
    /// Unstimulated rounds averaged into the beta power reference.
    pub baseline_rounds: usize,
    pub round_ms: f64,
    pub dt_ms: f64,
    pub beta_path: BetaPath,
    pub beta_method: BetaMethod,
    /// Fixed beta power reference; when absent the baseline mean is used.
    pub p_beta_norm_ref: Option<f64>,
    /// Keep per-round traces in [`RoundResult::observation`].
    pub keep_observations: bool,
}

impl Default for BgtEnvConfig {
    fn default() -> Self {
        Self {
            condition: Condition::Pd,
            n_per_region: 10,
            warm_in_ms: 2000.0,
            baseline_rounds: 5,
            round_ms: 1000.0,
            dt_ms: DEFAULT_DT_MS,
            beta_path: BetaPath::LfpFirst,
            beta_method: BetaMethod::Bulk,
            p_beta_norm_ref: None,
            keep_observations: false,
        }
    }
}

impl BgtEnvConfig {
    pub fn sampling_rate(&self) -> f64 {
        1000.0 / self.dt_ms
    }
}

/// Environment backed by the full network simulation. State carries over
/// from round to round, so the same arm played twice sees different
/// network conditions.
#[derive(Debug, Clone)]
pub struct BgtEnv {
    cfg: BgtEnvConfig,
    space: ArmSpace,
    net: NetworkState,
    reward_cfg: RewardConfig,
    baseline: Vec<f64>,
}

impl BgtEnv {
    pub fn new(cfg: BgtEnvConfig, seed: u64) -> Result<Self, EnvError> {
        Self::with_params(Arc::new(ModelParams::default()), cfg, RewardConfig::default(), seed)
    }

    /// Builds the network, settles it and measures the unstimulated baseline.
    pub fn with_params(
        params: Arc<ModelParams>,
        cfg: BgtEnvConfig,
        reward: RewardConfig,
        seed: u64,
    ) -> Result<Self, EnvError> {
        if !(cfg.round_ms > 0.0 && cfg.dt_ms > 0.0 && cfg.warm_in_ms >= 0.0) {
            return Err(EnvError::Config(format!(
                "round {} ms, dt {} ms and warm-in {} ms must be positive",
                cfg.round_ms, cfg.dt_ms, cfg.warm_in_ms
            )));
        }
        if cfg.p_beta_norm_ref.is_none() && cfg.baseline_rounds == 0 {
            return Err(EnvError::Config("need baseline rounds or a fixed beta power reference".into()));
        }
        let mut net = init_network_with(params, cfg.condition, cfg.n_per_region, seed)?;
        if cfg.warm_in_ms > 0.0 {
            net.warm_up(cfg.warm_in_ms, cfg.dt_ms)?;
        }
        let mut env = Self { cfg, space: build_arm_space(), net, reward_cfg: reward, baseline: Vec::new() };
        let off = generate_pulse_train(StimParams::OFF, env.cfg.round_ms, env.cfg.dt_ms)?;
        for _ in 0..env.cfg.baseline_rounds {
            let obs = env.net.run_round(&off, env.cfg.round_ms)?;
            let p = env.beta_of(&obs.gpi_traces)?;
            env.baseline.push(p.value);
        }
        let reference = match env.cfg.p_beta_norm_ref {
            Some(r) => r,
            None => env.baseline.iter().sum::<f64>() / env.baseline.len() as f64,
        };
        if !(reference > 0.0) {
            return Err(EnvError::Config(format!("beta power reference must be positive, got {reference}")));
        }
        env.reward_cfg.p_beta_norm_ref = reference;
        Ok(env)
    }

    fn beta_of(&self, gpi: &[Vec<f64>]) -> Result<BetaPower, EnvError> {
        Ok(region_beta_power(gpi, self.cfg.sampling_rate(), self.cfg.beta_path, self.cfg.beta_method)?)
    }

    pub fn config(&self) -> &BgtEnvConfig {
        &self.cfg
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward_cfg
    }

    /// Beta power of each baseline round.
    pub fn baseline(&self) -> &[f64] {
        &self.baseline
    }

    pub fn network(&self) -> &NetworkState {
        &self.net
    }

    /// Plays explicit stimulation parameters, on or off the grid.
    pub fn play_params(&mut self, params: StimParams) -> Result<RoundResult, EnvError> {
        let arm = self.space.find(params).unwrap_or(ArmId(usize::MAX));
        self.run(arm, params)
    }

    fn run(&mut self, arm: ArmId, params: StimParams) -> Result<RoundResult, EnvError> {
        let train = generate_pulse_train(params, self.cfg.round_ms, self.cfg.dt_ms)?;
        let obs = self.net.run_round(&train, self.cfg.round_ms)?;
        let p_beta = self.beta_of(&obs.gpi_traces)?;
        let reward = compute_reward(p_beta.value, &obs.i_dbs, obs.dt, &self.reward_cfg);
        Ok(RoundResult { arm, params, reward, p_beta, observation: self.cfg.keep_observations.then_some(obs) })
    }
}

impl Environment for BgtEnv {
    fn arm_space(&self) -> &ArmSpace {
        &self.space
    }

    fn play(&mut self, arm: ArmId) -> Result<RoundResult, EnvError> {
        let params = self.space.get(arm).ok_or(EnvError::UnknownArm(arm))?;
        self.run(arm, params)
    }

    fn p_beta_reference(&self) -> f64 {
        self.reward_cfg.p_beta_norm_ref
    }
}
