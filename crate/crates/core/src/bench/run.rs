use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BenchError, EnvSpec, ExperimentConfig, DEFAULT_OPTIMAL_ARM};
use crate::env::{BgtEnv, BgtEnvConfig, Environment, RewardConfig, SurrogateEnv, SurrogateSpec};
use crate::neuro::ModelParams;
use crate::policy::{Phase, Policy, PolicyParams, T3p};
use crate::stim::{build_arm_space, ArmId, ArmSpace, StimParams};

/// One played round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// 1-based.
    pub round: usize,
    pub arm: usize,
    pub frequency: f64,
    pub amplitude: f64,
    /// Exploration rate behind this selection, for policies that have one.
    pub epsilon: Option<f64>,
    pub phase: Phase,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub reward: f64,
    pub p_beta: f64,
    /// Mean reward of the optimal arm minus that of the played arm.
    pub regret: Option<f64>,
    /// Arm the policy would exploit after this round's update.
    pub greedy: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub fingerprint: String,
    pub code_version: String,
    pub optimal_arm: ArmId,
    /// Expected reward per arm used for regret, when known.
    pub arm_means: Option<Vec<f64>>,
    /// Ordered by seed (in config order), then round.
    pub records: Vec<RunRecord>,
}

impl RunLog {
    pub fn seeds(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for r in &self.records {
            if out.last() != Some(&r.seed) {
                out.push(r.seed);
            }
        }
        out
    }

    pub fn seed_records(&self, seed: u64) -> impl Iterator<Item = &RunRecord> + '_ {
        self.records.iter().filter(move |r| r.seed == seed)
    }
}

/// Environment inputs resolved once per experiment and shared by all seeds.
#[derive(Debug, Clone)]
pub enum PreparedEnv {
    Surrogate(Arc<SurrogateSpec>),
    Bgt { params: Arc<ModelParams>, cfg: BgtEnvConfig, means: Option<Vec<f64>> },
}

impl PreparedEnv {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, BenchError> {
        let means_table = cfg.arm_means.as_ref().map(SurrogateSpec::load).transpose()?;
        Ok(match &cfg.environment {
            EnvSpec::Surrogate { spec } => {
                let spec = match spec {
                    Some(path) => SurrogateSpec::load(path)?,
                    None => SurrogateSpec::bundled(),
                };
                PreparedEnv::Surrogate(Arc::new(spec))
            }
            EnvSpec::Bgt { params, network } => {
                let params = match params {
                    Some(path) => ModelParams::load(path)?,
                    None => ModelParams::default(),
                };
                PreparedEnv::Bgt {
                    params: Arc::new(params),
                    cfg: network.clone(),
                    means: means_table.as_ref().map(SurrogateSpec::reward_means),
                }
            }
        })
    }

    pub fn arm_means(&self) -> Option<Vec<f64>> {
        match self {
            PreparedEnv::Surrogate(spec) => Some(spec.reward_means()),
            PreparedEnv::Bgt { means, .. } => means.clone(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn Environment>, BenchError> {
        Ok(match self {
            PreparedEnv::Surrogate(spec) => Box::new(SurrogateEnv::new(spec.clone(), seed)),
            PreparedEnv::Bgt { params, cfg, .. } => {
                Box::new(BgtEnv::with_params(params.clone(), cfg.clone(), RewardConfig::default(), seed)?)
            }
        })
    }

    /// Override if given, else the best known arm, else [`DEFAULT_OPTIMAL_ARM`].
    pub fn optimal_arm(&self, space: &ArmSpace, over: Option<StimParams>) -> Result<ArmId, BenchError> {
        let find = |p: StimParams| space.find(p).ok_or_else(|| BenchError::Config(format!("{p} is not a grid arm")));
        match (over, self.arm_means()) {
            (Some(p), _) => find(p),
            (None, Some(means)) => Ok(argmax(&means)),
            (None, None) => find(DEFAULT_OPTIMAL_ARM),
        }
    }
}

pub(crate) fn argmax(xs: &[f64]) -> ArmId {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    ArmId(best)
}

/// Policy stream derived from the run seed so it never coincides with the
/// environment stream.
fn policy_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn build_policy(
    params: &PolicyParams,
    n_arms: usize,
    seed: u64,
    beta_scale: f64,
) -> Result<Box<dyn Policy>, BenchError> {
    Ok(match params {
        PolicyParams::T3p(cfg) => Box::new(T3p::new(*cfg, n_arms, policy_seed(seed))?.with_beta_scale(beta_scale)),
        other => other.build(n_arms, policy_seed(seed))?,
    })
}

/// Runs every seed with a fresh environment and policy. Seeds run in
/// parallel; the log is assembled in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunLog, BenchError> {
    cfg.validate()?;
    let prepared = PreparedEnv::from_config(cfg)?;
    run_prepared(cfg, &prepared)
}

pub(crate) fn run_prepared(cfg: &ExperimentConfig, prepared: &PreparedEnv) -> Result<RunLog, BenchError> {
    let space = build_arm_space();
    let optimal = prepared.optimal_arm(&space, cfg.optimal_arm)?;
    let means = prepared.arm_means();
    let mut events = Vec::with_capacity(cfg.interventions.len());
    for ev in &cfg.interventions {
        let arm = match ev.arm {
            Some(p) => space.find(p).ok_or_else(|| BenchError::Config(format!("{p} is not a grid arm")))?,
            None => optimal,
        };
        events.push((ev.round, arm));
    }

    let per_seed: Vec<Result<Vec<RunRecord>, BenchError>> =
        cfg.seeds.par_iter().map(|&seed| run_seed(cfg, prepared, seed, optimal, means.as_deref(), &events)).collect();
    let mut records = Vec::with_capacity(cfg.rounds * cfg.seeds.len());
    for r in per_seed {
        records.extend(r?);
    }
    Ok(RunLog {
        fingerprint: cfg.fingerprint(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        optimal_arm: optimal,
        arm_means: means,
        records,
    })
}

fn run_seed(
    cfg: &ExperimentConfig,
    prepared: &PreparedEnv,
    seed: u64,
    optimal: ArmId,
    means: Option<&[f64]>,
    events: &[(usize, ArmId)],
) -> Result<Vec<RunRecord>, BenchError> {
    let mut env = prepared.build(seed)?;
    let n_arms = env.arm_space().len();
    let mut policy = build_policy(&cfg.policy, n_arms, seed, env.p_beta_reference())?;
    let mut out = Vec::with_capacity(cfg.rounds);
    for round in 1..=cfg.rounds {
        let arm = policy.select();
        let epsilon = policy.epsilon();
        let phase = policy.phase();
        let res = env.play(arm)?;
        policy.update(arm, res.reward.total, res.p_beta.value);
        for &(_, target) in events.iter().filter(|(r, _)| *r == round) {
            policy.prune(target)?;
        }
        out.push(RunRecord {
            seed,
            round,
            arm: arm.0,
            frequency: res.params.frequency,
            amplitude: res.params.amplitude,
            epsilon,
            phase,
            r1: res.reward.r1,
            r2: res.reward.r2,
            r3: res.reward.r3,
            reward: res.reward.total,
            p_beta: res.p_beta.value,
            regret: means.map(|m| m[optimal.0] - m[arm.0]),
            greedy: policy.greedy_arm().0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig { seeds, ..ExperimentConfig::default() }
    }

    #[test]
    fn one_record_per_seed_and_round() {
        let log = run_experiment(&cfg((0..10).collect())).unwrap();
        assert_eq!(log.records.len(), 750);
        for (i, r) in log.records.iter().enumerate() {
            assert_eq!(r.seed, (i / 75) as u64);
            assert_eq!(r.round, i % 75 + 1);
        }
        assert_eq!(log.seeds(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn rerun_is_identical() {
        let c = cfg(vec![3, 1, 4]);
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }

    #[test]
    fn t3p_warmup_is_in_id_order() {
        let log = run_experiment(&cfg(vec![7])).unwrap();
        let arms: Vec<usize> = log.records.iter().take(31).map(|r| r.arm).collect();
        assert_eq!(arms, (0..31).collect::<Vec<_>>());
        assert!(log.records.iter().take(31).all(|r| r.phase == Phase::Warmup));
    }

    #[test]
    fn optimal_defaults_to_surrogate_argmax() {
        let spec = SurrogateSpec::bundled();
        let log = run_experiment(&cfg(vec![0])).unwrap();
        assert_eq!(log.optimal_arm, spec.optimal_arm());
        let over = ExperimentConfig { optimal_arm: Some(DEFAULT_OPTIMAL_ARM), ..cfg(vec![0]) };
        let log = run_experiment(&over).unwrap();
        assert_eq!(build_arm_space().get(log.optimal_arm), Some(DEFAULT_OPTIMAL_ARM));
    }

    #[test]
    fn off_grid_override_rejected() {
        let c = ExperimentConfig { optimal_arm: Some(StimParams::new(140.0, 1000.0)), ..cfg(vec![0]) };
        assert!(matches!(run_experiment(&c), Err(BenchError::Config(_))));
    }
}
