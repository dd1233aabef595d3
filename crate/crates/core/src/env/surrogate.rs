use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BgtEnv, BgtEnvConfig, EnvError, Environment, RewardBreakdown, RewardConfig, RoundResult};
use crate::neuro::ModelParams;
use crate::signal::{BetaPower, BETA_HIGH_HZ, BETA_LOW_HZ};
use crate::stim::{build_arm_space, ArmId, ArmSpace, StimParams};

/// Fewest rounds per arm accepted by [`calibrate_surrogate`].
pub const MIN_CALIBRATION_ROUNDS: usize = 3;

const DEFAULT_SPEC: &str = include_str!("../../data/surrogate_default.toml");

/// Where a surrogate table came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub model_version: String,
    pub seeds: Vec<u64>,
    pub rounds_per_arm: usize,
    pub env: BgtEnvConfig,
    pub dbs_gain: f64,
    /// Mean unstimulated beta power over all seeds.
    pub p_beta_ref: f64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateArm {
    pub id: usize,
    pub frequency: f64,
    pub amplitude: f64,
    pub reward_mean: f64,
    pub reward_std: f64,
    pub pbeta_mean: f64,
    pub pbeta_std: f64,
}

impl SurrogateArm {
    pub fn params(&self) -> StimParams {
        StimParams::new(self.frequency, self.amplitude)
    }
}

/// Per-arm reward and beta power distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateSpec {
    pub provenance: Provenance,
    pub arm: Vec<SurrogateArm>,
}

impl SurrogateSpec {
    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_toml_str(DEFAULT_SPEC).expect("bundled surrogate spec is valid")
    }

    pub fn from_toml_str(s: &str) -> Result<Self, EnvError> {
        let spec: Self = toml::from_str(s).map_err(|e| EnvError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EnvError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| EnvError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, EnvError> {
        toml::to_string(self).map_err(|e| EnvError::Spec(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EnvError> {
        let path = path.as_ref();
        let text = self.to_toml_string()?;
        std::fs::write(path, text).map_err(|source| EnvError::Io { path: path.display().to_string(), source })
    }

    /// Checks that the records cover the arm grid in order with finite,
    /// non-negative statistics and a unique best arm.
    pub fn validate(&self) -> Result<(), EnvError> {
        let space = build_arm_space();
        if self.arm.len() != space.len() {
            return Err(EnvError::Spec(format!("expected {} arms, found {}", space.len(), self.arm.len())));
        }
        for (i, (rec, params)) in self.arm.iter().zip(space.arms()).enumerate() {
            if rec.id != i || rec.params() != *params {
                return Err(EnvError::Spec(format!(
                    "record {i} is {} ({}), expected arm {i} ({params})",
                    rec.id,
                    rec.params()
                )));
            }
            let stats = [rec.reward_mean, rec.reward_std, rec.pbeta_mean, rec.pbeta_std];
            if stats.iter().any(|x| !x.is_finite())
                || rec.reward_std < 0.0
                || rec.pbeta_std < 0.0
                || rec.pbeta_mean < 0.0
            {
                return Err(EnvError::Spec(format!("arm {i} has invalid statistics")));
            }
        }
        if !(self.provenance.p_beta_ref > 0.0) {
            return Err(EnvError::Spec("provenance p_beta_ref must be positive".into()));
        }
        let best = self.arm.iter().map(|a| a.reward_mean).fold(f64::NEG_INFINITY, f64::max);
        let n_best = self.arm.iter().filter(|a| a.reward_mean == best).count();
        if n_best != 1 {
            return Err(EnvError::Spec(format!("{n_best} arms share the highest mean reward {best}")));
        }
        Ok(())
    }

    pub fn optimal_arm(&self) -> ArmId {
        let best = self
            .arm
            .iter()
            .max_by(|a, b| a.reward_mean.total_cmp(&b.reward_mean))
            .expect("validated spec is not empty");
        ArmId(best.id)
    }

    pub fn reward_means(&self) -> Vec<f64> {
        self.arm.iter().map(|a| a.reward_mean).collect()
    }

    /// Arm ids sorted by mean reward, best first.
    pub fn ranking(&self) -> Vec<ArmId> {
        let mut ids: Vec<usize> = (0..self.arm.len()).collect();
        ids.sort_by(|&a, &b| self.arm[b].reward_mean.total_cmp(&self.arm[a].reward_mean));
        ids.into_iter().map(ArmId).collect()
    }
}

/// Fast stand-in for the network: each play draws one standard normal
/// `z` and reports `reward = mean_r - std_r * z` and
/// `p_beta = mean_p + std_p * z`, so a noisy high-beta round is also a low
/// reward round. Rewards are clipped to the reachable range.
#[derive(Debug, Clone)]
pub struct SurrogateEnv {
    spec: Arc<SurrogateSpec>,
    space: ArmSpace,
    reward_cfg: RewardConfig,
    rng: ChaCha8Rng,
}

impl SurrogateEnv {
    pub fn new(spec: Arc<SurrogateSpec>, seed: u64) -> Self {
        let reward_cfg = RewardConfig::default().with_p_beta_ref(spec.provenance.p_beta_ref);
        Self { spec, space: build_arm_space(), reward_cfg, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn spec(&self) -> &SurrogateSpec {
        &self.spec
    }
}

impl Environment for SurrogateEnv {
    fn arm_space(&self) -> &ArmSpace {
        &self.space
    }

    fn play(&mut self, arm: ArmId) -> Result<RoundResult, EnvError> {
        let params = self.space.get(arm).ok_or(EnvError::UnknownArm(arm))?;
        let rec = &self.spec.arm[arm.0];
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let cfg = &self.reward_cfg;
        let lo = cfg.alpha.min(0.0) + cfg.gamma.min(0.0);
        let hi = cfg.beta.max(0.0);
        let total = (rec.reward_mean - rec.reward_std * z).clamp(lo, hi);
        let p_beta = (rec.pbeta_mean + rec.pbeta_std * z).max(0.0);
        // r2 and r3 follow from the waveform; r1 is whatever remains of the drawn total.
        let r2 = 1.0 - params.ideal_duty_cycle();
        let r3 = (params.ideal_rms() / cfg.i_rms_norm_ref).clamp(0.0, 1.0);
        let r1 = ((total - cfg.beta * r2 - cfg.gamma * r3) / cfg.alpha).clamp(0.0, 1.0);
        Ok(RoundResult {
            arm,
            params,
            reward: RewardBreakdown { r1, r2, r3, total },
            p_beta: BetaPower {
                value: p_beta,
                band: (BETA_LOW_HZ, BETA_HIGH_HZ),
                method: self.spec.provenance.env.beta_method,
            },
            observation: None,
        })
    }

    fn p_beta_reference(&self) -> f64 {
        self.spec.provenance.p_beta_ref
    }

    fn arm_means(&self) -> Option<Vec<f64>> {
        Some(self.spec.reward_means())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Summarizes recorded rounds into a surrogate table. Every grid arm needs
/// at least three rounds; standard deviations are sample (n - 1) estimates.
pub fn calibrate_surrogate(
    runs: &BTreeMap<ArmId, Vec<RoundResult>>,
    provenance: Provenance,
) -> Result<SurrogateSpec, EnvError> {
    let space = build_arm_space();
    let mut arm = Vec::with_capacity(space.len());
    for id in space.ids() {
        let rounds = runs.get(&id).map_or(&[][..], |v| v.as_slice());
        if rounds.len() < MIN_CALIBRATION_ROUNDS {
            return Err(EnvError::InsufficientData { arm: id, found: rounds.len(), needed: MIN_CALIBRATION_ROUNDS });
        }
        let rewards: Vec<f64> = rounds.iter().map(|r| r.reward.total).collect();
        let betas: Vec<f64> = rounds.iter().map(|r| r.p_beta.value).collect();
        let (reward_mean, reward_std) = mean_std(&rewards);
        let (pbeta_mean, pbeta_std) = mean_std(&betas);
        let params = space.get(id).expect("id from the space");
        arm.push(SurrogateArm {
            id: id.0,
            frequency: params.frequency,
            amplitude: params.amplitude,
            reward_mean,
            reward_std,
            pbeta_mean,
            pbeta_std,
        });
    }
    let spec = SurrogateSpec { provenance, arm };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub seeds: Vec<u64>,
    pub rounds_per_arm: usize,
    pub env: BgtEnvConfig,
    #[serde(skip)]
    pub params: Option<Arc<ModelParams>>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { seeds: (0..10).collect(), rounds_per_arm: 4, env: BgtEnvConfig::default(), params: None }
    }
}

/// Runs the network for every arm and seed and summarizes the rounds.
///
/// Each seed settles once; every arm then starts from a copy of that settled
/// state and is played for `rounds_per_arm` consecutive rounds. Seeds run in
/// parallel and are merged in seed order, so the result does not depend on
/// the thread count.
pub fn calibrate_from_bgt(cfg: &CalibrationConfig) -> Result<SurrogateSpec, EnvError> {
    if cfg.seeds.is_empty() {
        return Err(EnvError::Config("calibration needs at least one seed".into()));
    }
    let params = cfg.params.clone().unwrap_or_else(|| Arc::new(ModelParams::default()));
    let per_seed: Vec<Result<(f64, Vec<Vec<RoundResult>>), EnvError>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let base = BgtEnv::with_params(params.clone(), cfg.env.clone(), RewardConfig::default(), seed)?;
            let mut arms = Vec::new();
            for id in base.arm_space().ids() {
                let mut env = base.clone();
                let rounds = (0..cfg.rounds_per_arm).map(|_| env.play(id)).collect::<Result<Vec<_>, _>>()?;
                arms.push(rounds);
            }
            Ok((base.p_beta_reference(), arms))
        })
        .collect();

    let mut runs: BTreeMap<ArmId, Vec<RoundResult>> = BTreeMap::new();
    let mut refs = Vec::new();
    for res in per_seed {
        let (reference, arms) = res?;
        refs.push(reference);
        for (i, rounds) in arms.into_iter().enumerate() {
            runs.entry(ArmId(i)).or_default().extend(rounds);
        }
    }
    let provenance = Provenance {
        model_version: params.version.clone(),
        seeds: cfg.seeds.clone(),
        rounds_per_arm: cfg.rounds_per_arm,
        env: cfg.env.clone(),
        dbs_gain: params.drive.dbs_gain,
        p_beta_ref: refs.iter().sum::<f64>() / refs.len() as f64,
        note: String::new(),
    };
    calibrate_surrogate(&runs, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::BetaMethod;

    fn provenance() -> Provenance {
        Provenance {
            model_version: "test".into(),
            seeds: vec![1],
            rounds_per_arm: 3,
            env: BgtEnvConfig::default(),
            dbs_gain: 1.0,
            p_beta_ref: 1.0,
            note: String::new(),
        }
    }

    fn result(arm: usize, reward: f64, p_beta: f64) -> RoundResult {
        RoundResult {
            arm: ArmId(arm),
            params: build_arm_space().get(ArmId(arm)).unwrap(),
            reward: RewardBreakdown { r1: 0.0, r2: 0.0, r3: 0.0, total: reward },
            p_beta: BetaPower { value: p_beta, band: (13.0, 35.0), method: BetaMethod::Bulk },
            observation: None,
        }
    }

    fn constant_runs(n: usize) -> BTreeMap<ArmId, Vec<RoundResult>> {
        (0..31).map(|i| (ArmId(i), (0..n).map(|_| result(i, -0.5 + i as f64 * 0.01, 0.2)).collect())).collect()
    }

    #[test]
    fn constant_rewards_give_zero_std() {
        let spec = calibrate_surrogate(&constant_runs(3), provenance()).unwrap();
        assert_eq!(spec.arm[4].reward_std, 0.0);
        assert_eq!(spec.arm[4].reward_mean, -0.5 + 0.04);
        assert_eq!(spec.optimal_arm(), ArmId(30));
    }

    #[test]
    fn too_few_rounds_rejected() {
        let err = calibrate_surrogate(&constant_runs(2), provenance()).unwrap_err();
        assert!(matches!(err, EnvError::InsufficientData { found: 2, needed: 3, .. }));
    }

    #[test]
    fn zero_variance_surrogate_returns_means() {
        let spec = Arc::new(calibrate_surrogate(&constant_runs(3), provenance()).unwrap());
        let want = spec.arm[7];
        let mut env = SurrogateEnv::new(spec, 9);
        for _ in 0..5 {
            let r = env.play(ArmId(7)).unwrap();
            assert_eq!(r.reward.total, want.reward_mean);
            assert_eq!(r.p_beta.value, want.pbeta_mean);
        }
        assert!(matches!(env.play(ArmId(31)), Err(EnvError::UnknownArm(ArmId(31)))));
    }

    #[test]
    fn tie_for_best_rejected() {
        let mut runs = constant_runs(3);
        runs.insert(ArmId(29), (0..3).map(|_| result(29, -0.5 + 0.30, 0.2)).collect());
        assert!(matches!(calibrate_surrogate(&runs, provenance()), Err(EnvError::Spec(_))));
    }

    #[test]
    fn toml_round_trip() {
        let spec = calibrate_surrogate(&constant_runs(3), provenance()).unwrap();
        let text = spec.to_toml_string().unwrap();
        assert_eq!(SurrogateSpec::from_toml_str(&text).unwrap(), spec);
    }

    #[test]
    fn bundled_spec_loads() {
        let spec = SurrogateSpec::bundled();
        assert_eq!(spec.arm.len(), 31);
    }
}
