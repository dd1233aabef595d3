//! Bandit policies over the stimulation arm space.
//!
//! Every policy alternates `select` and `update`. Index-based policies play
//! each unplayed arm first, and all argmax decisions break ties towards the
//! lowest arm id.

mod algorithms;
mod t3p;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stim::ArmId;

pub use algorithms::{
    bayes_ucb_select, eps_greedy_select, normal_quantile, thompson_select, ucb_select, BayesUcb, DiscountedUcb,
    EpsilonGreedy, GaussianPrior, Thompson, Ucb, UniformRandom,
};
pub use t3p::{T3p, T3pConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("cannot prune arm {0}: it is the last active arm")]
    LastArm(ArmId),
    #[error("arm {0} is outside the policy's arm range")]
    UnknownArm(ArmId),
    #[error("invalid policy parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Warmup,
    Prune,
    Run,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Warmup => "warmup",
            Phase::Prune => "prune",
            Phase::Run => "run",
        })
    }
}

/// Per-arm running means and counts plus the active (unpruned) set.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    pub q: Vec<f64>,
    pub n: Vec<u64>,
    /// Total number of updates.
    pub t: u64,
    pub active: Vec<bool>,
}

impl BanditState {
    pub fn new(n_arms: usize) -> Self {
        Self { q: vec![0.0; n_arms], n: vec![0; n_arms], t: 0, active: vec![true; n_arms] }
    }

    pub fn n_arms(&self) -> usize {
        self.q.len()
    }

    pub fn record(&mut self, arm: ArmId, reward: f64) {
        let a = arm.0;
        self.n[a] += 1;
        self.q[a] += (reward - self.q[a]) / self.n[a] as f64;
        self.t += 1;
    }

    pub fn active_ids(&self) -> impl Iterator<Item = ArmId> + '_ {
        self.active.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| ArmId(i))
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&on| on).count()
    }

    pub fn is_active(&self, arm: ArmId) -> bool {
        self.active.get(arm.0).copied().unwrap_or(false)
    }

    /// Lowest-id active arm that has never been played.
    pub fn first_unplayed(&self) -> Option<ArmId> {
        self.active_ids().find(|a| self.n[a.0] == 0)
    }

    /// Active arm maximizing `score`, lowest id on ties.
    pub fn argmax_by(&self, mut score: impl FnMut(ArmId) -> f64) -> ArmId {
        let mut best: Option<(ArmId, f64)> = None;
        for arm in self.active_ids() {
            let s = score(arm);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((arm, s));
            }
        }
        best.expect("active set is never empty").0
    }

    pub fn greedy(&self) -> ArmId {
        self.argmax_by(|a| self.q[a.0])
    }

    /// Removes `arm` from the active set; inactive arms are left alone.
    pub fn deactivate(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        if arm.0 >= self.n_arms() {
            return Err(PolicyError::UnknownArm(arm));
        }
        if !self.active[arm.0] {
            return Ok(());
        }
        if self.n_active() == 1 {
            return Err(PolicyError::LastArm(arm));
        }
        self.active[arm.0] = false;
        Ok(())
    }
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn select(&mut self) -> ArmId;

    /// Feeds back the reward and beta power observed for `arm`.
    fn update(&mut self, arm: ArmId, reward: f64, p_beta: f64);

    fn state(&self) -> &BanditState;

    /// Exploration rate used by the most recent selection, if the policy has one.
    fn epsilon(&self) -> Option<f64> {
        None
    }

    fn phase(&self) -> Phase {
        Phase::Run
    }

    /// Arm the policy would exploit now.
    fn greedy_arm(&self) -> ArmId {
        self.state().greedy()
    }

    /// Removes an arm for the rest of the run, keeping all estimates.
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError>;
}

/// Serializable policy choice with its constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyParams {
    T3p(T3pConfig),
    EpsilonGreedy {
        #[serde(default = "default_eps")]
        epsilon: f64,
    },
    Ucb {
        #[serde(default = "default_ucb_c")]
        c: f64,
    },
    BayesUcb {
        #[serde(default = "default_bayes_c")]
        c: f64,
        #[serde(default)]
        prior: GaussianPrior,
    },
    DiscountedUcb {
        #[serde(default = "default_ducb_c")]
        c: f64,
        #[serde(default = "default_discount")]
        discount: f64,
    },
    Thompson {
        #[serde(default)]
        prior: GaussianPrior,
    },
    Random,
}

fn default_eps() -> f64 {
    0.4
}
fn default_ucb_c() -> f64 {
    0.05
}
fn default_bayes_c() -> f64 {
    1.0
}
fn default_ducb_c() -> f64 {
    0.35
}
fn default_discount() -> f64 {
    0.99
}

impl PolicyParams {
    pub fn t3p() -> Self {
        PolicyParams::T3p(T3pConfig::default())
    }
    pub fn epsilon_greedy() -> Self {
        PolicyParams::EpsilonGreedy { epsilon: default_eps() }
    }
    pub fn ucb() -> Self {
        PolicyParams::Ucb { c: default_ucb_c() }
    }
    pub fn bayes_ucb() -> Self {
        PolicyParams::BayesUcb { c: default_bayes_c(), prior: GaussianPrior::default() }
    }
    pub fn discounted_ucb() -> Self {
        PolicyParams::DiscountedUcb { c: default_ducb_c(), discount: default_discount() }
    }
    pub fn thompson() -> Self {
        PolicyParams::Thompson { prior: GaussianPrior::default() }
    }

    /// Short stable label used in logs and file names.
    pub fn label(&self) -> &'static str {
        match self {
            PolicyParams::T3p(_) => "t3p",
            PolicyParams::EpsilonGreedy { .. } => "epsilon_greedy",
            PolicyParams::Ucb { .. } => "ucb",
            PolicyParams::BayesUcb { .. } => "bayes_ucb",
            PolicyParams::DiscountedUcb { .. } => "discounted_ucb",
            PolicyParams::Thompson { .. } => "thompson",
            PolicyParams::Random => "random",
        }
    }

    /// Parses a label as produced by [`PolicyParams::label`], with default constants.
    pub fn from_label(label: &str) -> Option<Self> {
        Some(match label {
            "t3p" => Self::t3p(),
            "epsilon_greedy" | "eps_greedy" => Self::epsilon_greedy(),
            "ucb" => Self::ucb(),
            "bayes_ucb" => Self::bayes_ucb(),
            "discounted_ucb" => Self::discounted_ucb(),
            "thompson" | "ts" => Self::thompson(),
            "random" => PolicyParams::Random,
            _ => return None,
        })
    }

    /// Instantiates the policy for `n_arms` arms with its own random stream.
    pub fn build(&self, n_arms: usize, seed: u64) -> Result<Box<dyn Policy>, PolicyError> {
        Ok(match *self {
            PolicyParams::T3p(cfg) => Box::new(T3p::new(cfg, n_arms, seed)?),
            PolicyParams::EpsilonGreedy { epsilon } => Box::new(EpsilonGreedy::new(n_arms, epsilon, seed)?),
            PolicyParams::Ucb { c } => Box::new(Ucb::new(n_arms, c)),
            PolicyParams::BayesUcb { c, prior } => Box::new(BayesUcb::new(n_arms, c, prior)),
            PolicyParams::DiscountedUcb { c, discount } => Box::new(DiscountedUcb::new(n_arms, c, discount)?),
            PolicyParams::Thompson { prior } => Box::new(Thompson::new(n_arms, prior, seed)),
            PolicyParams::Random => Box::new(UniformRandom::new(n_arms, seed)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incremental_mean_and_counts() {
        let mut s = BanditState::new(3);
        for r in [1.0, 2.0, 6.0] {
            s.record(ArmId(1), r);
        }
        assert_eq!(s.n, vec![0, 3, 0]);
        assert_eq!(s.t, 3);
        assert!((s.q[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn deactivate_rules() {
        let mut s = BanditState::new(2);
        s.deactivate(ArmId(0)).unwrap();
        s.deactivate(ArmId(0)).unwrap();
        assert_eq!(s.deactivate(ArmId(1)), Err(PolicyError::LastArm(ArmId(1))));
        assert_eq!(s.deactivate(ArmId(5)), Err(PolicyError::UnknownArm(ArmId(5))));
    }

    #[test]
    fn params_toml_round_trip() {
        for p in [
            PolicyParams::t3p(),
            PolicyParams::epsilon_greedy(),
            PolicyParams::ucb(),
            PolicyParams::bayes_ucb(),
            PolicyParams::discounted_ucb(),
            PolicyParams::thompson(),
            PolicyParams::Random,
        ] {
            let text = toml::to_string(&p).unwrap();
            assert_eq!(toml::from_str::<PolicyParams>(&text).unwrap(), p);
            assert_eq!(PolicyParams::from_label(p.label()), Some(p.clone()));
        }
        let p: PolicyParams = toml::from_str("algorithm = \"ucb\"").unwrap();
        assert_eq!(p, PolicyParams::ucb());
    }
}
