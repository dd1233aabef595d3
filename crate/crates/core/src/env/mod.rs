//! Closed-loop environments: play one arm for one round, observe reward and beta power.

mod bgt;
mod reward;
mod surrogate;

use thiserror::Error;

use crate::neuro::{NeuroError, RoundObservation};
use crate::signal::{BetaPower, SignalError};
use crate::stim::{ArmId, ArmSpace, StimError, StimParams};

pub use bgt::{BgtEnv, BgtEnvConfig};
pub use reward::{compute_reward, max_grid_rms, RewardBreakdown, RewardConfig};
pub use surrogate::{
    calibrate_from_bgt, calibrate_surrogate, CalibrationConfig, Provenance, SurrogateArm, SurrogateEnv, SurrogateSpec,
};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("arm {0} is not in the arm space")]
    UnknownArm(ArmId),
    #[error(transparent)]
    Neuro(#[from] NeuroError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Stim(#[from] StimError),
    #[error("arm {arm} has {found} calibration rounds, need at least {needed}")]
    InsufficientData { arm: ArmId, found: usize, needed: usize },
    #[error("invalid surrogate spec: {0}")]
    Spec(String),
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone)]
pub struct RoundResult {
    pub arm: ArmId,
    pub params: StimParams,
    pub reward: RewardBreakdown,
    pub p_beta: BetaPower,
    /// Raw traces, kept only when the BGT environment is asked to.
    pub observation: Option<RoundObservation>,
}

pub trait Environment {
    fn arm_space(&self) -> &ArmSpace;

    fn play(&mut self, arm: ArmId) -> Result<RoundResult, EnvError>;

    /// Beta power the environment treats as its unstimulated reference.
    fn p_beta_reference(&self) -> f64;

    /// Expected reward per arm, when the environment knows it.
    fn arm_means(&self) -> Option<Vec<f64>> {
        None
    }
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn arm_space(&self) -> &ArmSpace {
        (**self).arm_space()
    }

    fn play(&mut self, arm: ArmId) -> Result<RoundResult, EnvError> {
        (**self).play(arm)
    }

    fn p_beta_reference(&self) -> f64 {
        (**self).p_beta_reference()
    }

    fn arm_means(&self) -> Option<Vec<f64>> {
        (**self).arm_means()
    }
}
