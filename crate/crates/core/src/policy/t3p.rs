use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eps_greedy_select, BanditState, Phase, Policy, PolicyError};
use crate::stim::ArmId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T3pConfig {
    pub eps_start: f64,
    pub eps_min: f64,
    /// Subtracted from ε after every run-phase selection.
    pub decay_step: f64,
    /// Arms kept after warm-up.
    pub k: usize,
    /// Beta power rise, as a fraction of the unstimulated reference, that
    /// counts as a deviation.
    pub deviation_threshold: f64,
    /// Consecutive deviating rounds that trigger a restart.
    pub deviation_patience: usize,
    /// Rounds after which the procedure restarts regardless; 0 disables.
    pub timer_period: u64,
    /// Keep Q and n across restarts.
    pub retain_priors: bool,
}

impl Default for T3pConfig {
    fn default() -> Self {
        Self {
            eps_start: 0.2,
            eps_min: 0.0,
            decay_step: 0.025,
            k: 25,
            deviation_threshold: 0.20,
            deviation_patience: 3,
            timer_period: 600,
            retain_priors: false,
        }
    }
}

impl T3pConfig {
    pub fn validate(&self, n_arms: usize) -> Result<(), PolicyError> {
        if !(0.0 <= self.eps_min && self.eps_min <= self.eps_start && self.eps_start <= 1.0) {
            return Err(PolicyError::Invalid(format!(
                "need 0 <= eps_min ({}) <= eps_start ({}) <= 1",
                self.eps_min, self.eps_start
            )));
        }
        if self.k == 0 || self.k > n_arms {
            return Err(PolicyError::Invalid(format!("K = {} outside 1..={n_arms}", self.k)));
        }
        if !(self.decay_step >= 0.0) || !(self.deviation_threshold > 0.0) || self.deviation_patience == 0 {
            return Err(PolicyError::Invalid("decay step, deviation threshold and patience must be positive".into()));
        }
        Ok(())
    }
}

/// Why the last restart happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restart {
    Timer,
    Deviation,
}

/// Time- and threshold-triggered pruned ε-greedy.
///
/// Plays every arm once, keeps the best K, then runs ε-greedy on the
/// survivors with ε decaying linearly. Once ε has reached its floor the beta
/// power of converged rounds forms a reference; a sustained rise above it,
/// or the restart timer, sends the policy back to warm-up.
#[derive(Debug, Clone)]
pub struct T3p {
    cfg: T3pConfig,
    state: BanditState,
    rng: ChaCha8Rng,
    phase: Phase,
    eps: f64,
    last_eps: f64,
    warm_cursor: usize,
    rounds_since_start: u64,
    beta_scale: Option<f64>,
    converged_sum: f64,
    converged_count: u64,
    deviating: usize,
    restarts: Vec<(u64, Restart)>,
    /// Arms removed from outside; they stay out across restarts.
    banned: Vec<bool>,
}

impl T3p {
    pub fn new(cfg: T3pConfig, n_arms: usize, seed: u64) -> Result<Self, PolicyError> {
        cfg.validate(n_arms)?;
        Ok(Self {
            cfg,
            state: BanditState::new(n_arms),
            rng: ChaCha8Rng::seed_from_u64(seed),
            phase: Phase::Warmup,
            eps: cfg.eps_start,
            last_eps: cfg.eps_start,
            warm_cursor: 0,
            rounds_since_start: 0,
            beta_scale: None,
            converged_sum: 0.0,
            converged_count: 0,
            deviating: 0,
            restarts: Vec::new(),
            banned: vec![false; n_arms],
        })
    }

    /// Unstimulated beta power used to express deviations as a fraction.
    /// Without it the converged reference itself is the scale.
    pub fn with_beta_scale(mut self, scale: f64) -> Self {
        self.beta_scale = (scale > 0.0).then_some(scale);
        self
    }

    pub fn config(&self) -> &T3pConfig {
        &self.cfg
    }

    /// Current ε (the value the next run-phase selection will use).
    pub fn current_epsilon(&self) -> f64 {
        self.eps
    }

    /// Mean beta power of converged, non-deviating rounds.
    pub fn converged_reference(&self) -> Option<f64> {
        (self.converged_count > 0).then(|| self.converged_sum / self.converged_count as f64)
    }

    /// Global round numbers (1-based) at which restarts were triggered.
    pub fn restarts(&self) -> &[(u64, Restart)] {
        &self.restarts
    }

    fn next_warmup_arm(&self) -> Option<ArmId> {
        (self.warm_cursor..self.state.n_arms()).map(ArmId).find(|&a| self.state.is_active(a))
    }

    fn do_prune(&mut self) {
        let mut order: Vec<ArmId> = self.state.active_ids().collect();
        order.sort_by(|a, b| self.state.q[b.0].total_cmp(&self.state.q[a.0]).then(a.0.cmp(&b.0)));
        for arm in order.into_iter().skip(self.cfg.k) {
            self.state.active[arm.0] = false;
        }
        self.phase = Phase::Run;
    }

    fn restart(&mut self, why: Restart) {
        self.restarts.push((self.state.t, why));
        if !self.cfg.retain_priors {
            let n = self.state.n_arms();
            self.state = BanditState { t: self.state.t, ..BanditState::new(n) };
        }
        for (on, banned) in self.state.active.iter_mut().zip(&self.banned) {
            *on = !banned;
        }
        self.phase = Phase::Warmup;
        self.eps = self.cfg.eps_start;
        self.warm_cursor = 0;
        self.rounds_since_start = 0;
        self.converged_sum = 0.0;
        self.converged_count = 0;
        self.deviating = 0;
    }

    fn track_deviation(&mut self, p_beta: f64) -> bool {
        // Only rounds played after ε has bottomed out describe the converged arm.
        if self.phase != Phase::Run || self.eps > self.cfg.eps_min {
            return false;
        }
        let deviates = match self.converged_reference() {
            Some(reference) => {
                let scale = self.beta_scale.unwrap_or(reference);
                p_beta - reference > self.cfg.deviation_threshold * scale
            }
            None => false,
        };
        if deviates {
            self.deviating += 1;
        } else {
            self.deviating = 0;
            self.converged_sum += p_beta;
            self.converged_count += 1;
        }
        self.deviating >= self.cfg.deviation_patience
    }
}

impl Policy for T3p {
    fn name(&self) -> &'static str {
        "t3p"
    }

    fn select(&mut self) -> ArmId {
        if self.phase == Phase::Warmup {
            if let Some(arm) = self.next_warmup_arm() {
                self.last_eps = self.eps;
                return arm;
            }
            self.phase = Phase::Prune;
        }
        if self.phase == Phase::Prune {
            self.do_prune();
        }
        self.last_eps = self.eps;
        let arm = eps_greedy_select(&self.state, self.eps, &mut self.rng);
        self.eps = (self.eps - self.cfg.decay_step).max(self.cfg.eps_min);
        arm
    }

    fn update(&mut self, arm: ArmId, reward: f64, p_beta: f64) {
        self.state.record(arm, reward);
        self.rounds_since_start += 1;
        if self.phase == Phase::Warmup {
            self.warm_cursor = arm.0 + 1;
            if self.next_warmup_arm().is_none() {
                self.phase = Phase::Prune;
            }
            return;
        }
        if self.track_deviation(p_beta) {
            self.restart(Restart::Deviation);
        } else if self.cfg.timer_period > 0 && self.rounds_since_start >= self.cfg.timer_period {
            self.restart(Restart::Timer);
        }
    }

    fn state(&self) -> &BanditState {
        &self.state
    }

    fn epsilon(&self) -> Option<f64> {
        Some(self.last_eps)
    }

    fn phase(&self) -> Phase {
        self.phase
    }

    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        if arm.0 < self.banned.len() && self.banned.iter().filter(|&&b| !b).count() == 1 && !self.banned[arm.0] {
            return Err(PolicyError::LastArm(arm));
        }
        self.state.deactivate(arm)?;
        self.banned[arm.0] = true;
        Ok(())
    }
}
