use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use super::{BanditState, Policy, PolicyError};
use crate::stim::ArmId;

/// Upper-confidence index `Q(a) + c * sqrt(ln t / n(a))`.
pub fn ucb_select(state: &BanditState, c: f64) -> ArmId {
    if let Some(arm) = state.first_unplayed() {
        return arm;
    }
    let ln_t = (state.t.max(1) as f64).ln();
    state.argmax_by(|a| state.q[a.0] + c * (ln_t / state.n[a.0] as f64).sqrt())
}

/// Uniform over active arms with probability `eps`, greedy otherwise.
pub fn eps_greedy_select<R: Rng + ?Sized>(state: &BanditState, eps: f64, rng: &mut R) -> ArmId {
    if rng.random::<f64>() < eps {
        let k = rng.random_range(0..state.n_active());
        state.active_ids().nth(k).expect("index within active count")
    } else {
        state.greedy()
    }
}

/// Gaussian prior shared by Thompson sampling and Bayes UCB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPrior {
    pub mean: f64,
    pub variance: f64,
}

impl Default for GaussianPrior {
    fn default() -> Self {
        Self { mean: 0.0, variance: 1.0 }
    }
}

impl GaussianPrior {
    /// Posterior mean and variance: the running mean of the observations
    /// (the prior mean before any) and `variance / (n + 1)`.
    pub fn posterior(&self, state: &BanditState, arm: ArmId) -> (f64, f64) {
        let n = state.n[arm.0];
        let mu = if n == 0 { self.mean } else { state.q[arm.0] };
        (mu, self.variance / (n + 1) as f64)
    }
}

/// Draws one sample per active arm from its posterior and returns the argmax.
pub fn thompson_select<R: Rng + ?Sized>(state: &BanditState, prior: &GaussianPrior, rng: &mut R) -> ArmId {
    state.argmax_by(|a| {
        let (mu, var) = prior.posterior(state, a);
        if var > 0.0 {
            Normal::new(mu, var.sqrt()).expect("finite posterior").sample(rng)
        } else {
            mu
        }
    })
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    StatNormal::standard().inverse_cdf(p)
}

/// Posterior mean plus `c` posterior standard deviations at the `1 - 1/t`
/// quantile.
pub fn bayes_ucb_select(state: &BanditState, prior: &GaussianPrior, c: f64) -> ArmId {
    if let Some(arm) = state.first_unplayed() {
        return arm;
    }
    let z = if state.t <= 1 { 0.0 } else { normal_quantile(1.0 - 1.0 / state.t as f64) };
    state.argmax_by(|a| {
        let (mu, var) = prior.posterior(state, a);
        mu + c * z * var.sqrt()
    })
}

#[derive(Debug, Clone)]
pub struct Ucb {
    state: BanditState,
    c: f64,
}

impl Ucb {
    pub fn new(n_arms: usize, c: f64) -> Self {
        Self { state: BanditState::new(n_arms), c }
    }
}

impl Policy for Ucb {
    fn name(&self) -> &'static str {
        "ucb"
    }
    fn select(&mut self) -> ArmId {
        ucb_select(&self.state, self.c)
    }
    fn update(&mut self, arm: ArmId, reward: f64, _p_beta: f64) {
        self.state.record(arm, reward);
    }
    fn state(&self) -> &BanditState {
        &self.state
    }
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        self.state.deactivate(arm)
    }
}

/// Constant-rate ε-greedy with Q initialized to zero.
#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    state: BanditState,
    eps: f64,
    rng: ChaCha8Rng,
}

impl EpsilonGreedy {
    pub fn new(n_arms: usize, eps: f64, seed: u64) -> Result<Self, PolicyError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(PolicyError::Invalid(format!("epsilon {eps} outside [0, 1]")));
        }
        Ok(Self { state: BanditState::new(n_arms), eps, rng: ChaCha8Rng::seed_from_u64(seed) })
    }
}

impl Policy for EpsilonGreedy {
    fn name(&self) -> &'static str {
        "epsilon_greedy"
    }
    fn select(&mut self) -> ArmId {
        eps_greedy_select(&self.state, self.eps, &mut self.rng)
    }
    fn update(&mut self, arm: ArmId, reward: f64, _p_beta: f64) {
        self.state.record(arm, reward);
    }
    fn state(&self) -> &BanditState {
        &self.state
    }
    fn epsilon(&self) -> Option<f64> {
        Some(self.eps)
    }
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        self.state.deactivate(arm)
    }
}

#[derive(Debug, Clone)]
pub struct Thompson {
    state: BanditState,
    prior: GaussianPrior,
    rng: ChaCha8Rng,
}

impl Thompson {
    pub fn new(n_arms: usize, prior: GaussianPrior, seed: u64) -> Self {
        Self { state: BanditState::new(n_arms), prior, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for Thompson {
    fn name(&self) -> &'static str {
        "thompson"
    }
    fn select(&mut self) -> ArmId {
        thompson_select(&self.state, &self.prior, &mut self.rng)
    }
    fn update(&mut self, arm: ArmId, reward: f64, _p_beta: f64) {
        self.state.record(arm, reward);
    }
    fn state(&self) -> &BanditState {
        &self.state
    }
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        self.state.deactivate(arm)
    }
}

#[derive(Debug, Clone)]
pub struct BayesUcb {
    state: BanditState,
    c: f64,
    prior: GaussianPrior,
}

impl BayesUcb {
    pub fn new(n_arms: usize, c: f64, prior: GaussianPrior) -> Self {
        Self { state: BanditState::new(n_arms), c, prior }
    }
}

impl Policy for BayesUcb {
    fn name(&self) -> &'static str {
        "bayes_ucb"
    }
    fn select(&mut self) -> ArmId {
        bayes_ucb_select(&self.state, &self.prior, self.c)
    }
    fn update(&mut self, arm: ArmId, reward: f64, _p_beta: f64) {
        self.state.record(arm, reward);
    }
    fn state(&self) -> &BanditState {
        &self.state
    }
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        self.state.deactivate(arm)
    }
}

/// UCB on exponentially discounted counts and reward sums.
#[derive(Debug, Clone)]
pub struct DiscountedUcb {
    state: BanditState,
    c: f64,
    discount: f64,
    counts: Vec<f64>,
    sums: Vec<f64>,
}

impl DiscountedUcb {
    pub fn new(n_arms: usize, c: f64, discount: f64) -> Result<Self, PolicyError> {
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(PolicyError::Invalid(format!("discount {discount} outside (0, 1]")));
        }
        Ok(Self { state: BanditState::new(n_arms), c, discount, counts: vec![0.0; n_arms], sums: vec![0.0; n_arms] })
    }

    pub fn discounted_mean(&self, arm: ArmId) -> f64 {
        self.sums[arm.0] / self.counts[arm.0]
    }

    pub fn discounted_count(&self, arm: ArmId) -> f64 {
        self.counts[arm.0]
    }
}

impl Policy for DiscountedUcb {
    fn name(&self) -> &'static str {
        "discounted_ucb"
    }
    fn select(&mut self) -> ArmId {
        if let Some(arm) = self.state.first_unplayed() {
            return arm;
        }
        let total: f64 = self.counts.iter().sum();
        let ln_total = total.ln().max(0.0);
        self.state.argmax_by(|a| self.discounted_mean(a) + self.c * (ln_total / self.counts[a.0]).sqrt())
    }
    fn update(&mut self, arm: ArmId, reward: f64, _p_beta: f64) {
        for (n, s) in self.counts.iter_mut().zip(&mut self.sums) {
            *n *= self.discount;
            *s *= self.discount;
        }
        self.counts[arm.0] += 1.0;
        self.sums[arm.0] += reward;
        self.state.record(arm, reward);
    }
    fn state(&self) -> &BanditState {
        &self.state
    }
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        self.state.deactivate(arm)
    }
}

/// Uniformly random baseline.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    state: BanditState,
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(n_arms: usize, seed: u64) -> Self {
        Self { state: BanditState::new(n_arms), rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for UniformRandom {
    fn name(&self) -> &'static str {
        "random"
    }
    fn select(&mut self) -> ArmId {
        eps_greedy_select(&self.state, 1.0, &mut self.rng)
    }
    fn update(&mut self, arm: ArmId, reward: f64, _p_beta: f64) {
        self.state.record(arm, reward);
    }
    fn state(&self) -> &BanditState {
        &self.state
    }
    fn prune(&mut self, arm: ArmId) -> Result<(), PolicyError> {
        self.state.deactivate(arm)
    }
}
