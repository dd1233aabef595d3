use serde::{Deserialize, Serialize};

use crate::signal::rms_of_series;
use crate::stim::{AMPLITUDES, FREQUENCIES_HZ, PHASE_WIDTH_MS};

/// Largest RMS current reachable on the stimulation grid, `5000 * sqrt(0.054)`.
pub fn max_grid_rms() -> f64 {
    let a_max = AMPLITUDES.iter().cloned().fold(0.0, f64::max);
    let f_max = FREQUENCIES_HZ.iter().cloned().fold(0.0, f64::max);
    a_max * (2.0 * PHASE_WIDTH_MS * 1e-3 * f_max).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Beta power mapped to `r1 = 1`.
    pub p_beta_norm_ref: f64,
    /// RMS current mapped to `r3 = 1`.
    pub i_rms_norm_ref: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { alpha: -0.7, beta: 0.1, gamma: -0.2, p_beta_norm_ref: 1.0, i_rms_norm_ref: max_grid_rms() }
    }
}

impl RewardConfig {
    pub fn with_p_beta_ref(self, p_beta_norm_ref: f64) -> Self {
        Self { p_beta_norm_ref, ..self }
    }

    pub fn total(&self, r1: f64, r2: f64, r3: f64) -> f64 {
        self.alpha * r1 + self.beta * r2 + self.gamma * r3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Normalized beta power in [0, 1].
    pub r1: f64,
    /// Fraction of the round without stimulation current.
    pub r2: f64,
    /// Normalized RMS current in [0, 1].
    pub r3: f64,
    pub total: f64,
}

/// Reward for one round given its beta power and the delivered current.
pub fn compute_reward(p_beta: f64, i_dbs: &[f64], dt: f64, cfg: &RewardConfig) -> RewardBreakdown {
    let r1 = (p_beta / cfg.p_beta_norm_ref).clamp(0.0, 1.0);
    let r2 =
        if i_dbs.is_empty() { 1.0 } else { i_dbs.iter().filter(|&&i| i == 0.0).count() as f64 / i_dbs.len() as f64 };
    let r3 = (rms_of_series(i_dbs, dt) / cfg.i_rms_norm_ref).clamp(0.0, 1.0);
    RewardBreakdown { r1, r2, r3, total: cfg.total(r1, r2, r3) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_ref_is_grid_maximum() {
        assert!((max_grid_rms() - 5000.0 * 0.054f64.sqrt()).abs() < 1e-9);
        assert!((max_grid_rms() - 1162.0).abs() < 1.0);
    }

    #[test]
    fn extreme_substitutions() {
        let cfg = RewardConfig::default().with_p_beta_ref(2.0);
        let worst = compute_reward(5.0, &[1e6; 10], 0.01, &cfg);
        assert_eq!((worst.r1, worst.r2, worst.r3), (1.0, 0.0, 1.0));
        assert!((worst.total + 0.9).abs() < 1e-12);

        let best = compute_reward(0.0, &[0.0; 10], 0.01, &cfg);
        assert_eq!((best.r1, best.r2, best.r3), (0.0, 1.0, 0.0));
        assert!((best.total - 0.1).abs() < 1e-12);

        let pd_off = compute_reward(2.0, &[0.0; 10], 0.01, &cfg);
        assert!((pd_off.total + 0.6).abs() < 1e-12);
    }
}
