//! Sensorimotor cortex drive to the thalamus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::params::SmcParams;

/// Monophasic pulses with gamma-distributed inter-pulse intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmcInput {
    /// Pulse onsets in ms, relative to the start of the series.
    pub pulse_onsets: Vec<f64>,
    pub amplitude: f64,
    pub width_ms: f64,
    pub dt: f64,
    /// Current per timestep.
    pub series: Vec<f64>,
}

impl SmcInput {
    pub fn generate<R: Rng + ?Sized>(duration: f64, dt: f64, params: &SmcParams, rng: &mut R) -> Self {
        let n = (duration / dt).round() as usize;
        let mean_interval = 1000.0 / params.rate_hz;
        // Interval CV = 1/sqrt(shape).
        let shape = 1.0 / (params.cv * params.cv);
        let gamma = Gamma::new(shape, mean_interval / shape).expect("positive gamma parameters");

        let mut pulse_onsets = Vec::new();
        let mut series = vec![0.0; n];
        let width = (params.width_ms / dt).round() as usize;
        let mut t = gamma.sample(rng);
        while t < duration {
            pulse_onsets.push(t);
            let start = (t / dt).round() as usize;
            let end = (start + width).min(n);
            if start < n {
                series[start..end].fill(params.amplitude);
            }
            t += gamma.sample(rng);
        }
        Self { pulse_onsets, amplitude: params.amplitude, width_ms: params.width_ms, dt, series }
    }

    /// Input with no pulses at all.
    pub fn silent(duration: f64, dt: f64, params: &SmcParams) -> Self {
        let n = (duration / dt).round() as usize;
        Self {
            pulse_onsets: Vec::new(),
            amplitude: params.amplitude,
            width_ms: params.width_ms,
            dt,
            series: vec![0.0; n],
        }
    }

    pub fn duration(&self) -> f64 {
        self.series.len() as f64 * self.dt
    }
}

/// Draws a fresh SMC pulse series from its own seeded stream, using the
/// bundled amplitude / width / rate / CV constants.
pub fn generate_smc_input(duration: f64, dt: f64, seed: u64) -> SmcInput {
    let params = super::ModelParams::default().smc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SmcInput::generate(duration, dt, &params, &mut rng)
}
