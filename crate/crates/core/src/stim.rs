//! Stimulation parameter space and biphasic pulse synthesis.
//!
//! An arm is a `(frequency, amplitude)` pair. The grid is six frequencies by
//! five non-zero amplitudes plus a single canonical "off" arm, 31 arms total.
//! Each pulse is a symmetric, charge-balanced biphasic square wave: 150 µs at
//! `+A` immediately followed by 150 µs at `-A`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Candidate stimulation frequencies in Hz.
pub const FREQUENCIES_HZ: [f64; 6] = [55.0, 80.0, 105.0, 130.0, 155.0, 180.0];

/// Candidate non-zero amplitudes in µA/cm².
pub const AMPLITUDES: [f64; 5] = [1000.0, 2000.0, 3000.0, 4000.0, 5000.0];

/// Width of a single phase (anodic or cathodic) in ms.
pub const PHASE_WIDTH_MS: f64 = 0.15;

/// Default integration / sampling step in ms (100 kHz).
pub const DEFAULT_DT_MS: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StimError {
    #[error("phase width {PHASE_WIDTH_MS} ms is not an integer multiple of dt = {dt} ms")]
    NonDivisiblePhase { dt: f64 },
    #[error("pulse period {period_ms} ms is shorter than one biphasic pulse (0.3 ms)")]
    PeriodTooShort { period_ms: f64 },
    #[error("invalid train: {0}")]
    InvalidTrain(String),
}

/// Index of an arm inside an [`ArmSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmId(pub usize);

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A stimulation setting. Zero amplitude is always stored as `(0 Hz, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimParams {
    /// Pulse rate in Hz.
    pub frequency: f64,
    /// Phase amplitude in µA/cm².
    pub amplitude: f64,
}

impl StimParams {
    pub const OFF: StimParams = StimParams { frequency: 0.0, amplitude: 0.0 };

    pub fn new(frequency: f64, amplitude: f64) -> Self {
        if amplitude == 0.0 || frequency == 0.0 {
            Self::OFF
        } else {
            Self { frequency, amplitude }
        }
    }

    pub fn is_off(&self) -> bool {
        self.amplitude == 0.0
    }

    /// RMS current of an ideal, infinitely long train with these parameters:
    /// `A * sqrt(f * 0.3 ms)`.
    ///
    /// Accepts any frequency, not just grid values.
    pub fn ideal_rms(&self) -> f64 {
        if self.is_off() {
            return 0.0;
        }
        self.amplitude * (self.frequency * 2.0 * PHASE_WIDTH_MS * 1e-3).sqrt()
    }

    /// Fraction of time the current is non-zero for an ideal train.
    pub fn ideal_duty_cycle(&self) -> f64 {
        if self.is_off() {
            return 0.0;
        }
        self.frequency * 2.0 * PHASE_WIDTH_MS * 1e-3
    }
}

impl fmt::Display for StimParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_off() {
            write!(f, "off")
        } else {
            write!(f, "{} Hz / {} uA/cm2", self.frequency, self.amplitude)
        }
    }
}

/// The ordered set of arms a bandit chooses from.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSpace {
    arms: Vec<StimParams>,
}

impl ArmSpace {
    /// The canonical 31-arm grid: the off arm first, then frequency-major,
    /// amplitude-minor in ascending order.
    pub fn grid() -> Self {
        let mut arms = Vec::with_capacity(1 + FREQUENCIES_HZ.len() * AMPLITUDES.len());
        arms.push(StimParams::OFF);
        for &f in &FREQUENCIES_HZ {
            for &a in &AMPLITUDES {
                arms.push(StimParams::new(f, a));
            }
        }
        Self { arms }
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn get(&self, id: ArmId) -> Option<StimParams> {
        self.arms.get(id.0).copied()
    }

    pub fn arms(&self) -> &[StimParams] {
        &self.arms
    }

    pub fn ids(&self) -> impl Iterator<Item = ArmId> + '_ {
        (0..self.arms.len()).map(ArmId)
    }

    /// Looks up the arm with exactly these parameters.
    pub fn find(&self, params: StimParams) -> Option<ArmId> {
        let params = StimParams::new(params.frequency, params.amplitude);
        self.arms.iter().position(|p| *p == params).map(ArmId)
    }
}

/// Shorthand for [`ArmSpace::grid`].
pub fn build_arm_space() -> ArmSpace {
    ArmSpace::grid()
}

/// A sampled stimulation current series.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    samples: Vec<f64>,
    dt: f64,
    params: StimParams,
}

impl PulseTrain {
    /// All-zero train of the given length.
    pub fn silent(n_samples: usize, dt: f64) -> Self {
        Self { samples: vec![0.0; n_samples], dt, params: StimParams::OFF }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn params(&self) -> StimParams {
        self.params
    }

    /// Total delivered charge, `sum(samples) * dt`.
    pub fn net_charge(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.dt
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

fn phase_samples(dt: f64) -> Result<usize, StimError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(StimError::NonDivisiblePhase { dt });
    }
    let ratio = PHASE_WIDTH_MS / dt;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
        return Err(StimError::NonDivisiblePhase { dt });
    }
    Ok(rounded as usize)
}

/// Synthesizes a biphasic pulse train sampled every `dt` ms for `duration` ms.
///
/// Pulse `k` starts at `k / frequency` (rounded to the sample grid). Pulses
/// that would not fit entirely before the end of the buffer are dropped, so
/// every train carries exactly zero net charge.
pub fn generate_pulse_train(params: StimParams, duration: f64, dt: f64) -> Result<PulseTrain, StimError> {
    let phase = phase_samples(dt)?;
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(StimError::InvalidTrain(format!("duration must be positive, got {duration}")));
    }
    let params = StimParams::new(params.frequency, params.amplitude);
    let n = (duration / dt).round() as usize;
    let mut samples = vec![0.0; n];
    if params.is_off() {
        return Ok(PulseTrain { samples, dt, params });
    }

    let period_ms = 1000.0 / params.frequency;
    if period_ms < 2.0 * PHASE_WIDTH_MS - 1e-12 {
        return Err(StimError::PeriodTooShort { period_ms });
    }

    let a = params.amplitude;
    for k in 0.. {
        let onset = ((k as f64 * period_ms) / dt).round() as usize;
        if onset + 2 * phase > n {
            break;
        }
        samples[onset..onset + phase].fill(a);
        samples[onset + phase..onset + 2 * phase].fill(-a);
    }
    Ok(PulseTrain { samples, dt, params })
}

/// Root-mean-square current, `sqrt((1/T) * sum(s^2) * dt)`.
pub fn rms_current(train: &PulseTrain) -> f64 {
    rms_of_samples(train.samples(), train.dt())
}

pub(crate) fn rms_of_samples(samples: &[f64], dt: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let total_time = samples.len() as f64 * dt;
    let energy: f64 = samples.iter().map(|s| s * s * dt).sum();
    (energy / total_time).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_31_arms_off_first() {
        let space = build_arm_space();
        assert_eq!(space.len(), 31);
        assert_eq!(space.get(ArmId(0)), Some(StimParams::OFF));
        assert!(space.find(StimParams::new(155.0, 1000.0)).is_some());
        assert_eq!(space.get(ArmId(1)), Some(StimParams::new(55.0, 1000.0)));
        assert_eq!(space.get(ArmId(30)), Some(StimParams::new(180.0, 5000.0)));
    }

    #[test]
    fn grid_is_deterministic_and_distinct() {
        let a = build_arm_space();
        let b = build_arm_space();
        let bits =
            |s: &ArmSpace| s.arms().iter().map(|p| (p.frequency.to_bits(), p.amplitude.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let mut uniq = bits(&a);
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 31);
    }

    #[test]
    fn zero_amplitude_is_canonical_off() {
        assert_eq!(StimParams::new(130.0, 0.0), StimParams::OFF);
        assert_eq!(build_arm_space().find(StimParams::new(80.0, 0.0)), Some(ArmId(0)));
    }

    #[test]
    fn single_pulse_at_100hz() {
        let train = generate_pulse_train(StimParams::new(100.0, 1000.0), 10.0, 0.01).unwrap();
        assert_eq!(train.samples().len(), 1000);
        let nonzero: Vec<f64> = train.samples().iter().copied().filter(|s| *s != 0.0).collect();
        assert_eq!(nonzero.len(), 30);
        assert!(nonzero[..15].iter().all(|&s| s == 1000.0));
        assert!(nonzero[15..].iter().all(|&s| s == -1000.0));
        assert_eq!(&train.samples()[..30], &nonzero[..]);
    }

    #[test]
    fn off_arm_is_silent() {
        let train = generate_pulse_train(StimParams::OFF, 1000.0, 0.01).unwrap();
        assert!(train.samples().iter().all(|&s| s == 0.0));
        assert_eq!(rms_current(&train), 0.0);
    }

    #[test]
    fn rejects_bad_dt_and_period() {
        assert_eq!(
            generate_pulse_train(StimParams::new(100.0, 1.0), 10.0, 0.04),
            Err(StimError::NonDivisiblePhase { dt: 0.04 })
        );
        assert!(matches!(
            generate_pulse_train(StimParams::new(4000.0, 1.0), 10.0, 0.01),
            Err(StimError::PeriodTooShort { .. })
        ));
        assert!(generate_pulse_train(StimParams::new(100.0, 1.0), 10.0, 0.05).is_ok());
    }

    #[test]
    fn rms_matches_reported_power_values() {
        let cases = [((130.0, 2500.0), 492.0), ((155.0, 1000.0), 216.0), ((135.0, 1690.0), 341.0)];
        for ((f, a), expected) in cases {
            let p = StimParams::new(f, a);
            let train = generate_pulse_train(p, 1000.0, DEFAULT_DT_MS).unwrap();
            let rms = rms_current(&train);
            assert!((rms - expected).abs() / expected < 0.01, "{p}: {rms}");
            assert!((p.ideal_rms() - expected).abs() / expected < 0.01);
        }
    }

    #[test]
    fn every_grid_arm_is_charge_balanced() {
        for p in build_arm_space().arms() {
            let train = generate_pulse_train(*p, 1000.0, DEFAULT_DT_MS).unwrap();
            assert_eq!(train.net_charge(), 0.0, "{p}");
            let rms = rms_current(&train);
            assert!((rms - p.ideal_rms()).abs() <= 0.01 * p.ideal_rms() + 1e-12, "{p}: {rms}");
        }
    }
}
