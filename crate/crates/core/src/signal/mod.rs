//! Control-quality metrics: LFP, spectra, beta-band power, Error Index and RMS current.

mod fft;
mod psd;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neuro::SmcInput;

pub use fft::{fft_radix2, Radix2Plan, Spectrum};
pub use psd::{
    beta_power, bulk_psd, psd, BetaMethod, BetaPower, ChunkedPsd, Psd, Window, BETA_HIGH_HZ, BETA_LOW_HZ,
    DEFAULT_SEGMENT_LEN,
};

/// Length of the thalamic response window that follows each SMC pulse, in ms.
pub const RESPONSE_WINDOW_MS: f64 = 25.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("segment length {segment} exceeds series length {len}")]
    SegmentTooLong { segment: usize, len: usize },
    #[error("no input series")]
    Empty,
    #[error("no SMC pulses, Error Index is undefined")]
    NoPulses,
}

/// Pointwise mean of equally long per-neuron voltage traces.
pub fn lfp_from_traces<T: AsRef<[f64]>>(traces: &[T]) -> Result<Vec<f64>, SignalError> {
    let first = traces.first().ok_or(SignalError::Empty)?.as_ref();
    let len = first.len();
    let mut lfp = vec![0.0; len];
    for trace in traces {
        let trace = trace.as_ref();
        if trace.len() != len {
            return Err(SignalError::LengthMismatch { expected: len, found: trace.len() });
        }
        for (acc, &v) in lfp.iter_mut().zip(trace) {
            *acc += v;
        }
    }
    let n = traces.len() as f64;
    lfp.iter_mut().for_each(|v| *v /= n);
    Ok(lfp)
}

/// How a population's beta power is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPath {
    /// Beta power of the population mean potential.
    #[default]
    LfpFirst,
    /// Mean of the per-neuron beta powers.
    PerNeuronMean,
}

pub fn region_beta_power<T: AsRef<[f64]>>(
    traces: &[T],
    fs: f64,
    path: BetaPath,
    method: BetaMethod,
) -> Result<BetaPower, SignalError> {
    match path {
        BetaPath::LfpFirst => beta_power(&lfp_from_traces(traces)?, fs, method),
        BetaPath::PerNeuronMean => {
            // validates shape
            lfp_from_traces(traces)?;
            let mut sum = 0.0;
            for t in traces {
                sum += beta_power(t.as_ref(), fs, method)?.value;
            }
            Ok(BetaPower { value: sum / traces.len() as f64, band: (BETA_LOW_HZ, BETA_HIGH_HZ), method })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorIndex {
    pub value: f64,
    pub missed: usize,
    pub spurious: usize,
    pub total_smc_pulses: usize,
}

/// Thalamic relay fidelity.
///
/// Every SMC pulse opens a 25 ms window for each neuron. A window without a
/// spike counts as missed; each spike after the first in a window, and every
/// spike outside all windows, counts as spurious. When windows overlap a
/// spike is credited to the most recent pulse. The value is normalized by
/// pulses times neurons.
pub fn error_index<T: AsRef<[f64]>>(th_spikes: &[T], smc: &SmcInput) -> Result<ErrorIndex, SignalError> {
    let onsets = &smc.pulse_onsets;
    if onsets.is_empty() {
        return Err(SignalError::NoPulses);
    }
    let (mut missed, mut spurious) = (0, 0);
    let mut counts = vec![0usize; onsets.len()];
    for spikes in th_spikes {
        counts.iter_mut().for_each(|c| *c = 0);
        for &t in spikes.as_ref() {
            // latest onset at or before t
            let idx = onsets.partition_point(|&o| o <= t);
            match idx.checked_sub(1) {
                Some(k) if t < onsets[k] + RESPONSE_WINDOW_MS => counts[k] += 1,
                _ => spurious += 1,
            }
        }
        for &c in &counts {
            if c == 0 {
                missed += 1;
            } else {
                spurious += c - 1;
            }
        }
    }
    let total = onsets.len() * th_spikes.len();
    let value = if total == 0 { 0.0 } else { (missed + spurious) as f64 / total as f64 };
    Ok(ErrorIndex { value, missed, spurious, total_smc_pulses: onsets.len() })
}

/// Root-mean-square of a recorded current series sampled every `dt` ms.
pub fn rms_of_series(samples: &[f64], dt: f64) -> f64 {
    crate::stim::rms_of_samples(samples, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smc_with(onsets: &[f64]) -> SmcInput {
        SmcInput { pulse_onsets: onsets.to_vec(), amplitude: 3.5, width_ms: 5.0, dt: 0.01, series: Vec::new() }
    }

    #[test]
    fn lfp_basic_cases() {
        let one = vec![vec![1.0, 2.0, 3.0]];
        assert_eq!(lfp_from_traces(&one).unwrap(), vec![1.0, 2.0, 3.0]);
        let ten = vec![vec![-60.0, -50.0]; 10];
        assert_eq!(lfp_from_traces(&ten).unwrap(), vec![-60.0, -50.0]);
        let sym = vec![vec![1.0; 4], vec![-1.0; 4]];
        assert_eq!(lfp_from_traces(&sym).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn lfp_rejects_ragged_and_empty() {
        let ragged = vec![vec![0.0; 3], vec![0.0; 4]];
        assert_eq!(lfp_from_traces(&ragged), Err(SignalError::LengthMismatch { expected: 3, found: 4 }));
        let none: Vec<Vec<f64>> = Vec::new();
        assert_eq!(lfp_from_traces(&none), Err(SignalError::Empty));
    }

    #[test]
    fn error_index_perfect_relay() {
        let smc = smc_with(&[10.0, 100.0, 200.0]);
        let spikes = vec![vec![12.0, 104.0, 220.0]; 4];
        let ei = error_index(&spikes, &smc).unwrap();
        assert_eq!(ei.value, 0.0);
    }

    #[test]
    fn error_index_silent_thalamus() {
        let smc = smc_with(&[10.0, 100.0]);
        let spikes: Vec<Vec<f64>> = vec![Vec::new(); 3];
        let ei = error_index(&spikes, &smc).unwrap();
        assert_eq!(ei.value, 1.0);
        assert_eq!(ei.missed, 6);
    }

    #[test]
    fn error_index_hand_count() {
        let onsets: Vec<f64> = (0..10).map(|k| 10.0 + 80.0 * k as f64).collect();
        let mut spikes: Vec<f64> = onsets.iter().map(|o| o + 3.0).collect();
        spikes.extend([onsets[4] + 8.0, onsets[4] + 15.0]);
        spikes.sort_by(f64::total_cmp);
        let ei = error_index(&[spikes], &smc_with(&onsets)).unwrap();
        assert_eq!((ei.missed, ei.spurious), (0, 2));
        assert!((ei.value - 0.2).abs() < 1e-15);
    }

    #[test]
    fn error_index_outside_window_is_spurious() {
        let smc = smc_with(&[10.0]);
        let ei = error_index(&[vec![5.0, 12.0, 35.0]], &smc).unwrap();
        // 5 ms precedes the pulse, 35 ms is the window end (exclusive)
        assert_eq!((ei.missed, ei.spurious), (0, 2));
    }

    #[test]
    fn error_index_needs_pulses() {
        assert_eq!(error_index(&[vec![1.0]], &smc_with(&[])), Err(SignalError::NoPulses));
    }

    #[test]
    fn antiphase_sines_cancel_in_lfp() {
        let fs = 1000.0;
        let a: Vec<f64> = (0..4096).map(|i| (2.0 * std::f64::consts::PI * 20.0 * i as f64 / fs).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| -x).collect();
        let traces = vec![a, b];
        let lfp = region_beta_power(&traces, fs, BetaPath::LfpFirst, BetaMethod::Bulk).unwrap();
        let per = region_beta_power(&traces, fs, BetaPath::PerNeuronMean, BetaMethod::Bulk).unwrap();
        assert_eq!(lfp.value, 0.0);
        assert!(per.value > 0.1);
    }

    #[test]
    fn single_neuron_paths_agree() {
        let fs = 1000.0;
        let a: Vec<f64> = (0..2048).map(|i| ((i * 31) % 17) as f64).collect();
        let traces = vec![a];
        for method in [BetaMethod::Bulk, BetaMethod::Chunked(512)] {
            let x = region_beta_power(&traces, fs, BetaPath::LfpFirst, method).unwrap();
            let y = region_beta_power(&traces, fs, BetaPath::PerNeuronMean, method).unwrap();
            assert_eq!(x.value, y.value);
        }
    }
}
