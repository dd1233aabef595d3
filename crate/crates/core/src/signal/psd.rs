//! One-sided periodograms and beta-band power.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::Radix2Plan;
use super::SignalError;

/// Lower edge of the beta band in Hz.
pub const BETA_LOW_HZ: f64 = 13.0;
/// Upper edge of the beta band in Hz.
pub const BETA_HIGH_HZ: f64 = 35.0;

/// Segment length used by [`BetaMethod::Chunked`] unless told otherwise
/// (2^14 samples, about 164 ms at 100 kHz).
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Option<Vec<f64>> {
        match self {
            Window::None => None,
            Window::Hann => Some((0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()),
        }
    }
}

/// One-sided power spectral density, bins `0..=n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub values: Vec<f64>,
    /// Bin spacing in Hz.
    pub df: f64,
}

impl Psd {
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.df
    }

    /// Sum of `P_k * df` over the bins whose center lies in `[lo, hi]`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = self.frequency(*k);
                f >= lo && f <= hi
            })
            .map(|(_, p)| p * self.df)
            .sum()
    }

    /// Sum of `P_k * df` over all bins.
    pub fn total_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.df
    }
}

/// Folds a full two-sided `|X_k|^2` spectrum of length `n` into one-sided
/// density values with the given normalization `fs * sum(w^2)`.
fn fold_one_sided(power: impl Fn(usize) -> f64, n: usize, norm: f64) -> Vec<f64> {
    (0..=n / 2)
        .map(|k| {
            let p = power(k) / norm;
            if k == 0 || k == n / 2 {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

/// One-sided periodogram of a power-of-two length series.
///
/// Scaled as a density so that `sum(P_k) * df` equals the mean square of the
/// (windowed) signal; with a window the normalization uses `sum(w^2)`.
pub fn psd(samples: &[f64], fs: f64, window: Window) -> Result<Psd, SignalError> {
    let n = samples.len();
    let plan = Radix2Plan::new(n)?;
    let w = window.coefficients(n);
    let mut buf: Vec<Complex64> = match &w {
        None => samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        Some(w) => samples.iter().zip(w).map(|(&x, &wi)| Complex64::new(x * wi, 0.0)).collect(),
    };
    plan.process(&mut buf)?;
    let s2 = w.as_ref().map_or(n as f64, |w| w.iter().map(|x| x * x).sum());
    Ok(Psd { values: fold_one_sided(|k| buf[k].norm_sqr(), n, fs * s2), df: fs / n as f64 })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "segment_len")]
pub enum BetaMethod {
    /// One periodogram over the whole record, zero-padded to a power of two.
    #[default]
    Bulk,
    /// Average of periodograms over non-overlapping segments of this length.
    Chunked(usize),
}

/// Integrated power in the 13-35 Hz band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPower {
    pub value: f64,
    pub band: (f64, f64),
    pub method: BetaMethod,
}

/// Beta-band power of a record. The record mean (per segment in chunked
/// mode) is removed first so the membrane resting level does not leak into
/// the band.
pub fn beta_power(samples: &[f64], fs: f64, method: BetaMethod) -> Result<BetaPower, SignalError> {
    let psd = match method {
        BetaMethod::Bulk => bulk_psd(samples, fs)?,
        BetaMethod::Chunked(len) => {
            let mut est = ChunkedPsd::new(len, fs)?;
            if len > samples.len() {
                return Err(SignalError::SegmentTooLong { segment: len, len: samples.len() });
            }
            est.push(samples);
            est.finish()?
        }
    };
    Ok(BetaPower { value: psd.band_power(BETA_LOW_HZ, BETA_HIGH_HZ), band: (BETA_LOW_HZ, BETA_HIGH_HZ), method })
}

/// Mean-removed periodogram over the full record, zero-padded to the next
/// power of two. The density is normalized by the unpadded length.
pub fn bulk_psd(samples: &[f64], fs: f64) -> Result<Psd, SignalError> {
    if samples.is_empty() {
        return Err(SignalError::Empty);
    }
    let n = samples.len();
    let n_fft = n.next_power_of_two();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for (b, &x) in buf.iter_mut().zip(samples) {
        b.re = x - mean;
    }
    Radix2Plan::new(n_fft)?.process(&mut buf)?;
    Ok(Psd { values: fold_one_sided(|k| buf[k].norm_sqr(), n_fft, fs * n as f64), df: fs / n_fft as f64 })
}

/// Streaming Welch estimator without overlap.
///
/// Holds one segment buffer, the twiddle table and a one-sided accumulator,
/// so memory stays bounded by the segment length no matter how long the
/// record is. Trailing samples that do not fill a segment are ignored.
#[derive(Debug, Clone)]
pub struct ChunkedPsd {
    plan: Radix2Plan,
    fs: f64,
    buf: Vec<Complex64>,
    filled: usize,
    acc: Vec<f64>,
    segments: usize,
}

impl ChunkedPsd {
    pub fn new(segment_len: usize, fs: f64) -> Result<Self, SignalError> {
        let plan = Radix2Plan::new(segment_len)?;
        Ok(Self {
            plan,
            fs,
            buf: vec![Complex64::new(0.0, 0.0); segment_len],
            filled: 0,
            acc: vec![0.0; segment_len / 2 + 1],
            segments: 0,
        })
    }

    pub fn segment_len(&self) -> usize {
        self.plan.len()
    }

    /// Complex values held (segment buffer plus twiddles) and accumulator length.
    pub fn working_set(&self) -> (usize, usize) {
        (self.buf.capacity() + self.plan.twiddle_len(), self.acc.capacity())
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn push(&mut self, mut samples: &[f64]) {
        let len = self.segment_len();
        while !samples.is_empty() {
            let take = (len - self.filled).min(samples.len());
            for (b, &x) in self.buf[self.filled..self.filled + take].iter_mut().zip(&samples[..take]) {
                *b = Complex64::new(x, 0.0);
            }
            self.filled += take;
            samples = &samples[take..];
            if self.filled == len {
                self.flush_segment();
            }
        }
    }

    fn flush_segment(&mut self) {
        let len = self.segment_len();
        let mean = self.buf.iter().map(|c| c.re).sum::<f64>() / len as f64;
        for b in &mut self.buf {
            b.re -= mean;
        }
        self.plan.process(&mut self.buf).expect("buffer matches plan length");
        for (a, b) in self.acc.iter_mut().zip(&self.buf) {
            *a += b.norm_sqr();
        }
        self.filled = 0;
        self.segments += 1;
    }

    pub fn finish(&self) -> Result<Psd, SignalError> {
        let n = self.segment_len();
        if self.segments == 0 {
            return Err(SignalError::SegmentTooLong { segment: n, len: self.filled });
        }
        let norm = self.fs * n as f64 * self.segments as f64;
        Ok(Psd { values: fold_one_sided(|k| self.acc[k], n, norm), df: self.fs / n as f64 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / fs).sin()).collect()
    }

    #[test]
    fn zero_signal_has_zero_psd() {
        let p = psd(&[0.0; 64], 64.0, Window::None).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        assert_eq!(beta_power(&[0.0; 4096], 1000.0, BetaMethod::Bulk).unwrap().value, 0.0);
        assert_eq!(beta_power(&[0.0; 4096], 1000.0, BetaMethod::Chunked(1024)).unwrap().value, 0.0);
    }

    #[test]
    fn exact_bin_sine_concentrates_in_one_bin() {
        let (fs, n) = (1024.0, 1024);
        let p = psd(&sine(64.0, fs, n), fs, Window::None).unwrap();
        let peak = p.values[64] * p.df;
        assert!((peak - 0.5).abs() < 1e-12);
        assert!((p.total_power() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hann_window_preserves_noise_power_scale() {
        let (fs, n) = (1024.0, 1024);
        let x = sine(64.0, fs, n);
        let p = psd(&x, fs, Window::Hann).unwrap();
        // The Hann-windowed sine keeps its total power when normalized by sum(w^2).
        assert!((p.total_power() - 0.5).abs() < 1e-9, "{}", p.total_power());
        assert!(p.values[64] > p.values[66] * 1e6);
    }

    #[test]
    fn chunked_rejects_oversized_segment() {
        assert_eq!(
            beta_power(&[0.0; 100], 1000.0, BetaMethod::Chunked(128)),
            Err(SignalError::SegmentTooLong { segment: 128, len: 100 })
        );
        assert!(matches!(
            beta_power(&[0.0; 100], 1000.0, BetaMethod::Chunked(48)),
            Err(SignalError::NotPowerOfTwo { .. })
        ));
    }

    #[test]
    fn chunked_working_set_is_bounded() {
        let est = ChunkedPsd::new(1 << 14, 100_000.0).unwrap();
        let (complex, acc) = est.working_set();
        assert!(complex <= 2 * (1 << 14));
        assert!(acc <= 1 << 14);
    }

    #[test]
    fn streaming_matches_single_push() {
        let x: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 113) as f64).collect();
        let mut a = ChunkedPsd::new(1024, 1000.0).unwrap();
        a.push(&x);
        let mut b = ChunkedPsd::new(1024, 1000.0).unwrap();
        for chunk in x.chunks(333) {
            b.push(chunk);
        }
        assert_eq!(a.finish().unwrap(), b.finish().unwrap());
        assert_eq!(a.segments(), 9);
    }
}
