//! Iterative in-place radix-2 decimation-in-time FFT.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::SignalError;

/// Twiddle table for one transform length.
#[derive(Debug, Clone)]
pub struct Radix2Plan {
    n: usize,
    twiddles: Vec<Complex64>,
}

impl Radix2Plan {
    pub fn new(n: usize) -> Result<Self, SignalError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(SignalError::NotPowerOfTwo { len: n });
        }
        let twiddles = (0..n / 2).map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)).collect();
        Ok(Self { n, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of complex values held by the twiddle table.
    pub fn twiddle_len(&self) -> usize {
        self.twiddles.len()
    }

    /// Forward transform of `buf` in place, `X_k = sum_j x_j exp(-2 pi i jk / n)`.
    pub fn process(&self, buf: &mut [Complex64]) -> Result<(), SignalError> {
        let n = self.n;
        if buf.len() != n {
            return Err(SignalError::LengthMismatch { expected: n, found: buf.len() });
        }
        if n == 1 {
            return Ok(());
        }

        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }

        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for block in buf.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = *b * self.twiddles[k * stride];
                    *b = *a - t;
                    *a += t;
                }
            }
            len <<= 1;
        }
        Ok(())
    }
}

/// Complex spectrum of a real series.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    /// Sampling rate in Hz.
    pub fs: f64,
    pub n: usize,
}

impl Spectrum {
    /// Center frequency of bin `k` in Hz.
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.fs / self.n as f64
    }
}

/// Transforms a real series whose length is a power of two.
pub fn fft_radix2(samples: &[f64], fs: f64) -> Result<Spectrum, SignalError> {
    let plan = Radix2Plan::new(samples.len())?;
    let mut bins: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.process(&mut bins)?;
    Ok(Spectrum { bins, fs, n: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let s = fft_radix2(&x, 8.0).unwrap();
        for b in &s.bins {
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_is_dc_only() {
        let s = fft_radix2(&[1.0; 8], 8.0).unwrap();
        assert!((s.bins[0] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        for b in &s.bins[1..] {
            assert!(b.norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(fft_radix2(&[0.0; 12], 1.0), Err(SignalError::NotPowerOfTwo { len: 12 }));
        assert_eq!(fft_radix2(&[], 1.0), Err(SignalError::NotPowerOfTwo { len: 0 }));
        assert!(fft_radix2(&[3.0], 1.0).is_ok());
    }

    #[test]
    fn bin_frequencies() {
        let s = fft_radix2(&[0.0; 16], 1600.0).unwrap();
        assert_eq!(s.frequency(1), 100.0);
        assert_eq!(s.frequency(8), 800.0);
    }
}
