/// Upward threshold crossing that counts as a spike, in mV.
pub const SPIKE_THRESHOLD_MV: f64 = -35.0;

/// Minimum separation between two detected spikes, in ms.
pub const SPIKE_REFRACTORY_MS: f64 = 2.0;

/// Streaming threshold-crossing detector.
#[derive(Debug, Clone, Default)]
pub struct SpikeDetector {
    prev_v: Option<f64>,
    last_spike: Option<f64>,
}

impl SpikeDetector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds one sample at time `t`; returns true if it completes a spike.
    #[inline]
    pub fn push(&mut self, v: f64, t: f64) -> bool {
        let crossed = matches!(self.prev_v, Some(p) if p < SPIKE_THRESHOLD_MV && v >= SPIKE_THRESHOLD_MV);
        self.prev_v = Some(v);
        // Small slack so that a crossing exactly one refractory period later is kept.
        if crossed && self.last_spike.is_none_or(|last| t - last >= SPIKE_REFRACTORY_MS - 1e-9) {
            self.last_spike = Some(t);
            return true;
        }
        false
    }

    /// Shifts the time origin, used when a new round starts at t = 0.
    pub fn rebase(&mut self, offset: f64) {
        if let Some(last) = self.last_spike.as_mut() {
            *last -= offset;
        }
    }
}

/// Times (ms) of upward crossings of -35 mV at least 2 ms apart.
pub fn detect_spikes(trace: &[f64], dt: f64) -> Vec<f64> {
    let mut det = SpikeDetector::new();
    trace
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| {
            let t = i as f64 * dt;
            det.push(v, t).then_some(t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_spike(trace: &mut [f64], start: usize, dt: f64) {
        // -65 -> 0 over 1.5 ms, back to -65 over 1.5 ms
        let half = (1.5 / dt) as usize;
        for k in 0..half {
            trace[start + k] = -65.0 + 65.0 * k as f64 / half as f64;
            trace[start + half + k] = 0.0 - 65.0 * k as f64 / half as f64;
        }
    }

    #[test]
    fn flat_trace_has_no_spikes() {
        assert!(detect_spikes(&vec![-65.0; 1000], 0.01).is_empty());
    }

    #[test]
    fn single_ramp_is_one_spike() {
        let mut trace = vec![-65.0; 1000];
        ramp_spike(&mut trace, 100, 0.01);
        assert_eq!(detect_spikes(&trace, 0.01).len(), 1);
    }

    #[test]
    fn spikes_within_refractory_merge() {
        let mut trace = vec![-65.0; 2000];
        trace[100] = 0.0;
        trace[200] = 0.0; // 1 ms later
        let spikes = detect_spikes(&trace, 0.01);
        assert_eq!(spikes, vec![1.0]);
        trace[500] = 0.0; // 4 ms after the first
        assert_eq!(detect_spikes(&trace, 0.01).len(), 2);
    }
}
