use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::params::{ModelParams, SynapseKinetics};
use super::smc::SmcInput;
use super::spikes::SpikeDetector;
use super::{Condition, NeuroError, NeuronState, Region};
use crate::stim::PulseTrain;

/// Precomputed presynaptic index lists for one projection.
#[derive(Debug, Clone)]
struct Afferent {
    from: usize,
    to: usize,
    weight: f64,
    e_syn: f64,
    // sources[i] = presynaptic neurons of target neuron i
    sources: Vec<Vec<usize>>,
}

/// Complete simulation state of the network.
#[derive(Debug, Clone)]
pub struct NetworkState {
    params: Arc<ModelParams>,
    condition: Condition,
    regions: [Vec<NeuronState>; 4],
    i_app: [f64; 4],
    afferents: Vec<Afferent>,
    rng: ChaCha8Rng,
    time_ms: f64,
    syn_current: [Vec<f64>; 4],
}

/// Everything recorded during one stimulation round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundObservation {
    pub dt: f64,
    /// Per-neuron GPi membrane potential.
    pub gpi_traces: Vec<Vec<f64>>,
    /// Per-neuron thalamic membrane potential.
    pub th_traces: Vec<Vec<f64>>,
    /// Stimulation current as commanded (before the tissue gain).
    pub i_dbs: Vec<f64>,
    pub smc: SmcInput,
    /// Spike times in ms per region (indexed by [`Region::index`]) and neuron.
    pub spikes: [Vec<Vec<f64>>; 4],
}

impl RoundObservation {
    pub fn len(&self) -> usize {
        self.i_dbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i_dbs.is_empty()
    }

    pub fn region_spikes(&self, region: Region) -> &[Vec<f64>] {
        &self.spikes[region.index()]
    }
}

/// Builds a network with the bundled parameter table.
pub fn init_network(condition: Condition, n_per_region: usize, seed: u64) -> Result<NetworkState, NeuroError> {
    init_network_with(Arc::new(ModelParams::default()), condition, n_per_region, seed)
}

pub fn init_network_with(
    params: Arc<ModelParams>,
    condition: Condition,
    n_per_region: usize,
    seed: u64,
) -> Result<NetworkState, NeuroError> {
    if n_per_region == 0 {
        return Err(NeuroError::Invalid("need at least one neuron per region".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter =
        Normal::new(params.v_init_mean, params.v_init_sd.max(0.0)).map_err(|e| NeuroError::Params(e.to_string()))?;

    let mut regions: [Vec<NeuronState>; 4] = Default::default();
    for region in Region::ALL {
        regions[region.index()] = (0..n_per_region)
            .map(|_| {
                let v = jitter.sample(&mut rng);
                resting_neuron(&params, region, v)
            })
            .collect();
    }

    let drive = match condition {
        Condition::Healthy => &params.drive.i_app_healthy,
        Condition::Pd => &params.drive.i_app_pd,
    };
    let i_app = [drive.stn, drive.gpe, drive.gpi, 0.0];

    let afferents = params
        .projection
        .iter()
        .map(|p| {
            let n = n_per_region as i64;
            let sources =
                (0..n).map(|i| p.offsets.iter().map(|off| (i + off).rem_euclid(n) as usize).collect()).collect();
            Afferent { from: p.from.index(), to: p.to.index(), weight: p.g * p.scale, e_syn: p.e_syn, sources }
        })
        .collect();

    Ok(NetworkState {
        params,
        condition,
        regions,
        i_app,
        afferents,
        rng,
        time_ms: 0.0,
        syn_current: std::array::from_fn(|_| vec![0.0; n_per_region]),
    })
}

fn resting_neuron(params: &ModelParams, region: Region, v: f64) -> NeuronState {
    let mut nrn = NeuronState { v, ca: params.ca_init, ..Default::default() };
    match region {
        Region::Th => {
            let th = &params.thalamus;
            nrn.ca = 0.0;
            nrn.gating.h = th.h_inf.eval(v);
            nrn.gating.r = th.r_inf.eval(v);
        }
        Region::Stn => {
            let p = &params.stn;
            nrn.gating.n = p.n_inf.eval(v);
            nrn.gating.h = p.h_inf.eval(v);
            nrn.gating.r = p.r_inf.eval(v);
            nrn.gating.c = p.c_inf.eval(v);
        }
        Region::Gpe | Region::Gpi => {
            let p = &params.pallidum;
            nrn.gating.n = p.n_inf.eval(v);
            nrn.gating.h = p.h_inf.eval(v);
            nrn.gating.r = p.r_inf.eval(v);
        }
    }
    nrn
}

#[inline]
fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl NetworkState {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn n_per_region(&self) -> usize {
        self.regions[0].len()
    }

    pub fn region(&self, region: Region) -> &[NeuronState] {
        &self.regions[region.index()]
    }

    pub fn regions(&self) -> &[Vec<NeuronState>; 4] {
        &self.regions
    }

    /// Bias current applied to each neuron of `region`.
    pub fn i_app(&self, region: Region) -> f64 {
        self.i_app[region.index()]
    }

    pub fn time_ms(&self) -> f64 {
        self.time_ms
    }

    /// Advances every neuron by one explicit Euler step of `dt` ms.
    ///
    /// `i_dbs` is the commanded stimulation current density; the STN receives
    /// `dbs_gain * i_dbs`. `i_smc` drives the thalamus only.
    pub fn step(&mut self, i_dbs: f64, i_smc: f64, dt: f64) -> Result<(), NeuroError> {
        if !(dt > 0.0) {
            return Err(NeuroError::Invalid(format!("dt must be positive, got {dt}")));
        }
        self.compute_synaptic_currents();

        let params = Arc::clone(&self.params);
        let p = &*params;
        let cm = p.membrane_capacitance;
        let i_stim = p.drive.dbs_gain * i_dbs;

        for (nrn, &i_syn) in self.regions[Region::Stn.index()].iter_mut().zip(&self.syn_current[0]) {
            let v_old = nrn.v;
            step_stn(nrn, p, self.i_app[0] - i_syn + i_stim, cm, dt);
            step_synapse(nrn, &p.synapse.stn, v_old, dt);
        }
        for (nrn, &i_syn) in self.regions[Region::Gpe.index()].iter_mut().zip(&self.syn_current[1]) {
            let v_old = nrn.v;
            step_pallidal(nrn, p, self.i_app[1] - i_syn, cm, dt);
            step_synapse(nrn, &p.synapse.gpe, v_old, dt);
        }
        for (nrn, &i_syn) in self.regions[Region::Gpi.index()].iter_mut().zip(&self.syn_current[2]) {
            let v_old = nrn.v;
            step_pallidal(nrn, p, self.i_app[2] - i_syn, cm, dt);
            step_synapse(nrn, &p.synapse.gpi, v_old, dt);
        }
        for (nrn, &i_syn) in self.regions[Region::Th.index()].iter_mut().zip(&self.syn_current[3]) {
            step_thalamic(nrn, p, i_smc - i_syn, cm, dt);
        }

        self.time_ms += dt;
        self.check_guard()
    }

    fn compute_synaptic_currents(&mut self) {
        for cur in &mut self.syn_current {
            cur.fill(0.0);
        }
        for aff in &self.afferents {
            let src = &self.regions[aff.from];
            let dst = &self.regions[aff.to];
            let out = &mut self.syn_current[aff.to];
            for (i, sources) in aff.sources.iter().enumerate() {
                let drive: f64 = sources.iter().map(|&j| src[j].syn.s).sum();
                out[i] += aff.weight * (dst[i].v - aff.e_syn) * drive;
            }
        }
    }

    fn check_guard(&self) -> Result<(), NeuroError> {
        let [lo, hi] = self.params.v_guard;
        for region in Region::ALL {
            for (i, nrn) in self.regions[region.index()].iter().enumerate() {
                if !(nrn.v >= lo && nrn.v <= hi) {
                    return Err(NeuroError::Divergence { region, neuron: i, v: nrn.v, t_ms: self.time_ms });
                }
            }
        }
        Ok(())
    }

    /// Integrates with no stimulation and fresh sensorimotor input, discarding
    /// the recordings. Used to wash out initial transients.
    pub fn warm_up(&mut self, duration: f64, dt: f64) -> Result<(), NeuroError> {
        let smc = SmcInput::generate(duration, dt, &self.params.smc, &mut self.rng);
        for &i_smc in &smc.series {
            self.step(0.0, i_smc, dt)?;
        }
        Ok(())
    }

    /// Integrates one round of `duration` ms, delivering `train` to the STN
    /// and a freshly drawn sensorimotor pulse series to the thalamus.
    pub fn run_round(&mut self, train: &PulseTrain, duration: f64) -> Result<RoundObservation, NeuroError> {
        let dt = train.dt();
        let n_steps = (duration / dt).round() as usize;
        if n_steps == 0 || n_steps > train.samples().len() {
            return Err(NeuroError::Invalid(format!(
                "round of {duration} ms needs {n_steps} stimulation samples, train has {}",
                train.samples().len()
            )));
        }
        let smc = SmcInput::generate(duration, dt, &self.params.smc, &mut self.rng);
        let n = self.n_per_region();

        let mut gpi_traces = vec![Vec::with_capacity(n_steps); n];
        let mut th_traces = vec![Vec::with_capacity(n_steps); n];
        let mut detectors: [Vec<SpikeDetector>; 4] = std::array::from_fn(|r| {
            self.regions[r]
                .iter()
                .map(|nrn| {
                    let mut d = SpikeDetector::new();
                    d.push(nrn.v, -dt);
                    d
                })
                .collect()
        });
        let mut spikes: [Vec<Vec<f64>>; 4] = std::array::from_fn(|_| vec![Vec::new(); n]);

        let stim = &train.samples()[..n_steps];
        for (k, (&i_dbs, &i_smc)) in stim.iter().zip(&smc.series).enumerate() {
            self.step(i_dbs, i_smc, dt)?;
            let t = k as f64 * dt;
            for r in 0..4 {
                for (i, nrn) in self.regions[r].iter().enumerate() {
                    if detectors[r][i].push(nrn.v, t) {
                        spikes[r][i].push(t);
                    }
                }
            }
            for (trace, nrn) in gpi_traces.iter_mut().zip(&self.regions[Region::Gpi.index()]) {
                trace.push(nrn.v);
            }
            for (trace, nrn) in th_traces.iter_mut().zip(&self.regions[Region::Th.index()]) {
                trace.push(nrn.v);
            }
        }

        Ok(RoundObservation { dt, gpi_traces, th_traces, i_dbs: stim.to_vec(), smc, spikes })
    }
}

#[inline]
fn step_stn(nrn: &mut NeuronState, params: &ModelParams, i_ext: f64, cm: f64, dt: f64) {
    let p = &params.stn;
    let v = nrn.v;
    let g = nrn.gating;

    let m = p.m_inf.eval(v);
    let a = p.a_inf.eval(v);
    let b = p.b_inf(g.r);

    let i_l = p.g_l * (v - p.e_l);
    let i_k = p.g_k * g.n.powi(4) * (v - p.e_k);
    let i_na = p.g_na * m.powi(3) * g.h * (v - p.e_na);
    let i_t = p.g_t * a.powi(3) * b * b * (v - p.e_ca);
    let i_ca = p.g_ca * g.c * g.c * (v - p.e_ca);
    let i_ahp = p.g_ahp * (v - p.e_k) * nrn.ca / (nrn.ca + p.k1);

    nrn.v = v + dt * (-i_l - i_k - i_na - i_t - i_ca - i_ahp + i_ext) / cm;
    nrn.gating.n = clamp01(g.n + dt * p.phi_n * (p.n_inf.eval(v) - g.n) / p.tau_n.eval(v));
    nrn.gating.h = clamp01(g.h + dt * p.phi_h * (p.h_inf.eval(v) - g.h) / p.tau_h.eval(v));
    nrn.gating.r = clamp01(g.r + dt * p.phi_r * (p.r_inf.eval(v) - g.r) / p.tau_r.eval(v));
    nrn.gating.c = clamp01(g.c + dt * p.phi_c * (p.c_inf.eval(v) - g.c) / p.tau_c.eval(v));
    nrn.ca += dt * p.eps_ca * (-i_ca - i_t - p.k_ca * nrn.ca);
}

#[inline]
fn step_pallidal(nrn: &mut NeuronState, params: &ModelParams, i_ext: f64, cm: f64, dt: f64) {
    let p = &params.pallidum;
    let v = nrn.v;
    let g = nrn.gating;

    let m = p.m_inf.eval(v);
    let a = p.a_inf.eval(v);
    let s = p.s_inf.eval(v);

    let i_l = p.g_l * (v - p.e_l);
    let i_k = p.g_k * g.n.powi(4) * (v - p.e_k);
    let i_na = p.g_na * m.powi(3) * g.h * (v - p.e_na);
    let i_t = p.g_t * a.powi(3) * g.r * (v - p.e_ca);
    let i_ca = p.g_ca * s * s * (v - p.e_ca);
    let i_ahp = p.g_ahp * (v - p.e_k) * nrn.ca / (nrn.ca + p.k1);

    nrn.v = v + dt * (-i_l - i_k - i_na - i_t - i_ca - i_ahp + i_ext) / cm;
    nrn.gating.n = clamp01(g.n + dt * p.phi_n * (p.n_inf.eval(v) - g.n) / p.tau_n.eval(v));
    nrn.gating.h = clamp01(g.h + dt * p.phi_h * (p.h_inf.eval(v) - g.h) / p.tau_h.eval(v));
    nrn.gating.r = clamp01(g.r + dt * p.phi_r * (p.r_inf.eval(v) - g.r) / p.tau_r);
    nrn.ca += dt * p.eps_ca * (-i_ca - i_t - p.k_ca * nrn.ca);
}

#[inline]
fn step_thalamic(nrn: &mut NeuronState, params: &ModelParams, i_ext: f64, cm: f64, dt: f64) {
    let p = &params.thalamus;
    let v = nrn.v;
    let g = nrn.gating;

    let m = p.m_inf.eval(v);
    let pt = p.p_inf.eval(v);

    let i_l = p.g_l * (v - p.e_l);
    let i_na = p.g_na * m.powi(3) * g.h * (v - p.e_na);
    let i_k = p.g_k * (0.75 * (1.0 - g.h)).powi(4) * (v - p.e_k);
    let i_t = p.g_t * pt * pt * g.r * (v - p.e_t);

    nrn.v = v + dt * (-i_l - i_na - i_k - i_t + i_ext) / cm;
    nrn.gating.h = clamp01(g.h + dt * (p.h_inf.eval(v) - g.h) / p.tau_h(v));
    nrn.gating.r = clamp01(g.r + dt * (p.r_inf.eval(v) - g.r) / p.tau_r(v));
}

#[inline]
fn step_synapse(nrn: &mut NeuronState, kinetics: &SynapseKinetics, v_old: f64, dt: f64) {
    match *kinetics {
        SynapseKinetics::Alpha { tau, gpeak, threshold } => {
            let kick = if v_old < threshold && nrn.v >= threshold { gpeak / (tau * (-1.0f64).exp()) } else { 0.0 };
            let syn = &mut nrn.syn;
            syn.s += dt * syn.z;
            syn.z += kick + dt * (-2.0 / tau * syn.z - syn.s / (tau * tau));
        }
        SynapseKinetics::Gated { rate_on, rate_off, act_inf } => {
            let syn = &mut nrn.syn;
            syn.s += dt * (rate_on * (1.0 - syn.s) * act_inf.eval(v_old) - rate_off * syn.s);
        }
    }
}
