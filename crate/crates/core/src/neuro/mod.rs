//! Conductance-based basal ganglia-thalamic network.
//!
//! Four populations of single-compartment neurons (STN, GPe, GPi and
//! thalamus) integrated with explicit Euler. Stimulation current enters the
//! STN, sensorimotor drive enters the thalamus, and the Parkinsonian
//! condition is a change of the applied bias currents. Channel kinetics and
//! coupling come from a versioned parameter table, see [`ModelParams`].

mod network;
mod params;
mod smc;
mod spikes;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use network::{init_network, init_network_with, NetworkState, RoundObservation};
pub use params::{
    Boltzmann, DriveParams, ExpRate, ExpTau, ModelParams, PallidalParams, Projection, RegionCurrents, SigmoidTau,
    SmcParams, StnParams, SynapseKinetics, SynapseTable, ThalamusParams,
};
pub use smc::{generate_smc_input, SmcInput};
pub use spikes::{detect_spikes, SpikeDetector, SPIKE_REFRACTORY_MS, SPIKE_THRESHOLD_MV};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuroError {
    #[error("membrane potential diverged: {region} neuron {neuron} reached {v} mV at t = {t_ms} ms")]
    Divergence { region: Region, neuron: usize, v: f64, t_ms: f64 },
    #[error("invalid model parameters: {0}")]
    Params(String),
    #[error("invalid simulation request: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Stn,
    Gpe,
    Gpi,
    Th,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Stn, Region::Gpe, Region::Gpi, Region::Th];

    pub fn index(self) -> usize {
        match self {
            Region::Stn => 0,
            Region::Gpe => 1,
            Region::Gpi => 2,
            Region::Th => 3,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Region::Stn => "STN",
            Region::Gpe => "GPe",
            Region::Gpi => "GPi",
            Region::Th => "TH",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Healthy,
    Pd,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Healthy => "healthy",
            Condition::Pd => "pd",
        })
    }
}

/// Channel gates. Unused gates of a region stay at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Gating {
    pub n: f64,
    pub h: f64,
    pub r: f64,
    /// High-threshold calcium activation (STN only).
    pub c: f64,
}

impl Gating {
    pub fn as_array(&self) -> [f64; 4] {
        [self.n, self.h, self.r, self.c]
    }
}

/// Output synapse state: activation `s` and its derivative helper `z`
/// (second-order kinetics only).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SynapseState {
    pub s: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeuronState {
    /// Membrane potential, mV.
    pub v: f64,
    pub gating: Gating,
    /// Intracellular calcium concentration.
    pub ca: f64,
    pub syn: SynapseState,
}
