use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NeuroError, Region};

const DEFAULT_PARAMS: &str = include_str!("../../data/bgt_params.toml");

/// Boltzmann steady-state curve `1 / (1 + exp(-(v - theta) / sigma))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boltzmann {
    pub theta: f64,
    pub sigma: f64,
}

impl Boltzmann {
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        1.0 / (1.0 + (-(v - self.theta) / self.sigma).exp())
    }
}

/// Sigmoidal time constant `base + amp / (1 + exp(-(v - theta) / sigma))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmoidTau {
    pub base: f64,
    pub amp: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl SigmoidTau {
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        self.base + self.amp / (1.0 + (-(v - self.theta) / self.sigma).exp())
    }
}

/// `scale * exp(-(v - theta) / sigma)`
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpRate {
    pub scale: f64,
    pub theta: f64,
    pub sigma: f64,
}

/// `scale * (base + exp(-(v - theta) / sigma))`
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTau {
    pub scale: f64,
    pub base: f64,
    pub theta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionCurrents {
    pub stn: f64,
    pub gpe: f64,
    pub gpi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub i_app_healthy: RegionCurrents,
    pub i_app_pd: RegionCurrents,
    pub dbs_gain: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmcParams {
    pub amplitude: f64,
    pub width_ms: f64,
    pub rate_hz: f64,
    pub cv: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThalamusParams {
    pub g_l: f64,
    pub e_l: f64,
    pub g_na: f64,
    pub e_na: f64,
    pub g_k: f64,
    pub e_k: f64,
    pub g_t: f64,
    pub e_t: f64,
    pub m_inf: Boltzmann,
    pub h_inf: Boltzmann,
    pub r_inf: Boltzmann,
    pub p_inf: Boltzmann,
    pub tau_h_alpha: ExpRate,
    pub tau_h_beta: ExpRate,
    pub tau_r: ExpTau,
}

impl ThalamusParams {
    #[inline]
    pub fn tau_h(&self, v: f64) -> f64 {
        let a = self.tau_h_alpha.scale * (-(v - self.tau_h_alpha.theta) / self.tau_h_alpha.sigma).exp();
        let b = self.tau_h_beta.scale / (1.0 + (-(v - self.tau_h_beta.theta) / self.tau_h_beta.sigma).exp());
        1.0 / (a + b)
    }

    #[inline]
    pub fn tau_r(&self, v: f64) -> f64 {
        self.tau_r.scale * (self.tau_r.base + (-(v - self.tau_r.theta) / self.tau_r.sigma).exp())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StnParams {
    pub g_l: f64,
    pub e_l: f64,
    pub g_na: f64,
    pub e_na: f64,
    pub g_k: f64,
    pub e_k: f64,
    pub g_t: f64,
    pub g_ca: f64,
    pub e_ca: f64,
    pub g_ahp: f64,
    pub k1: f64,
    pub k_ca: f64,
    pub eps_ca: f64,
    pub phi_n: f64,
    pub phi_h: f64,
    pub phi_r: f64,
    pub phi_c: f64,
    pub m_inf: Boltzmann,
    pub h_inf: Boltzmann,
    pub n_inf: Boltzmann,
    pub a_inf: Boltzmann,
    pub r_inf: Boltzmann,
    pub c_inf: Boltzmann,
    pub b_inf: Boltzmann,
    pub tau_n: SigmoidTau,
    pub tau_h: SigmoidTau,
    pub tau_r: SigmoidTau,
    pub tau_c: SigmoidTau,
}

impl StnParams {
    /// T-current inactivation as a function of the slow gate `r`, offset so
    /// that it vanishes at `r = 0`.
    #[inline]
    pub fn b_inf(&self, r: f64) -> f64 {
        self.b_inf.eval(r) - self.b_inf.eval(0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PallidalParams {
    pub g_l: f64,
    pub e_l: f64,
    pub g_na: f64,
    pub e_na: f64,
    pub g_k: f64,
    pub e_k: f64,
    pub g_t: f64,
    pub g_ca: f64,
    pub e_ca: f64,
    pub g_ahp: f64,
    pub k1: f64,
    pub k_ca: f64,
    pub eps_ca: f64,
    pub phi_n: f64,
    pub phi_h: f64,
    pub phi_r: f64,
    pub tau_r: f64,
    pub m_inf: Boltzmann,
    pub h_inf: Boltzmann,
    pub n_inf: Boltzmann,
    pub a_inf: Boltzmann,
    pub r_inf: Boltzmann,
    pub s_inf: Boltzmann,
    pub tau_n: SigmoidTau,
    pub tau_h: SigmoidTau,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynapseKinetics {
    /// Second-order kinetics kicked on each upward threshold crossing.
    Alpha { tau: f64, gpeak: f64, threshold: f64 },
    /// Voltage-gated first-order kinetics.
    Gated { rate_on: f64, rate_off: f64, act_inf: Boltzmann },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseTable {
    pub stn: SynapseKinetics,
    pub gpe: SynapseKinetics,
    pub gpi: SynapseKinetics,
}

impl SynapseTable {
    pub fn for_region(&self, region: Region) -> Option<&SynapseKinetics> {
        match region {
            Region::Stn => Some(&self.stn),
            Region::Gpe => Some(&self.gpe),
            Region::Gpi => Some(&self.gpi),
            Region::Th => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Projection {
    pub from: Region,
    pub to: Region,
    pub g: f64,
    pub e_syn: f64,
    pub scale: f64,
    pub offsets: Vec<i64>,
}

/// Full parameter table of the network model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub version: String,
    pub membrane_capacitance: f64,
    pub v_init_mean: f64,
    pub v_init_sd: f64,
    pub ca_init: f64,
    pub v_guard: [f64; 2],
    pub drive: DriveParams,
    pub smc: SmcParams,
    pub thalamus: ThalamusParams,
    pub stn: StnParams,
    pub pallidum: PallidalParams,
    pub synapse: SynapseTable,
    pub projection: Vec<Projection>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_PARAMS).expect("bundled parameter table is valid")
    }
}

impl ModelParams {
    pub fn from_toml_str(text: &str) -> Result<Self, NeuroError> {
        let params: ModelParams = toml::from_str(text).map_err(|e| NeuroError::Params(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NeuroError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| NeuroError::Params(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }

    /// The bundled parameter file, verbatim.
    pub fn bundled_source() -> &'static str {
        DEFAULT_PARAMS
    }

    fn validate(&self) -> Result<(), NeuroError> {
        if !(self.membrane_capacitance > 0.0) {
            return Err(NeuroError::Params("membrane_capacitance must be positive".into()));
        }
        if !(self.v_guard[0] < self.v_guard[1]) {
            return Err(NeuroError::Params("v_guard must be an increasing pair".into()));
        }
        if !(self.smc.rate_hz > 0.0 && self.smc.cv > 0.0 && self.smc.width_ms > 0.0) {
            return Err(NeuroError::Params("smc rate, cv and width must be positive".into()));
        }
        for p in &self.projection {
            if p.to == p.from && p.offsets.contains(&0) {
                return Err(NeuroError::Params(format!("{:?} self-projection must not include offset 0", p.to)));
            }
            if self.synapse.for_region(p.from).is_none() {
                return Err(NeuroError::Params(format!("{:?} has no output synapse", p.from)));
            }
        }
        Ok(())
    }
}
