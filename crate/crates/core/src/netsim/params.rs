use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-neuron constants (mV, ms, pF, pA).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuronParams {
    pub tau_m_ms: f64,
    pub e_l_mv: f64,
    pub v_th_mv: f64,
    pub v_reset_mv: f64,
    pub t_ref_ms: f64,
    pub c_m_pf: f64,
    pub e_ex_mv: f64,
    pub e_in_mv: f64,
    pub tau_syn_ex_ms: f64,
    pub tau_syn_in_ms: f64,
    /// Constant injected current.
    pub i_e_pa: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            tau_m_ms: 20.0,
            e_l_mv: -60.0,
            v_th_mv: -50.0,
            v_reset_mv: -60.0,
            t_ref_ms: 5.0,
            c_m_pf: 200.0,
            e_ex_mv: 0.0,
            e_in_mv: -80.0,
            tau_syn_ex_ms: 5.0,
            tau_syn_in_ms: 10.0,
            i_e_pa: 0.0,
        }
    }
}

impl NeuronParams {
    /// Leak conductance `C_m / τ_m` in nS.
    pub fn g_leak_ns(&self) -> f64 {
        self.c_m_pf / self.tau_m_ms
    }

    pub fn validate(&self) -> Result<()> {
        let p = self;
        let positive = [
            ("tau_m_ms", p.tau_m_ms),
            ("c_m_pf", p.c_m_pf),
            ("tau_syn_ex_ms", p.tau_syn_ex_ms),
            ("tau_syn_in_ms", p.tau_syn_in_ms),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(p.t_ref_ms >= 0.0) {
            return Err(Error::Config(format!("t_ref_ms must be >= 0, got {}", p.t_ref_ms)));
        }
        if !(p.v_reset_mv <= p.e_l_mv && p.e_l_mv < p.v_th_mv) {
            return Err(Error::Config("neuron requires V_reset <= E_L < V_th".into()));
        }
        if !(p.e_in_mv < p.e_l_mv && p.e_l_mv < p.e_ex_mv && p.v_th_mv < p.e_ex_mv) {
            return Err(Error::Config(
                "neuron requires E_in < E_L < E_ex and V_th < E_ex".into(),
            ));
        }
        Ok(())
    }
}

/// Per-neuron variability applied on top of the nominal constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Heterogeneity {
    /// SD of the zero-mean Gaussian threshold jitter.
    pub v_th_sd_mv: f64,
    /// Draw initial potentials uniformly in `[V_reset, V_th]`.
    pub random_initial_v: bool,
    /// Coefficient of variation of per-neuron drive rates (0 = homogeneous).
    pub drive_rate_cv: f64,
}

impl Default for Heterogeneity {
    fn default() -> Self {
        Self {
            v_th_sd_mv: 1.0,
            random_initial_v: true,
            drive_rate_cv: 0.0,
        }
    }
}

impl Heterogeneity {
    pub const NONE: Heterogeneity = Heterogeneity {
        v_th_sd_mv: 0.0,
        random_initial_v: false,
        drive_rate_cv: 0.0,
    };
}

/// Full parameterization of one random E/I network run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub n_neurons: usize,
    pub frac_excitatory: f64,
    pub p_connect: f64,
    /// Excitatory synaptic weight (conductance jump).
    pub g_e_ns: f64,
    /// Inhibitory-to-excitatory weight ratio `g = g_I / g_E`.
    pub g_ratio: f64,
    /// External Poisson drive rate per neuron.
    pub drive_rate_hz: f64,
    /// Conductance jump per external event.
    pub drive_weight_ns: f64,
    /// Total simulated time including warm-up.
    pub duration_ms: f64,
    pub warmup_ms: f64,
    pub dt_ms: f64,
    pub delay_ms: f64,
    pub seed: u64,
    pub neuron: NeuronParams,
    pub heterogeneity: Heterogeneity,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_neurons: 400,
            frac_excitatory: 0.8,
            p_connect: 0.2,
            g_e_ns: 2.0,
            g_ratio: 6.5,
            drive_rate_hz: NetworkConfig::CALIBRATED_DRIVE_HZ,
            drive_weight_ns: 2.0,
            duration_ms: 61_000.0,
            warmup_ms: 1_000.0,
            dt_ms: 0.1,
            delay_ms: 1.5,
            seed: 0,
            neuron: NeuronParams::default(),
            heterogeneity: Heterogeneity::default(),
        }
    }
}

impl NetworkConfig {
    /// Drive rate that puts the g = 6.5 network in the 2–10 Hz range.
    pub const CALIBRATED_DRIVE_HZ: f64 = 80.0;

    pub fn n_excitatory(&self) -> usize {
        (self.n_neurons as f64 * self.frac_excitatory).round() as usize
    }

    pub fn g_i_ns(&self) -> f64 {
        self.g_ratio * self.g_e_ns
    }

    pub fn steps(&self) -> u64 {
        (self.duration_ms / self.dt_ms).round() as u64
    }

    pub fn warmup_steps(&self) -> u64 {
        (self.warmup_ms / self.dt_ms).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        self.neuron.validate()?;
        if self.n_neurons == 0 {
            return Err(Error::Config("n_neurons must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.frac_excitatory) {
            return Err(Error::Config("frac_excitatory must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.p_connect) {
            return Err(Error::Config(format!(
                "p_connect must be in [0, 1], got {}",
                self.p_connect
            )));
        }
        if !(self.g_ratio > 0.0) {
            return Err(Error::Config(format!("g_ratio must be > 0, got {}", self.g_ratio)));
        }
        if !(self.g_e_ns >= 0.0 && self.drive_weight_ns >= 0.0) {
            return Err(Error::Config("synaptic weights must be >= 0".into()));
        }
        if !(self.dt_ms > 0.0) {
            return Err(Error::Config("dt_ms must be > 0".into()));
        }
        if !(self.warmup_ms >= 0.0 && self.warmup_ms < self.duration_ms) {
            return Err(Error::Config(format!(
                "warm-up ({} ms) must be shorter than duration ({} ms)",
                self.warmup_ms, self.duration_ms
            )));
        }
        if self.delay_ms < self.dt_ms {
            return Err(Error::Config("synaptic delay must be at least one step".into()));
        }
        if !(self.drive_rate_hz >= 0.0) {
            return Err(Error::Config("drive rate must be >= 0".into()));
        }
        if self.heterogeneity.v_th_sd_mv < 0.0 || self.heterogeneity.drive_rate_cv < 0.0 {
            return Err(Error::Config("jitter magnitudes must be >= 0".into()));
        }
        Ok(())
    }
}
