use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::{build_random_network, simulate, NetworkConfig, NeuronParams, RecorderConfig, Recordings};
use crate::seed::{self, streams};
use crate::sigproc::{to_relative, welch_1d, Spectrum, TimeSeries, WelchParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionName {
    #[serde(rename = "AD")]
    Ad,
    #[serde(rename = "MCI")]
    Mci,
    #[serde(rename = "HC")]
    Hc,
}

impl ConditionName {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionName::Ad => "AD",
            ConditionName::Mci => "MCI",
            ConditionName::Hc => "HC",
        }
    }
}

impl fmt::Display for ConditionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AD" => Ok(ConditionName::Ad),
            "MCI" => Ok(ConditionName::Mci),
            "HC" => Ok(ConditionName::Hc),
            other => Err(Error::Config(format!("unknown condition {other:?}"))),
        }
    }
}

/// Simulated clinical condition: an inhibitory-to-excitatory weight ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: ConditionName,
    pub g_ratio: f64,
}

impl Condition {
    pub const AD: Condition = Condition {
        name: ConditionName::Ad,
        g_ratio: 2.5,
    };
    pub const MCI: Condition = Condition {
        name: ConditionName::Mci,
        g_ratio: 3.5,
    };
    pub const HC: Condition = Condition {
        name: ConditionName::Hc,
        g_ratio: 6.5,
    };

    pub fn standard(name: ConditionName) -> Self {
        match name {
            ConditionName::Ad => Self::AD,
            ConditionName::Mci => Self::MCI,
            ConditionName::Hc => Self::HC,
        }
    }

    pub fn with_g_ratio(self, g_ratio: f64) -> Self {
        Self { g_ratio, ..self }
    }

    pub fn apply(&self, cfg: &NetworkConfig) -> NetworkConfig {
        NetworkConfig {
            g_ratio: self.g_ratio,
            ..cfg.clone()
        }
    }
}

/// Which recorded quantity stands in for the EEG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProxyModel {
    /// Mean membrane potential of 20% of excitatory neurons.
    #[serde(rename = "1")]
    Membrane,
    /// Mean net synaptic current of 15% of excitatory neurons.
    #[serde(rename = "2")]
    Synaptic,
}

impl ProxyModel {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(ProxyModel::Membrane),
            2 => Ok(ProxyModel::Synaptic),
            _ => Err(Error::Config(format!("model must be 1 or 2, got {n}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ProxyModel::Membrane => 1,
            ProxyModel::Synaptic => 2,
        }
    }

    pub fn recorder(self) -> RecorderConfig {
        match self {
            ProxyModel::Membrane => RecorderConfig::MODEL1,
            ProxyModel::Synaptic => RecorderConfig::MODEL2,
        }
    }

    pub fn welch(self) -> WelchParams {
        match self {
            ProxyModel::Membrane => WelchParams::MODEL1,
            ProxyModel::Synaptic => WelchParams::MODEL2,
        }
    }

    /// Range used for the aperiodic fit of proxy spectra.
    pub fn fit_range_hz(self) -> (f64, f64) {
        (1.0, 40.0)
    }

    pub fn signal(self, rec: &Recordings, params: &NeuronParams) -> Result<TimeSeries> {
        match self {
            ProxyModel::Membrane => model1_signal(rec),
            ProxyModel::Synaptic => model2_signal(rec, params),
        }
    }

    /// Relative Welch spectrum of the proxy signal.
    pub fn spectrum(self, rec: &Recordings, params: &NeuronParams) -> Result<Spectrum> {
        let ts = self.signal(rec, params)?;
        let x: Vec<f64> = ts.channel(0).to_vec();
        to_relative(&welch_1d(&x, ts.fs(), self.welch())?)
    }
}

/// Mean membrane potential over the sampled neurons.
pub fn model1_signal(rec: &Recordings) -> Result<TimeSeries> {
    let k = rec.vm.nrows();
    if k == 0 || rec.vm.ncols() == 0 {
        return Err(Error::Data("no membrane potentials recorded".into()));
    }
    let mean = rec.vm.mean_axis(ndarray::Axis(0)).expect("non-empty");
    TimeSeries::from_channel(mean.to_vec(), rec.fs())
}

/// `⟨g_ex (V − E_ex)⟩ − ⟨g_in (V − E_in)⟩` over the sampled neurons.
pub fn model2_signal(rec: &Recordings, params: &NeuronParams) -> Result<TimeSeries> {
    let (Some(ge), Some(gi)) = (rec.g_ex.as_ref(), rec.g_in.as_ref()) else {
        return Err(Error::Data("conductances were not recorded".into()));
    };
    if ge.dim() != rec.vm.dim() || gi.dim() != rec.vm.dim() {
        return Err(Error::Data(format!(
            "conductance recordings {:?}/{:?} do not match membrane recordings {:?}",
            ge.dim(),
            gi.dim(),
            rec.vm.dim()
        )));
    }
    let (k, n) = rec.vm.dim();
    if k == 0 || n == 0 {
        return Err(Error::Data("no neurons recorded".into()));
    }
    let mut out = vec![0.0; n];
    for r in 0..k {
        for (t, o) in out.iter_mut().enumerate() {
            let v = rec.vm[[r, t]];
            *o += ge[[r, t]] * (v - params.e_ex_mv) - gi[[r, t]] * (v - params.e_in_mv);
        }
    }
    out.iter_mut().for_each(|o| *o /= k as f64);
    TimeSeries::from_channel(out, rec.fs())
}

/// Seed of repetition `run` under master `seed`.
pub(crate) fn run_seed(seed: u64, run: usize) -> u64 {
    seed::derive(seed, &[streams::RUN, run as u64])
}

/// One network build, simulation and relative proxy spectrum.
pub fn single_run(model: ProxyModel, cond: Condition, cfg: &NetworkConfig, seed: u64) -> Result<Spectrum> {
    let cfg = NetworkConfig {
        seed,
        ..cond.apply(cfg)
    };
    let net = build_random_network(&cfg)?;
    let rec = simulate(&net, &cfg, &model.recorder())?;
    model.spectrum(&rec, &cfg.neuron)
}

/// Per-run spectra and their renormalized pointwise mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRun {
    pub condition: Condition,
    pub model: ProxyModel,
    pub seeds: Vec<u64>,
    pub runs: Vec<Spectrum>,
    pub mean: Spectrum,
}

pub fn run_condition_detailed(
    model: ProxyModel,
    cond: Condition,
    cfg: &NetworkConfig,
    n_runs: usize,
    seed: u64,
) -> Result<ConditionRun> {
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..n_runs).map(|r| run_seed(seed, r)).collect();
    let runs = seeds
        .par_iter()
        .enumerate()
        .map(|(r, &s)| single_run(model, cond, cfg, s).map_err(|e| e.in_run(r)))
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_spectrum(&runs)?;
    Ok(ConditionRun {
        condition: cond,
        model,
        seeds,
        runs,
        mean,
    })
}

/// Mean relative spectrum over `n_runs` independently seeded networks.
pub fn run_condition(
    model: ProxyModel,
    cond: Condition,
    cfg: &NetworkConfig,
    n_runs: usize,
    seed: u64,
) -> Result<Spectrum> {
    Ok(run_condition_detailed(model, cond, cfg, n_runs, seed)?.mean)
}

pub(crate) fn mean_spectrum(runs: &[Spectrum]) -> Result<Spectrum> {
    let first = &runs[0];
    let mut acc = vec![0.0; first.len()];
    for s in runs {
        if s.freqs_hz != first.freqs_hz {
            return Err(Error::Data("run spectra have different frequency axes".into()));
        }
        acc.iter_mut().zip(&s.power).for_each(|(a, p)| *a += p);
    }
    acc.iter_mut().for_each(|a| *a /= runs.len() as f64);
    to_relative(&Spectrum::new(first.freqs_hz.clone(), acc, false)?)
}
