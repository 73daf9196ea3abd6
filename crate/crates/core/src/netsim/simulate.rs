use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::network::Network;
use super::params::NetworkConfig;
use super::poisson::BernoulliTrain;
use crate::error::{Error, Result};
use crate::seed::{self, streams};

/// What to record and from whom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecorderConfig {
    /// Fraction of excitatory neurons sampled (at least one).
    pub sample_fraction: f64,
    pub record_vm: bool,
    pub record_conductances: bool,
    pub record_spikes: bool,
    pub interval_ms: f64,
}

impl RecorderConfig {
    /// Membrane potentials of 20% of excitatory neurons at 1 kHz.
    pub const MODEL1: RecorderConfig = RecorderConfig {
        sample_fraction: 0.2,
        record_vm: true,
        record_conductances: false,
        record_spikes: false,
        interval_ms: 1.0,
    };

    /// Potentials and conductances of 15% of excitatory neurons at 1 kHz.
    pub const MODEL2: RecorderConfig = RecorderConfig {
        sample_fraction: 0.15,
        record_vm: true,
        record_conductances: true,
        record_spikes: false,
        interval_ms: 1.0,
    };

    /// Spike counts only.
    pub const RATES: RecorderConfig = RecorderConfig {
        sample_fraction: 0.0,
        record_vm: false,
        record_conductances: false,
        record_spikes: false,
        interval_ms: 1.0,
    };
}

/// Post-warm-up recordings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Recordings {
    pub sample_ids: Vec<usize>,
    /// Sampled neurons × time, mV.
    pub vm: Array2<f64>,
    /// Sampled neurons × time, nS.
    pub g_ex: Option<Array2<f64>>,
    pub g_in: Option<Array2<f64>>,
    /// `(neuron, time_ms)` for every post-warm-up spike, if requested.
    pub spikes: Vec<(u32, f64)>,
    /// Post-warm-up spike count of every neuron.
    pub spike_counts: Vec<u32>,
    pub excitatory: Vec<bool>,
    pub interval_ms: f64,
    pub recorded_ms: f64,
    pub warmup_ms: f64,
}

impl Recordings {
    /// Sampling rate of the analog recordings in Hz.
    pub fn fs(&self) -> f64 {
        1000.0 / self.interval_ms
    }

    pub fn n_samples(&self) -> usize {
        self.vm.ncols()
    }

    fn mean_rate(&self, select: impl Fn(usize) -> bool) -> f64 {
        let (n, total) = self
            .spike_counts
            .iter()
            .enumerate()
            .filter(|(i, _)| select(*i))
            .fold((0usize, 0u64), |(n, t), (_, &c)| (n + 1, t + c as u64));
        if n == 0 {
            return 0.0;
        }
        total as f64 / n as f64 / (self.recorded_ms * 1e-3)
    }

    /// Mean firing rate of excitatory neurons in Hz.
    pub fn excitatory_rate_hz(&self) -> f64 {
        self.mean_rate(|i| self.excitatory[i])
    }

    pub fn inhibitory_rate_hz(&self) -> f64 {
        self.mean_rate(|i| !self.excitatory[i])
    }

    pub fn population_rate_hz(&self) -> f64 {
        self.mean_rate(|_| true)
    }
}

/// `exp(-x)` for `x >= 0`; fifth-order series below 0.2 (relative error
/// under 1e-7), libm above.
#[inline(always)]
fn exp_neg(x: f64) -> f64 {
    if x < 0.2 {
        let x2 = x * x;
        1.0 - x + x2 * (0.5 - x / 6.0 + x2 * (1.0 / 24.0 - x / 120.0))
    } else {
        (-x).exp()
    }
}

/// Integrates the network for `cfg.duration_ms` at step `cfg.dt_ms`.
///
/// Per step and neuron: delayed synaptic input and external drive are
/// added to the conductances, the membrane is advanced by an exponential
/// Euler step with conductances held over the step, the conductances decay
/// exactly, and a threshold crossing emits a spike, resets to `V_reset` and
/// clamps the neuron for `t_ref`. Warm-up samples are not recorded.
pub fn simulate(net: &Network, cfg: &NetworkConfig, rec: &RecorderConfig) -> Result<Recordings> {
    cfg.validate()?;
    let n = net.n_neurons();
    let p = net.neuron;
    let dt = cfg.dt_ms;
    let steps = cfg.steps();
    let warm = cfg.warmup_steps();
    let rec_every = (rec.interval_ms / dt).round() as u64;
    if rec_every == 0 {
        return Err(Error::Config("recording interval is shorter than the time step".into()));
    }
    let delay_steps = (cfg.delay_ms / dt).round().max(1.0) as usize;
    let ring = delay_steps + 1;
    let ref_steps = (p.t_ref_ms / dt).round() as u32;

    for (i, &r) in net.drive_rate_hz.iter().enumerate() {
        if r * dt * 1e-3 > 0.1 {
            return Err(Error::Config(format!(
                "drive rate {r} Hz at dt {dt} ms on neuron {i} exceeds rate·dt = 0.1"
            )));
        }
    }

    let sample_ids = {
        let exc = net.excitatory_ids();
        let k = if rec.record_vm || rec.record_conductances {
            ((rec.sample_fraction * exc.len() as f64).round() as usize)
                .clamp(1, exc.len().max(1))
                .min(exc.len())
        } else {
            0
        };
        let mut rng = seed::rng_for(cfg.seed, &[streams::RECORDER]);
        let mut ids: Vec<usize> = rand::seq::index::sample(&mut rng, exc.len(), k)
            .into_iter()
            .map(|j| exc[j])
            .collect();
        ids.sort_unstable();
        ids
    };
    let n_rec = ((steps - warm) / rec_every) as usize;
    let mut vm = Array2::zeros((if rec.record_vm { sample_ids.len() } else { 0 }, n_rec));
    let (mut g_ex_rec, mut g_in_rec) = if rec.record_conductances {
        (
            Some(Array2::zeros((sample_ids.len(), n_rec))),
            Some(Array2::zeros((sample_ids.len(), n_rec))),
        )
    } else {
        (None, None)
    };

    let g_l = p.g_leak_ns();
    let leak_drive = g_l * p.e_l_mv + p.i_e_pa;
    let dt_over_c = dt / p.c_m_pf;
    let decay_ex = (-dt / p.tau_syn_ex_ms).exp();
    let decay_in = (-dt / p.tau_syn_in_ms).exp();
    let (e_ex, e_in) = (p.e_ex_mv, p.e_in_mv);
    let w_drive = cfg.drive_weight_ns;

    let mut v = net.v_init.clone();
    let mut g_ex = vec![0.0; n];
    let mut g_in = vec![0.0; n];
    let mut refractory = vec![0u32; n];
    let mut ring_ex = vec![0.0; ring * n];
    let mut ring_in = vec![0.0; ring * n];
    let mut spike_counts = vec![0u32; n];
    let mut spikes = Vec::new();

    let mut drive_rng = seed::rng_for(cfg.seed, &[streams::DRIVE]);
    let mut drive: Vec<BernoulliTrain> = net
        .drive_rate_hz
        .iter()
        .map(|&r| BernoulliTrain::new(r * dt * 1e-3, &mut drive_rng))
        .collect();

    let mut fired: Vec<usize> = Vec::with_capacity(n);
    for t in 0..steps {
        let slot = (t as usize % ring) * n;
        fired.clear();
        for i in 0..n {
            let mut ge = g_ex[i] + ring_ex[slot + i];
            let gi = g_in[i] + ring_in[slot + i];
            ring_ex[slot + i] = 0.0;
            ring_in[slot + i] = 0.0;
            if drive[i].next_step() == t {
                ge += w_drive;
                drive[i].advance(&mut drive_rng);
            }
            if refractory[i] > 0 {
                refractory[i] -= 1;
                v[i] = p.v_reset_mv;
            } else {
                let g_tot = g_l + ge + gi;
                let v_inf = (leak_drive + ge * e_ex + gi * e_in) / g_tot;
                let mut vi = v_inf + (v[i] - v_inf) * exp_neg(dt_over_c * g_tot);
                if !(vi >= e_in - 1e-9 && vi <= e_ex + 1e-9) {
                    return Err(Error::Integration {
                        step: t,
                        reason: format!("neuron {i} reached V = {vi} mV"),
                    });
                }
                vi = vi.clamp(e_in, e_ex);
                if vi >= net.v_th[i] {
                    vi = p.v_reset_mv;
                    refractory[i] = ref_steps;
                    fired.push(i);
                }
                v[i] = vi;
            }
            g_ex[i] = ge * decay_ex;
            g_in[i] = gi * decay_in;
        }

        if !fired.is_empty() {
            let target_slot = ((t as usize + delay_steps) % ring) * n;
            for &i in &fired {
                let ring_buf = if net.excitatory[i] { &mut ring_ex } else { &mut ring_in };
                let range = net.offsets[i]..net.offsets[i + 1];
                for (&post, &w) in net.targets[range.clone()].iter().zip(&net.weights[range]) {
                    ring_buf[target_slot + post as usize] += w;
                }
                if t >= warm {
                    spike_counts[i] += 1;
                    if rec.record_spikes {
                        spikes.push((i as u32, (t + 1) as f64 * dt));
                    }
                }
            }
        }

        let done = t + 1;
        if done > warm && (done - warm) % rec_every == 0 {
            let k = ((done - warm) / rec_every - 1) as usize;
            if k < n_rec {
                if rec.record_vm {
                    for (r, &id) in sample_ids.iter().enumerate() {
                        vm[[r, k]] = v[id];
                    }
                }
                if let (Some(ge), Some(gi)) = (g_ex_rec.as_mut(), g_in_rec.as_mut()) {
                    for (r, &id) in sample_ids.iter().enumerate() {
                        ge[[r, k]] = g_ex[id];
                        gi[[r, k]] = g_in[id];
                    }
                }
            }
        }
    }

    Ok(Recordings {
        sample_ids,
        vm,
        g_ex: g_ex_rec,
        g_in: g_in_rec,
        spikes,
        spike_counts,
        excitatory: net.excitatory.clone(),
        interval_ms: rec.interval_ms,
        recorded_ms: (steps - warm) as f64 * dt,
        warmup_ms: cfg.warmup_ms,
    })
}
