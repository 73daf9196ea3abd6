use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::params::{Heterogeneity, NetworkConfig, NeuronParams};
use crate::error::{Error, Result};
use crate::seed::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynapseKind {
    Excitatory,
    Inhibitory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synapse {
    pub pre: usize,
    pub post: usize,
    pub weight_ns: f64,
    pub kind: SynapseKind,
}

/// Neurons, per-neuron parameters and a compressed outgoing synapse table.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub(crate) neuron: NeuronParams,
    pub(crate) excitatory: Vec<bool>,
    /// Subnetwork index of each neuron (all zero for a single random network).
    pub(crate) group: Vec<u32>,
    pub(crate) v_th: Vec<f64>,
    pub(crate) v_init: Vec<f64>,
    pub(crate) drive_rate_hz: Vec<f64>,
    pub(crate) offsets: Vec<usize>,
    pub(crate) targets: Vec<u32>,
    pub(crate) weights: Vec<f64>,
}

impl Network {
    pub fn n_neurons(&self) -> usize {
        self.excitatory.len()
    }

    pub fn n_excitatory(&self) -> usize {
        self.excitatory.iter().filter(|&&e| e).count()
    }

    pub fn is_excitatory(&self, i: usize) -> bool {
        self.excitatory[i]
    }

    pub fn excitatory_ids(&self) -> Vec<usize> {
        (0..self.n_neurons()).filter(|&i| self.excitatory[i]).collect()
    }

    pub fn group(&self, i: usize) -> u32 {
        self.group[i]
    }

    pub fn n_groups(&self) -> usize {
        self.group.iter().max().map_or(0, |&g| g as usize + 1)
    }

    pub fn neuron_params(&self) -> &NeuronParams {
        &self.neuron
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.v_th
    }

    pub fn initial_potentials(&self) -> &[f64] {
        &self.v_init
    }

    pub fn drive_rates(&self) -> &[f64] {
        &self.drive_rate_hz
    }

    pub fn n_synapses(&self) -> usize {
        self.targets.len()
    }

    /// Outgoing synapses of `pre`.
    pub fn outgoing(&self, pre: usize) -> impl Iterator<Item = Synapse> + '_ {
        let kind = if self.excitatory[pre] {
            SynapseKind::Excitatory
        } else {
            SynapseKind::Inhibitory
        };
        let range = self.offsets[pre]..self.offsets[pre + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(move |(&post, &weight_ns)| Synapse {
                pre,
                post: post as usize,
                weight_ns,
                kind,
            })
    }

    /// Full synapse table in presynaptic order.
    pub fn synapses(&self) -> impl Iterator<Item = Synapse> + '_ {
        (0..self.n_neurons()).flat_map(move |i| self.outgoing(i))
    }

    pub(crate) fn from_adjacency(
        neuron: NeuronParams,
        excitatory: Vec<bool>,
        group: Vec<u32>,
        drive_rate_hz: f64,
        adjacency: Vec<Vec<(u32, f64)>>,
    ) -> Self {
        let n = excitatory.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for row in adjacency {
            for (t, w) in row {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Network {
            neuron,
            excitatory,
            group,
            v_th: vec![neuron.v_th_mv; n],
            v_init: vec![neuron.e_l_mv; n],
            drive_rate_hz: vec![drive_rate_hz; n],
            offsets,
            targets,
            weights,
        }
    }
}

/// Random recurrent E/I block: neurons `[0, n_exc)` are excitatory; each
/// ordered pair `i != j` is connected independently with probability `p`.
pub(crate) fn random_block<R: Rng>(
    n: usize,
    n_exc: usize,
    p: f64,
    w_exc: f64,
    w_inh: f64,
    offset: u32,
    rng: &mut R,
) -> Vec<Vec<(u32, f64)>> {
    (0..n)
        .map(|i| {
            let w = if i < n_exc { w_exc } else { w_inh };
            (0..n)
                .filter(|&j| j != i)
                .filter(|_| p > 0.0 && rng.random::<f64>() < p)
                .map(|j| (offset + j as u32, w))
                .collect()
        })
        .collect()
}

/// Builds the sparse random E/I network (80/20 split by default) and
/// applies the configured heterogeneity.
pub fn build_random_network(cfg: &NetworkConfig) -> Result<Network> {
    cfg.validate()?;
    let n = cfg.n_neurons;
    let n_exc = cfg.n_excitatory();
    let mut rng = seed::rng_for(cfg.seed, &[streams::NETWORK]);
    let adjacency = random_block(n, n_exc, cfg.p_connect, cfg.g_e_ns, cfg.g_i_ns(), 0, &mut rng);
    let excitatory = (0..n).map(|i| i < n_exc).collect();
    let net = Network::from_adjacency(cfg.neuron, excitatory, vec![0; n], cfg.drive_rate_hz, adjacency);
    heterogenize(
        net,
        &cfg.heterogeneity,
        seed::derive(cfg.seed, &[streams::HETEROGENEITY]),
    )
}

/// Draws initial potentials, threshold jitter and optional drive-rate
/// jitter.
pub fn heterogenize(mut net: Network, jitter: &Heterogeneity, seed: u64) -> Result<Network> {
    if !(jitter.v_th_sd_mv >= 0.0 && jitter.drive_rate_cv >= 0.0) {
        return Err(Error::Config("jitter magnitudes must be >= 0".into()));
    }
    let p = net.neuron;
    let mut rng = seed::rng(seed);
    if jitter.v_th_sd_mv > 0.0 {
        let normal = Normal::new(0.0, jitter.v_th_sd_mv).map_err(|e| Error::Config(e.to_string()))?;
        for (i, th) in net.v_th.iter_mut().enumerate() {
            *th = p.v_th_mv + normal.sample(&mut rng);
            if *th <= p.v_reset_mv || *th >= p.e_ex_mv {
                return Err(Error::Config(format!(
                    "threshold jitter put neuron {i} at {th:.3} mV, outside (V_reset, E_ex)"
                )));
            }
        }
    }
    if jitter.random_initial_v {
        for v in net.v_init.iter_mut() {
            *v = rng.random_range(p.v_reset_mv..=p.v_th_mv);
        }
    }
    if jitter.drive_rate_cv > 0.0 {
        // gamma-distributed rates keep the mean and stay positive
        let shape = 1.0 / (jitter.drive_rate_cv * jitter.drive_rate_cv);
        for r in net.drive_rate_hz.iter_mut() {
            if *r > 0.0 {
                let g = rand_distr::Gamma::new(shape, *r / shape).map_err(|e| Error::Config(e.to_string()))?;
                *r = g.sample(&mut rng);
            }
        }
    }
    Ok(net)
}
