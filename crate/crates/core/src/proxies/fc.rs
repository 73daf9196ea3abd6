use std::collections::BTreeMap;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::condition::{Condition, ProxyModel};
use crate::error::{Error, Result};
use crate::features::ConnMatrix;
use crate::group::Group;
use crate::netsim::{heterogenize, random_block, simulate, Network, NetworkConfig};
use crate::seed::{self, streams};
use crate::sigproc::{to_relative, Band, BandName, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorSource {
    Empirical,
    Synthetic,
}

/// Band-specific inter-region coupling strengths in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FcPrior {
    pub matrix: Array2<f64>,
    pub band: BandName,
    pub source: PriorSource,
}

impl FcPrior {
    /// Validates symmetry and range; the diagonal is zeroed.
    pub fn new(mut matrix: Array2<f64>, band: BandName, source: PriorSource) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r == 0 {
            return Err(Error::Data(format!("FC prior must be square, got {r}x{c}")));
        }
        for i in 0..r {
            for j in 0..r {
                let v = matrix[[i, j]];
                if i != j && !(0.0..=1.0).contains(&v) {
                    return Err(Error::Data(format!("FC prior entry ({i},{j}) = {v} outside [0, 1]")));
                }
                if (v - matrix[[j, i]]).abs() > 1e-9 {
                    return Err(Error::Data(format!("FC prior is not symmetric at ({i},{j})")));
                }
            }
        }
        for i in 0..r {
            matrix[[i, i]] = 0.0;
        }
        Ok(Self { matrix, band, source })
    }

    pub fn zeros(n: usize, band: BandName) -> Self {
        Self {
            matrix: Array2::zeros((n, n)),
            band,
            source: PriorSource::Synthetic,
        }
    }

    pub fn n_regions(&self) -> usize {
        self.matrix.nrows()
    }

    /// Group mean of one class's PLV matrices, min-max rescaled over the
    /// off-diagonal entries.
    pub fn from_group_mean(mats: &[ConnMatrix], band: BandName) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::Data("no connectivity matrices for FC prior".into()))?;
        let n = first.values.nrows();
        let mut acc = Array2::<f64>::zeros((n, n));
        for m in mats {
            if m.values.dim() != (n, n) {
                return Err(Error::Data("connectivity matrices differ in size".into()));
            }
            if m.band.name != band {
                return Err(Error::Data(format!("expected {band} matrices, found {}", m.band.name)));
            }
            acc += &m.values;
        }
        acc /= mats.len() as f64;
        Self::new(min_max_off_diagonal(acc)?, band, PriorSource::Empirical)
    }
}

fn min_max_off_diagonal(mut m: Array2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    let off = || (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
    let (lo, hi) = off().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (i, j)| {
        (lo.min(m[[i, j]]), hi.max(m[[i, j]]))
    });
    if !(hi > lo) {
        return Err(Error::Normalization(
            "FC prior has constant off-diagonal entries; cannot rescale".into(),
        ));
    }
    for (i, j) in off() {
        m[[i, j]] = (m[[i, j]] - lo) / (hi - lo);
    }
    for i in 0..n {
        m[[i, i]] = 0.0;
    }
    Ok(m)
}

/// Scalp positions (x right, y anterior) of the 19-channel montage.
pub const MONTAGE_XY: [(f64, f64); 19] = [
    (-0.29, 0.89),
    (0.29, 0.89),
    (-0.76, 0.55),
    (-0.36, 0.47),
    (0.0, 0.45),
    (0.36, 0.47),
    (0.76, 0.55),
    (-0.94, 0.0),
    (-0.47, 0.0),
    (0.0, 0.0),
    (0.47, 0.0),
    (0.94, 0.0),
    (-0.76, -0.55),
    (-0.36, -0.47),
    (0.0, -0.45),
    (0.36, -0.47),
    (0.76, -0.55),
    (-0.29, -0.89),
    (0.29, -0.89),
];

fn length_scale(group: Group, band: BandName) -> f64 {
    // longer range coupling marks the class with more connectivity in the band
    match (band, group) {
        (BandName::Delta | BandName::Theta, Group::Ad) => 0.7,
        (BandName::Delta | BandName::Theta, Group::Hc) => 0.45,
        (BandName::Alpha | BandName::Beta, Group::Ad) => 0.45,
        (BandName::Alpha | BandName::Beta, Group::Hc) => 0.7,
        (BandName::Gamma, _) => 0.5,
    }
}

/// Distance-decay FC with class-specific range plus symmetric noise.
pub fn synthetic_prior(group: Group, band: BandName, seed: u64) -> Result<FcPrior> {
    let n = MONTAGE_XY.len();
    let lambda = length_scale(group, band);
    let band_idx = BandName::ALL.iter().position(|&b| b == band).unwrap() as u64;
    let mut rng = seed::rng_for(seed, &[streams::PRIOR, group.is_positive() as u64, band_idx]);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let (xi, yi) = MONTAGE_XY[i];
            let (xj, yj) = MONTAGE_XY[j];
            let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
            let v = ((-d / lambda).exp() + noise.sample(&mut rng)).clamp(0.0, 1.0);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    FcPrior::new(m, band, PriorSource::Synthetic)
}

pub fn synthetic_priors(group: Group, seed: u64) -> Result<BTreeMap<BandName, FcPrior>> {
    BandName::ALL
        .iter()
        .map(|&b| Ok((b, synthetic_prior(group, b, seed)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcConfig {
    /// Base inter-subnetwork E→E connection probability, scaled by FC.
    pub p_inter: f64,
    /// Pairs with FC at or below this are not coupled.
    pub threshold: f64,
    pub neurons_per_subnetwork: usize,
    pub model: ProxyModel,
    pub bands: Vec<BandName>,
    pub skip: Vec<BandName>,
    /// Derive a distinct network seed per band; otherwise every band
    /// reuses the run seed.
    pub per_band_seeds: bool,
}

impl Default for FcConfig {
    fn default() -> Self {
        Self {
            p_inter: 0.05,
            threshold: 0.0,
            neurons_per_subnetwork: 21,
            model: ProxyModel::Membrane,
            bands: BandName::ALL.to_vec(),
            skip: Vec::new(),
            per_band_seeds: true,
        }
    }
}

impl FcConfig {
    pub fn active_bands(&self) -> Vec<BandName> {
        let mut b: Vec<BandName> = self.bands.iter().copied().filter(|b| !self.skip.contains(b)).collect();
        b.sort();
        b.dedup();
        b
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_inter) {
            return Err(Error::Config(format!(
                "p_inter must be in [0, 1], got {}",
                self.p_inter
            )));
        }
        if self.neurons_per_subnetwork == 0 {
            return Err(Error::Config("neurons_per_subnetwork must be > 0".into()));
        }
        if self.active_bands().is_empty() {
            return Err(Error::Config("no bands left to simulate".into()));
        }
        Ok(())
    }
}

/// One random E/I subnetwork per region plus FC-weighted excitatory
/// projections between the excitatory populations of coupled regions.
pub fn build_fc_network(prior: &FcPrior, cfg: &NetworkConfig, fc: &FcConfig) -> Result<Network> {
    cfg.validate()?;
    fc.validate()?;
    let prior = FcPrior::new(prior.matrix.clone(), prior.band, prior.source)?;
    let r = prior.n_regions();
    let m = fc.neurons_per_subnetwork;
    let m_exc = (m as f64 * cfg.frac_excitatory).round() as usize;
    let n = r * m;

    let mut adjacency = Vec::with_capacity(n);
    let mut excitatory = Vec::with_capacity(n);
    let mut group = Vec::with_capacity(n);
    for a in 0..r {
        let mut rng = seed::rng_for(cfg.seed, &[streams::NETWORK, a as u64]);
        let offset = (a * m) as u32;
        adjacency.extend(random_block(
            m,
            m_exc,
            cfg.p_connect,
            cfg.g_e_ns,
            cfg.g_i_ns(),
            offset,
            &mut rng,
        ));
        excitatory.extend((0..m).map(|i| i < m_exc));
        group.extend(std::iter::repeat_n(a as u32, m));
    }

    let mut rng = seed::rng_for(cfg.seed, &[streams::NETWORK, streams::PRIOR]);
    for a in 0..r {
        for b in 0..r {
            let w = prior.matrix[[a, b]];
            if a == b || w <= fc.threshold {
                continue;
            }
            let p = fc.p_inter * w;
            for i in 0..m_exc {
                let row = &mut adjacency[a * m + i];
                for j in 0..m_exc {
                    if rng.random::<f64>() < p {
                        row.push(((b * m + j) as u32, cfg.g_e_ns * w));
                    }
                }
            }
        }
    }

    let net = Network::from_adjacency(cfg.neuron, excitatory, group, cfg.drive_rate_hz, adjacency);
    heterogenize(
        net,
        &cfg.heterogeneity,
        seed::derive(cfg.seed, &[streams::HETEROGENEITY]),
    )
}

/// Concatenates band segments in ascending frequency and renormalizes.
pub fn stitch(segments: &[Spectrum]) -> Result<Spectrum> {
    let mut segs: Vec<&Spectrum> = segments.iter().filter(|s| !s.is_empty()).collect();
    if segs.is_empty() {
        return Err(Error::Data("no spectral bins to stitch".into()));
    }
    segs.sort_by(|a, b| a.freqs_hz[0].total_cmp(&b.freqs_hz[0]));
    let mut freqs = Vec::new();
    let mut power = Vec::new();
    for s in segs {
        for (&f, &p) in s.freqs_hz.iter().zip(&s.power) {
            if freqs.last().is_some_and(|&last| f <= last) {
                return Err(Error::Data(format!("band segments overlap at {f} Hz")));
            }
            freqs.push(f);
            power.push(p);
        }
    }
    to_relative(&Spectrum::new(freqs, power, false)?)
}

pub(crate) fn band_seed(seed: u64, band: BandName, fc: &FcConfig) -> u64 {
    if fc.per_band_seeds {
        let idx = BandName::ALL.iter().position(|&b| b == band).unwrap() as u64;
        seed::derive(seed, &[streams::BAND, idx])
    } else {
        seed
    }
}

/// Per-band FC-network runs stitched into one composite relative spectrum.
pub fn fc_condition_run(
    priors: &BTreeMap<BandName, FcPrior>,
    cond: Condition,
    cfg: &NetworkConfig,
    fc: &FcConfig,
    seed: u64,
) -> Result<Spectrum> {
    fc.validate()?;
    let bands = fc.active_bands();
    for b in &bands {
        if !priors.contains_key(b) {
            return Err(Error::Config(format!("no FC prior for band {b}")));
        }
    }
    let segments = bands
        .par_iter()
        .map(|&b| {
            let run_cfg = NetworkConfig {
                seed: band_seed(seed, b, fc),
                ..cond.apply(cfg)
            };
            let net = build_fc_network(&priors[&b], &run_cfg, fc)?;
            let rec = simulate(&net, &run_cfg, &fc.model.recorder())?;
            let spec = fc.model.spectrum(&rec, &run_cfg.neuron)?;
            let band = Band::canonical(b);
            Ok(spec.restrict_half_open(band.lo_hz, band.hi_hz))
        })
        .collect::<Result<Vec<_>>>()?;
    stitch(&segments)
}
