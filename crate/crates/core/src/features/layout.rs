use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::aperiodic::fit_aperiodic;
use super::band_power::{band_relative_power, channel_std};
use super::plv::{plv, ConnMatrix};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::sigproc::{to_relative, welch_1d, Band, BandName, Spectrum, TimeSeries, WelchParams};

/// Where PLV features come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlvSource {
    /// Computed on each epoch.
    Epoch,
    /// Computed once over the whole recording and shared by its epochs.
    Recording,
}

/// Composition of the per-epoch feature vector.
///
/// The default yields 200 values for 19 channels: 5 relative band powers,
/// amplitude SD and aperiodic exponent per channel; mean PLV degree per
/// channel in θ/α/β; and mean/max PLV per band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureLayout {
    pub channel_labels: Vec<String>,
    pub power_bands: Vec<BandName>,
    pub include_std: bool,
    pub include_exponent: bool,
    pub degree_bands: Vec<BandName>,
    pub global_bands: Vec<BandName>,
    pub spectrum: WelchParams,
    /// Upper edge (exclusive) of the spectrum used for band powers.
    pub spectrum_hi_hz: f64,
    pub fit_range_hz: (f64, f64),
    pub plv_source: PlvSource,
    pub epoch_len: usize,
}

/// Standard 10–20 montage without the mastoid references.
pub const MONTAGE_10_20: [&str; 19] = [
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T3", "C3", "Cz", "C4", "T4", "T5", "P3", "Pz", "P4", "T6", "O1", "O2",
];

impl Default for FeatureLayout {
    fn default() -> Self {
        Self {
            channel_labels: MONTAGE_10_20.iter().map(|s| s.to_string()).collect(),
            power_bands: BandName::ALL.to_vec(),
            include_std: true,
            include_exponent: true,
            degree_bands: vec![BandName::Theta, BandName::Alpha, BandName::Beta],
            global_bands: BandName::ALL.to_vec(),
            spectrum: WelchParams {
                nperseg: 250,
                overlap_frac: 0.5,
                fmin: 0.5,
                fmax: 45.0,
            },
            spectrum_hi_hz: 45.0,
            fit_range_hz: (1.0, 40.0),
            plv_source: PlvSource::Epoch,
            epoch_len: 500,
        }
    }
}

impl FeatureLayout {
    pub fn n_channels(&self) -> usize {
        self.channel_labels.len()
    }

    /// Bands whose connectivity the layout consumes.
    pub fn plv_bands(&self) -> Vec<BandName> {
        let mut b: Vec<BandName> = self.degree_bands.iter().chain(&self.global_bands).copied().collect();
        b.sort();
        b.dedup();
        b
    }

    /// Column names in vector order; node features carry the electrode label.
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for b in &self.power_bands {
            for ch in &self.channel_labels {
                names.push(format!("relpow_{b}_{ch}"));
            }
        }
        if self.include_std {
            names.extend(self.channel_labels.iter().map(|ch| format!("std_{ch}")));
        }
        if self.include_exponent {
            names.extend(self.channel_labels.iter().map(|ch| format!("exponent_{ch}")));
        }
        for b in &self.degree_bands {
            for ch in &self.channel_labels {
                names.push(format!("plvdeg_{b}_{ch}"));
            }
        }
        for b in &self.global_bands {
            names.push(format!("plvmean_{b}"));
            names.push(format!("plvmax_{b}"));
        }
        names
    }

    pub fn len(&self) -> usize {
        let c = self.n_channels();
        self.power_bands.len() * c
            + usize::from(self.include_std) * c
            + usize::from(self.include_exponent) * c
            + self.degree_bands.len() * c
            + 2 * self.global_bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fixed-length feature vector of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Group,
    pub subject_id: String,
    pub epoch_index: usize,
}

/// Feature vectors sharing one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl Dataset {
    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<Group> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Column index of a named feature.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Relative spectrum of one channel as used by the feature extractor.
pub fn epoch_spectrum(ts: &TimeSeries, channel: usize, layout: &FeatureLayout) -> Result<Spectrum> {
    let x = ts.channel(channel).to_vec();
    let params = WelchParams {
        nperseg: layout.spectrum.nperseg.min(x.len()),
        ..layout.spectrum
    };
    let s = welch_1d(&x, ts.fs(), params)?;
    to_relative(&s.restrict_half_open(layout.spectrum.fmin, layout.spectrum_hi_hz))
}

/// PLV matrices of every band the layout needs.
pub fn epoch_connectivity(ts: &TimeSeries, layout: &FeatureLayout) -> Result<BTreeMap<BandName, ConnMatrix>> {
    layout
        .plv_bands()
        .into_iter()
        .map(|b| Ok((b, plv(ts, &Band::canonical(b))?)))
        .collect()
}

fn mean_degree(c: &ConnMatrix, node: usize) -> f64 {
    let n = c.n_nodes();
    let s: f64 = (0..n).filter(|&j| j != node).map(|j| c.values[[node, j]]).sum();
    s / (n - 1) as f64
}

fn off_diagonal(c: &ConnMatrix) -> impl Iterator<Item = f64> + '_ {
    let n = c.n_nodes();
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| c.values[[i, j]]))
}

/// Concatenates the configured feature families of one epoch.
pub fn assemble_features(
    epoch: &TimeSeries,
    fcs: &BTreeMap<BandName, ConnMatrix>,
    layout: &FeatureLayout,
    label: Group,
    subject_id: &str,
    epoch_index: usize,
) -> Result<FeatureVector> {
    let c = layout.n_channels();
    if epoch.n_channels() != c {
        return Err(Error::Config(format!(
            "layout expects {c} channels, epoch has {}",
            epoch.n_channels()
        )));
    }
    for b in layout.plv_bands() {
        match fcs.get(&b) {
            None => {
                return Err(Error::Config(format!("missing {b} connectivity for layout")));
            }
            Some(m) if m.n_nodes() != c => {
                return Err(Error::Config(format!(
                    "{b} connectivity has {} nodes, layout expects {c}",
                    m.n_nodes()
                )));
            }
            _ => {}
        }
    }

    let spectra: Vec<Spectrum> = (0..c)
        .map(|ch| epoch_spectrum(epoch, ch, layout))
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(layout.len());
    for b in &layout.power_bands {
        let band = Band::canonical(*b);
        for s in &spectra {
            values.push(band_relative_power(s, &band)?);
        }
    }
    if layout.include_std {
        for ch in 0..c {
            values.push(channel_std(&epoch.select_channel(ch))?);
        }
    }
    if layout.include_exponent {
        for s in &spectra {
            values.push(fit_aperiodic(s, layout.fit_range_hz)?.exponent);
        }
    }
    for b in &layout.degree_bands {
        let m = &fcs[b];
        for ch in 0..c {
            values.push(mean_degree(m, ch));
        }
    }
    for b in &layout.global_bands {
        let m = &fcs[b];
        let (sum, max, n) = off_diagonal(m).fold((0.0, 0.0f64, 0usize), |(s, mx, n), v| (s + v, mx.max(v), n + 1));
        values.push(if n > 0 { sum / n as f64 } else { 0.0 });
        values.push(max);
    }
    debug_assert_eq!(values.len(), layout.len());
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite feature in subject {subject_id} epoch {epoch_index}"
        )));
    }
    Ok(FeatureVector {
        values,
        label,
        subject_id: subject_id.to_string(),
        epoch_index,
    })
}
