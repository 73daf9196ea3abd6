use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled multichannel signal (channels × time).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Array2<f64>,
    fs: f64,
    channel_labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(samples: Array2<f64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::Parameter(format!("sampling rate must be > 0, got {fs}")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("time series contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            fs,
            channel_labels: None,
        })
    }

    pub fn from_channel(data: Vec<f64>, fs: f64) -> Result<Self> {
        let n = data.len();
        let samples = Array2::from_shape_vec((1, n), data).map_err(|e| Error::Data(e.to_string()))?;
        Self::new(samples, fs)
    }

    pub fn from_channels(channels: &[Vec<f64>], fs: f64) -> Result<Self> {
        let n = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::Data("channels differ in length".into()));
        }
        let flat: Vec<f64> = channels.iter().flatten().copied().collect();
        let samples = Array2::from_shape_vec((channels.len(), n), flat).map_err(|e| Error::Data(e.to_string()))?;
        Self::new(samples, fs)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_channels() {
            return Err(Error::Data(format!(
                "{} labels for {} channels",
                labels.len(),
                self.n_channels()
            )));
        }
        self.channel_labels = Some(labels);
        Ok(self)
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channel_labels(&self) -> Option<&[String]> {
        self.channel_labels.as_deref()
    }

    /// Label of channel `i`, falling back to `ch{i}`.
    pub fn label(&self, i: usize) -> String {
        self.channel_labels
            .as_ref()
            .map(|l| l[i].clone())
            .unwrap_or_else(|| format!("ch{i}"))
    }

    pub fn n_channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, i: usize) -> ArrayView1<'_, f64> {
        self.samples.row(i)
    }

    /// Single-channel view as an owned series, keeping the label.
    pub fn select_channel(&self, i: usize) -> TimeSeries {
        let samples = self.samples.row(i).to_owned().insert_axis(ndarray::Axis(0));
        TimeSeries {
            samples,
            fs: self.fs,
            channel_labels: self.channel_labels.as_ref().map(|l| vec![l[i].clone()]),
        }
    }

    /// Samples `[start, start + len)` of every channel.
    pub fn slice_time(&self, start: usize, len: usize) -> Result<TimeSeries> {
        if start + len > self.len() {
            return Err(Error::Data(format!(
                "window {start}..{} exceeds length {}",
                start + len,
                self.len()
            )));
        }
        Ok(TimeSeries {
            samples: self.samples.slice(ndarray::s![.., start..start + len]).to_owned(),
            fs: self.fs,
            channel_labels: self.channel_labels.clone(),
        })
    }

    pub(crate) fn map_channels<F>(&self, mut f: F) -> Result<TimeSeries>
    where
        F: FnMut(ArrayView1<'_, f64>) -> Result<Vec<f64>>,
    {
        let mut out = Array2::zeros(self.samples.raw_dim());
        for (i, row) in self.samples.rows().into_iter().enumerate() {
            let y = f(row)?;
            if y.len() != self.len() {
                return Err(Error::Numerical("channel length changed".into()));
            }
            out.row_mut(i).assign(&ArrayView1::from(&y));
        }
        let ts = TimeSeries::new(out, self.fs).map_err(|_| Error::Numerical("non-finite output".into()))?;
        Ok(TimeSeries {
            channel_labels: self.channel_labels.clone(),
            ..ts
        })
    }
}

/// Power spectral density on an ascending frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub normalized: bool,
}

impl Spectrum {
    pub fn new(freqs_hz: Vec<f64>, power: Vec<f64>, normalized: bool) -> Result<Self> {
        if freqs_hz.len() != power.len() {
            return Err(Error::Data(format!(
                "{} frequencies for {} power values",
                freqs_hz.len(),
                power.len()
            )));
        }
        if freqs_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("frequencies must be strictly ascending".into()));
        }
        if power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Data("power must be finite and non-negative".into()));
        }
        if normalized {
            let total: f64 = power.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Normalization(format!("normalized spectrum sums to {total}")));
            }
        }
        Ok(Self {
            freqs_hz,
            power,
            normalized,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Bins with `lo <= f <= hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Spectrum {
        let (freqs_hz, power) = self
            .freqs_hz
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, p)| (*f, *p))
            .unzip();
        Spectrum {
            freqs_hz,
            power,
            normalized: false,
        }
    }

    /// Bins with `lo <= f < hi`.
    pub fn restrict_half_open(&self, lo: f64, hi: f64) -> Spectrum {
        let (freqs_hz, power) = self
            .freqs_hz
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo && **f < hi)
            .map(|(f, p)| (*f, *p))
            .unzip();
        Spectrum {
            freqs_hz,
            power,
            normalized: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandName {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl BandName {
    pub const ALL: [BandName; 5] = [
        BandName::Delta,
        BandName::Theta,
        BandName::Alpha,
        BandName::Beta,
        BandName::Gamma,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BandName::Delta => "delta",
            BandName::Theta => "theta",
            BandName::Alpha => "alpha",
            BandName::Beta => "beta",
            BandName::Gamma => "gamma",
        }
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BandName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delta" => Ok(BandName::Delta),
            "theta" => Ok(BandName::Theta),
            "alpha" => Ok(BandName::Alpha),
            "beta" => Ok(BandName::Beta),
            "gamma" => Ok(BandName::Gamma),
            other => Err(Error::Parameter(format!("unknown band {other:?}"))),
        }
    }
}

/// A named frequency band `[lo_hz, hi_hz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: BandName,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub fn new(name: BandName, lo_hz: f64, hi_hz: f64) -> Result<Self> {
        if !(lo_hz > 0.0 && hi_hz > lo_hz) {
            return Err(Error::Parameter(format!(
                "band {name} requires 0 < lo < hi, got {lo_hz}..{hi_hz}"
            )));
        }
        Ok(Self { name, lo_hz, hi_hz })
    }

    /// Canonical EEG band edges: δ 0.5–4, θ 4–8, α 8–13, β 13–30, γ 30–45 Hz.
    pub const fn canonical(name: BandName) -> Self {
        let (lo_hz, hi_hz) = match name {
            BandName::Delta => (0.5, 4.0),
            BandName::Theta => (4.0, 8.0),
            BandName::Alpha => (8.0, 13.0),
            BandName::Beta => (13.0, 30.0),
            BandName::Gamma => (30.0, 45.0),
        };
        Self { name, lo_hz, hi_hz }
    }

    pub fn all() -> [Band; 5] {
        BandName::ALL.map(Band::canonical)
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo_hz && f < self.hi_hz
    }
}
