use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hilbert::forward_plan;
use super::{Spectrum, TimeSeries};
use crate::error::{Error, Result};

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchParams {
    pub nperseg: usize,
    pub overlap_frac: f64,
    pub fmin: f64,
    pub fmax: f64,
}

impl WelchParams {
    /// Membrane-potential proxy: 4096-point segments, 75% overlap, 0.5–40 Hz.
    pub const MODEL1: WelchParams = WelchParams {
        nperseg: 4096,
        overlap_frac: 0.75,
        fmin: 0.5,
        fmax: 40.0,
    };

    /// Synaptic-current proxy: 8192-point segments, 93.75% overlap, 1–40 Hz.
    pub const MODEL2: WelchParams = WelchParams {
        nperseg: 8192,
        overlap_frac: 0.9375,
        fmin: 1.0,
        fmax: 40.0,
    };
}

fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// One-sided Welch PSD of a single channel (density scaling, Hann window,
/// per-segment mean removal, mean averaging), restricted to `[fmin, fmax]`.
pub fn welch_1d(x: &[f64], fs: f64, params: WelchParams) -> Result<Spectrum> {
    let WelchParams {
        nperseg,
        overlap_frac,
        fmin,
        fmax,
    } = params;
    if nperseg < 2 {
        return Err(Error::Parameter(format!("nperseg must be >= 2, got {nperseg}")));
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(Error::Parameter(format!(
            "overlap fraction must be in [0, 1), got {overlap_frac}"
        )));
    }
    if x.len() < nperseg {
        return Err(Error::Data(format!(
            "signal of {} samples is shorter than one {nperseg}-sample segment",
            x.len()
        )));
    }
    let noverlap = ((nperseg as f64) * overlap_frac).round() as usize;
    let step = (nperseg - noverlap.min(nperseg - 1)).max(1);
    let n_seg = (x.len() - nperseg) / step + 1;

    let window = hann_periodic(nperseg);
    let win_ss: f64 = window.iter().map(|w| w * w).sum();
    let fft = forward_plan(nperseg);
    let n_bins = nperseg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nperseg];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    for s in 0..n_seg {
        let seg = &x[s * step..s * step + nperseg];
        let mean = seg.iter().sum::<f64>() / nperseg as f64;
        for ((b, &v), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
    }

    let scale = 1.0 / (fs * win_ss * n_seg as f64);
    let df = fs / nperseg as f64;
    let mut freqs = Vec::new();
    let mut power = Vec::new();
    for (k, a) in acc.iter().enumerate() {
        let f = k as f64 * df;
        if f < fmin || f > fmax {
            continue;
        }
        let one_sided = if k == 0 || (nperseg % 2 == 0 && k == nperseg / 2) {
            1.0
        } else {
            2.0
        };
        freqs.push(f);
        power.push(a * scale * one_sided);
    }
    Spectrum::new(freqs, power, false)
}

/// Welch PSD of a single-channel series.
pub fn welch(ts_1ch: &TimeSeries, nperseg: usize, overlap_frac: f64, fmin: f64, fmax: f64) -> Result<Spectrum> {
    if ts_1ch.n_channels() != 1 {
        return Err(Error::Data(format!(
            "welch expects one channel, got {}",
            ts_1ch.n_channels()
        )));
    }
    let x = ts_1ch.channel(0).to_vec();
    welch_1d(
        &x,
        ts_1ch.fs(),
        WelchParams {
            nperseg,
            overlap_frac,
            fmin,
            fmax,
        },
    )
}

/// Divides power by its sum over the retained bins.
pub fn to_relative(spec: &Spectrum) -> Result<Spectrum> {
    let total = spec.total();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Normalization(format!(
            "cannot normalize spectrum with total power {total}"
        )));
    }
    let power: Vec<f64> = spec.power.iter().map(|p| p / total).collect();
    // renormalize once more so the sum is 1 to within rounding of the second pass
    let total2: f64 = power.iter().sum();
    let power = power.into_iter().map(|p| p / total2).collect();
    Ok(Spectrum {
        freqs_hz: spec.freqs_hz.clone(),
        power,
        normalized: true,
    })
}
