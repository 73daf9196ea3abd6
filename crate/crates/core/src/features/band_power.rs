use crate::error::{Error, Result};
use crate::sigproc::{Band, Spectrum, TimeSeries};

/// Sum of relative power over bins in `[lo, hi)`.
pub fn band_relative_power(spec: &Spectrum, band: &Band) -> Result<f64> {
    if !spec.normalized {
        return Err(Error::Normalization(
            "band power expects a relative (normalized) spectrum".into(),
        ));
    }
    let mut hit = false;
    let mut total = 0.0;
    for (&f, &p) in spec.freqs_hz.iter().zip(&spec.power) {
        if band.contains(f) {
            hit = true;
            total += p;
        }
    }
    if !hit {
        return Err(Error::Coverage(format!(
            "no spectral bins inside {} ({}–{} Hz)",
            band.name, band.lo_hz, band.hi_hz
        )));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Sample standard deviation (n − 1) of a single-channel series.
pub fn channel_std(ts_1ch: &TimeSeries) -> Result<f64> {
    if ts_1ch.n_channels() != 1 {
        return Err(Error::Data("channel_std expects one channel".into()));
    }
    let x = ts_1ch.channel(0);
    let n = x.len();
    if n < 2 {
        return Err(Error::Data(format!("standard deviation needs >= 2 samples, got {n}")));
    }
    let mean = x.sum() / n as f64;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}
