use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigproc::Spectrum;

/// Power-law (aperiodic) component `log10 P = offset - exponent · log10 f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AperiodicFit {
    pub offset: f64,
    pub exponent: f64,
    pub fit_range_hz: (f64, f64),
    pub r_squared: f64,
    pub n_bins_used: usize,
}

const MIN_BINS: usize = 10;

struct Line {
    intercept: f64,
    slope: f64,
}

fn ols(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Line {
        intercept: my - slope * mx,
        slope,
    }
}

fn r_squared(x: &[f64], y: &[f64], line: &Line) -> f64 {
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (line.intercept + line.slope * a);
            r * r
        })
        .sum();
    if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Two-pass log-log fit of the aperiodic component over `fit_range`
/// (inclusive).
///
/// The first ordinary least-squares pass flags bins whose residual lies
/// more than one residual standard deviation above the line (oscillatory
/// peaks); the line is refit once without them.
pub fn fit_aperiodic(spec: &Spectrum, fit_range: (f64, f64)) -> Result<AperiodicFit> {
    let (lo, hi) = fit_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Fit(format!("invalid fit range {lo}..{hi} Hz")));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&f, &p) in spec.freqs_hz.iter().zip(&spec.power) {
        if f < lo || f > hi {
            continue;
        }
        if !(p > 0.0) {
            return Err(Error::Fit(format!("non-positive power {p} at {f} Hz")));
        }
        x.push(f.log10());
        y.push(p.log10());
    }
    if x.len() < MIN_BINS {
        return Err(Error::Fit(format!(
            "{} bins in {lo}–{hi} Hz, need at least {MIN_BINS}",
            x.len()
        )));
    }

    let first = ols(&x, &y);
    let resid: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| b - (first.intercept + first.slope * a))
        .collect();
    let sd = (resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64).sqrt();
    let (kx, ky): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(&y)
        .zip(&resid)
        .filter(|(_, &r)| r <= sd)
        .map(|((a, b), _)| (*a, *b))
        .unzip();
    if kx.len() < MIN_BINS {
        return Err(Error::Fit(format!(
            "{} bins left after peak exclusion, need at least {MIN_BINS}",
            kx.len()
        )));
    }
    let line = ols(&kx, &ky);
    Ok(AperiodicFit {
        offset: line.intercept,
        exponent: -line.slope,
        fit_range_hz: fit_range,
        r_squared: r_squared(&kx, &ky, &line),
        n_bins_used: kx.len(),
    })
}
