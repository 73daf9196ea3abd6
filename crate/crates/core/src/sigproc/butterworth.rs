use std::f64::consts::PI;

use num_complex::Complex64;

use super::extend::predictive_extension;
use super::TimeSeries;
use crate::error::{Error, Result};

/// One biquad: `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Sos {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = self.a[0] + z_inv * (self.a[1] + z_inv * self.a[2]);
        num / den
    }

    /// Steady-state transposed-direct-form state for a unit step input.
    fn step_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let r0 = b1 - a1 * b0;
        let r1 = b2 - a2 * b0;
        let z0 = (r0 + r1) / (1.0 + a1 + a2);
        [z0, r1 - a2 * z0]
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Sos>,
}

impl SosFilter {
    /// Digital Butterworth band-pass of total order `order` (even, `order/2`
    /// prototype poles), designed by bilinear transform with prewarped edges.
    pub fn butter_bandpass(lo_hz: f64, hi_hz: f64, fs: f64, order: usize) -> Result<Self> {
        if order < 2 || order % 2 != 0 {
            return Err(Error::Parameter(format!(
                "band-pass order must be even and >= 2, got {order}"
            )));
        }
        let nyquist = fs / 2.0;
        if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < nyquist) {
            return Err(Error::Parameter(format!(
                "band {lo_hz}..{hi_hz} Hz must satisfy 0 < lo < hi < {nyquist} (Nyquist)"
            )));
        }
        let n = order / 2;
        let k = 2.0 * fs;
        let w1 = k * (PI * lo_hz / fs).tan();
        let w2 = k * (PI * hi_hz / fs).tan();
        let w0_sq = w1 * w2;
        let bw = w2 - w1;
        let bilinear = |s: Complex64| (k + s) / (k - s);

        let mut sections = Vec::with_capacity(n);
        for j in 0..n {
            let theta = PI * (2 * j + n + 1) as f64 / (2 * n) as f64;
            let p = Complex64::from_polar(1.0, theta);
            if p.im < -1e-12 {
                continue;
            }
            // s^2 - p*bw*s + w0^2 = 0
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0_sq).sqrt();
            let s1 = (pb + disc) / 2.0;
            let s2 = (pb - disc) / 2.0;
            let (z1, z2) = (bilinear(s1), bilinear(s2));
            if p.im.abs() <= 1e-12 {
                // real prototype pole: its two band-pass poles form one real section
                let sum = z1 + z2;
                let prod = z1 * z2;
                sections.push(Sos {
                    b: [1.0, 0.0, -1.0],
                    a: [1.0, -sum.re, prod.re],
                });
            } else {
                for z in [z1, z2] {
                    sections.push(Sos {
                        b: [1.0, 0.0, -1.0],
                        a: [1.0, -2.0 * z.re, z.norm_sqr()],
                    });
                }
            }
        }
        debug_assert_eq!(sections.len(), n);

        for (i, s) in sections.iter().enumerate() {
            // a biquad is stable iff |a2| < 1 and |a1| < 1 + a2
            let [_, a1, a2] = s.a;
            if !(a2.abs() < 1.0 && a1.abs() < 1.0 + a2) || !(a1.is_finite() && a2.is_finite()) {
                return Err(Error::Numerical(format!(
                    "unstable band-pass section {i}: a1={a1}, a2={a2}"
                )));
            }
        }

        // unit gain at the (prewarped) geometric centre frequency
        let wc = 2.0 * (w0_sq.sqrt() / k).atan();
        let z_inv = Complex64::from_polar(1.0, -wc);
        let h: Complex64 = sections.iter().map(|s| s.response(z_inv)).product();
        let g = (1.0 / h.norm()).powf(1.0 / n as f64);
        for s in &mut sections {
            for b in &mut s.b {
                *b *= g;
            }
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[Sos] {
        &self.sections
    }

    /// `|H(e^{i 2π f / fs})|` of a single forward pass.
    pub fn magnitude_at(&self, f_hz: f64, fs: f64) -> f64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f_hz / fs);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .product::<Complex64>()
            .norm()
    }

    fn initial_states(&self, x0: f64) -> Vec<[f64; 2]> {
        let mut scale = x0;
        self.sections
            .iter()
            .map(|s| {
                let zi = s.step_state();
                let out = [zi[0] * scale, zi[1] * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    fn run(&self, x: &mut [f64], mut state: Vec<[f64; 2]>) {
        for (s, z) in self.sections.iter().zip(state.iter_mut()) {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let (mut z0, mut z1) = (z[0], z[1]);
            for v in x.iter_mut() {
                let xi = *v;
                let y = b0 * xi + z0;
                z0 = b1 * xi - a1 * y + z1;
                z1 = b2 * xi - a2 * y;
                *v = y;
            }
        }
    }

    /// Causal filtering from rest.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.run(&mut y, vec![[0.0; 2]; self.sections.len()]);
        y
    }

    /// Forward–backward filtering with odd extension of `padlen` samples
    /// and steady-state initial conditions at both ends.
    pub fn filtfilt(&self, x: &[f64], padlen: usize) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = padlen.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.forward_backward(ext, pad, n)
    }

    /// Forward–backward filtering of `x` continued by `padlen` samples of
    /// least-squares linear prediction (order `ar_order`) at each end.
    /// Sinusoids pass without edge transients. Falls back to
    /// [`filtfilt`](Self::filtfilt) with `3 * order` odd padding when no
    /// stable predictor fits.
    pub fn filtfilt_predictive(&self, x: &[f64], ar_order: usize, padlen: usize) -> Vec<f64> {
        match predictive_extension(x, ar_order, padlen) {
            Some(ext) => self.forward_backward(ext, padlen, x.len()),
            None => self.filtfilt(x, 3 * self.order()),
        }
    }

    fn forward_backward(&self, mut ext: Vec<f64>, pad: usize, n: usize) -> Vec<f64> {
        let zi = self.initial_states(ext[0]);
        self.run(&mut ext, zi);
        ext.reverse();
        let zi = self.initial_states(ext[0]);
        self.run(&mut ext, zi);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }

    /// Total band-pass order.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }
}

/// Zero-phase Butterworth band-pass applied to every channel.
///
/// The signal is extended by `3 * order` odd-symmetric samples at each end
/// before the forward and backward passes.
pub fn bandpass(ts: &TimeSeries, lo_hz: f64, hi_hz: f64, order: usize) -> Result<TimeSeries> {
    let filter = SosFilter::butter_bandpass(lo_hz, hi_hz, ts.fs(), order)?;
    let padlen = 3 * order;
    ts.map_channels(|ch| {
        let x: Vec<f64> = ch.iter().copied().collect();
        Ok(filter.filtfilt(&x, padlen))
    })
}
