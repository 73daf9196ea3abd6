use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::TimeSeries;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Complex-valued multichannel series.
#[derive(Debug, Clone)]
pub struct AnalyticSignal {
    pub values: Array2<Complex64>,
    pub fs: f64,
}

impl AnalyticSignal {
    pub fn phase(&self, channel: usize) -> Vec<f64> {
        self.values.row(channel).iter().map(|z| z.arg()).collect()
    }

    pub fn amplitude(&self, channel: usize) -> Vec<f64> {
        self.values.row(channel).iter().map(|z| z.norm()).collect()
    }
}

/// FFT analytic signal of one channel: zero the negative frequencies,
/// double the positive ones, keep DC and Nyquist.
pub fn analytic_signal_1d(x: ArrayView1<'_, f64>) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 16 {
        return Err(Error::Data(format!(
            "analytic signal needs at least 16 samples, got {n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite sample in analytic-signal input".into()));
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(n).process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let h = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *c *= h / n as f64;
    }
    inverse_plan(n).process(&mut buf);
    Ok(buf)
}

pub fn analytic_signal(ts: &TimeSeries) -> Result<AnalyticSignal> {
    let mut values = Array2::zeros((ts.n_channels(), ts.len()));
    for (i, ch) in ts.samples().rows().into_iter().enumerate() {
        let z = analytic_signal_1d(ch)?;
        values.row_mut(i).assign(&ArrayView1::from(&z));
    }
    Ok(AnalyticSignal { values, fs: ts.fs() })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn unwrap(phase: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(phase.len());
        let mut offset = 0.0;
        for (i, &p) in phase.iter().enumerate() {
            if i > 0 {
                let d = p - phase[i - 1];
                if d > PI {
                    offset -= 2.0 * PI;
                } else if d < -PI {
                    offset += 2.0 * PI;
                }
            }
            out.push(p + offset);
        }
        out
    }

    #[test]
    fn cosine_phase_ramps_at_two_pi_f() {
        let fs = 500.0;
        let n = 5000;
        for f in [7.3, 10.0, 23.7] {
            let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).cos()).collect();
            let ts = TimeSeries::from_channel(x.clone(), fs).unwrap();
            let z = analytic_signal(&ts).unwrap();
            let ph = unwrap(&z.phase(0));
            let edge = n / 20;
            let (a, b) = (edge, n - edge);
            let slope = (ph[b] - ph[a]) / ((b - a) as f64 / fs);
            let want = 2.0 * PI * f;
            assert!((slope - want).abs() / want < 0.01, "{slope} vs {want}");

            for (zi, xi) in z.values.row(0).iter().zip(&x) {
                assert!((zi.re - xi).abs() < 1e-9);
            }
            let amp = z.amplitude(0);
            for &m in &amp[a..b] {
                assert!((m - 1.0).abs() < 0.02, "amplitude {m} at f {f}");
            }
        }
    }

    #[test]
    fn zero_input_gives_zero() {
        let ts = TimeSeries::from_channel(vec![0.0; 64], 100.0).unwrap();
        let z = analytic_signal(&ts).unwrap();
        assert!(z.values.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn short_input_rejected() {
        let ts = TimeSeries::from_channel(vec![1.0; 8], 100.0).unwrap();
        assert!(matches!(analytic_signal(&ts), Err(Error::Data(_))));
    }

    #[test]
    fn odd_length_real_part_preserved() {
        let x: Vec<f64> = (0..101).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let z = analytic_signal_1d(ArrayView1::from(&x)).unwrap();
        for (zi, xi) in z.iter().zip(&x) {
            assert!((zi.re - xi).abs() < 1e-9);
        }
    }
}
