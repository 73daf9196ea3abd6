use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigproc::{analytic_signal_1d, Band, SosFilter, TimeSeries};

/// Symmetric channel × channel connectivity with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnMatrix {
    pub values: Array2<f64>,
    pub band: Band,
    pub subject_id: String,
    pub labels: Vec<String>,
}

impl ConnMatrix {
    pub fn new(values: Array2<f64>, band: Band, subject_id: String, labels: Vec<String>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(Error::Data("connectivity matrix must be square".into()));
        }
        if labels.len() != n {
            return Err(Error::Data(format!("{} labels for {n} nodes", labels.len())));
        }
        for i in 0..n {
            if (values[[i, i]] - 1.0).abs() > 1e-9 {
                return Err(Error::Data(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..n {
                let v = values[[i, j]];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Data(format!("entry ({i}, {j}) = {v} outside [0, 1]")));
                }
                if (v - values[[j, i]]).abs() > 1e-9 {
                    return Err(Error::Data(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            values,
            band,
            subject_id,
            labels,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.values.nrows()
    }
}

const AR_ORDER: usize = 8;

/// Phase-locking value for every channel pair of `ts` inside `band`,
/// using a fourth-order zero-phase band-pass with predictive edge extension.
pub fn plv(ts: &TimeSeries, band: &Band) -> Result<ConnMatrix> {
    plv_with_order(ts, band, 4)
}

pub fn plv_with_order(ts: &TimeSeries, band: &Band, order: usize) -> Result<ConnMatrix> {
    let n = ts.n_channels();
    if n < 2 {
        return Err(Error::Data(format!("PLV needs >= 2 channels, got {n}")));
    }
    if (ts.len() as f64) < ts.fs() {
        return Err(Error::Data(format!(
            "PLV needs at least one second of samples ({} < {})",
            ts.len(),
            ts.fs()
        )));
    }
    for (c, ch) in ts.samples().rows().into_iter().enumerate() {
        let first = ch[0];
        if ch.iter().all(|&v| v == first) {
            return Err(Error::DegeneratePhase { channel: c });
        }
    }

    let filter = SosFilter::butter_bandpass(band.lo_hz, band.hi_hz, ts.fs(), order)?;
    // one second of predicted signal at each end
    let padlen = ts.fs().round() as usize;
    let t = ts.len();
    let mut phasors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (c, ch) in ts.samples().rows().into_iter().enumerate() {
        let x: Vec<f64> = ch.iter().copied().collect();
        let y = filter.filtfilt_predictive(&x, AR_ORDER, padlen);
        let z = analytic_signal_1d(ndarray::ArrayView1::from(&y))?;
        let mut u = Vec::with_capacity(t);
        for zi in z {
            let m = zi.norm();
            if !(m > 0.0) {
                return Err(Error::DegeneratePhase { channel: c });
            }
            u.push(zi / m);
        }
        phasors.push(u);
    }

    let mut values = Array2::eye(n);
    for i in 0..n {
        for j in i + 1..n {
            let s: Complex64 = phasors[i].iter().zip(&phasors[j]).map(|(a, b)| a * b.conj()).sum();
            let v = (s.norm() / t as f64).min(1.0);
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    let labels = (0..n).map(|i| ts.label(i)).collect();
    Ok(ConnMatrix {
        values,
        band: *band,
        subject_id: String::new(),
        labels,
    })
}
