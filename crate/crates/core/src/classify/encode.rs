use ndarray::{Array2, Array3, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Binary spikes, time steps × batch × features.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTensor {
    pub data: Array3<f64>,
}

impl SpikeTensor {
    pub fn t_steps(&self) -> usize {
        self.data.dim().0
    }

    pub fn batch(&self) -> usize {
        self.data.dim().1
    }

    pub fn n_features(&self) -> usize {
        self.data.dim().2
    }

    /// `(T·B) × F` view with time-major rows.
    pub(crate) fn flat(&self) -> ArrayView2<'_, f64> {
        let (t, b, f) = self.data.dim();
        self.data.view().into_shape_with_order((t * b, f)).expect("contiguous")
    }

    pub fn zeros(t: usize, b: usize, f: usize) -> Self {
        Self {
            data: Array3::zeros((t, b, f)),
        }
    }
}

/// Per-feature min-max normalization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Data("cannot fit scaler on zero rows".into()));
        }
        let min = x.fold_axis(Axis(0), f64::INFINITY, |a, &v| a.min(v)).to_vec();
        let max = x.fold_axis(Axis(0), f64::NEG_INFINITY, |a, &v| a.max(v)).to_vec();
        Ok(Self { min, max })
    }

    /// Maps into `[0, 1]`; constant training columns map to 0 and values
    /// beyond the training range are clipped.
    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.min.len() {
            return Err(Error::Data(format!(
                "scaler fitted on {} features, got {}",
                self.min.len(),
                x.ncols()
            )));
        }
        let mut clipped = 0usize;
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                let z = if span > 0.0 { (*v - self.min[j]) / span } else { 0.0 };
                if !(0.0..=1.0).contains(&z) {
                    clipped += 1;
                }
                *v = z.clamp(0.0, 1.0);
            }
        }
        if clipped > 0 {
            log::warn!("clipped {clipped} normalized values to [0, 1]");
        }
        Ok(out)
    }
}

/// Independent Bernoulli spikes with per-step probability equal to the
/// feature value. Values outside `[0, 1]` are clipped.
pub fn rate_encode(x: &Array2<f64>, t_steps: usize, seed: u64) -> SpikeTensor {
    let (b, f) = x.dim();
    let mut rng = seed::rng(seed);
    let mut data = Array3::zeros((t_steps, b, f));
    let mut clipped = false;
    for t in 0..t_steps {
        for i in 0..b {
            for j in 0..f {
                let p = x[[i, j]];
                if !(0.0..=1.0).contains(&p) {
                    clipped = true;
                }
                let p = p.clamp(0.0, 1.0);
                // always draw so the stream does not depend on the values
                let u: f64 = rng.random();
                if u < p {
                    data[[t, i, j]] = 1.0;
                }
            }
        }
    }
    if clipped {
        log::warn!("rate_encode clipped values outside [0, 1]");
    }
    SpikeTensor { data }
}
