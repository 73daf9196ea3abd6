use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encode::{rate_encode, SpikeTensor};
use super::optim::Adam;
use super::{Classifier, TrainConfig};
use crate::error::{Error, Result};
use crate::seed::{self, streams};

/// Fully connected layer, `y = x W + b` with `W` fan-in × fan-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    /// Uniform `±1/sqrt(fan_in)` initialization.
    pub fn init<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Self {
            w: Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-bound..bound)),
            b: Array1::from_shape_simple_fn(fan_out, || rng.random_range(-bound..bound)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }

    pub(crate) fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

pub(crate) fn init_layers(sizes: &[usize], seed: u64) -> Vec<Dense> {
    let mut rng = seed::rng_for(seed, &[streams::INIT]);
    sizes.windows(2).map(|w| Dense::init(w[0], w[1], &mut rng)).collect()
}

/// Forward spike nonlinearity. `Sigmoid` is the smoothed twin used to
/// check gradients; both share the same backward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikeFn {
    Heaviside,
    Sigmoid,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Stack of leaky integrate-and-fire layers; class scores are output
/// spike counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnnModel {
    pub layers: Vec<Dense>,
    pub beta: f64,
    pub threshold: f64,
    pub k: f64,
    pub t_steps: usize,
    /// Treat the reset as a constant in the backward pass.
    #[serde(default = "yes")]
    pub detach_reset: bool,
    pub epochs_trained: usize,
}

fn yes() -> bool {
    true
}

struct Trace {
    /// Pre-reset membrane, `(T·B) × H`.
    v: Array2<f64>,
    s: Array2<f64>,
}

impl SnnModel {
    pub fn new(sizes: &[usize], cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Model(format!("invalid layer sizes {sizes:?}")));
        }
        Ok(Self {
            layers: init_layers(sizes, cfg.seed),
            beta: cfg.beta,
            threshold: cfg.threshold,
            k: cfg.k,
            t_steps: cfg.t_steps,
            detach_reset: cfg.detach_reset,
            epochs_trained: 0,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().unwrap().fan_out()
    }

    fn spike(&self, v: f64, mode: SpikeFn) -> f64 {
        match mode {
            SpikeFn::Heaviside => (v > self.threshold) as u8 as f64,
            SpikeFn::Sigmoid => sigmoid(self.k * (v - self.threshold)),
        }
    }

    fn surrogate(&self, v: f64) -> f64 {
        let s = sigmoid(self.k * (v - self.threshold));
        self.k * s * (1.0 - s)
    }

    fn layer_forward(&self, layer: &Dense, input: ArrayView2<'_, f64>, t_steps: usize, mode: SpikeFn) -> Trace {
        let cur = layer.apply(input);
        let b = cur.nrows() / t_steps;
        let h = cur.ncols();
        let mut v = Array2::zeros(cur.raw_dim());
        let mut s = Array2::zeros(cur.raw_dim());
        let mut m = Array2::<f64>::zeros((b, h));
        for t in 0..t_steps {
            let rows = s![t * b..(t + 1) * b, ..];
            let mut vt = v.slice_mut(rows);
            vt.assign(&(&m * self.beta + &cur.slice(rows)));
            let mut st = s.slice_mut(rows);
            ndarray::Zip::from(&mut st)
                .and(&vt)
                .and(&mut m)
                .for_each(|st, &vv, mm| {
                    *st = self.spike(vv, mode);
                    *mm = vv - self.threshold * *st;
                });
        }
        Trace { v, s }
    }

    fn check_input(&self, spikes: &SpikeTensor) -> Result<()> {
        if spikes.n_features() != self.n_inputs() {
            return Err(Error::Model(format!(
                "input has {} features, model expects {}",
                spikes.n_features(),
                self.n_inputs()
            )));
        }
        Ok(())
    }

    fn run(&self, spikes: &SpikeTensor, mode: SpikeFn) -> Result<Vec<Trace>> {
        self.check_input(spikes)?;
        let t = spikes.t_steps();
        let mut traces: Vec<Trace> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let tr = if l == 0 {
                self.layer_forward(layer, spikes.flat(), t, mode)
            } else {
                self.layer_forward(layer, traces[l - 1].s.view(), t, mode)
            };
            traces.push(tr);
        }
        Ok(traces)
    }

    fn counts(out: &Array2<f64>, t_steps: usize) -> Array2<f64> {
        let (tb, c) = out.dim();
        out.view()
            .into_shape_with_order((t_steps, tb / t_steps, c))
            .expect("contiguous")
            .sum_axis(Axis(0))
    }

    /// Output spike counts, batch × classes.
    pub fn forward_with(&self, spikes: &SpikeTensor, mode: SpikeFn) -> Result<Array2<f64>> {
        let traces = self.run(spikes, mode)?;
        Ok(Self::counts(&traces.last().unwrap().s, spikes.t_steps()))
    }

    /// Mean cross-entropy of the count logits and its gradient. The
    /// backward pass replaces the spike derivative with `k σ'(k(v − θ))`;
    /// the subtractive reset is differentiated unless `detach_reset`.
    pub fn loss_and_grad(&self, spikes: &SpikeTensor, labels: &[usize], mode: SpikeFn) -> Result<(f64, Vec<Dense>)> {
        let traces = self.run(spikes, mode)?;
        let t_steps = spikes.t_steps();
        let b = spikes.batch();
        if labels.len() != b {
            return Err(Error::Model("label count does not match batch".into()));
        }
        let logits = Self::counts(&traces.last().unwrap().s, t_steps);
        let (loss, dlogits) = cross_entropy(&logits, labels)?;

        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        // dL/ds of the current layer, (T·B) × H
        let c = self.n_classes();
        let mut ds = Array2::zeros((t_steps * b, c));
        for t in 0..t_steps {
            ds.slice_mut(s![t * b..(t + 1) * b, ..]).assign(&dlogits);
        }
        for l in (0..self.layers.len()).rev() {
            let tr = &traces[l];
            let h = tr.v.ncols();
            let mut dv = Array2::zeros((t_steps * b, h));
            let mut gm = Array2::<f64>::zeros((b, h));
            for t in (0..t_steps).rev() {
                let rows = s![t * b..(t + 1) * b, ..];
                let mut dvt = dv.slice_mut(rows);
                ndarray::Zip::from(&mut dvt)
                    .and(&tr.v.slice(rows))
                    .and(&ds.slice(rows))
                    .and(&mut gm)
                    .for_each(|d, &v, &dsv, g| {
                        let f = self.surrogate(v);
                        *d = if self.detach_reset {
                            *g + dsv * f
                        } else {
                            *g * (1.0 - self.threshold * f) + dsv * f
                        };
                        *g = self.beta * *d;
                    });
            }
            let input = if l == 0 { spikes.flat() } else { traces[l - 1].s.view() };
            grads[l].w = input.t().dot(&dv);
            grads[l].b = dv.sum_axis(Axis(0));
            if l > 0 {
                ds = dv.dot(&self.layers[l].w.t());
            }
        }
        Ok((loss, grads))
    }
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
pub(crate) fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>)> {
    let (b, c) = logits.dim();
    let mut grad = Array2::zeros((b, c));
    let mut loss = 0.0;
    for (i, row) in logits.rows().into_iter().enumerate() {
        let y = labels[i];
        if y >= c {
            return Err(Error::Model(format!("label {y} out of range for {c} classes")));
        }
        let mx = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let z: f64 = row.iter().map(|v| (v - mx).exp()).sum();
        loss += -(row[y] - mx - z.ln());
        for j in 0..c {
            let p = (row[j] - mx).exp() / z;
            grad[[i, j]] = (p - (j == y) as u8 as f64) / b as f64;
        }
    }
    Ok((loss / b as f64, grad))
}

/// Output spike counts of the binary network.
pub fn snn_forward(spikes: &SpikeTensor, model: &SnnModel) -> Result<Array2<f64>> {
    model.forward_with(spikes, SpikeFn::Heaviside)
}

pub(crate) fn check_training_data(x: &Array2<f64>, y: &[usize]) -> Result<()> {
    if x.nrows() != y.len() || x.nrows() == 0 {
        return Err(Error::Data(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::Data("training data needs both classes".into()));
    }
    Ok(())
}

/// Mini-batch index order of `epoch`.
pub(crate) fn epoch_batches(n: usize, batch: usize, seed: u64, epoch: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng_for(seed, &[streams::SHUFFLE, epoch as u64]));
    idx.chunks(batch).map(<[usize]>::to_vec).collect()
}

/// Backpropagation through time with surrogate gradients and Adam.
/// `x` holds normalized features in `[0, 1]`, `y` class indices (1 = AD).
pub fn train_snn(x: &Array2<f64>, y: &[usize], cfg: &TrainConfig) -> Result<SnnModel> {
    check_training_data(x, y)?;
    let mut sizes = vec![x.ncols()];
    sizes.extend(&cfg.hidden);
    sizes.push(2);
    let mut model = SnnModel::new(&sizes, cfg)?;
    let mut opt = Adam::new(cfg.lr, &model.layers);
    for epoch in 0..cfg.epochs {
        for (bi, batch) in epoch_batches(x.nrows(), cfg.batch_size, cfg.seed, epoch)
            .iter()
            .enumerate()
        {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let enc_seed = seed::derive(cfg.seed, &[streams::ENCODE, epoch as u64, bi as u64]);
            let spikes = rate_encode(&xb, cfg.t_steps, enc_seed);
            let (loss, grads) = model.loss_and_grad(&spikes, &yb, SpikeFn::Heaviside)?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    reason: format!("loss is {loss}"),
                });
            }
            opt.step(&mut model.layers, &grads);
        }
        model.epochs_trained += 1;
    }
    Ok(model)
}

impl Classifier for SnnModel {
    fn scores(&self, x: &Array2<f64>, seed: u64) -> Result<Vec<f64>> {
        let counts = snn_forward(&rate_encode(x, self.t_steps, seed), self)?;
        Ok(counts.rows().into_iter().map(|r| r[1] - r[0]).collect())
    }

    fn is_trained(&self) -> bool {
        self.epochs_trained > 0
    }

    fn n_features(&self) -> usize {
        self.n_inputs()
    }
}
