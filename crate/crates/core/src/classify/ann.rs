use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::optim::Adam;
use super::snn::{check_training_data, cross_entropy, epoch_batches, init_layers, Dense};
use super::{Classifier, TrainConfig};
use crate::error::{Error, Result};

/// Dense ReLU network with linear logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    pub layers: Vec<Dense>,
    pub epochs_trained: usize,
}

impl AnnModel {
    pub fn new(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Model(format!("invalid layer sizes {sizes:?}")));
        }
        Ok(Self {
            layers: init_layers(sizes, seed),
            epochs_trained: 0,
        })
    }

    fn activations(&self, x: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
        if x.ncols() != self.layers[0].fan_in() {
            return Err(Error::Model(format!(
                "input has {} features, model expects {}",
                x.ncols(),
                self.layers[0].fan_in()
            )));
        }
        let mut acts = vec![x.clone()];
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.apply(acts[l].view());
            if l + 1 < self.layers.len() {
                z.mapv_inplace(|v| v.max(0.0));
            }
            acts.push(z);
        }
        Ok(acts)
    }

    pub fn loss_and_grad(&self, x: &Array2<f64>, labels: &[usize]) -> Result<(f64, Vec<Dense>)> {
        let acts = self.activations(x)?;
        let (loss, mut delta) = cross_entropy(acts.last().unwrap(), labels)?;
        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        for l in (0..self.layers.len()).rev() {
            grads[l].w = acts[l].t().dot(&delta);
            grads[l].b = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut d = delta.dot(&self.layers[l].w.t());
                ndarray::Zip::from(&mut d).and(&acts[l]).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = d;
            }
        }
        Ok((loss, grads))
    }
}

/// Logits, batch × classes.
pub fn ann_forward(x: &Array2<f64>, model: &AnnModel) -> Result<Array2<f64>> {
    Ok(model.activations(x)?.pop().unwrap())
}

pub fn train_ann(x: &Array2<f64>, y: &[usize], cfg: &TrainConfig) -> Result<AnnModel> {
    cfg.validate()?;
    check_training_data(x, y)?;
    let mut sizes = vec![x.ncols()];
    sizes.extend(&cfg.hidden);
    sizes.push(2);
    let mut model = AnnModel::new(&sizes, cfg.seed)?;
    let mut opt = Adam::new(cfg.lr, &model.layers);
    for epoch in 0..cfg.epochs {
        for batch in epoch_batches(x.nrows(), cfg.batch_size, cfg.seed, epoch) {
            let xb = x.select(Axis(0), &batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let (loss, grads) = model.loss_and_grad(&xb, &yb)?;
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

impl Classifier for AnnModel {
    fn scores(&self, x: &Array2<f64>, _seed: u64) -> Result<Vec<f64>> {
        let logits = ann_forward(x, self)?;
        Ok(logits.rows().into_iter().map(|r| r[1] - r[0]).collect())
    }

    fn is_trained(&self) -> bool {
        self.epochs_trained > 0
    }

    fn n_features(&self) -> usize {
        self.layers[0].fan_in()
    }
}
