//! Window-level AD/HC classification with a rate-encoded spiking network
//! and a dense baseline, ROC evaluation under subject-disjoint
//! cross-validation, and feature attribution.

mod ann;
pub(crate) mod cv;
mod encode;
mod importance;
mod metrics;
mod optim;
mod snn;

use ndarray::Array2;

use crate::error::Result;

pub use ann::{ann_forward, train_ann, AnnModel};
pub use cv::{
    cross_validate, cross_validate_with_importance, shuffle_subject_labels, subject_folds, CvReport, FoldResult,
    ModelKind,
};
pub use encode::{rate_encode, MinMaxScaler, SpikeTensor};
pub use importance::{
    feature_importance, permutation_importance, sampled_shapley, AttributionReport, ImportanceMethod,
};
pub use metrics::{roc_auc, roc_curve};
pub use optim::Adam;
pub use snn::{snn_forward, train_snn, Dense, SnnModel, SpikeFn};

/// Hyperparameters shared by both classifiers; SNN-only fields are ignored
/// by the dense model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub t_steps: usize,
    pub beta: f64,
    pub threshold: f64,
    /// Surrogate sigmoid steepness.
    pub k: f64,
    /// Drop the reset term from the SNN backward pass.
    pub detach_reset: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64],
            epochs: 30,
            lr: 3e-4,
            batch_size: 128,
            t_steps: 25,
            beta: 0.9,
            threshold: 1.0,
            k: 25.0,
            detach_reset: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.epochs == 0 || self.batch_size == 0 || self.t_steps == 0 {
            return Err(Error::Config("epochs, batch_size and t_steps must be > 0".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta must be in (0, 1), got {}", self.beta)));
        }
        if !(self.lr > 0.0 && self.threshold > 0.0 && self.k > 0.0) {
            return Err(Error::Config("lr, threshold and k must be > 0".into()));
        }
        Ok(())
    }
}

/// Anything that maps normalized feature rows to AD-vs-HC scores.
pub trait Classifier: Sync {
    /// Higher means more AD-like. `seed` fixes any stochastic encoding.
    fn scores(&self, x: &Array2<f64>, seed: u64) -> Result<Vec<f64>>;
    fn is_trained(&self) -> bool;
    fn n_features(&self) -> usize;
}
