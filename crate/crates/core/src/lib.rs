//! Spiking-network simulations of excitation/inhibition imbalance and the
//! EEG analysis chain used to interpret them.
//!
//! - [`sigproc`]: band-pass filtering, analytic signal, Welch PSD
//! - [`features`]: band powers, PLV connectivity, aperiodic exponent, feature vectors
//! - [`nbs`]: network-based statistics with permutation FWE control
//! - [`netsim`]: conductance-based LIF network simulator
//! - [`proxies`]: EEG proxies, condition sweeps, FC-informed runs, spectrum stitching
//! - [`classify`]: rate-encoded SNN and dense baseline classifiers, ROC/AUC, attribution
//! - [`stats`]: Cohen's d and simulation-vs-EEG effect comparison
//! - [`cli`]: configuration, dataset I/O, synthetic data and command orchestration

pub mod classify;
pub mod cli;
pub mod error;
pub mod features;
pub mod group;
pub mod nbs;
pub mod netsim;
pub mod proxies;
pub mod seed;
pub mod sigproc;
pub mod stats;

pub use error::{Error, Result};
