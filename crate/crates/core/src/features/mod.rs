//! Per-epoch EEG features: relative band power, amplitude variability,
//! PLV connectivity and the aperiodic (1/f) exponent, assembled into
//! fixed-length vectors.

mod aperiodic;
mod band_power;
pub(crate) mod io;
mod layout;
mod pipeline;
mod plv;

pub use aperiodic::{fit_aperiodic, AperiodicFit};
pub use band_power::{band_relative_power, channel_std};
pub use io::{read_conn_matrix, read_dataset, write_conn_matrix, write_dataset};
pub use layout::{
    assemble_features, epoch_connectivity, epoch_spectrum, Dataset, FeatureLayout, FeatureVector, PlvSource,
    MONTAGE_10_20,
};
pub use pipeline::{epochs, subject_features};
pub use plv::{plv, plv_with_order, ConnMatrix};
