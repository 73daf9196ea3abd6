use std::collections::BTreeMap;

use super::layout::{assemble_features, epoch_connectivity, FeatureLayout, FeatureVector, PlvSource};
use super::plv::ConnMatrix;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::sigproc::{BandName, TimeSeries};

/// Non-overlapping windows of `len` samples; a trailing remainder is
/// dropped.
pub fn epochs(ts: &TimeSeries, len: usize) -> Result<Vec<TimeSeries>> {
    if len == 0 {
        return Err(Error::Parameter("epoch length must be > 0".into()));
    }
    (0..ts.len() / len).map(|k| ts.slice_time(k * len, len)).collect()
}

/// Feature vectors of every epoch of one preprocessed recording.
pub fn subject_features(
    ts: &TimeSeries,
    layout: &FeatureLayout,
    label: Group,
    subject_id: &str,
) -> Result<Vec<FeatureVector>> {
    let windows = epochs(ts, layout.epoch_len)?;
    if windows.is_empty() {
        return Err(Error::Data(format!(
            "subject {subject_id}: {} samples is shorter than one {}-sample epoch",
            ts.len(),
            layout.epoch_len
        )));
    }
    let shared: Option<BTreeMap<BandName, ConnMatrix>> = match layout.plv_source {
        PlvSource::Recording => Some(epoch_connectivity(ts, layout)?),
        PlvSource::Epoch => None,
    };
    windows
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let own;
            let fcs = match &shared {
                Some(f) => f,
                None => {
                    own = epoch_connectivity(w, layout)?;
                    &own
                }
            };
            assemble_features(w, fcs, layout, label, subject_id, k)
        })
        .collect()
}
