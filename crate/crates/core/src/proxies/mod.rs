//! EEG proxies from simulated recordings, condition sweeps, FC-informed
//! multi-subnetwork runs and band-wise spectrum stitching.

pub(crate) mod condition;
mod fc;
mod io;

pub use condition::{
    model1_signal, model2_signal, run_condition, run_condition_detailed, single_run, Condition, ConditionName,
    ConditionRun, ProxyModel,
};
pub use fc::{
    build_fc_network, fc_condition_run, stitch, synthetic_prior, synthetic_priors, FcConfig, FcPrior, PriorSource,
    MONTAGE_XY,
};
pub use io::{read_spectrum_csv, write_spectrum_csv};
