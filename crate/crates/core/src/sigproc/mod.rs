//! Deterministic signal-processing primitives: zero-phase Butterworth
//! band-pass, FFT analytic signal, Welch PSD and relative-power
//! normalization.

mod butterworth;
mod extend;
mod hilbert;
mod types;
mod welch;

pub use butterworth::{bandpass, Sos, SosFilter};
pub use hilbert::{analytic_signal, analytic_signal_1d, AnalyticSignal};
pub use types::{Band, BandName, Spectrum, TimeSeries};
pub use welch::{to_relative, welch, welch_1d, WelchParams};
