//! Conductance-based leaky integrate-and-fire network simulator.
//!
//! Neurons follow
//! `C_m dV/dt = -(C_m/τ_m)(V - E_L) - g_ex (V - E_ex) - g_in (V - E_in) + I_e`
//! with exponentially decaying synaptic conductances that jump by the
//! synaptic weight when a presynaptic spike arrives after a fixed delay.
//! External excitatory Poisson drive is delivered per neuron.

mod network;
mod params;
mod poisson;
mod simulate;

pub(crate) use network::random_block;
pub use network::{build_random_network, heterogenize, Network, Synapse, SynapseKind};
pub use params::{Heterogeneity, NetworkConfig, NeuronParams};
pub use poisson::{poisson_drive, BernoulliTrain};
pub use simulate::{simulate, RecorderConfig, Recordings};
