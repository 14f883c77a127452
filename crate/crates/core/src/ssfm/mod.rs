//! Split-step Fourier simulation of a single-span WDM link.
//!
//! The chain is [`generate_wdm`] → [`propagate`] → [`amplify`] →
//! [`receive`] → [`estimate_snr`] / [`mi_from_samples`]; [`power_sweep`]
//! and [`estimate_c`] drive it end to end.

pub mod amp;
pub mod config;
pub mod fiber;
pub mod field;
pub mod rx;
pub mod sweep;
pub mod tx;

pub use amp::{amplify, ase_psd_per_pol};
pub use config::LinkConfig;
pub use fiber::{compensate_dispersion, propagate};
pub use field::{derive_seed, rrc_response, DualPolField};
pub use rx::{equalize, estimate_snr, fit_gain, mi_from_samples, receive};
pub use sweep::{
    estimate_c, measure_nli, power_sweep, simulate_channel, simulate_point, CEstimate, NliMeasurement,
    SweepFamily, SweepResult,
};
pub use tx::{generate_wdm, Modulation, WdmSignal};
