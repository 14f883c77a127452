//! Probabilistic constellation shaping for square QAM on the nonlinear
//! fiber channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`constellation`]: square QAM geometry and amplitude rings.
//! - [`shaping`]: uniform, Maxwell-Boltzmann and kurtosis-tailored PMFs,
//!   plus moments and entropy.
//! - [`awgn_mi`]: Gauss-Hermite and Monte-Carlo mutual information over
//!   the complex AWGN channel.
//! - [`nl_model`]: the kurtosis-dependent SNR model and the shaping
//!   optimizers built on top of it.
//! - [`ssfm`]: a split-step Fourier simulator of a single-span
//!   dual-polarization WDM link.

pub mod awgn_mi;
pub mod constellation;
mod error;
pub mod nl_model;
pub mod optim;
pub mod shaping;
pub mod ssfm;
pub mod units;

pub use awgn_mi::{gauss_hermite, mi_awgn_2d, mi_monte_carlo, QuadratureRule};
pub use constellation::{square_qam, Constellation, Ring};
pub use error::{Error, Result};
pub use nl_model::{
    effective_snr_db, snr_ratio, CurveRow, MiCurvePoint, NlChannelModel, ShapingOptimizer,
};
pub use shaping::{
    entropy, excess_kurtosis, mb_pmf, tailored_pmf, Family, Pmf, ShapingParams,
};
pub use num_complex::Complex64;
