//! End-to-end link runs: launch-power sweeps and the NLI kurtosis fit.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::amp::{ase_psd_per_pol, amplify};
use super::config::LinkConfig;
use super::fiber::propagate;
use super::field::derive_seed;
use super::rx::{estimate_snr, mi_from_samples, receive};
use super::tx::{generate_wdm, Modulation};
use crate::error::{ensure_finite, Error, Result};
use crate::units::{db_to_lin, dbm_to_w};

/// A labelled modulation format taking part in a sweep or fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFamily {
    pub label: String,
    pub modulation: Modulation,
}

impl SweepFamily {
    pub fn new(label: impl Into<String>, modulation: Modulation) -> Self {
        Self { label: label.into(), modulation }
    }

    pub fn gaussian() -> Self {
        Self::new("gaussian", Modulation::Gaussian)
    }
}

/// One simulated (launch power, family) point on the receiver channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub launch_dbm_per_channel: f64,
    pub family: String,
    pub snr_db: f64,
    /// Bits per 4D (dual-polarization) symbol.
    pub mi_4d: f64,
    pub kurtosis: f64,
}

/// Received SNR and MI of a single channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMeasurement {
    pub snr_db: f64,
    pub mi_4d: f64,
}

/// Runs transmitter, span, amplifier and receiver once and measures
/// `channel`. `seed` fixes both the symbols and the ASE.
pub fn simulate_channel(
    config: &LinkConfig,
    modulation: &Modulation,
    launch_dbm: f64,
    seed: u64,
    channel: usize,
) -> Result<ChannelMeasurement> {
    let signal = generate_wdm(config, modulation, launch_dbm, derive_seed(seed, 0))?;
    let span = propagate(&signal.field, config)?;
    let gain_db = config.span_loss_db();
    let amplified = if gain_db > 0.0 {
        amplify(&span, gain_db, config.edfa_nf_db, config.carrier_hz(), derive_seed(seed, 1))?
    } else {
        span
    };
    let rx = receive(&amplified, config, channel)?;
    let tx = &signal.symbols[channel];
    let snr_db = estimate_snr(&rx, tx)?;
    let mi_4d = 2.0 * mi_from_samples(&rx, tx, modulation)?;
    Ok(ChannelMeasurement { snr_db, mi_4d })
}

/// [`simulate_channel`] on the center channel.
pub fn simulate_point(config: &LinkConfig, modulation: &Modulation, launch_dbm: f64, seed: u64) -> Result<ChannelMeasurement> {
    simulate_channel(config, modulation, launch_dbm, seed, config.center_channel())
}

/// Simulates every (power, family) pair on the center channel.
///
/// Results are ordered by power, then by family order. Each power index
/// gets its own seed derived from `config.seed`; families at the same
/// power share it.
pub fn power_sweep(config: &LinkConfig, families: &[SweepFamily], powers_dbm: &[f64]) -> Result<Vec<SweepResult>> {
    config.validate()?;
    if families.is_empty() || powers_dbm.is_empty() {
        return Err(Error::InvalidArgument("power sweep needs at least one family and one power".into()));
    }
    for &p in powers_dbm {
        ensure_finite("launch_dbm", p)?;
    }
    if powers_dbm.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("power grid must be strictly ascending".into()));
    }
    let kurtosis: Vec<f64> = families.iter().map(|f| f.modulation.kurtosis()).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..powers_dbm.len()).flat_map(|i| (0..families.len()).map(move |j| (i, j))).collect();
    jobs.par_iter()
        .map(|&(i, j)| {
            let seed = derive_seed(config.seed, i as u64);
            let m = simulate_point(config, &families[j].modulation, powers_dbm[i], seed)?;
            Ok(SweepResult {
                launch_dbm_per_channel: powers_dbm[i],
                family: families[j].label.clone(),
                snr_db: m.snr_db,
                mi_4d: m.mi_4d,
                kurtosis: kurtosis[j],
            })
        })
        .collect()
}

/// Noise budget of one run, all variances referred to the launch power in W.
#[derive(Debug, Clone, PartialEq)]
pub struct NliMeasurement {
    pub label: String,
    pub kurtosis: f64,
    pub launch_dbm: f64,
    pub snr_db: f64,
    pub total_variance: f64,
    /// Analytic ASE in the matched-filter bandwidth, both polarizations.
    pub ase_variance: f64,
    /// Residual of the same run with γ = 0 and a noiseless amplifier
    /// (inter-channel crosstalk and numerical floor).
    pub linear_variance: f64,
    pub nli_variance: f64,
}

/// Analytic ASE variance seen by the receiver, W over both polarizations.
pub fn ase_variance(config: &LinkConfig) -> f64 {
    2.0 * ase_psd_per_pol(config.span_loss_db(), config.edfa_nf_db, config.carrier_hz()) * config.baud_hz()
}

/// Separates the NLI variance of the center channel from ASE and the
/// linear floor.
pub fn measure_nli(config: &LinkConfig, family: &SweepFamily, launch_dbm: f64, seed: u64) -> Result<NliMeasurement> {
    let power = dbm_to_w(launch_dbm);
    let total = simulate_point(config, &family.modulation, launch_dbm, seed)?;
    let linear_cfg = LinkConfig { gamma_per_w_km: 0.0, ..config.noiseless() };
    let linear = simulate_point(&linear_cfg, &family.modulation, launch_dbm, seed)?;
    let total_variance = power / db_to_lin(total.snr_db);
    let linear_variance = power / db_to_lin(linear.snr_db);
    let ase = ase_variance(config);
    Ok(NliMeasurement {
        label: family.label.clone(),
        kurtosis: family.modulation.kurtosis()?,
        launch_dbm,
        snr_db: total.snr_db,
        total_variance,
        ase_variance: ase,
        linear_variance,
        nli_variance: total_variance - ase - linear_variance,
    })
}

/// Least-squares fit of `NLI/P³ = η₁ + η₂·K` over the probes.
#[derive(Debug, Clone, PartialEq)]
pub struct CEstimate {
    pub probes: Vec<NliMeasurement>,
    pub eta1: f64,
    pub eta2: f64,
    pub c: f64,
    pub r_squared: f64,
    /// 95% interval for `c` (delta method, Student-t quantile).
    pub c_interval: (f64, f64),
}

/// Pairwise kurtosis separation required between probes.
pub const MIN_KURTOSIS_SEPARATION: f64 = 0.1;

/// Estimates `c = η₂/η₁` from NLI measurements of at least three probe
/// formats at `probe_power_dbm`.
pub fn estimate_c(config: &LinkConfig, probes: &[SweepFamily], probe_power_dbm: f64) -> Result<CEstimate> {
    config.validate()?;
    ensure_finite("probe_power_dbm", probe_power_dbm)?;
    if config.gamma_per_w_km == 0.0 {
        return Err(Error::NoMeasurableNli("the nonlinear coefficient is zero".into()));
    }
    if probes.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 probe formats, got {}", probes.len())));
    }
    let k: Vec<f64> = probes.iter().map(|p| p.modulation.kurtosis()).collect::<Result<_>>()?;
    for i in 0..k.len() {
        for j in i + 1..k.len() {
            if (k[i] - k[j]).abs() < MIN_KURTOSIS_SEPARATION {
                return Err(Error::IllConditioned(format!(
                    "probes `{}` and `{}` have kurtosis {:.4} and {:.4}; separation must be at least {MIN_KURTOSIS_SEPARATION}",
                    probes[i].label, probes[j].label, k[i], k[j]
                )));
            }
        }
    }

    let seed = derive_seed(config.seed, u64::MAX);
    let measured: Vec<NliMeasurement> =
        probes.par_iter().map(|p| measure_nli(config, p, probe_power_dbm, seed)).collect::<Result<_>>()?;
    for m in &measured {
        if !(m.nli_variance > 0.0) {
            return Err(Error::NoMeasurableNli(format!(
                "probe `{}` at {} dBm has NLI variance {:.3e} W; raise the probe power into the NLI-dominated regime",
                m.label, probe_power_dbm, m.nli_variance
            )));
        }
    }

    let p3 = dbm_to_w(probe_power_dbm).powi(3);
    let eta: Vec<f64> = measured.iter().map(|m| m.nli_variance / p3).collect();
    let fit = linear_fit(&k, &eta);
    if !(fit.intercept > 0.0) {
        return Err(Error::IllConditioned(format!("fitted intercept {:.3e} is not positive", fit.intercept)));
    }
    let c = fit.slope / fit.intercept;
    // delta method on c = b/a
    let a = fit.intercept;
    let b = fit.slope;
    let var_c = fit.var_slope / (a * a) + b * b * fit.var_intercept / a.powi(4) - 2.0 * b * fit.cov / a.powi(3);
    let dof = (k.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom").inverse_cdf(0.975);
    let half = t * var_c.max(0.0).sqrt();
    Ok(CEstimate {
        probes: measured,
        eta1: a,
        eta2: b,
        c,
        r_squared: fit.r_squared,
        c_interval: (c - half, c + half),
    })
}

struct LinearFit {
    intercept: f64,
    slope: f64,
    var_intercept: f64,
    var_slope: f64,
    cov: f64,
    r_squared: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if n > 2.0 { ssr / (n - 2.0) } else { 0.0 };
    LinearFit {
        intercept,
        slope,
        var_intercept: s2 * (1.0 / n + mx * mx / sxx),
        var_slope: s2 / sxx,
        cov: -s2 * mx / sxx,
        r_squared: if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 },
    }
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    linear_fit(x, y).slope
}

/// Record with the largest MI for `family`, if any.
pub fn optimum<'a>(results: &'a [SweepResult], family: &str) -> Option<&'a SweepResult> {
    results.iter().filter(|r| r.family == family).max_by(|a, b| a.mi_4d.total_cmp(&b.mi_4d))
}
