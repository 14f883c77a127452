//! WDM transmitter: symbol generation, RRC shaping and channel multiplexing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::LinkConfig;
use super::field::{bin_frequencies, derive_seed, rrc_response, DualPolField, Spectral};
use crate::constellation::{normalized, Constellation};
use crate::error::{ensure_finite, Error, Result};
use crate::shaping::{excess_kurtosis, Pmf, GAUSSIAN_EXCESS_KURTOSIS};
use crate::units::dbm_to_w;

/// Symbol source for every channel and polarization.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulation {
    /// Circularly-symmetric complex Gaussian symbols of unit power.
    Gaussian,
    /// Symbols drawn i.i.d. from `pmf` on a unit-power constellation.
    Discrete { constellation: Constellation, pmf: Pmf },
}

impl Modulation {
    /// Normalizes `constellation` to unit power under `pmf`.
    pub fn discrete(constellation: &Constellation, pmf: Pmf) -> Result<Self> {
        let constellation = normalized(constellation, &pmf)?;
        Ok(Modulation::Discrete { constellation, pmf })
    }

    pub fn kurtosis(&self) -> Result<f64> {
        match self {
            Modulation::Gaussian => Ok(GAUSSIAN_EXCESS_KURTOSIS),
            Modulation::Discrete { constellation, pmf } => excess_kurtosis(constellation, pmf),
        }
    }

    pub fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        match self {
            Modulation::Gaussian => {
                let s = 0.5f64.sqrt();
                (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect()
            }
            Modulation::Discrete { constellation, pmf } => {
                let mut cdf = Vec::with_capacity(pmf.len());
                let mut run = 0.0;
                for p in pmf.probs() {
                    run += p;
                    cdf.push(run);
                }
                let points = constellation.points();
                (0..n)
                    .map(|_| {
                        let u = rng.random::<f64>() * run;
                        let idx = cdf.partition_point(|&c| c <= u).min(points.len() - 1);
                        points[idx]
                    })
                    .collect()
            }
        }
    }
}

/// Transmitted field together with the symbols that built it.
#[derive(Debug, Clone)]
pub struct WdmSignal {
    pub field: DualPolField,
    /// `symbols[channel][pol]`.
    pub symbols: Vec<[Vec<Complex64>; 2]>,
    pub launch_dbm: f64,
}

/// Generates the dual-polarization WDM field with `launch_dbm` per channel.
///
/// Each channel is RRC-shaped in the frequency domain (so the pulse is
/// exactly Nyquist over the periodic window), shifted by a whole number of
/// FFT bins to its grid slot, and scaled so its realized power over both
/// polarizations equals the launch power.
pub fn generate_wdm(config: &LinkConfig, modulation: &Modulation, launch_dbm: f64, seed: u64) -> Result<WdmSignal> {
    config.validate()?;
    ensure_finite("launch_dbm", launch_dbm)?;
    let nsym = config.symbols_per_channel;
    let n = config.samples();
    let fs = config.sample_rate_hz();
    let baud = config.baud_hz();
    let power = dbm_to_w(launch_dbm);

    let sym_fft = Spectral::new(nsym);
    let full = Spectral::new(n);
    let response: Vec<f64> = bin_frequencies(n, fs)
        .into_iter()
        .map(|f| rrc_response(f, baud, config.rrc_rolloff))
        .collect();

    let mut spectra = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    let mut symbols = Vec::with_capacity(config.channels);
    for ch in 0..config.channels {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ch as u64));
        let sx = modulation.draw(nsym, &mut rng);
        let sy = modulation.draw(nsym, &mut rng);
        let shift = config.channel_offset_bins(ch).rem_euclid(n as i64) as usize;

        let mut shaped: Vec<Vec<Complex64>> = Vec::with_capacity(2);
        let mut energy = 0.0;
        for s in [&sx, &sy] {
            let mut d = s.clone();
            sym_fft.forward(&mut d);
            // the upsampled impulse train has the symbol spectrum tiled sps times
            let spec: Vec<Complex64> = (0..n).map(|k| d[k % nsym] * response[k]).collect();
            energy += spec.iter().map(|v| v.norm_sqr()).sum::<f64>();
            shaped.push(spec);
        }
        // Parseval: mean sample power = Σ|X|² / n²
        let measured = energy / (n as f64 * n as f64);
        if measured <= 0.0 {
            return Err(Error::InvalidArgument("transmitted channel has zero power".into()));
        }
        let scale = (power / measured).sqrt();
        for (pol, spec) in shaped.iter().enumerate() {
            for (k, v) in spec.iter().enumerate() {
                spectra[pol][(k + shift) % n] += v * scale;
            }
        }
        symbols.push([sx, sy]);
    }

    for s in &mut spectra {
        full.inverse(s);
    }
    let [x, y] = spectra;
    Ok(WdmSignal { field: DualPolField { pols: [x, y], sample_rate_hz: fs }, symbols, launch_dbm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::square_qam;
    use crate::shaping::mb_pmf;
    use crate::units::w_to_dbm;

    fn small() -> LinkConfig {
        LinkConfig { channels: 1, symbols_per_channel: 1 << 12, samples_per_symbol: 4, ..LinkConfig::desk() }
    }

    #[test]
    fn channel_power_matches_request() {
        let cfg = small();
        let m = Modulation::discrete(&square_qam(64).unwrap(), Pmf::uniform(64)).unwrap();
        for dbm in [-3.0, 0.0, 4.5] {
            let s = generate_wdm(&cfg, &m, dbm, 9).unwrap();
            assert!((w_to_dbm(s.field.power()) - dbm).abs() < 0.01);
        }
        let cfg3 = LinkConfig { channels: 3, symbols_per_channel: 1 << 12, ..LinkConfig::desk() };
        let s = generate_wdm(&cfg3, &Modulation::Gaussian, 2.0, 9).unwrap();
        let per_channel = w_to_dbm(s.field.power() / 3.0);
        assert!((per_channel - 2.0).abs() < 0.05, "{per_channel}");
    }

    #[test]
    fn occupied_bandwidth() {
        let cfg = small();
        let s = generate_wdm(&cfg, &Modulation::Gaussian, 0.0, 2).unwrap();
        let n = cfg.samples();
        let full = Spectral::new(n);
        let mut psd = vec![0.0; n];
        for p in &s.field.pols {
            let mut d = p.clone();
            full.forward(&mut d);
            for (acc, v) in psd.iter_mut().zip(&d) {
                *acc += v.norm_sqr();
            }
        }
        let freqs = bin_frequencies(n, cfg.sample_rate_hz());
        let total: f64 = psd.iter().sum();
        let mut by_freq: Vec<(f64, f64)> = freqs.iter().map(|f| f.abs()).zip(psd.iter().copied()).collect();
        by_freq.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut b99 = 0.0;
        for (f, p) in &by_freq {
            acc += p;
            if acc >= 0.99 * total {
                b99 = 2.0 * f;
                break;
            }
        }
        let nominal = cfg.baud_hz() * (1.0 + cfg.rrc_rolloff);
        assert!(b99 <= nominal);
        assert!((b99 / nominal - 1.0).abs() < 0.03, "{b99} vs {nominal}");
        let outside: f64 = by_freq.iter().filter(|(f, _)| *f > nominal / 2.0).map(|(_, p)| p).sum();
        assert!(outside < 1e-20 * total);
    }

    #[test]
    fn drawn_symbols_have_pmf_kurtosis() {
        let c = square_qam(64).unwrap();
        let m = Modulation::discrete(&c, mb_pmf(&c, 0.02).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let s = m.draw(n, &mut rng);
        let r2: Vec<f64> = s.iter().map(|v| v.norm_sqr()).collect();
        let m2 = r2.iter().sum::<f64>() / n as f64;
        let m4 = r2.iter().map(|r| r * r).sum::<f64>() / n as f64;
        let k_hat = m4 / (m2 * m2) - 2.0;
        let k = m.kurtosis().unwrap();
        // delta-method standard error of the moment-ratio estimator
        let m6 = r2.iter().map(|r| r.powi(3)).sum::<f64>() / n as f64;
        let m8 = r2.iter().map(|r| r.powi(4)).sum::<f64>() / n as f64;
        let g4 = 1.0 / (m2 * m2);
        let g2 = -2.0 * m4 / (m2 * m2 * m2);
        let var = g4 * g4 * (m8 - m4 * m4) + g2 * g2 * (m4 - m2 * m2) + 2.0 * g4 * g2 * (m6 - m4 * m2);
        let se = (var / n as f64).sqrt();
        assert!((k_hat - k).abs() < 3.0 * se, "{k_hat} vs {k} (se {se})");
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = small();
        let a = generate_wdm(&cfg, &Modulation::Gaussian, 0.0, 5).unwrap();
        let b = generate_wdm(&cfg, &Modulation::Gaussian, 0.0, 5).unwrap();
        let c = generate_wdm(&cfg, &Modulation::Gaussian, 0.0, 6).unwrap();
        assert_eq!(a.field, b.field);
        assert_ne!(a.field, c.field);
    }

    #[test]
    fn rejects_invalid_bandwidth() {
        let cfg = LinkConfig { channels: 5, samples_per_symbol: 4, ..LinkConfig::desk() };
        assert!(generate_wdm(&cfg, &Modulation::Gaussian, 0.0, 1).is_err());
    }
}
