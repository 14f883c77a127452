//! Coherent receiver DSP and symbol-level SNR / MI estimators.

use num_complex::Complex64;

use super::config::LinkConfig;
use super::fiber::compensate_dispersion;
use super::field::{bin_frequencies, rrc_response, DualPolField, Spectral};
use super::tx::Modulation;
use crate::awgn_mi::NORMALIZATION_TOLERANCE;
use crate::constellation::mean_power;
use crate::error::{Error, Result};
use crate::shaping::entropy;

/// Fewest symbols accepted by the estimators.
pub const MIN_SYMBOLS: usize = 10_000;

/// SNR reported when the residual vanishes.
pub const SNR_CAP_DB: f64 = 100.0;

/// Recovers the symbol-rate samples of `channel` from a received field:
/// dispersion compensation, downconversion, matched RRC filtering and
/// decimation. No gain or phase correction is applied.
pub fn receive(field: &DualPolField, config: &LinkConfig, channel: usize) -> Result<[Vec<Complex64>; 2]> {
    config.validate()?;
    if channel >= config.channels {
        return Err(Error::InvalidArgument(format!(
            "channel index {channel} out of range for {} channels",
            config.channels
        )));
    }
    let n = config.samples();
    if field.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: field.len() });
    }
    let nsym = config.symbols_per_channel;
    let mut f = field.clone();
    compensate_dispersion(&mut f, config);

    let full = Spectral::new(n);
    let sym = Spectral::new(nsym);
    let response: Vec<f64> = bin_frequencies(n, config.sample_rate_hz())
        .into_iter()
        .map(|fr| rrc_response(fr, config.baud_hz(), config.rrc_rolloff))
        .collect();
    let shift = config.channel_offset_bins(channel).rem_euclid(n as i64) as usize;

    let [x, y] = f.pols;
    let mut out: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    for (slot, mut p) in out.iter_mut().zip([x, y]) {
        full.forward(&mut p);
        // fold the filtered baseband spectrum onto nsym bins, i.e. sample at the symbol instants
        let mut folded = vec![Complex64::new(0.0, 0.0); nsym];
        for (k, h) in response.iter().enumerate() {
            if *h > 0.0 {
                folded[k % nsym] += p[(k + shift) % n] * h;
            }
        }
        sym.inverse(&mut folded);
        *slot = folded;
    }
    Ok(out)
}

fn check_pairs(rx: &[Vec<Complex64>], tx: &[Vec<Complex64>]) -> Result<usize> {
    if rx.len() != tx.len() {
        return Err(Error::LengthMismatch { expected: tx.len(), got: rx.len() });
    }
    let mut total = 0;
    for (r, t) in rx.iter().zip(tx) {
        if r.len() != t.len() {
            return Err(Error::LengthMismatch { expected: t.len(), got: r.len() });
        }
        total += r.len();
    }
    if total < MIN_SYMBOLS {
        return Err(Error::TooFewSymbols { needed: MIN_SYMBOLS, got: total });
    }
    Ok(total)
}

/// Least-squares complex gain `Σ y·x* / Σ |x|²` of `rx` against `tx`.
pub fn fit_gain(rx: &[Complex64], tx: &[Complex64]) -> Complex64 {
    let num: Complex64 = rx.iter().zip(tx).map(|(y, x)| y * x.conj()).sum();
    let den: f64 = tx.iter().map(|x| x.norm_sqr()).sum();
    num / den
}

/// Divides each stream by its fitted complex gain, removing the constant
/// phase and scale per polarization.
pub fn equalize(rx: &[Vec<Complex64>], tx: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    check_pairs(rx, tx)?;
    Ok(rx
        .iter()
        .zip(tx)
        .map(|(r, t)| {
            let h = fit_gain(r, t);
            if h.norm_sqr() == 0.0 {
                return r.clone();
            }
            r.iter().map(|y| y / h).collect()
        })
        .collect())
}

fn residual_energy(z: &[Vec<Complex64>], tx: &[Vec<Complex64>]) -> (f64, f64) {
    let mut sig = 0.0;
    let mut err = 0.0;
    for (zs, ts) in z.iter().zip(tx) {
        for (a, b) in zs.iter().zip(ts) {
            sig += b.norm_sqr();
            err += (a - b).norm_sqr();
        }
    }
    (sig, err)
}

/// SNR in dB after per-stream gain fitting, pooled over all streams
/// (typically the two polarizations). Capped at [`SNR_CAP_DB`].
pub fn estimate_snr(rx: &[Vec<Complex64>], tx: &[Vec<Complex64>]) -> Result<f64> {
    let z = equalize(rx, tx)?;
    let (sig, err) = residual_energy(&z, tx);
    if sig == 0.0 {
        return Err(Error::ZeroPower);
    }
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (sig / err).log10()).min(SNR_CAP_DB))
}

/// Mismatched-decoding MI estimate in bits per complex symbol, using a
/// circular Gaussian auxiliary channel whose variance is fitted from the
/// residuals. Gaussian modulation reports `log₂(1 + SNR)` instead.
pub fn mi_from_samples(rx: &[Vec<Complex64>], tx: &[Vec<Complex64>], modulation: &Modulation) -> Result<f64> {
    let total = check_pairs(rx, tx)?;
    let (constellation, pmf) = match modulation {
        Modulation::Gaussian => {
            let snr = 10f64.powf(estimate_snr(rx, tx)? / 10.0);
            return Ok((1.0 + snr).log2());
        }
        Modulation::Discrete { constellation, pmf } => (constellation, pmf),
    };
    let power = mean_power(constellation, pmf)?;
    if (power - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(power));
    }
    let z = equalize(rx, tx)?;
    let (_, err) = residual_energy(&z, tx);
    let sigma2 = (err / total as f64).max(1e-12);

    let points = constellation.points();
    let log_p: Vec<f64> = pmf.probs().iter().map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect();
    let mut acc = 0.0;
    for (zs, ts) in z.iter().zip(tx) {
        for (y, x) in zs.iter().zip(ts) {
            let own = -(y - x).norm_sqr() / sigma2;
            let mut m = f64::NEG_INFINITY;
            let exps: Vec<f64> = points
                .iter()
                .zip(&log_p)
                .map(|(s, lp)| {
                    let e = lp - (y - s).norm_sqr() / sigma2;
                    m = m.max(e);
                    e
                })
                .collect();
            let lse = m + exps.iter().map(|e| (e - m).exp()).sum::<f64>().ln();
            acc += own - lse;
        }
    }
    let mi = acc / total as f64 / std::f64::consts::LN_2;
    Ok(mi.clamp(0.0, entropy(pmf)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::awgn_mi::{gauss_hermite, mi_awgn_2d};
    use crate::constellation::square_qam;
    use crate::shaping::{mb_pmf, Pmf};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noisy(x: &[Complex64], sigma2: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, (sigma2 / 2.0).sqrt()).unwrap();
        x.iter().map(|v| v + Complex64::new(d.sample(&mut rng), d.sample(&mut rng))).collect()
    }

    fn symbols(m: &Modulation, n: usize, seed: u64) -> Vec<Complex64> {
        m.draw(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn snr_of_identical_and_scaled_streams_hits_cap() {
        let x = symbols(&Modulation::Gaussian, 20_000, 1);
        assert!(estimate_snr(&[x.clone()], &[x.clone()]).unwrap() >= 80.0);
        let scaled: Vec<Complex64> = x.iter().map(|v| v * Complex64::from_polar(0.3, 1.1)).collect();
        assert!(estimate_snr(&[scaled], &[x]).unwrap() >= 80.0);
    }

    #[test]
    fn snr_with_known_noise() {
        let x = symbols(&Modulation::Gaussian, 100_000, 2);
        for snr_db in [5.0, 12.0, 20.0] {
            let sigma2 = 10f64.powf(-snr_db / 10.0);
            let y = noisy(&x, sigma2, 3);
            let est = estimate_snr(&[y], &[x.clone()]).unwrap();
            assert!((est - snr_db).abs() < 0.1, "{est} vs {snr_db}");
        }
    }

    #[test]
    fn snr_pools_polarizations_with_separate_gains() {
        let x = symbols(&Modulation::Gaussian, 50_000, 4);
        let x2 = symbols(&Modulation::Gaussian, 50_000, 5);
        let y = noisy(&x, 0.01, 6).iter().map(|v| v * Complex64::new(0.0, 2.0)).collect();
        let y2 = noisy(&x2, 0.01, 7);
        let est = estimate_snr(&[y, y2], &[x, x2]).unwrap();
        assert!((est - 20.0).abs() < 0.1);
    }

    #[test]
    fn estimator_preconditions() {
        let x = symbols(&Modulation::Gaussian, 20_000, 1);
        assert!(matches!(estimate_snr(&[x[..100].to_vec()], &[x.clone()]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            estimate_snr(&[x[..100].to_vec()], &[x[..100].to_vec()]),
            Err(Error::TooFewSymbols { .. })
        ));
        assert!(matches!(
            mi_from_samples(&[x[..100].to_vec()], &[x[..100].to_vec()], &Modulation::Gaussian),
            Err(Error::TooFewSymbols { .. })
        ));
    }

    #[test]
    fn mi_matches_quadrature_on_awgn() {
        let c = square_qam(256).unwrap();
        let m = Modulation::discrete(&c, Pmf::uniform(256)).unwrap();
        let x = symbols(&m, 100_000, 8);
        let y = noisy(&x, 10f64.powf(-1.8), 9);
        let est = mi_from_samples(&[y], &[x], &m).unwrap();
        let Modulation::Discrete { constellation, pmf } = &m else { unreachable!() };
        let gh = mi_awgn_2d(constellation, pmf, 18.0, &gauss_hermite(16).unwrap()).unwrap();
        assert!((est - gh).abs() < 0.02, "{est} vs {gh}");
    }

    #[test]
    fn noiseless_mi_is_entropy() {
        let c = square_qam(64).unwrap();
        let pmf = mb_pmf(&c, 0.03).unwrap();
        let m = Modulation::discrete(&c, pmf.clone()).unwrap();
        let x = symbols(&m, 20_000, 10);
        let est = mi_from_samples(&[x.clone()], &[x], &m).unwrap();
        assert!((est - entropy(&pmf)).abs() < 1e-3);
    }

    #[test]
    fn independent_pairing_carries_no_information() {
        let c = square_qam(64).unwrap();
        let m = Modulation::discrete(&c, Pmf::uniform(64)).unwrap();
        let x = symbols(&m, 50_000, 11);
        let mut y = noisy(&x, 0.01, 12);
        y.shuffle(&mut ChaCha8Rng::seed_from_u64(13));
        let est = mi_from_samples(&[y], &[x], &m).unwrap();
        assert!(est < 0.02, "{est}");
    }

    #[test]
    fn gaussian_mi_is_capacity_of_measured_snr() {
        let x = symbols(&Modulation::Gaussian, 50_000, 14);
        let y = noisy(&x, 0.05, 15);
        let snr = estimate_snr(&[y.clone()], &[x.clone()]).unwrap();
        let mi = mi_from_samples(&[y], &[x], &Modulation::Gaussian).unwrap();
        assert!((mi - (1.0 + 10f64.powf(snr / 10.0)).log2()).abs() < 1e-12);
    }
}
