//! Lumped EDFA with amplified spontaneous emission.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::field::DualPolField;
use crate::error::{ensure_finite, Error, Result};
use crate::units::{db_to_lin, PLANCK};

/// One-sided ASE power spectral density per polarization, W/Hz:
/// `(hν/2)·(G·NF − 1)`, clamped at zero.
pub fn ase_psd_per_pol(gain_db: f64, nf_db: f64, carrier_hz: f64) -> f64 {
    let g_nf = db_to_lin(gain_db) * db_to_lin(nf_db);
    (PLANCK * carrier_hz / 2.0 * (g_nf - 1.0)).max(0.0)
}

/// Amplifies by `gain_db` and adds white circular Gaussian ASE to each
/// polarization. The noise depends only on `seed`.
pub fn amplify(field: &DualPolField, gain_db: f64, nf_db: f64, carrier_hz: f64, seed: u64) -> Result<DualPolField> {
    ensure_finite("gain_db", gain_db)?;
    ensure_finite("nf_db", nf_db)?;
    if gain_db <= 0.0 {
        return Err(Error::InvalidArgument(format!("amplifier gain must be positive, got {gain_db} dB")));
    }
    let amp = db_to_lin(gain_db).sqrt();
    let variance = ase_psd_per_pol(gain_db, nf_db, carrier_hz) * field.sample_rate_hz;
    let mut out = field.clone();
    for p in &mut out.pols {
        p.iter_mut().for_each(|v| *v *= amp);
    }
    if variance > 0.0 {
        let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite positive deviation");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in &mut out.pols {
            for v in p.iter_mut() {
                *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssfm::field::{bin_frequencies, Spectral};

    const NU: f64 = 193.4e12;

    #[test]
    fn noiseless_edge_adds_nothing() {
        let f = DualPolField::zeros(1024, 100e9);
        let out = amplify(&f, 33.0, -33.0, NU, 1).unwrap();
        assert_eq!(out.energy(), 0.0);
        assert_eq!(ase_psd_per_pol(33.0, -40.0, NU), 0.0);
    }

    #[test]
    fn noise_in_band_matches_psd() {
        let n = 1 << 20;
        let fs = 264e9;
        let f = DualPolField::zeros(n, fs);
        let out = amplify(&f, 33.0, 5.0, NU, 7).unwrap();
        let s = ase_psd_per_pol(33.0, 5.0, NU);
        // periodogram power inside a 33 GHz band
        let band = 33e9;
        let fft = Spectral::new(n);
        let freqs = bin_frequencies(n, fs);
        for p in &out.pols {
            let mut d = p.clone();
            fft.forward(&mut d);
            let power: f64 = d
                .iter()
                .zip(&freqs)
                .filter(|(_, f)| f.abs() < band / 2.0)
                .map(|(v, _)| v.norm_sqr())
                .sum::<f64>()
                / (n as f64 * n as f64);
            assert!((power / (s * band) - 1.0).abs() < 0.01, "{}", power / (s * band));
        }
    }

    #[test]
    fn signal_gain_and_seeds() {
        let mut f = DualPolField::zeros(4096, 100e9);
        f.pols[0].iter_mut().for_each(|v| *v = Complex64::new(1e-3, 0.0));
        let a = amplify(&f, 20.0, 5.0, NU, 1).unwrap();
        let b = amplify(&f, 20.0, 5.0, NU, 2).unwrap();
        let a2 = amplify(&f, 20.0, 5.0, NU, 1).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a, b);
        let clean = amplify(&f, 20.0, -20.0, NU, 1).unwrap();
        assert!((clean.pols[0][0].re - 1e-2).abs() < 1e-15);
        // the two noise realizations are uncorrelated
        let na: Vec<Complex64> = a.pols[1].clone();
        let nb: Vec<Complex64> = b.pols[1].clone();
        let cross: Complex64 = na.iter().zip(&nb).map(|(x, y)| x * y.conj()).sum();
        let norm = (na.iter().map(|v| v.norm_sqr()).sum::<f64>() * nb.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
        assert!(cross.norm() / norm < 5.0 / (4096f64).sqrt());
        assert!(amplify(&f, 0.0, 5.0, NU, 1).is_err());
    }
}
