use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Sampled dual-polarization optical field, in √W.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPolField {
    pub pols: [Vec<Complex64>; 2],
    pub sample_rate_hz: f64,
}

impl DualPolField {
    pub fn zeros(samples: usize, sample_rate_hz: f64) -> Self {
        Self {
            pols: [vec![Complex64::new(0.0, 0.0); samples], vec![Complex64::new(0.0, 0.0); samples]],
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.pols[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.pols[0].is_empty()
    }

    /// Mean power summed over both polarizations, W.
    pub fn power(&self) -> f64 {
        self.pols.iter().map(|p| p.iter().map(|v| v.norm_sqr()).sum::<f64>()).sum::<f64>() / self.len() as f64
    }

    /// `Σ|E|²` over all samples and polarizations.
    pub fn energy(&self) -> f64 {
        self.pols.iter().map(|p| p.iter().map(|v| v.norm_sqr()).sum::<f64>()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.pols.iter().all(|p| p.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

/// Forward/inverse FFT pair of one length; the inverse is scaled by `1/n`.
#[derive(Clone)]
pub(crate) struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n), n }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let s = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Frequency of each FFT bin in Hz (FFT ordering).
pub(crate) fn bin_frequencies(n: usize, sample_rate_hz: f64) -> Vec<f64> {
    let df = sample_rate_hz / n as f64;
    (0..n)
        .map(|k| if k < n.div_ceil(2) { k as f64 * df } else { (k as f64 - n as f64) * df })
        .collect()
}

pub(crate) fn angular_frequencies(n: usize, sample_rate_hz: f64) -> Vec<f64> {
    bin_frequencies(n, sample_rate_hz).into_iter().map(|f| 2.0 * PI * f).collect()
}

/// Root-raised-cosine amplitude response with unit passband gain.
pub fn rrc_response(f_hz: f64, baud_hz: f64, rolloff: f64) -> f64 {
    let f = f_hz.abs();
    let lo = (1.0 - rolloff) * baud_hz / 2.0;
    let hi = (1.0 + rolloff) * baud_hz / 2.0;
    if f <= lo {
        1.0
    } else if f >= hi {
        0.0
    } else {
        (0.5 * (1.0 + (PI / (rolloff * baud_hz) * (f - lo)).cos())).sqrt()
    }
}

/// SplitMix64 step, used to derive independent sub-seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_is_nyquist() {
        let baud = 33e9;
        for beta in [0.01, 0.1, 0.5] {
            for f in [0.0, 10e9, 16.4e9, 16.5e9, 16.6e9] {
                let a = rrc_response(f, baud, beta).powi(2);
                let b = rrc_response(f - baud, baud, beta).powi(2);
                assert!((a + b - 1.0).abs() < 1e-12, "beta {beta} f {f}");
            }
            assert_eq!(rrc_response(baud * (1.0 + beta) / 2.0 + 1.0, baud, beta), 0.0);
        }
    }

    #[test]
    fn fft_round_trip() {
        let s = Spectral::new(64);
        let orig: Vec<Complex64> = (0..64).map(|k| Complex64::new(k as f64, -(k as f64).sqrt())).collect();
        let mut x = orig.clone();
        s.forward(&mut x);
        s.inverse(&mut x);
        for (a, b) in x.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
        let f = bin_frequencies(4, 4.0);
        assert_eq!(f, vec![0.0, 1.0, -2.0, -1.0]);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 3), derive_seed(5, 3));
    }
}
