//! Probability mass functions over constellation points.
//!
//! Three families are generated here: uniform, Maxwell-Boltzmann
//! (`p ∝ exp(−λ|x|²)`) and the kurtosis-tailored two-parameter family
//! (`p ∝ exp(−ν₁|x|² − ν₂|x|⁴)`). Both exponential families are evaluated on
//! the integer grid of the constellation, so their parameters do not depend
//! on how the constellation is later scaled.

use std::fmt;

use crate::constellation::{mean_power, Constellation};
use crate::error::{ensure_finite, Error, Result};

/// Probabilities below this are flushed to zero after normalization.
pub const FLUSH_THRESHOLD: f64 = 1e-300;

/// Excess kurtosis of a circularly-symmetric complex Gaussian.
pub const GAUSSIAN_EXCESS_KURTOSIS: f64 = 0.0;

/// Probability mass function, one entry per constellation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    /// Validates non-negativity and unit sum (tolerance 1e−12).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a non-negative finite number")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPmf(format!("entries sum to {sum}")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(order: usize) -> Self {
        Self(vec![1.0 / order as f64; order])
    }

    pub fn point_mass(order: usize, index: usize) -> Result<Self> {
        if index >= order {
            return Err(Error::InvalidArgument(format!("index {index} out of range for {order} points")));
        }
        let mut p = vec![0.0; order];
        p[index] = 1.0;
        Ok(Self(p))
    }

    /// Normalized `exp(log_weights)`, computed with max-subtraction and with
    /// tiny entries flushed to zero.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::InvalidPmf("empty".into()));
        }
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidPmf("log-weights are not finite".into()));
        }
        let mut probs: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
            if *p < FLUSH_THRESHOLD {
                *p = 0.0;
            }
        }
        Ok(Self(probs))
    }

    #[cfg(test)]
    pub(crate) fn from_raw_unchecked(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shaping family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Uniform,
    MaxwellBoltzmann,
    KurtosisTailored,
    PerRing,
}

impl Family {
    /// Short tag used in CSV output and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::MaxwellBoltzmann => "mb",
            Family::KurtosisTailored => "opt",
            Family::PerRing => "ring",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uni" => Ok(Family::Uniform),
            "mb" | "maxwell-boltzmann" => Ok(Family::MaxwellBoltzmann),
            "opt" | "tailored" | "optimized" => Ok(Family::KurtosisTailored),
            "ring" | "per-ring" => Ok(Family::PerRing),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

/// A shaping family together with its parameters.
///
/// `lambda`, `nu1` and `nu2` are in integer-grid units.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapingParams {
    Uniform,
    MaxwellBoltzmann { lambda: f64 },
    KurtosisTailored { nu1: f64, nu2: f64 },
    /// Total probability of each ring, in ring order; spread evenly over
    /// the ring's members.
    PerRing { ring_probs: Vec<f64> },
}

impl ShapingParams {
    pub fn family(&self) -> Family {
        match self {
            ShapingParams::Uniform => Family::Uniform,
            ShapingParams::MaxwellBoltzmann { .. } => Family::MaxwellBoltzmann,
            ShapingParams::KurtosisTailored { .. } => Family::KurtosisTailored,
            ShapingParams::PerRing { .. } => Family::PerRing,
        }
    }

    /// The Maxwell-Boltzmann rate, where the family has one.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            ShapingParams::Uniform => Some(0.0),
            ShapingParams::MaxwellBoltzmann { lambda } => Some(*lambda),
            _ => None,
        }
    }

    /// `(ν₁, ν₂)` of the equivalent member of the tailored family.
    pub fn nu(&self) -> Option<(f64, f64)> {
        match self {
            ShapingParams::Uniform => Some((0.0, 0.0)),
            ShapingParams::MaxwellBoltzmann { lambda } => Some((*lambda, 0.0)),
            ShapingParams::KurtosisTailored { nu1, nu2 } => Some((*nu1, *nu2)),
            ShapingParams::PerRing { .. } => None,
        }
    }

    /// Builds the pmf of these parameters on `constellation`.
    pub fn pmf(&self, constellation: &Constellation) -> Result<Pmf> {
        match self {
            ShapingParams::Uniform => Ok(Pmf::uniform(constellation.order())),
            ShapingParams::MaxwellBoltzmann { lambda } => mb_pmf(constellation, *lambda),
            ShapingParams::KurtosisTailored { nu1, nu2 } => tailored_pmf(constellation, *nu1, *nu2),
            ShapingParams::PerRing { ring_probs } => ring_pmf(constellation, ring_probs),
        }
    }
}

/// Maxwell-Boltzmann pmf `pᵢ ∝ exp(−λ|xᵢ|²)` with `|xᵢ|²` on the integer grid.
pub fn mb_pmf(constellation: &Constellation, lambda: f64) -> Result<Pmf> {
    ensure_finite("lambda", lambda)?;
    let logw: Vec<f64> = constellation
        .grid_sq_magnitudes()
        .into_iter()
        .map(|r| -lambda * r)
        .collect();
    Pmf::from_log_weights(&logw)
}

/// Kurtosis-tailored pmf `pᵢ ∝ exp(−ν₁|xᵢ|² − ν₂|xᵢ|⁴)` on the integer grid.
pub fn tailored_pmf(constellation: &Constellation, nu1: f64, nu2: f64) -> Result<Pmf> {
    ensure_finite("nu1", nu1)?;
    ensure_finite("nu2", nu2)?;
    let logw: Vec<f64> = constellation
        .grid_sq_magnitudes()
        .into_iter()
        .map(|r| -nu1 * r - nu2 * r * r)
        .collect();
    Pmf::from_log_weights(&logw)
}

/// Ring-constant pmf from per-ring total probabilities.
pub fn ring_pmf(constellation: &Constellation, ring_probs: &[f64]) -> Result<Pmf> {
    let rings = constellation.rings();
    if ring_probs.len() != rings.len() {
        return Err(Error::LengthMismatch { expected: rings.len(), got: ring_probs.len() });
    }
    let mut probs = vec![0.0; constellation.order()];
    for (ring, &q) in rings.iter().zip(ring_probs) {
        let per_point = q / ring.members.len() as f64;
        for &k in &ring.members {
            probs[k] = per_point;
        }
    }
    Pmf::new(probs)
}

/// Ring-constant pmf from per-point ring logits (softmax over points).
pub fn ring_logit_pmf(constellation: &Constellation, logits: &[f64]) -> Result<Pmf> {
    let rings = constellation.rings();
    if logits.len() != rings.len() {
        return Err(Error::LengthMismatch { expected: rings.len(), got: logits.len() });
    }
    let ring_of = constellation.ring_of_points();
    let logw: Vec<f64> = ring_of.iter().map(|&r| logits[r]).collect();
    Pmf::from_log_weights(&logw)
}

/// Total probability of each ring.
pub fn ring_probabilities(constellation: &Constellation, pmf: &Pmf) -> Result<Vec<f64>> {
    constellation.check_pmf(pmf)?;
    Ok(constellation
        .rings()
        .iter()
        .map(|r| r.members.iter().map(|&k| pmf.probs()[k]).sum())
        .collect())
}

/// Excess kurtosis `E|X|⁴ / (E|X|²)² − 2` of the complex constellation.
pub fn excess_kurtosis(constellation: &Constellation, pmf: &Pmf) -> Result<f64> {
    let m2 = mean_power(constellation, pmf)?;
    if m2 <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let m4: f64 = constellation
        .points()
        .iter()
        .zip(pmf.probs())
        .map(|(x, p)| {
            let r = x.norm_sqr();
            p * r * r
        })
        .sum();
    Ok(m4 / (m2 * m2) - 2.0)
}

/// Entropy in bits, with `0 log 0 = 0`.
pub fn entropy(pmf: &Pmf) -> f64 {
    -pmf.probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}
