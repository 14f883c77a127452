//! Square QAM constellations and their amplitude rings.
//!
//! Points live on the odd-integer grid `{±1, ±3, …, ±(√M−1)}²` multiplied by
//! a real scale factor. Keeping the integer grid around makes ring
//! membership exact and lets the shaping families be evaluated independently
//! of the power convention.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shaping::Pmf;

/// A set of points sharing one squared magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    /// Squared magnitude on the integer grid.
    pub grid_sq_magnitude: i64,
    /// Indices of the member points, ascending.
    pub members: Vec<usize>,
}

/// Square QAM constellation with row-major point ordering over (I, Q) levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    side: usize,
    scale: f64,
    grid: Vec<(i32, i32)>,
    points: Vec<Complex64>,
    rings: Vec<Ring>,
}

/// Builds the `order`-point square QAM constellation on the odd-integer grid.
///
/// Orders 4, 16, 64, 256, 1024 and 4096 are accepted. Point `k` has I level
/// index `k / √M` and Q level index `k % √M`, levels ascending from
/// `−(√M−1)`.
pub fn square_qam(order: usize) -> Result<Constellation> {
    let valid = (4..=4096).contains(&order) && order.is_power_of_two() && order.trailing_zeros() % 2 == 0;
    if !valid {
        return Err(Error::InvalidOrder(order));
    }
    let side = 1usize << (order.trailing_zeros() / 2);
    let level = |k: usize| 2 * k as i32 - (side as i32 - 1);
    let grid: Vec<(i32, i32)> = (0..order).map(|k| (level(k / side), level(k % side))).collect();

    let mut by_mag: Vec<(i64, usize)> = grid
        .iter()
        .enumerate()
        .map(|(k, &(i, q))| (i as i64 * i as i64 + q as i64 * q as i64, k))
        .collect();
    by_mag.sort_unstable();
    let mut rings: Vec<Ring> = Vec::new();
    for (mag, k) in by_mag {
        match rings.last_mut() {
            Some(r) if r.grid_sq_magnitude == mag => r.members.push(k),
            _ => rings.push(Ring { grid_sq_magnitude: mag, members: vec![k] }),
        }
    }
    for r in &mut rings {
        r.members.sort_unstable();
    }

    Ok(Constellation::from_parts(side, 1.0, grid, rings))
}

impl Constellation {
    fn from_parts(side: usize, scale: f64, grid: Vec<(i32, i32)>, rings: Vec<Ring>) -> Self {
        let points = grid
            .iter()
            .map(|&(i, q)| Complex64::new(scale * i as f64, scale * q as f64))
            .collect();
        Self { side, scale, grid, points, rings }
    }

    /// Number of points M.
    pub fn order(&self) -> usize {
        self.grid.len()
    }

    /// Number of levels per quadrature dimension, √M.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Factor mapping the integer grid to the actual points.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Integer-grid coordinates of each point.
    pub fn grid(&self) -> &[(i32, i32)] {
        &self.grid
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// Scaled per-dimension amplitude levels, ascending.
    pub fn levels(&self) -> Vec<f64> {
        (0..self.side)
            .map(|k| self.scale * (2 * k as i32 - (self.side as i32 - 1)) as f64)
            .collect()
    }

    /// Squared magnitude of the points in ring `r`, at the current scale.
    pub fn ring_sq_magnitude(&self, r: usize) -> f64 {
        self.rings[r].grid_sq_magnitude as f64 * self.scale * self.scale
    }

    /// Ring index of every point.
    pub fn ring_of_points(&self) -> Vec<usize> {
        let mut out = vec![0; self.order()];
        for (r, ring) in self.rings.iter().enumerate() {
            for &k in &ring.members {
                out[k] = r;
            }
        }
        out
    }

    /// Squared magnitude of each point on the integer grid.
    pub fn grid_sq_magnitudes(&self) -> Vec<f64> {
        self.grid
            .iter()
            .map(|&(i, q)| (i as i64 * i as i64 + q as i64 * q as i64) as f64)
            .collect()
    }

    /// Copy scaled by a positive real factor; rings are unchanged.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        Ok(Self::from_parts(self.side, self.scale * factor, self.grid.clone(), self.rings.clone()))
    }

    pub(crate) fn check_pmf(&self, pmf: &Pmf) -> Result<()> {
        if pmf.len() != self.order() {
            return Err(Error::LengthMismatch { expected: self.order(), got: pmf.len() });
        }
        Ok(())
    }
}

/// Average energy `Σ pᵢ|xᵢ|²`.
pub fn mean_power(constellation: &Constellation, pmf: &Pmf) -> Result<f64> {
    constellation.check_pmf(pmf)?;
    Ok(constellation
        .points()
        .iter()
        .zip(pmf.probs())
        .map(|(x, p)| p * x.norm_sqr())
        .sum())
}

/// Copy of `constellation` scaled to unit mean power under `pmf`.
pub fn normalized(constellation: &Constellation, pmf: &Pmf) -> Result<Constellation> {
    let power = mean_power(constellation, pmf)?;
    if power <= 0.0 {
        return Err(Error::ZeroPower);
    }
    constellation.scaled(1.0 / power.sqrt())
}
