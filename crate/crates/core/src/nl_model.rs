//! Kurtosis-dependent nonlinear SNR model and the shaping optimizers.
//!
//! The nonlinear interference power is taken as `(η₁ + η₂K)P³`, which makes
//! the SNR at optimum launch power scale as `(1 + cK)^(−1/3)` with
//! `c = η₂/η₁`. A shaped input is scored by the AWGN mutual information at
//! the SNR this model assigns to its excess kurtosis, relative to a Gaussian
//! reference (`K = 0`) that reaches `snr_gauss_db`.
//!
//! Optimizers work in dimensionless coordinates: with `E₀` the uniform mean
//! power on the integer grid, `u = λE₀`, `u₁ = ν₁E₀` and `u₂ = ν₂E₀²`.

use rayon::prelude::*;

use crate::awgn_mi::{gauss_hermite, mi_awgn_2d, QuadratureRule, DEFAULT_QUADRATURE_ORDER};
use crate::constellation::{mean_power, normalized, Constellation};
use crate::error::{ensure_finite, Error, Result};
use crate::optim::{golden_section, NelderMead};
use crate::shaping::{
    entropy, excess_kurtosis, ring_logit_pmf, ring_probabilities, Family, Pmf, ShapingParams,
    GAUSSIAN_EXCESS_KURTOSIS,
};
use crate::units::{awgn_capacity, lin_to_db};

/// Default `c = η₂/η₁`.
pub const DEFAULT_C: f64 = 0.69;

/// Scalar nonlinear channel: `c` and the Gaussian-modulation SNR at optimum
/// launch power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlChannelModel {
    pub c: f64,
    pub snr_gauss_db: f64,
}

impl NlChannelModel {
    pub fn new(c: f64, snr_gauss_db: f64) -> Result<Self> {
        ensure_finite("c", c)?;
        ensure_finite("snr_gauss_db", snr_gauss_db)?;
        Ok(Self { c, snr_gauss_db })
    }
}

/// `SNR_A / SNR_B = ((1 + cK_B)/(1 + cK_A))^(1/3)`.
pub fn snr_ratio(kurt_a: f64, kurt_b: f64, c: f64) -> Result<f64> {
    for k in [kurt_a, kurt_b] {
        let bracket = 1.0 + c * k;
        if !(bracket > 0.0) {
            return Err(Error::NonPositiveBracket { kurtosis: k, c, bracket });
        }
    }
    if kurt_a == kurt_b || c == 0.0 {
        return Ok(1.0);
    }
    Ok(((1.0 + c * kurt_b) / (1.0 + c * kurt_a)).cbrt())
}

/// SNR in dB assigned to an input of the given excess kurtosis.
pub fn effective_snr_db(model: &NlChannelModel, kurtosis: f64) -> Result<f64> {
    let ratio = snr_ratio(kurtosis, GAUSSIAN_EXCESS_KURTOSIS, model.c)?;
    Ok(model.snr_gauss_db + lin_to_db(ratio))
}

/// One evaluated input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MiCurvePoint {
    pub snr_gauss_db: f64,
    pub params: ShapingParams,
    pub kurtosis: f64,
    pub effective_snr_db: f64,
    /// Bits per 4D symbol (two i.i.d. polarizations).
    pub mi_4d: f64,
    /// Entropy of the pmf in bits per complex symbol.
    pub entropy: f64,
}

impl MiCurvePoint {
    pub fn family(&self) -> Family {
        self.params.family()
    }

    /// Bits per complex symbol.
    pub fn mi_2d(&self) -> f64 {
        0.5 * self.mi_4d
    }

    /// Offset from the Gaussian-input capacity at the reference SNR, bits/4D.
    pub fn delta_mi_4d(&self) -> f64 {
        self.mi_4d - 2.0 * awgn_capacity(self.snr_gauss_db)
    }
}

/// The three families at one grid SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub snr_gauss_db: f64,
    pub uniform: MiCurvePoint,
    pub mb: MiCurvePoint,
    pub tailored: MiCurvePoint,
}

impl CurveRow {
    pub fn points(&self) -> [&MiCurvePoint; 3] {
        [&self.uniform, &self.mb, &self.tailored]
    }
}

/// Search settings; echoed into output metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    /// Upper end of the coarse `u = λE₀` scan.
    pub mb_u_max: f64,
    /// Number of log-spaced nonzero points in the coarse `u` scan.
    pub mb_scan_points: usize,
    pub golden_xtol: f64,
    /// Coarse `(u₁, u₂)` grid: `(min, max, points)` per axis.
    pub grid_u1: (f64, f64, usize),
    pub grid_u2: (f64, f64, usize),
    pub simplex_step: f64,
    pub ftol: f64,
    pub xtol: f64,
    pub max_iter: usize,
    /// Optima closer than this (bits/4D) count as ties.
    pub tie_tolerance: f64,
    /// Extra Nelder-Mead restarts from the incumbent in the per-ring search.
    pub ring_restarts: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            mb_u_max: 50.0,
            mb_scan_points: 48,
            golden_xtol: 1e-10,
            grid_u1: (-2.0, 8.0, 11),
            grid_u2: (-3.0, 3.0, 13),
            simplex_step: 0.25,
            ftol: 1e-12,
            xtol: 1e-9,
            max_iter: 4000,
            tie_tolerance: 1e-9,
            ring_restarts: 3,
        }
    }
}

impl OptimizerSettings {
    /// `key=value` pairs for metadata headers.
    pub fn describe(&self) -> Vec<(String, String)> {
        vec![
            ("mb_search".into(), format!("log scan u in [0, {}] with {} points, golden-section xtol {:e}", self.mb_u_max, self.mb_scan_points, self.golden_xtol)),
            ("tailored_search".into(), format!(
                "grid u1 {:?} x u2 {:?}, Nelder-Mead from (u*,0), (0,0), best cell; step {} ftol {:e} xtol {:e} max_iter {}",
                self.grid_u1, self.grid_u2, self.simplex_step, self.ftol, self.xtol, self.max_iter
            )),
            ("tie_tolerance_bits".into(), format!("{:e}", self.tie_tolerance)),
            ("coordinates".into(), "u = lambda*E0, u1 = nu1*E0, u2 = nu2*E0^2, E0 = uniform grid power".into()),
        ]
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Evaluates and optimizes shaping families on one constellation.
#[derive(Debug, Clone)]
pub struct ShapingOptimizer {
    constellation: Constellation,
    rule: QuadratureRule,
    settings: OptimizerSettings,
    /// Uniform mean power on the integer grid.
    grid_power: f64,
}

impl ShapingOptimizer {
    /// Uses the default quadrature order and optimizer settings.
    pub fn new(constellation: &Constellation) -> Result<Self> {
        Self::with_settings(constellation, gauss_hermite(DEFAULT_QUADRATURE_ORDER)?, OptimizerSettings::default())
    }

    pub fn with_settings(constellation: &Constellation, rule: QuadratureRule, settings: OptimizerSettings) -> Result<Self> {
        let grid = constellation.scaled(1.0 / constellation.scale())?;
        let grid_power = mean_power(&grid, &Pmf::uniform(grid.order()))?;
        Ok(Self { constellation: grid, rule, settings, grid_power })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn settings(&self) -> &OptimizerSettings {
        &self.settings
    }

    fn evaluate_pmf(&self, pmf: &Pmf, params: ShapingParams, model: &NlChannelModel) -> Result<MiCurvePoint> {
        let unit = normalized(&self.constellation, pmf)?;
        let kurtosis = excess_kurtosis(&unit, pmf)?;
        let effective = effective_snr_db(model, kurtosis)?;
        let mi = mi_awgn_2d(&unit, pmf, effective, &self.rule)?;
        Ok(MiCurvePoint {
            snr_gauss_db: model.snr_gauss_db,
            params,
            kurtosis,
            effective_snr_db: effective,
            mi_4d: 2.0 * mi,
            entropy: entropy(pmf),
        })
    }

    /// Builds the pmf, normalizes, and scores it under `model`.
    pub fn evaluate(&self, params: &ShapingParams, model: &NlChannelModel) -> Result<MiCurvePoint> {
        let pmf = params.pmf(&self.constellation)?;
        self.evaluate_pmf(&pmf, params.clone(), model)
    }

    fn mb_value(&self, u: f64, model: &NlChannelModel) -> f64 {
        self.evaluate(&ShapingParams::MaxwellBoltzmann { lambda: u / self.grid_power }, model)
            .map(|p| p.mi_4d)
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn tailored_params(&self, u: &[f64]) -> ShapingParams {
        ShapingParams::KurtosisTailored { nu1: u[0] / self.grid_power, nu2: u[1] / (self.grid_power * self.grid_power) }
    }

    fn tailored_value(&self, u: &[f64], model: &NlChannelModel) -> f64 {
        self.evaluate(&self.tailored_params(u), model)
            .map(|p| p.mi_4d)
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Maximizes MI over `λ ≥ 0`: coarse log scan, then golden section in
    /// the bracket around the best scan point. Returns `λ*` in grid units.
    pub fn optimize_mb(&self, model: &NlChannelModel) -> Result<(f64, MiCurvePoint)> {
        let s = &self.settings;
        let mut scan = vec![0.0];
        let lo = 1e-3f64;
        let n = s.mb_scan_points.max(2);
        for k in 0..n {
            scan.push(lo * (s.mb_u_max / lo).powf(k as f64 / (n - 1) as f64));
        }
        let values: Vec<f64> = scan.iter().map(|&u| self.mb_value(u, model)).collect();
        let best = (0..scan.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        if !values[best].is_finite() {
            return Err(Error::NonConvergence { iterations: 0, best_mi: f64::NAN, best_params: vec![] });
        }
        let a = scan[best.saturating_sub(1)];
        let b = scan[(best + 1).min(scan.len() - 1)];
        let m = golden_section(|u| -self.mb_value(u, model), a, b, s.golden_xtol, 400);
        let (u_star, mi) = if -m.value > values[best] { (m.x[0], -m.value) } else { (scan[best], values[best]) };
        if !m.converged {
            return Err(Error::NonConvergence { iterations: m.iterations, best_mi: mi, best_params: vec![u_star / self.grid_power] });
        }
        let lambda = u_star / self.grid_power;
        let point = self.evaluate(&ShapingParams::MaxwellBoltzmann { lambda }, model)?;
        Ok((lambda, point))
    }

    /// Maximizes MI over `(ν₁, ν₂)` with multi-start Nelder-Mead.
    ///
    /// Starts: the MB optimum `(λ*, 0)`, the uniform point `(0, 0)` and the
    /// best cell of a coarse grid. Near-ties prefer the smaller `|ν₂|`.
    pub fn optimize_tailored(&self, model: &NlChannelModel) -> Result<(f64, f64, MiCurvePoint)> {
        let (lambda, _) = self.optimize_mb(model)?;
        self.optimize_tailored_from(model, lambda * self.grid_power)
    }

    fn optimize_tailored_from(&self, model: &NlChannelModel, u_mb: f64) -> Result<(f64, f64, MiCurvePoint)> {
        let s = &self.settings;
        let mut grid_best = (f64::NEG_INFINITY, [0.0, 0.0]);
        for &u1 in &linspace(s.grid_u1.0, s.grid_u1.1, s.grid_u1.2) {
            for &u2 in &linspace(s.grid_u2.0, s.grid_u2.1, s.grid_u2.2) {
                let v = self.tailored_value(&[u1, u2], model);
                if v > grid_best.0 {
                    grid_best = (v, [u1, u2]);
                }
            }
        }
        let starts = [[u_mb, 0.0], [0.0, 0.0], grid_best.1];

        let mut nm = NelderMead::new(vec![s.simplex_step; 2]);
        nm.ftol = s.ftol;
        nm.xtol = s.xtol;
        nm.max_iter = s.max_iter;

        let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut all_converged = true;
        for start in starts {
            let m = nm.minimize(|u| -self.tailored_value(u, model), &start);
            all_converged &= m.converged;
            candidates.push((-m.value, m.x));
        }
        let top = candidates.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::NonConvergence { iterations: s.max_iter, best_mi: top, best_params: vec![] });
        }
        let (mi, u) = candidates
            .into_iter()
            .filter(|c| c.0 >= top - s.tie_tolerance)
            .min_by(|a, b| a.1[1].abs().total_cmp(&b.1[1].abs()))
            .unwrap();
        if !all_converged {
            let p = self.tailored_params(&u);
            let (nu1, nu2) = p.nu().unwrap();
            return Err(Error::NonConvergence { iterations: s.max_iter, best_mi: mi, best_params: vec![nu1, nu2] });
        }
        let params = self.tailored_params(&u);
        let (nu1, nu2) = params.nu().unwrap();
        let point = self.evaluate(&params, model)?;
        Ok((nu1, nu2, point))
    }

    /// Maximizes MI over all ring-constant pmfs via softmax ring logits.
    ///
    /// Starts include the tailored optimum, so the result never falls below
    /// it. Returns the per-ring total probabilities.
    pub fn optimize_per_ring(&self, model: &NlChannelModel) -> Result<(Vec<f64>, MiCurvePoint)> {
        let rings = self.constellation.rings();
        if rings.len() == 1 {
            let pmf = Pmf::uniform(self.constellation.order());
            let point = self.evaluate_pmf(&pmf, ShapingParams::PerRing { ring_probs: vec![1.0] }, model)?;
            return Ok((vec![1.0], point));
        }
        let (lambda, _) = self.optimize_mb(model)?;
        let (nu1, nu2, tailored) = self.optimize_tailored_from(model, lambda * self.grid_power)?;
        let radii: Vec<f64> = (0..rings.len())
            .map(|r| rings[r].grid_sq_magnitude as f64)
            .collect();
        let logits_of = |a: f64, b: f64| -> Vec<f64> {
            let l0 = -a * radii[0] - b * radii[0] * radii[0];
            radii.iter().skip(1).map(|&r| -a * r - b * r * r - l0).collect()
        };
        let value = |free: &[f64]| -> f64 {
            let mut logits = Vec::with_capacity(free.len() + 1);
            logits.push(0.0);
            logits.extend_from_slice(free);
            match ring_logit_pmf(&self.constellation, &logits) {
                Ok(pmf) => self
                    .evaluate_pmf(&pmf, ShapingParams::Uniform, model)
                    .map(|p| p.mi_4d)
                    .unwrap_or(f64::NEG_INFINITY),
                Err(_) => f64::NEG_INFINITY,
            }
        };

        let s = &self.settings;
        let dim = rings.len() - 1;
        let mut nm = NelderMead::new(vec![s.simplex_step; dim]);
        nm.ftol = s.ftol;
        nm.xtol = s.xtol;
        nm.max_iter = s.max_iter * dim;

        let starts = [logits_of(nu1, nu2), logits_of(lambda, 0.0), vec![0.0; dim]];
        let mut best = (tailored.mi_4d, starts[0].clone());
        let mut last_converged = true;
        for start in starts {
            let m = nm.minimize(|x| -value(x), &start);
            if -m.value > best.0 {
                best = (-m.value, m.x);
            }
        }
        for _ in 0..s.ring_restarts {
            let m = nm.minimize(|x| -value(x), &best.1);
            last_converged = m.converged;
            if -m.value > best.0 {
                best = (-m.value, m.x);
            }
        }

        let mut logits = vec![0.0];
        logits.extend_from_slice(&best.1);
        let pmf = ring_logit_pmf(&self.constellation, &logits)?;
        let ring_probs = ring_probabilities(&self.constellation, &pmf)?;
        if !last_converged {
            return Err(Error::NonConvergence { iterations: nm.max_iter, best_mi: best.0, best_params: ring_probs });
        }
        let point = self.evaluate_pmf(&pmf, ShapingParams::PerRing { ring_probs: ring_probs.clone() }, model)?;
        Ok((ring_probs, point))
    }

    /// Optimized point of one family at `model`.
    pub fn family_point(&self, family: Family, model: &NlChannelModel) -> Result<MiCurvePoint> {
        match family {
            Family::Uniform => self.evaluate(&ShapingParams::Uniform, model),
            Family::MaxwellBoltzmann => self.optimize_mb(model).map(|r| r.1),
            Family::KurtosisTailored => self.optimize_tailored(model).map(|r| r.2),
            Family::PerRing => self.optimize_per_ring(model).map(|r| r.1),
        }
    }

    /// Uniform, MB-optimal and tailored-optimal points at every grid SNR.
    pub fn mi_curve(&self, c: f64, snr_grid_db: &[f64]) -> Result<Vec<CurveRow>> {
        if snr_grid_db.is_empty() {
            return Err(Error::InvalidArgument("SNR grid is empty".into()));
        }
        if snr_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("SNR grid must be strictly ascending".into()));
        }
        snr_grid_db
            .par_iter()
            .map(|&snr| {
                let model = NlChannelModel::new(c, snr)?;
                let uniform = self.evaluate(&ShapingParams::Uniform, &model)?;
                let (lambda, mb) = self.optimize_mb(&model)?;
                let (_, _, tailored) = self.optimize_tailored_from(&model, lambda * self.grid_power)?;
                Ok(CurveRow { snr_gauss_db: snr, uniform, mb, tailored })
            })
            .collect()
    }
}

/// [`ShapingOptimizer::evaluate`] with default settings.
pub fn evaluate_family(constellation: &Constellation, params: &ShapingParams, model: &NlChannelModel) -> Result<MiCurvePoint> {
    ShapingOptimizer::new(constellation)?.evaluate(params, model)
}

/// [`ShapingOptimizer::optimize_mb`] with default settings.
pub fn optimize_mb(constellation: &Constellation, model: &NlChannelModel) -> Result<(f64, MiCurvePoint)> {
    ShapingOptimizer::new(constellation)?.optimize_mb(model)
}

/// [`ShapingOptimizer::optimize_tailored`] with default settings.
pub fn optimize_tailored(constellation: &Constellation, model: &NlChannelModel) -> Result<(f64, f64, MiCurvePoint)> {
    ShapingOptimizer::new(constellation)?.optimize_tailored(model)
}

/// [`ShapingOptimizer::optimize_per_ring`] with default settings.
pub fn optimize_per_ring(constellation: &Constellation, model: &NlChannelModel) -> Result<(Vec<f64>, MiCurvePoint)> {
    ShapingOptimizer::new(constellation)?.optimize_per_ring(model)
}

/// [`ShapingOptimizer::mi_curve`] with default settings.
pub fn mi_curve(constellation: &Constellation, c: f64, snr_grid_db: &[f64]) -> Result<Vec<CurveRow>> {
    ShapingOptimizer::new(constellation)?.mi_curve(c, snr_grid_db)
}
