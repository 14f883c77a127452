//! Mutual information of a discrete complex input over the AWGN channel.
//!
//! The production path integrates the noise with a tensor-product
//! Gauss-Hermite rule. For a square QAM grid the conditional-density exponent
//! separates into an in-phase and a quadrature part, so the mixture
//! `Σ p(x') exp(…)` for every (transmitted point, node pair) reduces to a
//! bilinear form `v_Iᵀ P v_Q` over the √M × √M probability matrix. Each part
//! is max-shifted before exponentiation, which keeps the evaluation in the
//! log domain without per-term `exp` calls.
//!
//! [`mi_monte_carlo`] is an independent sampled estimator used as an oracle.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::constellation::{mean_power, Constellation};
use crate::error::{ensure_finite, Error, Result};
use crate::shaping::{entropy, Pmf};
use crate::units::db_to_lin;

/// Default Gauss-Hermite order per real dimension.
pub const DEFAULT_QUADRATURE_ORDER: usize = 16;

/// Allowed deviation of the mean power from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Gauss-Hermite rule for `∫ f(t) exp(−t²) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in descending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Physicists' Gauss-Hermite rule of the given order (2 to 64).
///
/// Nodes are found by Newton iteration on the orthonormal Hermite
/// recurrence, started from the usual asymptotic guesses.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if !(2..=64).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Hermite order must be in 2..=64, got {order}"
        )));
    }
    // π^(-1/4)
    let pim4 = PI.powf(-0.25);
    let n = order;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations: 200,
                best_mi: f64::NAN,
                best_params: vec![z],
            });
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    Ok(QuadratureRule { nodes: x, weights: w })
}

fn check_normalized(constellation: &Constellation, pmf: &Pmf) -> Result<()> {
    let power = mean_power(constellation, pmf)?;
    if (power - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(power));
    }
    Ok(())
}

/// Mutual information in bits per complex symbol for `Y = X + N`, with `N`
/// circularly-symmetric Gaussian of variance `1/SNR`.
///
/// The constellation must have unit mean power under `pmf`. The result is
/// clamped to `[0, H(pmf)]`.
pub fn mi_awgn_2d(constellation: &Constellation, pmf: &Pmf, snr_db: f64, rule: &QuadratureRule) -> Result<f64> {
    constellation.check_pmf(pmf)?;
    ensure_finite("snr_db", snr_db)?;
    check_normalized(constellation, pmf)?;

    let sigma2 = 1.0 / db_to_lin(snr_db);
    let sigma = sigma2.sqrt();
    let side = constellation.side();
    let levels = constellation.levels();
    let n = rule.order();
    let nodes = rule.nodes();
    let weights = rule.weights();
    let probs = pmf.probs();

    // Per-dimension exponents e(a, t) = −(a² + 2aσt)/σ², a = level₀ − level',
    // stored max-shifted: shifted[(l0·n + k)·side + l'] and shift[l0·n + k].
    let mut raw = vec![0.0; side * n * side];
    let mut shifted = vec![0.0; side * n * side];
    let mut shift = vec![0.0; side * n];
    for l0 in 0..side {
        for k in 0..n {
            let t = nodes[k];
            let row = (l0 * n + k) * side;
            let mut max = f64::NEG_INFINITY;
            for j in 0..side {
                let a = levels[l0] - levels[j];
                let e = -(a * a + 2.0 * a * sigma * t) / sigma2;
                raw[row + j] = e;
                max = max.max(e);
            }
            shift[l0 * n + k] = max;
            for j in 0..side {
                shifted[row + j] = (raw[row + j] - max).exp();
            }
        }
    }

    // q_proj[(q0·n + l)·side + i'] = Σ_q' P[i'][q'] · v_Q[q0, l][q']
    let mut q_proj = vec![0.0; side * n * side];
    for q0 in 0..side {
        for l in 0..n {
            let vq = &shifted[(q0 * n + l) * side..(q0 * n + l + 1) * side];
            let out = &mut q_proj[(q0 * n + l) * side..(q0 * n + l + 1) * side];
            for (ip, o) in out.iter_mut().enumerate() {
                let prow = &probs[ip * side..(ip + 1) * side];
                *o = prow.iter().zip(vq).map(|(p, v)| p * v).sum();
            }
        }
    }

    let log_probs: Vec<f64> = probs.iter().map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect();
    let direct = |i0: usize, k: usize, q0: usize, l: usize| -> f64 {
        let er = &raw[(i0 * n + k) * side..(i0 * n + k + 1) * side];
        let eq = &raw[(q0 * n + l) * side..(q0 * n + l + 1) * side];
        let mut max = f64::NEG_INFINITY;
        for ip in 0..side {
            for qp in 0..side {
                max = max.max(log_probs[ip * side + qp] + er[ip] + eq[qp]);
            }
        }
        let mut s = 0.0;
        for ip in 0..side {
            for qp in 0..side {
                s += (log_probs[ip * side + qp] + er[ip] + eq[qp] - max).exp();
            }
        }
        max + s.ln()
    };

    let acc: f64 = (0..side)
        .into_par_iter()
        .map(|i0| {
            let mut acc = 0.0;
            for q0 in 0..side {
                let px = probs[i0 * side + q0];
                if px <= 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for k in 0..n {
                    let vi = &shifted[(i0 * n + k) * side..(i0 * n + k + 1) * side];
                    let si = shift[i0 * n + k];
                    for l in 0..n {
                        let wq = &q_proj[(q0 * n + l) * side..(q0 * n + l + 1) * side];
                        let s: f64 = vi.iter().zip(wq).map(|(a, b)| a * b).sum();
                        let log_mix = if s > 1e-280 {
                            s.ln() + si + shift[q0 * n + l]
                        } else {
                            direct(i0, k, q0, l)
                        };
                        inner += weights[k] * weights[l] * log_mix;
                    }
                }
                acc += px * inner;
            }
            acc
        })
        .sum();

    let mi = -acc / (PI * LN_2);
    Ok(mi.clamp(0.0, entropy(pmf)))
}

/// Monte-Carlo estimate of the same mutual information, with its standard
/// error. Deterministic for a given seed.
pub fn mi_monte_carlo(
    constellation: &Constellation,
    pmf: &Pmf,
    snr_db: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    constellation.check_pmf(pmf)?;
    ensure_finite("snr_db", snr_db)?;
    check_normalized(constellation, pmf)?;
    if samples < 10_000 {
        return Err(Error::TooFewSymbols { needed: 10_000, got: samples });
    }

    let sigma2 = 1.0 / db_to_lin(snr_db);
    let std_per_dim = (sigma2 / 2.0).sqrt();
    let points = constellation.points();
    let support: Vec<(f64, num_complex::Complex64)> = pmf
        .probs()
        .iter()
        .zip(points)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| (p.ln(), *x))
        .collect();
    let mut cdf = Vec::with_capacity(pmf.len());
    let mut run = 0.0;
    for p in pmf.probs() {
        run += p;
        cdf.push(run);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut exps = vec![0.0; support.len()];
    for count in 1..=samples {
        let u: f64 = rng.random::<f64>() * run;
        let idx = cdf.partition_point(|&c| c <= u).min(points.len() - 1);
        let x = points[idx];
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        let noise = num_complex::Complex64::new(nr * std_per_dim, ni * std_per_dim);
        let y = x + noise;
        let n2 = noise.norm_sqr();
        let mut max = f64::NEG_INFINITY;
        for ((lp, xp), e) in support.iter().zip(exps.iter_mut()) {
            *e = lp - ((y - xp).norm_sqr() - n2) / sigma2;
            max = max.max(*e);
        }
        let s: f64 = exps.iter().map(|e| (e - max).exp()).sum();
        let value = -(max + s.ln()) / LN_2;
        let delta = value - mean;
        mean += delta / count as f64;
        m2 += delta * (value - mean);
    }
    let var = m2 / (samples as f64 - 1.0);
    Ok((mean, (var / samples as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{normalized, square_qam};
    use crate::shaping::mb_pmf;

    fn gamma_half_integer(m: usize) -> f64 {
        // Γ((m+1)/2) for even m
        let mut g = PI.sqrt();
        let mut a = 0.5;
        for _ in 0..m / 2 {
            g *= a;
            a += 1.0;
        }
        g
    }

    #[test]
    fn closed_form_orders() {
        let r2 = gauss_hermite(2).unwrap();
        assert!((r2.nodes()[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r2.weights()[0] - PI.sqrt() / 2.0).abs() < 1e-15);
        let r3 = gauss_hermite(3).unwrap();
        assert!((r3.nodes()[0] - 1.5f64.sqrt()).abs() < 1e-14);
        assert!(r3.nodes()[1].abs() < 1e-15);
        assert!((r3.weights()[1] - 2.0 * PI.sqrt() / 3.0).abs() < 1e-14);
        assert!((r3.weights()[0] - PI.sqrt() / 6.0).abs() < 1e-14);
    }

    #[test]
    fn order_bounds() {
        assert!(gauss_hermite(1).is_err());
        assert!(gauss_hermite(65).is_err());
    }

    #[test]
    fn exactness_and_symmetry() {
        for n in [2, 5, 8, 16, 24, 32, 48, 64] {
            let r = gauss_hermite(n).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!((total - PI.sqrt()).abs() < 1e-12, "order {n}: {total}");
            for i in 0..n {
                assert!((r.nodes()[i] + r.nodes()[n - 1 - i]).abs() < 1e-13);
                assert!(r.weights()[i] > 0.0);
            }
            for m in 0..2 * n {
                let s: f64 = r.weights().iter().zip(r.nodes()).map(|(w, t)| w * t.powi(m as i32)).sum();
                let scale: f64 = r.weights().iter().zip(r.nodes()).map(|(w, t)| w * t.abs().powi(m as i32)).sum();
                if m % 2 == 1 {
                    assert!(s.abs() <= 1e-12 * scale, "order {n}, m {m}: {s}");
                } else {
                    let exact = gamma_half_integer(m);
                    assert!((s - exact).abs() <= 1e-8 * exact, "order {n}, m {m}: {s} vs {exact}");
                }
            }
        }
    }

    fn unit(order: usize, pmf: &Pmf) -> Constellation {
        normalized(&square_qam(order).unwrap(), pmf).unwrap()
    }

    #[test]
    fn limits() {
        let rule = gauss_hermite(16).unwrap();
        let u = Pmf::uniform(16);
        let c = unit(16, &u);
        assert!(mi_awgn_2d(&c, &u, -60.0, &rule).unwrap() < 0.01);
        let hi = mi_awgn_2d(&c, &u, 60.0, &rule).unwrap();
        assert!((hi - 4.0).abs() < 1e-3, "{hi}");
    }

    #[test]
    fn rejects_unnormalized_input() {
        let rule = gauss_hermite(8).unwrap();
        let c = square_qam(16).unwrap();
        let u = Pmf::uniform(16);
        assert!(matches!(mi_awgn_2d(&c, &u, 10.0, &rule), Err(Error::NotNormalized(_))));
        assert!(matches!(mi_monte_carlo(&c, &u, 10.0, 10_000, 1), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn qpsk_matches_bpsk_pair() {
        // QPSK = two independent BPSK at half the SNR each; compare against a
        // fine 1-D trapezoid integral of the BPSK information.
        let rule = gauss_hermite(32).unwrap();
        let u = Pmf::uniform(4);
        let c = unit(4, &u);
        let snr_db = 3.0;
        let mi = mi_awgn_2d(&c, &u, snr_db, &rule).unwrap();
        let a = (0.5f64).sqrt();
        let s2 = 0.5 / db_to_lin(snr_db);
        let pdf = |y: f64, m: f64| (-(y - m).powi(2) / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
        let steps = 200_000;
        let (lo, hi) = (-12.0, 12.0);
        let h = (hi - lo) / steps as f64;
        let mut bpsk = 0.0;
        for i in 0..=steps {
            let y = lo + i as f64 * h;
            let p = pdf(y, a);
            let q = pdf(y, -a);
            let f = if p > 0.0 { p * (2.0 * p / (p + q)).log2() } else { 0.0 };
            bpsk += if i == 0 || i == steps { 0.5 * f } else { f };
        }
        bpsk *= h;
        assert!((mi - 2.0 * bpsk).abs() < 1e-5, "{mi} vs {}", 2.0 * bpsk);
    }

    #[test]
    fn monte_carlo_agrees_and_is_deterministic() {
        let rule = gauss_hermite(16).unwrap();
        let c0 = square_qam(16).unwrap();
        let p = mb_pmf(&c0, 0.05).unwrap();
        let c = normalized(&c0, &p).unwrap();
        let gh = mi_awgn_2d(&c, &p, 10.0, &rule).unwrap();
        let (mc, se) = mi_monte_carlo(&c, &p, 10.0, 200_000, 7).unwrap();
        assert!((gh - mc).abs() < 3.0 * se + 1e-3, "gh {gh} mc {mc} se {se}");
        assert_eq!(mi_monte_carlo(&c, &p, 10.0, 20_000, 3).unwrap(), mi_monte_carlo(&c, &p, 10.0, 20_000, 3).unwrap());
        assert!(mi_monte_carlo(&c, &p, 10.0, 9_999, 3).is_err());
    }

    #[test]
    fn monte_carlo_standard_error_scaling() {
        let u = Pmf::uniform(16);
        let c = unit(16, &u);
        let (_, se1) = mi_monte_carlo(&c, &u, 10.0, 50_000, 11).unwrap();
        let (_, se2) = mi_monte_carlo(&c, &u, 10.0, 100_000, 12).unwrap();
        let ratio = se1 / se2;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn monotone_and_bounded() {
        let rule = gauss_hermite(16).unwrap();
        for order in [16, 64, 256] {
            let c0 = square_qam(order).unwrap();
            for pmf in [Pmf::uniform(order), mb_pmf(&c0, 1.5 / (2.0 * (order as f64 - 1.0) / 3.0)).unwrap()] {
                let c = normalized(&c0, &pmf).unwrap();
                let h = entropy(&pmf);
                let mut prev = f64::NEG_INFINITY;
                for snr in 0..=25 {
                    let snr = snr as f64;
                    let mi = mi_awgn_2d(&c, &pmf, snr, &rule).unwrap();
                    assert!(mi >= prev - 1e-9, "order {order} snr {snr}: {mi} < {prev}");
                    assert!(mi >= 0.0);
                    assert!(mi <= h.min(crate::units::awgn_capacity(snr)) + 1e-6, "order {order} snr {snr}");
                    prev = mi;
                }
            }
        }
    }

    #[test]
    fn quadrature_convergence_1024() {
        let u = Pmf::uniform(1024);
        let c = unit(1024, &u);
        let a = mi_awgn_2d(&c, &u, 18.0, &gauss_hermite(16).unwrap()).unwrap();
        let b = mi_awgn_2d(&c, &u, 18.0, &gauss_hermite(32).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}
