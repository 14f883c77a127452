//! Small derivative-free minimizers: golden-section search and Nelder-Mead.

/// Outcome of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `xtol·(1 + |x|)`. The returned
/// point is the best evaluated abscissa, so endpoints passed in by the caller
/// should be compared separately.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    let mut iter = 0;
    let mut converged = false;
    while iter < max_iter {
        if (b - a).abs() <= xtol * (1.0 + c.abs().max(d.abs())) {
            converged = true;
            break;
        }
        iter += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Minimum { x: vec![x], value, iterations: iter, evaluations: evals, converged }
}

/// Nelder-Mead settings. Coefficients follow the dimension-adaptive choice
/// of Gao and Han.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    /// Initial simplex edge along each axis.
    pub step: Vec<f64>,
    /// Stop when the spread of simplex values drops below this.
    pub ftol: f64,
    /// ... or when every vertex lies within this distance of the best one.
    pub xtol: f64,
    pub max_iter: usize,
}

impl NelderMead {
    pub fn new(step: Vec<f64>) -> Self {
        Self { step, ftol: 1e-12, xtol: 1e-9, max_iter: 4000 }
    }

    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert_eq!(n, self.step.len(), "step length must match dimension");
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = if n >= 2 {
            (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
        } else {
            (1.0, 2.0, 0.5, 0.5)
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.step[i];
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut evals = n + 1;
        let mut iter = 0;
        let mut converged = false;

        let mut order: Vec<usize> = (0..=n).collect();
        loop {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[n];
            let second = order[n - 1];

            let fspread = values[worst] - values[best];
            let xspread = simplex
                .iter()
                .map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if fspread.abs() <= self.ftol || xspread <= self.xtol {
                converged = true;
                break;
            }
            if iter >= self.max_iter {
                break;
            }
            iter += 1;

            let mut centroid = vec![0.0; n];
            for &k in order.iter().take(n) {
                for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[worst]).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(alpha);
            let fr = f(&xr);
            evals += 1;
            if fr < values[best] {
                let xe = along(alpha * beta);
                let fe = f(&xe);
                evals += 1;
                if fe < fr {
                    simplex[worst] = xe;
                    values[worst] = fe;
                } else {
                    simplex[worst] = xr;
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second] {
                simplex[worst] = xr;
                values[worst] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[worst] {
                let xc = along(alpha * gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
                continue;
            }
            // shrink towards the best vertex
            let anchor = simplex[best].clone();
            for k in 0..=n {
                if k == best {
                    continue;
                }
                for (x, a) in simplex[k].iter_mut().zip(&anchor) {
                    *x = a + delta * (*x - a);
                }
                values[k] = f(&simplex[k]);
                evals += 1;
            }
        }

        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            iterations: iter,
            evaluations: evals,
            converged,
        }
    }
}
