//! Small scalar and least-squares solvers used by the refinement stages.

use nalgebra::{DMatrix, DVector};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximize a unimodal `f` on [a, b] by golden-section search until the bracket is below `tol`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
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
    }
    0.5 * (a + b)
}

/// Stopping rules for [`levenberg_marquardt`].
#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative cost decrease below which iteration stops.
    pub ftol: f64,
    /// Step norm (scaled by the FD steps) below which iteration stops.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 60, ftol: 1e-15, xtol: 1e-10 }
    }
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimize ‖f(x)‖² with a central-difference Jacobian. `steps[i]` is the
/// difference step of parameter i. Returns the solution and its cost.
pub fn levenberg_marquardt<F: Fn(&[f64]) -> Vec<f64>>(f: F, x0: &[f64], steps: &[f64], opts: LmOptions) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut c = cost(&r);
    let mut mu = 1e-3;
    for _ in 0..opts.max_iter {
        if c == 0.0 {
            break;
        }
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += steps[j];
            xm[j] -= steps[j];
            let rp = f(&xp);
            let rm = f(&xm);
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * steps[j]);
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += mu * jtj[(j, j)].max(1e-300);
            }
            let Some(delta) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let rn = f(&xn);
            let cn = cost(&rn);
            if cn < c {
                let rel = (c - cn) / c;
                let step = delta.iter().zip(steps).map(|(d, s)| (d / s).powi(2)).sum::<f64>().sqrt();
                x = xn;
                r = rn;
                c = cn;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if rel < opts.ftol || step < opts.xtol {
                    return (x, c);
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let x = golden_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn lm_fits_exponential() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (-1.3 * t).exp()).collect();
        let (x, c) = levenberg_marquardt(
            |p| t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect(),
            &[1.0, 0.5],
            &[1e-6, 1e-6],
            LmOptions::default(),
        );
        assert!(c < 1e-20);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 1.3).abs() < 1e-9);
    }
}
