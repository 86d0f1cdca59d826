//! Model-based refinement of the FFT estimates: coarse angle search, joint
//! least-squares fits of (r, θ, φ) on the mode-domain samples and per-element
//! elevation fits on the zero-mode samples.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;

use super::model::{mode_samples, zero_mode_element, KGrid, LinkGeometry};
use super::solve::{levenberg_marquardt, LmOptions};
use super::spectrum::{bin_to_range, pick_peaks, range_profile, refine_range};
use crate::config::{wrap_angle, SbsPlacement};
use crate::oam::i_pow;
use crate::{CMat, C64};

/// FD steps for (r, θ, φ).
const STEPS: [f64; 3] = [1e-6, 1e-7, 1e-7];

/// Placement from raw parameters without range checks (used inside solvers).
pub(crate) fn placement_of(params: &[f64]) -> SbsPlacement {
    SbsPlacement { range: params[0], elevation: params[1], azimuth: params[2] }
}

/// Map θ < 0 to (−θ, φ + π) and wrap φ.
pub(crate) fn canonical(params: &mut [f64]) {
    if params[1] < 0.0 {
        params[1] = -params[1];
        params[2] += PI;
    }
    params[2] = wrap_angle(params[2]);
}

fn push_complex(out: &mut Vec<f64>, z: C64) {
    out.push(z.re);
    out.push(z.im);
}

/// Inner product Σ conj(a)·b over all entries.
fn dot(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Least-squares complex gains of `models` against `x`.
pub(crate) fn solve_gains(x: &CMat, models: &[CMat]) -> Vec<C64> {
    let p = models.len();
    let mut a = DMatrix::<C64>::zeros(p, p);
    let mut b = nalgebra::DVector::<C64>::zeros(p);
    for i in 0..p {
        for j in 0..p {
            a[(i, j)] = dot(&models[i], &models[j]);
        }
        b[i] = dot(&models[i], x);
    }
    a.lu().solve(&b).map(|v| v.iter().cloned().collect()).unwrap_or_else(|| vec![C64::new(0.0, 0.0); p])
}

/// Mode-domain fitting problem over P users.
pub(crate) struct ModeFit<'a> {
    pub x: &'a CMat,
    pub geos: &'a [LinkGeometry],
    pub grid: KGrid,
    pub modes: &'a [i32],
}

impl ModeFit<'_> {
    fn models(&self, params: &[f64]) -> Vec<CMat> {
        params
            .chunks(3)
            .zip(self.geos)
            .map(|(p, g)| mode_samples(g, &placement_of(p), &self.grid, self.modes))
            .collect()
    }

    /// Residual X − Σ a_p G_p with free gains (`fixed_gain = false`) or a_p = 1.
    pub fn residual(&self, params: &[f64], fixed_gain: bool) -> CMat {
        let models = self.models(params);
        let gains = if fixed_gain { vec![C64::new(1.0, 0.0); models.len()] } else { solve_gains(self.x, &models) };
        let mut r = self.x.clone();
        for (m, a) in models.iter().zip(gains) {
            r -= m * a;
        }
        r
    }

    fn real_residual(&self, params: &[f64], fixed_gain: bool) -> Vec<f64> {
        let r = self.residual(params, fixed_gain);
        let mut out = Vec::with_capacity(2 * r.len());
        for z in r.iter() {
            push_complex(&mut out, *z);
        }
        out
    }

    pub fn cost(&self, params: &[f64], fixed_gain: bool) -> f64 {
        self.residual(params, fixed_gain).norm_squared()
    }

    /// Joint LM over all users' (r, θ, φ).
    pub fn fit(&self, params: &[f64], fixed_gain: bool, lm: LmOptions) -> (Vec<f64>, f64) {
        let steps: Vec<f64> = (0..params.len()).map(|i| STEPS[i % 3]).collect();
        let (mut p, c) = levenberg_marquardt(|q| self.real_residual(q, fixed_gain), params, &steps, lm);
        for chunk in p.chunks_mut(3) {
            canonical(chunk);
        }
        (p, c)
    }
}

/// Grid settings for the coarse angle search.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AngleGrid {
    pub theta_max: f64,
    pub theta_step: f64,
    pub psi_points: usize,
}

/// Coarse (θ, φ) of one user from residual data `x` at known range `r`.
///
/// The samples are first collapsed coherently over subcarriers, then matched
/// against single-wavelength steering profiles. Rotating a placement by 2π/M
/// multiplies mode ℓ by e^{iℓ2π/M} (N = PM), so only ψ ∈ [0, 2π/M) is
/// evaluated and the M rotations are folded in as phase factors.
pub(crate) fn coarse_angles(x: &CMat, geo: &LinkGeometry, grid: &KGrid, modes: &[i32], r: f64, g: AngleGrid) -> (f64, f64) {
    let m = geo.m();
    let n = geo.n();
    let y: Vec<C64> = (0..x.nrows())
        .map(|u| (0..x.ncols()).map(|w| x[(u, w)] * C64::from_polar(1.0, grid.k(w) * r)).sum())
        .collect();
    let kc = grid.k(0) + 0.5 * (grid.count.saturating_sub(1)) as f64 * grid.dk;
    let cross = DMatrix::<C64>::from_fn(m, n, |mi, ni| {
        C64::from_polar(1.0, kc * geo.rt * geo.rr / r * (geo.rx_az[mi] - geo.tx_az[ni]).cos())
    });
    let twiddle: Vec<Vec<C64>> = modes
        .iter()
        .map(|&l| (0..m).map(|mi| i_pow(l) * C64::from_polar(1.0, TAU * l as f64 * mi as f64 / m as f64)).collect())
        .collect();
    let rot: Vec<Vec<C64>> =
        modes.iter().map(|&l| (0..m).map(|j| C64::from_polar(1.0, l as f64 * TAU * j as f64 / m as f64)).collect()).collect();
    let steps = (g.theta_max / g.theta_step).floor() as usize + 1;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut b = nalgebra::DVector::<C64>::zeros(n);
    let mut s = vec![C64::new(0.0, 0.0); m];
    let mut c = vec![C64::new(0.0, 0.0); modes.len()];
    for it in 0..steps {
        let theta = it as f64 * g.theta_step;
        let st = theta.sin();
        for ip in 0..g.psi_points {
            let psi = TAU / m as f64 * ip as f64 / g.psi_points as f64;
            for ni in 0..n {
                b[ni] = C64::from_polar(1.0, kc * geo.rt * st * (psi - geo.tx_az[ni]).cos());
            }
            let cb = &cross * &b;
            for mi in 0..m {
                s[mi] = C64::from_polar(1.0, -kc * geo.rr * st * (psi - geo.rx_az[mi]).cos()) * cb[mi];
            }
            let mut norm = 0.0;
            for (u, tw) in twiddle.iter().enumerate() {
                let gu: C64 = tw.iter().zip(&s).map(|(a, b)| a * b).sum();
                norm += gu.norm_sqr();
                c[u] = y[u].conj() * gu;
            }
            if norm <= 0.0 {
                continue;
            }
            for j in 0..m {
                let t: C64 = c.iter().zip(&rot).map(|(cu, ru)| cu * ru[j]).sum();
                let score = t.norm_sqr() / norm;
                if score > best.0 {
                    best = (score, theta, psi + TAU * j as f64 / m as f64);
                }
            }
        }
    }
    (best.1, wrap_angle(best.2))
}

/// Settings of [`initial_fit`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct InitSettings {
    pub pad: usize,
    pub angles: AngleGrid,
    pub lm: LmOptions,
}

/// Successive detection: strongest range peak of the residual, coarse angles,
/// then a joint free-gain fit of every user found so far.
/// Returns parameters and whether every peak was found.
pub(crate) fn initial_fit(fit: &ModeFit<'_>, users: usize, s: InitSettings) -> (Vec<f64>, bool) {
    let mut params: Vec<f64> = Vec::with_capacity(3 * users);
    let mut residual = fit.x.clone();
    let mut complete = true;
    let z = fit.x.ncols() * s.pad;
    let raw_bin = TAU / (fit.x.ncols() as f64 * fit.grid.dk);
    for p in 0..users {
        let prof = range_profile(&residual, s.pad);
        let Some(peak) = pick_peaks(&prof, 1, 2 * s.pad).first().copied() else {
            complete = false;
            break;
        };
        let r0 = bin_to_range(peak.bin, z, fit.grid.dk);
        let r = refine_range(&residual, &fit.grid, r0, raw_bin / s.pad as f64, 1e-6).max(1e-3);
        let (theta, phi) = coarse_angles(&residual, &fit.geos[p], &fit.grid, fit.modes, r, s.angles);
        params.extend_from_slice(&[r, theta, phi]);
        let sub = ModeFit { x: fit.x, geos: &fit.geos[..=p], grid: fit.grid, modes: fit.modes };
        params = sub.fit(&params, false, s.lm).0;
        residual = sub.residual(&params, false);
    }
    (params, complete)
}

/// Carrier-phase stage: for each user try range offsets of whole carrier
/// cycles, refit that user alone under unit gains and keep the best cycle;
/// finally refit all users jointly with unit gains.
pub(crate) fn carrier_fit(fit: &ModeFit<'_>, params: &[f64], cycles: i32, lm: LmOptions) -> (Vec<f64>, f64) {
    let kc = fit.grid.k(0) + 0.5 * (fit.grid.count.saturating_sub(1)) as f64 * fit.grid.dk;
    let lambda = TAU / kc;
    let mut p = params.to_vec();
    let single = LmOptions { max_iter: 20, ..lm };
    for user in 0..p.len() / 3 {
        let mut others = fit.x.clone();
        for (q, chunk) in p.chunks(3).enumerate() {
            if q != user {
                others -= mode_samples(&fit.geos[q], &placement_of(chunk), &fit.grid, fit.modes);
            }
        }
        let sub = ModeFit { x: &others, geos: &fit.geos[user..=user], grid: fit.grid, modes: fit.modes };
        let base = [p[3 * user], p[3 * user + 1], p[3 * user + 2]];
        let mut best = (f64::INFINITY, base.to_vec());
        for j in -cycles..=cycles {
            let start = [base[0] + j as f64 * lambda, base[1], base[2]];
            let (q, c) = sub.fit(&start, true, single);
            if c < best.0 {
                best = (c, q);
            }
        }
        p[3 * user..3 * user + 3].copy_from_slice(&best.1);
    }
    fit.fit(&p, true, lm)
}

/// Per-element elevation fits on the normalized zero-mode samples.
pub(crate) struct ElementFit {
    /// θⁿ_p indexed [user][element]; None where the element is masked for that user.
    pub theta: Vec<Vec<Option<f64>>>,
    /// Residual norm per element.
    pub residual: Vec<f64>,
}

/// Fit the P elevations at every element with ranges and azimuths held fixed.
pub(crate) fn element_elevations(
    zm: &CMat,
    geos: &[LinkGeometry],
    grid: &KGrid,
    params: &[f64],
    min_projection: f64,
    lm: LmOptions,
) -> ElementFit {
    let users = params.len() / 3;
    let n_el = zm.nrows();
    let mut theta = vec![vec![None; n_el]; users];
    let mut residual = vec![0.0; n_el];
    for n in 0..n_el {
        let active: Vec<usize> = (0..users)
            .filter(|&p| (params[3 * p + 2] - geos[p].tx_az[n]).cos().abs() >= min_projection)
            .collect();
        let data: Vec<C64> = zm.row(n).iter().cloned().collect();
        let model = |th: &[f64]| -> Vec<f64> {
            let mut acc = data.clone();
            for p in 0..users {
                let mut pl = placement_of(&params[3 * p..3 * p + 3]);
                if let Some(i) = active.iter().position(|&a| a == p) {
                    pl.elevation = th[i];
                }
                for (a, v) in acc.iter_mut().zip(zero_mode_element(&geos[p], &pl, n, grid)) {
                    *a -= v;
                }
            }
            let mut out = Vec::with_capacity(2 * acc.len());
            for z in acc {
                push_complex(&mut out, z);
            }
            out
        };
        let x0: Vec<f64> = active.iter().map(|&p| params[3 * p + 1]).collect();
        let (th, c) = if active.is_empty() {
            let r = model(&[]);
            (vec![], r.iter().map(|v| v * v).sum())
        } else {
            levenberg_marquardt(&model, &x0, &vec![STEPS[1]; active.len()], lm)
        };
        residual[n] = c.sqrt();
        for (i, &p) in active.iter().enumerate() {
            theta[p][n] = Some(th[i]);
        }
    }
    ElementFit { theta, residual }
}

/// Median of a non-empty slice.
pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let k = s.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// Mean of the per-element values of each user over elements whose residual
/// stays within `factor` times the median residual.
pub(crate) fn average_elements(theta: &[Vec<Option<f64>>], residual: &[f64], factor: f64) -> Vec<Option<f64>> {
    let finite: Vec<f64> = residual.iter().cloned().filter(|r| r.is_finite()).collect();
    let limit = factor * median(&finite);
    theta
        .iter()
        .map(|row| {
            let kept: Vec<f64> = row
                .iter()
                .zip(residual)
                .filter(|(_, &r)| !(r > limit))
                .filter_map(|(t, _)| *t)
                .collect();
            if kept.is_empty() {
                None
            } else {
                Some(kept.iter().sum::<f64>() / kept.len() as f64)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn outlier_elements_dropped() {
        let theta = vec![vec![Some(1.0), Some(1.2), Some(9.0), None]];
        let res = vec![1.0, 1.1, 100.0, 1.0];
        let avg = average_elements(&theta, &res, 5.0);
        assert!((avg[0].unwrap() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn canonical_flips_negative_elevation() {
        let mut p = [10.0, -0.1, 0.5];
        canonical(&mut p);
        assert!((p[1] - 0.1).abs() < 1e-15);
        assert!((p[2] - wrap_angle(0.5 + PI)).abs() < 1e-15);
    }
}
