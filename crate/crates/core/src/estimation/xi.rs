//! Elevation from per-element zero-mode delays: ξ estimation, arcsine
//! candidates and least-squares matching.
//!
//! With the e^{−ikd} channel the zero-mode signal at transmit element n behaves
//! as Σ_p J_0(kR_r sinθ_p)/r_p · e^{−ikξⁿ_p} with ξⁿ_p = r_p − R_t sinθ_p cos(φ_p − φ_n).

use std::f64::consts::TAU;

use itertools::Itertools;

use super::model::KGrid;
use super::refine::median;
use super::solve::golden_max;
use super::spectrum::{bin_to_range, pick_peaks, range_profile};
use crate::special::bessel_j;
use crate::{CMat, C64};

/// First sidelobe of the rectangular-window spectrum relative to its main lobe.
const SIDELOBE: f64 = 0.2172;

/// Delays found at one element.
#[derive(Clone, Debug, PartialEq)]
pub struct XiEstimate {
    pub xi: Vec<f64>,
    /// False when fewer than the requested peaks were found, two of them are
    /// closer than the Rayleigh resolution 2π/(W̃Δk), or one is below sidelobe level.
    pub resolvable: bool,
}

fn correlate(y: &[C64], grid: &KGrid, xi: f64) -> C64 {
    let step = C64::from_polar(1.0, grid.dk * xi);
    let mut ph = C64::from_polar(1.0, grid.k0 * xi);
    let mut acc = C64::new(0.0, 0.0);
    for v in y {
        acc += v * ph;
        ph *= step;
    }
    acc
}

/// Estimate `count` delays from one element's zero-mode samples: padded FFT
/// peaks followed by RELAX-style golden-section refinement to `tol` meters.
pub fn estimate_xi(y: &[C64], grid: &KGrid, count: usize, pad: usize, tol: f64) -> XiEstimate {
    let w = y.len();
    let x = CMat::from_row_slice(1, w, y);
    let z = w * pad;
    let peaks = pick_peaks(&range_profile(&x, pad), count, pad);
    let raw_bin = TAU / (w as f64 * grid.dk);
    let mut xi: Vec<f64> = peaks.iter().map(|p| bin_to_range(p.bin, z, grid.dk)).collect();
    let found = xi.len();
    let wave = |xi: f64| -> Vec<C64> { (0..w).map(|i| C64::from_polar(1.0, -grid.k(i) * xi)).collect() };
    for _ in 0..6 {
        for p in 0..found {
            let mut res = y.to_vec();
            for (q, &xq) in xi.iter().enumerate() {
                if q == p {
                    continue;
                }
                let a = correlate(y, grid, xq) / w as f64;
                for (r, v) in res.iter_mut().zip(wave(xq)) {
                    *r -= a * v;
                }
            }
            let c = xi[p];
            xi[p] = golden_max(|t| correlate(&res, grid, t).norm_sqr(), c - 0.5 * raw_bin, c + 0.5 * raw_bin, tol);
        }
    }
    let mut resolvable = found == count;
    for (a, b) in xi.iter().tuple_combinations() {
        if (a - b).abs() < raw_bin {
            resolvable = false;
        }
    }
    // A component weaker than the first sinc sidelobe is indistinguishable
    // from leakage of a merged main lobe.
    if found > 1 {
        let data = CMat::from_row_slice(1, w, y);
        let models: Vec<CMat> = xi.iter().map(|&t| CMat::from_row_slice(1, w, &wave(t))).collect();
        let amps: Vec<f64> = super::refine::solve_gains(&data, &models).iter().map(|g| g.norm()).collect();
        let strongest = amps.iter().cloned().fold(0.0, f64::max);
        if amps.iter().any(|&a| a < SIDELOBE * strongest) {
            resolvable = false;
        }
    }
    XiEstimate { xi, resolvable }
}

/// One arcsine candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Candidate {
    Valid(f64),
    /// |argument| > 1.
    Invalid,
    /// |cos(φ̂_q − φ_n)| below the projection threshold.
    Singular,
}

/// θ candidates at element azimuth `phi_n`, indexed [delay][user]:
/// arcsin((r̂_q − ξ̂_p)/(R_t cos(φ̂_q − φ_n))).
pub fn elevation_candidates(xi: &[f64], estimates: &[(f64, f64)], rt: f64, phi_n: f64, min_projection: f64) -> Vec<Vec<Candidate>> {
    xi.iter()
        .map(|&x| {
            estimates
                .iter()
                .map(|&(r, phi)| {
                    let c = (phi - phi_n).cos();
                    if c.abs() < min_projection {
                        return Candidate::Singular;
                    }
                    let arg = (r - x) / (rt * c);
                    if arg.abs() > 1.0 {
                        Candidate::Invalid
                    } else {
                        Candidate::Valid(arg.asin())
                    }
                })
                .collect()
        })
        .collect()
}

/// Selected pairing at one element.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementMatch {
    /// θⁿ_p per user (None when singular).
    pub theta: Vec<Option<f64>>,
    /// Delay index assigned to each user.
    pub assignment: Vec<usize>,
    pub residual: f64,
}

/// Residual of one pairing: users take delays `assign`, each with model
/// J_0(k R_r sinθ)/r̂ e^{−ikξ} and a free phase.
pub fn pairing_residual(y: &[C64], grid: &KGrid, xi: &[f64], assign: &[usize], thetas: &[Option<f64>], ranges: &[f64], rr: f64) -> f64 {
    let w = y.len();
    let models: Vec<CMat> = assign
        .iter()
        .zip(thetas)
        .zip(ranges)
        .map(|((&a, th), r)| {
            CMat::from_fn(1, w, |_, i| {
                let k = grid.k(i);
                let amp = th.map_or(1.0, |t| bessel_j(0, k * rr * t.sin()));
                C64::from_polar(amp / r, -k * xi[a])
            })
        })
        .collect();
    let data = CMat::from_row_slice(1, w, y);
    let gains = super::refine::solve_gains(&data, &models);
    let mut res = data;
    for (m, g) in models.iter().zip(gains) {
        let ph = if g.norm() > 0.0 { g / g.norm() } else { C64::new(1.0, 0.0) };
        res -= m * ph;
    }
    res.norm_squared()
}

/// Pick the delay-to-user pairing with the smallest residual at one element.
/// Returns None when every pairing contains an invalid candidate.
pub fn match_element(
    y: &[C64],
    grid: &KGrid,
    xi: &[f64],
    candidates: &[Vec<Candidate>],
    ranges: &[f64],
    rr: f64,
) -> Option<ElementMatch> {
    let users = ranges.len();
    if xi.len() < users {
        return None;
    }
    let mut best: Option<ElementMatch> = None;
    for assign in (0..xi.len()).permutations(users) {
        let mut thetas = Vec::with_capacity(users);
        let mut feasible = true;
        for (q, &a) in assign.iter().enumerate() {
            match candidates[a][q] {
                Candidate::Valid(t) => thetas.push(Some(t)),
                Candidate::Singular => thetas.push(None),
                Candidate::Invalid => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }
        let r = pairing_residual(y, grid, xi, &assign, &thetas, ranges, rr);
        if best.as_ref().map_or(true, |b| r < b.residual) {
            best = Some(ElementMatch { theta: thetas, assignment: assign, residual: r });
        }
    }
    best
}

/// Average the matched θⁿ_p over elements, dropping elements whose residual
/// exceeds `factor` times the median. Returns per-user means (None when no
/// element contributed).
pub fn match_and_average(matches: &[Option<ElementMatch>], users: usize, factor: f64) -> Vec<Option<f64>> {
    let residuals: Vec<f64> = matches.iter().flatten().map(|m| m.residual).collect();
    let limit = factor * median(&residuals);
    (0..users)
        .map(|p| {
            let kept: Vec<f64> =
                matches.iter().flatten().filter(|m| !(m.residual > limit)).filter_map(|m| m.theta[p]).collect();
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
    fn quarter_turn_is_singular() {
        let c = elevation_candidates(&[10.0], &[(10.0, std::f64::consts::FRAC_PI_2)], 1.0, 0.0, 1e-9);
        assert_eq!(c[0][0], Candidate::Singular);
    }

    #[test]
    fn out_of_range_is_invalid() {
        let c = elevation_candidates(&[8.0], &[(10.0, 0.0)], 1.0, 0.0, 0.3);
        assert_eq!(c[0][0], Candidate::Invalid);
    }

    #[test]
    fn exact_inversion() {
        let (r, th, phi, rt, phn): (f64, f64, f64, f64, f64) = (24.0, 0.2, 0.3, 1.0, 1.1);
        let xi = r - rt * th.sin() * (phi - phn).cos();
        match elevation_candidates(&[xi], &[(r, phi)], rt, phn, 0.3)[0][0] {
            Candidate::Valid(t) => assert!((t - th).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
