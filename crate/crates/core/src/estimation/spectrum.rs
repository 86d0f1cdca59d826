//! Zero-padded FFT spectra over the (mode, subcarrier) axes, peak picking and
//! continuous range refinement.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rustfft::FftPlanner;

use super::model::KGrid;
use super::solve::golden_max;
use crate::{CMat, C64};

/// Detected spectral peak.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// Fractional bin after quadratic interpolation.
    pub bin: f64,
    pub height: f64,
}

/// Σ_u |Σ_w x(u,w) e^{+i2πwb/Z}|² for b = 0..Z with Z = pad·W̃.
/// A range r appears at bin r·Z·Δk/(2π).
pub fn range_profile(x: &CMat, pad: usize) -> Vec<f64> {
    let z = x.ncols() * pad.max(1);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(z);
    let mut out = vec![0.0; z];
    let mut buf = vec![C64::new(0.0, 0.0); z];
    for u in 0..x.nrows() {
        buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
        for w in 0..x.ncols() {
            buf[w] = x[(u, w)];
        }
        fft.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o += b.norm_sqr();
        }
    }
    out
}

/// Magnitude of the zero-padded 2-D spectrum S(b_u, b_w) = |Σ_u Σ_w x(u,w) e^{−i2πub_u/Z_u} e^{+i2πwb_w/Z_w}|.
/// For x(u,w) = e^{iℓ_uφ} e^{−ik_w r} the peak sits at b_u = φZ_u/2π, b_w = rZ_wΔk/2π.
pub fn spectrum_2d(x: &CMat, pad_u: usize, pad_w: usize) -> DMatrix<f64> {
    let zu = x.nrows() * pad_u.max(1);
    let zw = x.ncols() * pad_w.max(1);
    let mut planner = FftPlanner::<f64>::new();
    let fw = planner.plan_fft_inverse(zw);
    let fu = planner.plan_fft_forward(zu);
    let mut grid = vec![vec![C64::new(0.0, 0.0); zw]; zu];
    for (u, row) in grid.iter_mut().enumerate().take(x.nrows()) {
        for w in 0..x.ncols() {
            row[w] = x[(u, w)];
        }
        fw.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); zu];
    let mut out = DMatrix::zeros(zu, zw);
    for bw in 0..zw {
        for (u, c) in col.iter_mut().enumerate() {
            *c = grid[u][bw];
        }
        fu.process(&mut col);
        for (bu, c) in col.iter().enumerate() {
            out[(bu, bw)] = c.norm();
        }
    }
    out
}

/// Parabolic vertex offset in (−0.5, 0.5) through three log-magnitudes.
fn vertex(lm: f64, l0: f64, lp: f64) -> f64 {
    let den = lm - 2.0 * l0 + lp;
    if den.abs() < 1e-300 || !den.is_finite() {
        0.0
    } else {
        (0.5 * (lm - lp) / den).clamp(-0.5, 0.5)
    }
}

/// Up to `count` strongest local maxima of a circular profile, greedily with
/// suppression radius `radius` bins, each refined by log-parabolic interpolation.
pub fn pick_peaks(profile: &[f64], count: usize, radius: usize) -> Vec<Peak> {
    let z = profile.len();
    let mut suppressed = vec![false; z];
    let mut order: Vec<usize> = (0..z)
        .filter(|&b| {
            let l = profile[(b + z - 1) % z];
            let r = profile[(b + 1) % z];
            profile[b] > 0.0 && profile[b] >= l && profile[b] >= r
        })
        .collect();
    order.sort_by(|&a, &b| profile[b].partial_cmp(&profile[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut peaks = Vec::new();
    for b in order {
        if peaks.len() == count {
            break;
        }
        if suppressed[b] {
            continue;
        }
        for d in 0..=radius {
            suppressed[(b + d) % z] = true;
            suppressed[(b + z - d % z) % z] = true;
        }
        let lm = profile[(b + z - 1) % z].max(1e-300).ln();
        let l0 = profile[b].ln();
        let lp = profile[(b + 1) % z].max(1e-300).ln();
        peaks.push(Peak { bin: b as f64 + vertex(lm, l0, lp), height: profile[b] });
    }
    peaks
}

/// Range of a fractional range-profile bin.
pub fn bin_to_range(bin: f64, z: usize, dk: f64) -> f64 {
    TAU * bin / (z as f64 * dk)
}

/// Coherent range metric Σ_u |Σ_w x(u,w) e^{+ik_w r}|².
pub fn range_metric(x: &CMat, grid: &KGrid, r: f64) -> f64 {
    let step = C64::from_polar(1.0, grid.dk * r);
    let mut total = 0.0;
    for u in 0..x.nrows() {
        let mut ph = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for w in 0..x.ncols() {
            acc += x[(u, w)] * ph;
            ph *= step;
        }
        total += acc.norm_sqr();
    }
    total
}

/// Golden-section maximization of [`range_metric`] within ±`half_width` of `r0`.
pub fn refine_range(x: &CMat, grid: &KGrid, r0: f64, half_width: f64, tol: f64) -> f64 {
    golden_max(|r| range_metric(x, grid, r), r0 - half_width, r0 + half_width, tol)
}
