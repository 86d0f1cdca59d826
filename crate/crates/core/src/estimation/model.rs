//! Far-field forward models of the normalized training observations, evaluated
//! with phasor recurrences over a uniform wave-number grid.

use std::f64::consts::TAU;

use crate::config::{SbsPlacement, SystemConfig};
use crate::oam::i_pow;
use crate::{CMat, C64};

/// Array geometry of one MBS/SBS ring pair as seen by the estimator.
#[derive(Clone, Debug)]
pub struct LinkGeometry {
    pub rt: f64,
    pub rr: f64,
    pub tx_az: Vec<f64>,
    pub rx_az: Vec<f64>,
    /// Sign of β (normalization divides by |σ|).
    pub beta_sign: f64,
}

impl LinkGeometry {
    /// Geometry for user `p` on ring `ring`.
    pub fn from_config(config: &SystemConfig, p: usize, ring: usize) -> Self {
        let tx = &config.tx.rings()[ring];
        let rx = &config.users[p].array.rings()[ring];
        Self {
            rt: tx.radius,
            rr: rx.radius,
            tx_az: tx.azimuths(),
            rx_az: rx.azimuths(),
            beta_sign: if config.beta < 0.0 { -1.0 } else { 1.0 },
        }
    }

    pub fn m(&self) -> usize {
        self.rx_az.len()
    }

    pub fn n(&self) -> usize {
        self.tx_az.len()
    }

    /// d_mn − r under the far-field expansion.
    #[inline]
    pub fn excess_delay(&self, pl: &SbsPlacement, m: usize, n: usize) -> f64 {
        let st = pl.elevation.sin();
        let a = self.rx_az[m];
        let ph = self.tx_az[n];
        self.rr * st * (pl.azimuth - a).cos() - self.rt * st * (pl.azimuth - ph).cos()
            - self.rt * self.rr / pl.range * (a - ph).cos()
    }
}

/// Uniform wave-number grid k_w = k0 + w·dk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KGrid {
    pub k0: f64,
    pub dk: f64,
    pub count: usize,
}

impl KGrid {
    pub fn from_slice(ks: &[f64]) -> Self {
        let dk = if ks.len() > 1 { (ks[ks.len() - 1] - ks[0]) / (ks.len() - 1) as f64 } else { 0.0 };
        Self { k0: ks[0], dk, count: ks.len() }
    }

    pub fn k(&self, w: usize) -> f64 {
        self.k0 + w as f64 * self.dk
    }
}

/// Phasor e^{−i k_w x} advanced along the grid.
#[inline]
fn start_step(grid: &KGrid, x: f64) -> (C64, C64) {
    (C64::from_polar(1.0, -grid.k0 * x), C64::from_polar(1.0, -grid.dk * x))
}

/// Normalized combined-signal model of one user: Ũ×W̃ matrix
/// i^ℓ/(MNr) e^{−ikr} Σ_m e^{iℓ2πm/M} Σ_n e^{−ik(d_mn − r)}.
pub fn mode_samples(geo: &LinkGeometry, pl: &SbsPlacement, grid: &KGrid, modes: &[i32]) -> CMat {
    let m = geo.m();
    let n = geo.n();
    let mut z = Vec::with_capacity(m * n);
    let mut step = Vec::with_capacity(m * n);
    for mi in 0..m {
        for ni in 0..n {
            let (a, b) = start_step(grid, geo.excess_delay(pl, mi, ni));
            z.push(a);
            step.push(b);
        }
    }
    let twiddle: Vec<C64> = modes
        .iter()
        .flat_map(|&l| (0..m).map(move |mi| C64::from_polar(1.0, TAU * (l as f64) * mi as f64 / m as f64)))
        .collect();
    let scale: Vec<C64> = modes.iter().map(|&l| i_pow(l) * (geo.beta_sign / (m as f64 * n as f64 * pl.range))).collect();
    let (mut carrier, carrier_step) = start_step(grid, pl.range);
    let mut out = CMat::zeros(modes.len(), grid.count);
    let mut s = vec![C64::new(0.0, 0.0); m];
    for w in 0..grid.count {
        for mi in 0..m {
            let row = &mut z[mi * n..(mi + 1) * n];
            let st = &step[mi * n..(mi + 1) * n];
            let mut acc = C64::new(0.0, 0.0);
            for (zz, ss) in row.iter_mut().zip(st) {
                acc += *zz;
                *zz *= *ss;
            }
            s[mi] = acc;
        }
        for (u, sc) in scale.iter().enumerate() {
            let tw = &twiddle[u * m..(u + 1) * m];
            let mut acc = C64::new(0.0, 0.0);
            for (t, v) in tw.iter().zip(&s) {
                acc += t * v;
            }
            out[(u, w)] = acc * sc * carrier;
        }
        carrier *= carrier_step;
    }
    out
}

/// Normalized zero-mode model of one user at transmit element `n`:
/// (1/(M r)) Σ_m e^{−ik d_mn}, length W̃.
pub fn zero_mode_element(geo: &LinkGeometry, pl: &SbsPlacement, n: usize, grid: &KGrid) -> Vec<C64> {
    let m = geo.m();
    let mut z = Vec::with_capacity(m);
    let mut step = Vec::with_capacity(m);
    for mi in 0..m {
        let (a, b) = start_step(grid, pl.range + geo.excess_delay(pl, mi, n));
        z.push(a);
        step.push(b);
    }
    let scale = geo.beta_sign / (m as f64 * pl.range);
    let mut out = Vec::with_capacity(grid.count);
    for _ in 0..grid.count {
        let mut acc = C64::new(0.0, 0.0);
        for (zz, ss) in z.iter_mut().zip(&step) {
            acc += *zz;
            *zz *= *ss;
        }
        out.push(acc * scale);
    }
    out
}
