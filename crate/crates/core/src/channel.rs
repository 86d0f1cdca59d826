//! Free-space multi-user channel matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{SbsPlacement, SystemConfig};
use crate::error::{Error, Result};
use crate::geometry::{exact_distance_angles, farfield_distance_angles};
use crate::{CMat, C64};

/// Distance model used when synthesizing channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// Exact element distances, amplitude 1/(2kd).
    Exact,
    /// First-order distances, amplitude 1/(2k r_p).
    Farfield,
}

/// h = β/(2 k r_amp) · e^{−ikd}.
pub fn channel_coefficient(k: f64, d: f64, r_amp: f64, beta: f64) -> C64 {
    let (s, c) = (k * d).sin_cos();
    C64::new(c, -s) * (beta / (2.0 * k * r_amp))
}

/// Per-subcarrier channel matrices.
///
/// Rows are ordered (user p, receive ring, element m); columns are physical transmit
/// elements ordered (transmit ring, element n). A single UCA is the one-ring case.
#[derive(Clone, Debug)]
pub struct ChannelTensor {
    pub mode: ChannelMode,
    pub users: usize,
    pub rings: usize,
    /// Receive elements per ring, M.
    pub rx_elements: usize,
    /// Transmit elements per ring, N.
    pub tx_elements: usize,
    pub wave_numbers: Vec<f64>,
    pub matrices: Vec<CMat>,
}

impl ChannelTensor {
    pub fn subcarriers(&self) -> usize {
        self.matrices.len()
    }

    pub fn rows_per_user(&self) -> usize {
        self.rings * self.rx_elements
    }

    /// Rows belonging to user `p` at subcarrier `w` (H_p or H̄_p).
    pub fn user_block(&self, w: usize, p: usize) -> CMat {
        let rpu = self.rows_per_user();
        self.matrices[w].rows(p * rpu, rpu).into_owned()
    }

    /// Physical column of grouped index (ring, group q, element n̄ within group).
    pub fn physical_column(&self, ring: usize, q: usize, nbar: usize) -> usize {
        ring * self.tx_elements + q + nbar * self.users
    }

    /// Matrix with columns permuted into the grouped order (ring, q, n̄).
    pub fn grouped(&self, w: usize) -> CMat {
        let h = &self.matrices[w];
        let m = self.rx_elements;
        let mut out = CMat::zeros(h.nrows(), h.ncols());
        for ring in 0..self.rings {
            for q in 0..self.users {
                for nb in 0..m {
                    let dst = ring * self.tx_elements + q * m + nb;
                    out.set_column(dst, &h.column(self.physical_column(ring, q, nb)));
                }
            }
        }
        out
    }

    /// Submatrix H_{p,q} (single ring pair) in grouped column order.
    pub fn group_block(&self, w: usize, p: usize, q: usize, rx_ring: usize, tx_ring: usize) -> CMat {
        let m = self.rx_elements;
        let h = &self.matrices[w];
        let row0 = p * self.rows_per_user() + rx_ring * m;
        CMat::from_fn(m, m, |i, nb| h[(row0 + i, self.physical_column(tx_ring, q, nb))])
    }
}

struct PairTable {
    dist: Vec<f64>,
    amp: Vec<f64>,
    rows: usize,
    cols: usize,
}

fn pair_table(config: &SystemConfig, placements: &[SbsPlacement], mode: ChannelMode) -> Result<PairTable> {
    let p_count = config.users.len();
    if placements.len() != p_count {
        return Err(Error::DimensionMismatch(format!(
            "{} placements for {} users",
            placements.len(),
            p_count
        )));
    }
    let tx_rings = config.tx.rings();
    let rings = tx_rings.len();
    let n = config.tx.element_count();
    let m = config.rx_elements();
    let rows = p_count * rings * m;
    let cols = rings * n;
    let mut dist = vec![0.0; rows * cols];
    let mut amp = vec![0.0; rows * cols];
    for (p, (user, pl)) in config.users.iter().zip(placements).enumerate() {
        let rx_rings = user.array.rings();
        if rx_rings.len() != rings {
            return Err(Error::DimensionMismatch(format!("user {p} ring count differs from transmitter")));
        }
        for (ri, rx) in rx_rings.iter().enumerate() {
            for mi in 0..m {
                let row = (p * rings + ri) * m + mi;
                let alpha = rx.azimuth(mi);
                for (ti, tx) in tx_rings.iter().enumerate() {
                    for ni in 0..n {
                        let col = ti * n + ni;
                        let phi = tx.azimuth(ni);
                        let (d, a) = match mode {
                            ChannelMode::Exact => {
                                let d = exact_distance_angles(tx.radius, rx.radius, phi, alpha, pl);
                                (d, d)
                            }
                            ChannelMode::Farfield => {
                                (farfield_distance_angles(tx.radius, rx.radius, phi, alpha, pl), pl.range)
                            }
                        };
                        dist[row * cols + col] = d;
                        amp[row * cols + col] = a;
                    }
                }
            }
        }
    }
    Ok(PairTable { dist, amp, rows, cols })
}

/// Channel matrices at arbitrary wave numbers.
pub fn assemble_channel_at(
    config: &SystemConfig,
    placements: &[SbsPlacement],
    mode: ChannelMode,
    wave_numbers: &[f64],
) -> Result<ChannelTensor> {
    let t = pair_table(config, placements, mode)?;
    let beta = config.beta;
    let matrices = wave_numbers
        .par_iter()
        .map(|&k| CMat::from_fn(t.rows, t.cols, |i, j| channel_coefficient(k, t.dist[i * t.cols + j], t.amp[i * t.cols + j], beta)))
        .collect();
    Ok(ChannelTensor {
        mode,
        users: config.users.len(),
        rings: config.ring_count(),
        rx_elements: config.rx_elements(),
        tx_elements: config.tx_elements(),
        wave_numbers: wave_numbers.to_vec(),
        matrices,
    })
}

/// Channel matrices on all W data subcarriers.
pub fn assemble_channel(config: &SystemConfig, placements: &[SbsPlacement], mode: ChannelMode) -> Result<ChannelTensor> {
    assemble_channel_at(config, placements, mode, &config.carriers.wave_numbers())
}

/// UCCA channel; every user must have the transmitter's ring count.
pub fn assemble_ucca_channel(config: &SystemConfig, placements: &[SbsPlacement], mode: ChannelMode) -> Result<ChannelTensor> {
    let rings = config.tx.ring_count();
    for (p, u) in config.users.iter().enumerate() {
        if u.array.ring_count() != rings {
            return Err(Error::DimensionMismatch(format!(
                "ring-count mismatch: user {p} has {}, transmitter has {rings}",
                u.array.ring_count()
            )));
        }
    }
    assemble_channel(config, placements, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coefficient_examples() {
        let h = channel_coefficient(1.0, PI, PI, 1.0);
        assert!((h - C64::new(-1.0 / (2.0 * PI), 0.0)).norm() < 1e-15);
        let h = channel_coefficient(3.0, 1.234, 2.0, 1.0);
        assert!((h.norm() - 1.0 / 12.0).abs() < 1e-15);
    }
}
