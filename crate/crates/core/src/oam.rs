//! OAM mode transforms, effective mode-domain channels and the Bessel
//! closed form of the combined training signal.
//!
//! Transforms are unnormalized: F_U has unit-modulus entries and F_Uᴴ F_U = M·I.

use std::f64::consts::TAU;

use crate::channel::ChannelTensor;
use crate::config::{ModeSet, SbsPlacement, SystemConfig};
use crate::error::{Error, Result};
use crate::special::bessel_j;
use crate::{CMat, CVec, C64};

/// Row f(ℓ) with entries e^{−i2πℓm/M}, m = 0..M−1.
pub fn mode_steering_vector(l: i32, m: usize) -> Result<Vec<C64>> {
    if 2 * l.unsigned_abs() as usize >= m {
        return Err(Error::ModeUnresolvable { mode: l, elements: m });
    }
    Ok((0..m).map(|i| C64::from_polar(1.0, -TAU * l as f64 * i as f64 / m as f64)).collect())
}

/// i^n for integer n.
pub fn i_pow(n: i32) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Spiralizing/despiralizing matrices for one mode list.
#[derive(Clone, Debug)]
pub struct ModeTransform {
    pub modes: Vec<i32>,
    /// Receive elements per ring, M.
    pub elements: usize,
    pub users: usize,
    pub rings: usize,
    /// F_U, M×U, column u is f(ℓ_u)ᴴ.
    pub fu: CMat,
}

/// Build F_U for `modes` (use `ModeSet::data_modes` or `training_modes`).
pub fn build_mode_transform(modes: &[i32], m: usize, p: usize, rings: usize) -> Result<ModeTransform> {
    ModeSet::check_list(modes, m)?;
    let mut fu = CMat::zeros(m, modes.len());
    for (u, &l) in modes.iter().enumerate() {
        let f = mode_steering_vector(l, m)?;
        for i in 0..m {
            fu[(i, u)] = f[i].conj();
        }
    }
    Ok(ModeTransform { modes: modes.to_vec(), elements: m, users: p, rings, fu })
}

impl ModeTransform {
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Streams per user, 𝔑U.
    pub fn block(&self) -> usize {
        self.rings * self.modes.len()
    }

    /// F = I_P ⊗ F_U (grouped transmit order), N×PU.
    pub fn block_f(&self) -> CMat {
        kron_identity(self.users, &self.fu)
    }

    /// I_𝔑 ⊗ F, transmit-side matrix in grouped order.
    pub fn block_f_ucca(&self) -> CMat {
        kron_identity(self.rings * self.users, &self.fu)
    }

    /// Transmit spiralizer mapping streams (ring, q, u) onto physical elements
    /// (ring, n) with n = q + n̄P.
    pub fn transmit_matrix(&self) -> CMat {
        let m = self.elements;
        let u = self.mode_count();
        let n = m * self.users;
        let mut out = CMat::zeros(self.rings * n, self.rings * self.users * u);
        for ring in 0..self.rings {
            for q in 0..self.users {
                for nb in 0..m {
                    let row = ring * n + q + nb * self.users;
                    for v in 0..u {
                        out[(row, (ring * self.users + q) * u + v)] = self.fu[(nb, v)];
                    }
                }
            }
        }
        out
    }

    /// Per-user receive despiralization I_𝔑 ⊗ F_Uᴴ applied to y (𝔑M) → x (𝔑U).
    pub fn despiralize(&self, y: &CVec) -> CVec {
        let m = self.elements;
        let u = self.mode_count();
        let mut x = CVec::zeros(self.rings * u);
        for ring in 0..self.rings {
            for k in 0..u {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..m {
                    acc += self.fu[(i, k)].conj() * y[ring * m + i];
                }
                x[ring * u + k] = acc;
            }
        }
        x
    }
}

fn kron_identity(count: usize, a: &CMat) -> CMat {
    let (r, c) = a.shape();
    let mut out = CMat::zeros(count * r, count * c);
    for b in 0..count {
        out.view_mut((b * r, b * c), (r, c)).copy_from(a);
    }
    out
}

/// Mode-domain channel Fᴴ H F per subcarrier.
///
/// Rows are (user p, receive ring, mode u); columns (transmit ring, group q, mode v).
#[derive(Clone, Debug)]
pub struct EffectiveOamChannel {
    pub users: usize,
    /// Rows per user, D = 𝔑U.
    pub block: usize,
    pub matrices: Vec<CMat>,
}

impl EffectiveOamChannel {
    /// H^p_OAM at subcarrier `w`, D × PD.
    pub fn user_rows(&self, w: usize, p: usize) -> CMat {
        self.matrices[w].rows(p * self.block, self.block).into_owned()
    }

    pub fn subcarriers(&self) -> usize {
        self.matrices.len()
    }
}

/// Despiralize rows and spiralize columns of every subcarrier matrix.
pub fn effective_oam_channel(h: &ChannelTensor, t: &ModeTransform) -> Result<EffectiveOamChannel> {
    let m = h.rx_elements;
    if t.elements != m || t.users != h.users || t.rings != h.rings || h.tx_elements != h.users * m {
        return Err(Error::DimensionMismatch("mode transform does not match channel".into()));
    }
    let u = t.mode_count();
    let row_blocks = h.users * h.rings;
    let col_blocks = h.rings * h.users;
    let fu = &t.fu;
    let fuh = fu.adjoint();
    let matrices = h
        .matrices
        .iter()
        .enumerate()
        .map(|(w, _)| {
            let g = h.grouped(w);
            let mut out = CMat::zeros(row_blocks * u, col_blocks * u);
            for rb in 0..row_blocks {
                let left = &fuh * g.rows(rb * m, m);
                for cb in 0..col_blocks {
                    let blk = left.columns(cb * m, m) * fu;
                    out.view_mut((rb * u, cb * u), (u, u)).copy_from(&blk);
                }
            }
            out
        })
        .collect();
    Ok(EffectiveOamChannel { users: h.users, block: h.rings * u, matrices })
}

/// Direct double-sum evaluation of one far-field effective-channel entry for
/// receive ring `rx_ring` of user `p` and transmit ring `tx_ring`, group `q`.
#[allow(clippy::too_many_arguments)]
pub fn effective_oam_entry_rings(
    p: usize,
    q: usize,
    u: usize,
    v: usize,
    rx_ring: usize,
    tx_ring: usize,
    k: f64,
    config: &SystemConfig,
    placement: &SbsPlacement,
) -> C64 {
    let rx = &config.users[p].array.rings()[rx_ring];
    let tx = &config.tx.rings()[tx_ring];
    let m = rx.element_count;
    let big_p = config.users.len();
    let lu = config.modes.data_modes[u] as f64;
    let lv = config.modes.data_modes[v] as f64;
    let (rt, rr, r) = (tx.radius, rx.radius, placement.range);
    let st = placement.elevation.sin();
    let phi = placement.azimuth;
    let delta = C64::from_polar(config.beta / (2.0 * k * r), -k * r);
    let mut acc = C64::new(0.0, 0.0);
    for mi in 0..m {
        let alpha = rx.azimuth(mi);
        let alpha_ref = TAU * mi as f64 / m as f64;
        for nb in 0..m {
            let phin = tx.azimuth(q + nb * big_p);
            let phi_ref = TAU * nb as f64 / m as f64;
            let arg = -lu * alpha_ref + lv * phi_ref + k * rt * rr / r * (alpha - phin).cos()
                + k * rt * st * (phi - phin).cos()
                - k * rr * st * (phi - alpha).cos();
            acc += C64::from_polar(1.0, arg);
        }
    }
    delta * acc
}

/// Single-ring version of [`effective_oam_entry_rings`].
pub fn effective_oam_entry(
    p: usize,
    q: usize,
    u: usize,
    v: usize,
    k: f64,
    config: &SystemConfig,
    placement: &SbsPlacement,
) -> C64 {
    effective_oam_entry_rings(p, q, u, v, 0, 0, k, config, placement)
}

/// Bessel closed form of the combined uplink training signal on mode `l` with unit
/// pilots: σ Σ_p (e^{−ik r_p}/r_p) e^{iℓφ_p} J_ℓ(kR_r sinθ_p) J_0(kR_t sinθ_p),
/// σ = MNβ i^{−ℓ}/(2k). Uses ring `ring` of each array.
pub fn bessel_combined_signal_ring(l: i32, k: f64, placements: &[SbsPlacement], config: &SystemConfig, ring: usize) -> C64 {
    let tx = &config.tx.rings()[ring];
    let n = tx.element_count as f64;
    let m = config.rx_elements() as f64;
    let sigma = i_pow(-l) * (m * n * config.beta / (2.0 * k));
    let mut acc = C64::new(0.0, 0.0);
    for (user, pl) in config.users.iter().zip(placements) {
        let rr = user.array.rings()[ring].radius;
        let st = pl.elevation.sin();
        let amp = bessel_j(l, k * rr * st) * bessel_j(0, k * tx.radius * st) / pl.range;
        acc += C64::from_polar(amp, -k * pl.range + l as f64 * pl.azimuth);
    }
    sigma * acc
}

/// [`bessel_combined_signal_ring`] on the first ring.
pub fn bessel_combined_signal(l: i32, k: f64, placements: &[SbsPlacement], config: &SystemConfig) -> C64 {
    bessel_combined_signal_ring(l, k, placements, config, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steering_examples() {
        let f = mode_steering_vector(1, 4).unwrap();
        let want = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(mode_steering_vector(0, 5).unwrap().iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
        assert!(mode_steering_vector(11, 21).is_err());
    }

    #[test]
    fn steering_orthogonality() {
        let m = 21;
        for a in -10..10 {
            for b in -10..10 {
                let fa = mode_steering_vector(a, m).unwrap();
                let fb = mode_steering_vector(b, m).unwrap();
                let dot: C64 = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).sum();
                let want = if a == b { m as f64 } else { 0.0 };
                assert!((dot - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_f_structure() {
        let t = build_mode_transform(&[-1, 0, 1], 5, 3, 1).unwrap();
        let f = t.block_f();
        assert_eq!(f.shape(), (15, 9));
        let nnz = f.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nnz, 15 * 3);
        let g = f.adjoint() * &f;
        let want = CMat::identity(9, 9) * C64::new(5.0, 0.0);
        assert!((g - want).norm() < 1e-12);
        let single = build_mode_transform(&[-1, 0, 1], 5, 1, 1).unwrap();
        assert_eq!(single.block_f(), single.fu);
    }

    #[test]
    fn ideal_spiral_despiral() {
        let t = build_mode_transform(&[-2, 0, 3], 7, 1, 1).unwrap();
        let s = CVec::from_vec(vec![C64::new(1.0, -1.0), C64::new(0.5, 0.0), C64::new(-1.0, 2.0)]);
        let y = &t.fu * &s;
        let x = t.despiralize(&y);
        assert!((x - s * C64::new(7.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn i_pow_cycle() {
        assert_eq!(i_pow(0), C64::new(1.0, 0.0));
        assert_eq!(i_pow(-1), C64::new(0.0, -1.0));
        assert_eq!(i_pow(6), C64::new(-1.0, 0.0));
    }
}
