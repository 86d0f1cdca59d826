//! Uplink training synthesis: every SBS spiralizes its pilots over the training
//! modes and the MBS receives Y'_t(k_w) = Σ_p H_pᵀ F_Ũ S' + Z'.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{assemble_channel_at, ChannelMode};
use crate::config::{SbsPlacement, SystemConfig};
use crate::error::{Error, Result};
use crate::oam::build_mode_transform;
use crate::rng::complex_gaussian;
use crate::{CMat, C64};

/// Pilot generation rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PilotKind {
    /// s' = 1 everywhere.
    #[default]
    Unit,
    /// Unit modulus with uniform random phase.
    RandomPhase,
}

/// Ũ×W̃ pilot matrix.
pub fn make_pilots<R: Rng + ?Sized>(kind: PilotKind, modes: usize, subcarriers: usize, rng: &mut R) -> CMat {
    match kind {
        PilotKind::Unit => CMat::from_element(modes, subcarriers, C64::new(1.0, 0.0)),
        PilotKind::RandomPhase => {
            CMat::from_fn(modes, subcarriers, |_, _| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        }
    }
}

/// Everything the MBS observes during training.
#[derive(Clone, Debug)]
pub struct TrainingObservation {
    pub wave_numbers: Vec<f64>,
    pub modes: Vec<i32>,
    /// Ring of the arrays used for training.
    pub ring: usize,
    /// Y'_t(k_w), N×Ũ per training subcarrier.
    pub received: Vec<CMat>,
    /// x'_t = 1ᵀY'_t, Ũ×W̃.
    pub combined: CMat,
    /// Zero-mode samples y^n_t(k_w), N×W̃ (None without mode 0).
    pub zero_mode: Option<CMat>,
    /// s'(ℓ_u, k_w), Ũ×W̃.
    pub pilots: CMat,
    /// Per-element noise variance σ² (0 when noiseless).
    pub noise_variance: f64,
}

/// Synthesize training on ring `ring`. `snr_db = None` gives a noiseless observation.
pub fn synth_uplink_training<R: Rng + ?Sized>(
    config: &SystemConfig,
    placements: &[SbsPlacement],
    pilots: &CMat,
    snr_db: Option<f64>,
    mode: ChannelMode,
    ring: usize,
    rng: &mut R,
) -> Result<TrainingObservation> {
    let modes = config.modes.training_modes.clone();
    let zero = config.modes.training_zero_index();
    if config.estimate_elevation && zero.is_none() {
        return Err(Error::MissingZeroMode);
    }
    let wt = config.carriers.training_count;
    if pilots.shape() != (modes.len(), wt) {
        return Err(Error::DimensionMismatch(format!("pilots are {:?}, expected {:?}", pilots.shape(), (modes.len(), wt))));
    }
    let view = config.ring_view(ring);
    let ks = config.carriers.training_wave_numbers();
    let h = assemble_channel_at(&view, placements, mode, &ks)?;
    let m = view.rx_elements();
    let p = view.users.len();
    let t = build_mode_transform(&modes, m, p, 1)?;
    let mut received = Vec::with_capacity(wt);
    for w in 0..wt {
        let spiral = CMat::from_fn(p * m, modes.len(), |row, u| t.fu[(row % m, u)] * pilots[(u, w)]);
        received.push(h.matrices[w].transpose() * spiral);
    }
    let mut noise_variance = 0.0;
    if let Some(snr) = snr_db {
        let count: usize = received.iter().map(|y| y.len()).sum();
        let power: f64 = received.iter().map(|y| y.norm_squared()).sum::<f64>() / count as f64;
        noise_variance = power / 10f64.powf(snr / 10.0);
        for y in received.iter_mut() {
            for z in y.iter_mut() {
                *z += complex_gaussian(rng, noise_variance);
            }
        }
    }
    let n = view.tx_elements();
    let mut combined = CMat::zeros(modes.len(), wt);
    for (w, y) in received.iter().enumerate() {
        for u in 0..modes.len() {
            combined[(u, w)] = y.column(u).sum();
        }
    }
    let zero_mode = zero.map(|u0| CMat::from_fn(n, wt, |ni, w| received[w][(ni, u0)]));
    Ok(TrainingObservation {
        wave_numbers: ks,
        modes,
        ring,
        received,
        combined,
        zero_mode,
        pilots: pilots.clone(),
        noise_variance,
    })
}
