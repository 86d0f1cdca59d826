//! Downlink chain y_p = H_p T P s + z_p and per-user despiralization.

use rand::Rng;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::oam::ModeTransform;
use crate::precoding::PrecodingSet;
use crate::rng::complex_gaussian;
use crate::{CMat, CVec};

fn check(set: &PrecodingSet, t: &ModeTransform, h: &ChannelTensor) -> Result<()> {
    if set.subcarriers() != h.subcarriers()
        || set.users != h.users
        || set.block != t.block()
        || t.users != h.users
        || t.rings != h.rings
        || t.elements != h.rx_elements
    {
        return Err(Error::DimensionMismatch("precoder, transform and channel disagree".into()));
    }
    Ok(())
}

/// Physical end-to-end matrix H_w·T·P_w at every subcarrier.
pub(crate) fn chain_matrices(set: &PrecodingSet, t: &ModeTransform, h: &ChannelTensor) -> Result<Vec<CMat>> {
    check(set, t, h)?;
    let tm = t.transmit_matrix();
    Ok(h.matrices.iter().zip(&set.p).map(|(hw, pw)| hw * (&tm * pw)).collect())
}

/// Received vectors `[w][p]` for stacked symbol vectors `symbols[w]` (length PD)
/// with CN(0, `noise_variance`) noise on every receive element.
pub fn transmit_downlink<R: Rng + ?Sized>(
    symbols: &[CVec],
    set: &PrecodingSet,
    t: &ModeTransform,
    h: &ChannelTensor,
    noise_variance: f64,
    rng: &mut R,
) -> Result<Vec<Vec<CVec>>> {
    let chain = chain_matrices(set, t, h)?;
    if symbols.len() != chain.len() || symbols.iter().any(|s| s.len() != set.users * set.block) {
        return Err(Error::DimensionMismatch("symbol vectors do not match the precoder".into()));
    }
    let rpu = h.rows_per_user();
    Ok(chain
        .iter()
        .zip(symbols)
        .map(|(a, s)| {
            let mut y = a * s;
            if noise_variance > 0.0 {
                y.iter_mut().for_each(|v| *v += complex_gaussian(rng, noise_variance));
            }
            (0..h.users).map(|p| y.rows(p * rpu, rpu).into_owned()).collect()
        })
        .collect())
}

/// x_p = (I_𝔑 ⊗ F_Uᴴ) y_p.
pub fn detect_symbols(y: &CVec, t: &ModeTransform) -> CVec {
    t.despiralize(y)
}

/// ‖T P_w‖²_F per subcarrier: radiated power for unit symbol power.
pub fn radiated_power(set: &PrecodingSet, t: &ModeTransform) -> Vec<f64> {
    let tm = t.transmit_matrix();
    set.p.iter().map(|p| (&tm * p).norm_squared()).collect()
}

/// Mean received signal power per receive element for unit symbol power,
/// averaged over users and subcarriers.
pub fn received_power_per_element(set: &PrecodingSet, t: &ModeTransform, h: &ChannelTensor) -> Result<f64> {
    let chain = chain_matrices(set, t, h)?;
    let rows = chain[0].nrows() as f64;
    Ok(chain.iter().map(|a| a.norm_squared() / rows).sum::<f64>() / chain.len() as f64)
}

/// Per-element noise variance that puts `signal_power` at `snr_db`.
pub fn noise_for_snr(signal_power: f64, snr_db: f64) -> f64 {
    signal_power / 10f64.powf(snr_db / 10.0)
}
