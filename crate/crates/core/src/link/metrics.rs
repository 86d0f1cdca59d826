//! Interference covariances, SINR, spectral and energy efficiency.

use rayon::prelude::*;

use crate::config::PowerModel;
use crate::error::{Error, Result};
use crate::oam::EffectiveOamChannel;
use crate::precoding::PrecodingSet;
use crate::{CMat, C64};

/// Covariances seen by one user at one subcarrier after despiralization.
#[derive(Clone, Debug)]
pub struct Covariances {
    /// E|s|² (H^p P_p − I)(H^p P_p − I)ᴴ.
    pub inter: CMat,
    /// E|s|² Σ_{q≠p} H^p P_q (H^p P_q)ᴴ.
    pub co: CMat,
    /// Diagonal of R_z, M σ².
    pub noise: f64,
}

/// Covariances indexed `[w][p]`. `elements` is M.
pub fn interference_covariances(
    h: &EffectiveOamChannel,
    set: &PrecodingSet,
    symbol_power: f64,
    noise_variance: f64,
    elements: usize,
) -> Result<Vec<Vec<Covariances>>> {
    if h.subcarriers() != set.subcarriers() || h.users != set.users || h.block != set.block {
        return Err(Error::DimensionMismatch("effective channel and precoder disagree".into()));
    }
    let d = set.block;
    let eye = CMat::identity(d, d);
    let es = C64::new(symbol_power, 0.0);
    Ok(h.matrices
        .par_iter()
        .zip(set.p.par_iter())
        .map(|(hw, pw)| {
            let a = hw * pw;
            (0..set.users)
                .map(|p| {
                    let own = a.view((p * d, p * d), (d, d)) - &eye;
                    let inter = &own * own.adjoint() * es;
                    let mut co = CMat::zeros(d, d);
                    for q in (0..set.users).filter(|&q| q != p) {
                        let blk = a.view((p * d, q * d), (d, d));
                        co += blk * blk.adjoint();
                    }
                    Covariances { inter, co: co * es, noise: elements as f64 * noise_variance }
                })
                .collect()
        })
        .collect())
}

/// E|s|² / ([R_inter]_κκ + [R_co]_κκ + [R_z]_κκ) for each stream κ.
pub fn sinr(symbol_power: f64, cov: &Covariances) -> Vec<f64> {
    (0..cov.inter.nrows())
        .map(|k| symbol_power / (cov.inter[(k, k)].re + cov.co[(k, k)].re + cov.noise))
        .collect()
}

/// SINR indexed `[w][p][κ]`, κ = ring·U + u.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrTable {
    pub rings: usize,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl SinrTable {
    /// Mean SINR of stream κ over users and subcarriers.
    pub fn mean_per_stream(&self) -> Vec<f64> {
        let n = self.values[0][0].len();
        let count = (self.values.len() * self.values[0].len()) as f64;
        (0..n).map(|k| self.values.iter().flatten().map(|v| v[k]).sum::<f64>() / count).collect()
    }
}

/// SINR table for a precoder applied to an effective channel.
pub fn sinr_table(
    h: &EffectiveOamChannel,
    set: &PrecodingSet,
    symbol_power: f64,
    noise_variance: f64,
    elements: usize,
    rings: usize,
) -> Result<SinrTable> {
    let cov = interference_covariances(h, set, symbol_power, noise_variance, elements)?;
    let values = cov.iter().map(|row| row.iter().map(|c| sinr(symbol_power, c)).collect()).collect();
    Ok(SinrTable { rings, values })
}

/// (1/W) Σ_w Σ_p Σ_κ log₂(1 + SINR), with the training overhead factor applied
/// to the first ring only.
pub fn spectral_efficiency(table: &SinrTable, overhead: f64) -> f64 {
    let w = table.values.len() as f64;
    let mut first = 0.0;
    let mut rest = 0.0;
    for per_w in &table.values {
        for per_user in per_w {
            let u = per_user.len() / table.rings;
            for (k, s) in per_user.iter().enumerate() {
                let c = (1.0 + s).log2();
                if k < u {
                    first += c;
                } else {
                    rest += c;
                }
            }
        }
    }
    (overhead.max(0.0) * first + rest) / w
}

/// (1+P)𝒫_BB + 2𝔑MP𝒫_RF + 𝔑MP𝒫_LNA.
pub fn circuit_power(power: &PowerModel, users: usize, elements: usize, rings: usize) -> f64 {
    let antennas = (rings * elements * users) as f64;
    (1.0 + users as f64) * power.p_bb + 2.0 * antennas * power.p_rf + antennas * power.p_lna
}

/// B·C / (W𝔑𝒫_t/ρ + 𝒫_c), with 𝒫_t from `power`.
pub fn energy_efficiency(
    se: f64,
    power: &PowerModel,
    subcarriers: usize,
    users: usize,
    elements: usize,
    rings: usize,
) -> Result<f64> {
    let den = (subcarriers * rings) as f64 * power.p_t / power.pa_efficiency + circuit_power(power, users, elements, rings);
    if !(den > 0.0) {
        return Err(Error::InvalidParameter("total power must be positive".into()));
    }
    Ok(power.bandwidth * se / den)
}
