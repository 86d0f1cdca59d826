//! Gray-mapped QPSK Monte-Carlo bit-error counting over the downlink chain.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use super::chain::chain_matrices;
use crate::channel::ChannelTensor;
use crate::error::Result;
use crate::oam::ModeTransform;
use crate::precoding::PrecodingSet;
use crate::rng::{complex_gaussian, purpose, stream};
use crate::special::q_function;
use crate::{CVec, C64};

/// Unit-energy Gray QPSK: bit 0 sets the real sign, bit 1 the imaginary sign
/// (false → +).
pub fn gray_qpsk(b0: bool, b1: bool) -> C64 {
    let s = |b: bool| if b { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    C64::new(s(b0), s(b1))
}

/// Hard decision inverse of [`gray_qpsk`].
pub fn qpsk_decide(x: C64) -> (bool, bool) {
    (x.re < 0.0, x.im < 0.0)
}

/// Gray QPSK bit-error probability at per-symbol SINR: Q(√SINR).
pub fn qpsk_ber_awgn(sinr: f64) -> f64 {
    q_function(sinr.max(0.0).sqrt())
}

/// Bit-error tallies per user.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BerCount {
    pub errors: Vec<u64>,
    pub bits: Vec<u64>,
}

impl BerCount {
    pub fn ber(&self, user: usize) -> f64 {
        self.errors[user] as f64 / self.bits[user].max(1) as f64
    }

    pub fn pooled(&self) -> f64 {
        self.errors.iter().sum::<u64>() as f64 / self.bits.iter().sum::<u64>().max(1) as f64
    }

    /// Add another tally in place.
    pub fn merge(&mut self, other: &BerCount) {
        if self.errors.is_empty() {
            *self = other.clone();
            return;
        }
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a += b;
        }
    }
}

/// Send `ofdm_symbols` Gray-QPSK OFDM symbols (every user, stream and
/// subcarrier) through the chain with per-element noise variance
/// `noise_variance`, despiralize and hard-decide. Symbols and noise come from
/// the (`master`, `trial`) streams.
pub fn ber_monte_carlo(
    set: &PrecodingSet,
    t: &ModeTransform,
    h: &ChannelTensor,
    noise_variance: f64,
    ofdm_symbols: usize,
    master: u64,
    trial: u64,
) -> Result<BerCount> {
    let chain = chain_matrices(set, t, h)?;
    let users = set.users;
    let d = set.block;
    let rpu = h.rows_per_user();
    let mut sym_rng = stream(master, trial, purpose::DATA_SYMBOLS);
    let mut noise_rng = stream(master, trial, purpose::DATA_NOISE);
    let mut count = BerCount { errors: vec![0; users], bits: vec![0; users] };
    let mut bits = vec![(false, false); users * d];
    for _ in 0..ofdm_symbols {
        for a in &chain {
            for b in bits.iter_mut() {
                *b = (sym_rng.gen(), sym_rng.gen());
            }
            let s = CVec::from_iterator(users * d, bits.iter().map(|&(b0, b1)| gray_qpsk(b0, b1)));
            let mut y = a * s;
            if noise_variance > 0.0 {
                y.iter_mut().for_each(|v| *v += complex_gaussian(&mut noise_rng, noise_variance));
            }
            for p in 0..users {
                let x = t.despiralize(&y.rows(p * rpu, rpu).into_owned());
                for (k, xv) in x.iter().enumerate() {
                    let (h0, h1) = qpsk_decide(*xv);
                    let (b0, b1) = bits[p * d + k];
                    count.errors[p] += (h0 != b0) as u64 + (h1 != b1) as u64;
                }
                count.bits[p] += 2 * d as u64;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_roundtrip_and_energy() {
        for b0 in [false, true] {
            for b1 in [false, true] {
                let s = gray_qpsk(b0, b1);
                assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
                assert_eq!(qpsk_decide(s), (b0, b1));
            }
        }
    }

    #[test]
    fn awgn_curve_at_zero_db() {
        assert!((qpsk_ber_awgn(1.0) - 0.158_655_253_931_457).abs() < 1e-12);
    }
}
