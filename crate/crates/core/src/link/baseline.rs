//! Zero-forcing MU-MIMO baseline with perfect CSI over the physical channel.
//! Every receive element carries one stream; pilots cost P𝔑M symbols per
//! coherence block.

use rayon::prelude::*;

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::precoding::MAX_CONDITION;
use crate::{CMat, C64};

/// 1 − streams/T_c, zero when training fills the block.
pub fn zf_overhead(streams: usize, coherence: usize) -> f64 {
    if coherence <= streams {
        0.0
    } else {
        1.0 - streams as f64 / coherence as f64
    }
}

/// ZF precoder H^† at one subcarrier, summarized.
#[derive(Clone, Debug, PartialEq)]
pub struct ZfSubcarrier {
    /// Σ_j |(H H^† − I)_ij|² per stream i (rounding residue).
    pub leak: Vec<f64>,
    pub condition: f64,
    /// ‖H^†‖²_F, radiated power for unit symbol power.
    pub radiated: f64,
}

/// Pseudo-inverse of one subcarrier matrix; fails above [`MAX_CONDITION`].
pub fn zf_subcarrier(h: &CMat) -> Result<ZfSubcarrier> {
    let svd = h.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { user: 0, cond: condition });
    }
    let pinv = svd.pseudo_inverse(0.0).map_err(|_| Error::SvdFailed)?;
    let a = h * &pinv;
    let n = a.nrows();
    let leak = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (a[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).norm_sqr())
                .sum()
        })
        .collect();
    Ok(ZfSubcarrier { leak, condition, radiated: pinv.norm_squared() })
}

/// ZF baseline over every subcarrier of a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ZfBaseline {
    pub streams: usize,
    pub subcarriers: Vec<ZfSubcarrier>,
}

/// Baseline figures at one operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    pub se: f64,
    /// 1 − P𝔑M/T_c, clamped at 0.
    pub overhead: f64,
    pub training_symbols: usize,
    pub mean_sinr: f64,
    pub max_condition: f64,
    /// Mean ‖H^†‖²_F over subcarriers.
    pub radiated_power: f64,
}

impl ZfBaseline {
    pub fn new(h: &ChannelTensor) -> Result<Self> {
        let subcarriers = h.matrices.par_iter().map(zf_subcarrier).collect::<Result<Vec<_>>>()?;
        Ok(Self { streams: h.users * h.rings * h.rx_elements, subcarriers })
    }

    pub fn mean_radiated_power(&self) -> f64 {
        self.subcarriers.iter().map(|s| s.radiated).sum::<f64>() / self.subcarriers.len() as f64
    }

    /// SINR_i = E|s|²/(E|s|²·leak_i + σ²), SE = overhead·(1/W) Σ_w Σ_i log₂(1 + SINR).
    pub fn evaluate(&self, symbol_power: f64, noise_variance: f64, coherence: usize) -> BaselineResult {
        let overhead = zf_overhead(self.streams, coherence);
        let mut total = 0.0;
        let mut sinr_sum = 0.0;
        let mut count = 0usize;
        for sc in &self.subcarriers {
            for l in &sc.leak {
                let s = symbol_power / (symbol_power * l + noise_variance);
                total += (1.0 + s).log2();
                sinr_sum += s;
                count += 1;
            }
        }
        BaselineResult {
            se: overhead * total / self.subcarriers.len() as f64,
            overhead,
            training_symbols: self.streams,
            mean_sinr: sinr_sum / count.max(1) as f64,
            max_condition: self.subcarriers.iter().map(|s| s.condition).fold(0.0, f64::max),
            radiated_power: self.mean_radiated_power(),
        }
    }
}

/// One-shot baseline: symbol power `symbol_power`, noise `noise_variance`.
/// Skips the pseudo-inverses when training fills the coherence block.
pub fn mu_mimo_baseline(
    h: &ChannelTensor,
    coherence: usize,
    symbol_power: f64,
    noise_variance: f64,
) -> Result<BaselineResult> {
    let streams = h.users * h.rings * h.rx_elements;
    if zf_overhead(streams, coherence) == 0.0 {
        return Ok(BaselineResult {
            se: 0.0,
            overhead: 0.0,
            training_symbols: streams,
            mean_sinr: 0.0,
            max_condition: 0.0,
            radiated_power: 0.0,
        });
    }
    Ok(ZfBaseline::new(h)?.evaluate(symbol_power, noise_variance, coherence))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overhead_values() {
        assert!((zf_overhead(252, 512) - 0.5078125).abs() < 1e-15);
        assert_eq!(zf_overhead(252, 252), 0.0);
        assert_eq!(zf_overhead(300, 252), 0.0);
    }

    #[test]
    fn scaled_identity() {
        let h = CMat::identity(4, 4) * C64::new(2.0, 0.0);
        let z = zf_subcarrier(&h).unwrap();
        assert!(z.leak.iter().all(|v| *v < 1e-28));
        assert!((z.condition - 1.0).abs() < 1e-12);
        assert!((z.radiated - 1.0).abs() < 1e-12);
    }
}
