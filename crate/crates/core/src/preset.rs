//! Named experiment presets reproducing the reference figure setups.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelMode;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::EstimatorOptions;
use crate::experiment::{BerSweep, EeSweep, EstimationSweep, ModeCase, SeSweep};
use crate::scenario::ReferenceScenario;

/// Closed set of pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Estimate,
    PrecoderDump,
    Ber,
    Se,
    Ee,
    ChannelDump,
    Complexity,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Estimate => "estimate",
            Pipeline::PrecoderDump => "precoder-dump",
            Pipeline::Ber => "ber",
            Pipeline::Se => "se",
            Pipeline::Ee => "ee",
            Pipeline::ChannelDump => "channel-dump",
            Pipeline::Complexity => "complexity",
        }
    }
}

/// Sweep axes and Monte-Carlo sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub snr_db: Vec<f64>,
    /// Ũ values for estimation sweeps (empty: keep the scenario's).
    pub training_modes: Vec<usize>,
    /// W̃ values for estimation sweeps (empty: keep the scenario's).
    pub training_subcarriers: Vec<usize>,
    /// (U, Ũ) pairs for BER/SE/EE (empty: keep the scenario's).
    pub cases: Vec<ModeCase>,
    /// Transmit power per subcarrier and ring, W.
    pub transmit_power: Vec<f64>,
    pub trials: usize,
    pub ofdm_symbols: usize,
    pub baseline: bool,
    /// Complexity table axes.
    pub elements: Vec<usize>,
    pub rings: Vec<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            snr_db: vec![20.0],
            training_modes: vec![],
            training_subcarriers: vec![],
            cases: vec![],
            transmit_power: log_grid(-4.0, 2.0, 13),
            trials: 10,
            ofdm_symbols: 17,
            baseline: false,
            elements: vec![],
            rings: vec![],
        }
    }
}

impl SweepSpec {
    pub fn estimation(&self, seed: u64, channel: ChannelMode) -> EstimationSweep {
        EstimationSweep {
            snr_db: self.snr_db.clone(),
            training_modes: self.training_modes.clone(),
            training_subcarriers: self.training_subcarriers.clone(),
            trials: self.trials,
            seed,
            channel,
            options: EstimatorOptions::default(),
        }
    }

    pub fn ber(&self, seed: u64, channel: ChannelMode) -> BerSweep {
        BerSweep {
            snr_db: self.snr_db.clone(),
            cases: self.cases.clone(),
            ofdm_symbols: self.ofdm_symbols,
            trials: self.trials,
            seed,
            channel,
            options: EstimatorOptions::default(),
        }
    }

    pub fn se(&self, seed: u64, channel: ChannelMode) -> SeSweep {
        SeSweep {
            snr_db: self.snr_db.clone(),
            cases: self.cases.clone(),
            trials: self.trials,
            seed,
            channel,
            options: EstimatorOptions::default(),
            baseline: self.baseline,
        }
    }

    /// The first SNR value is both the reference SNR at 1 W and the training SNR.
    pub fn ee(&self, seed: u64, channel: ChannelMode) -> EeSweep {
        let snr = self.snr_db.first().copied().unwrap_or(20.0);
        EeSweep {
            transmit_power: self.transmit_power.clone(),
            cases: self.cases.clone(),
            reference_snr_db: snr,
            training_snr_db: snr,
            trials: self.trials,
            seed,
            channel,
            options: EstimatorOptions::default(),
            baseline: self.baseline,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("SNR sweep must be finite and non-empty".into()));
        }
        if self.transmit_power.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("transmit powers must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        Ok(())
    }
}

/// `count` points from 10^lo to 10^hi, evenly spaced in log.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64)).collect()
}

fn snr_range(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

/// A named scenario plus pipeline and sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub pipeline: Pipeline,
    pub scenario: ReferenceScenario,
    pub sweep: SweepSpec,
}

impl Preset {
    pub fn config(&self) -> Result<SystemConfig> {
        self.scenario.build()
    }
}

/// The ten presets.
pub fn presets() -> Vec<Preset> {
    let uca = ReferenceScenario::default();
    let ucca = ReferenceScenario { rings: 4, ..ReferenceScenario::default() };
    let case = |u, t| ModeCase { data_modes: u, training_modes: t };
    let four_cases = vec![case(20, 20), case(20, 16), case(16, 20), case(16, 16)];
    vec![
        Preset {
            name: "fig7",
            description: "3 SBSs at 9 GHz, M=21, N=63, R_t=30λ, R_r=15λ, Ũ=20, W̃=64: position estimates at 20 dB",
            pipeline: Pipeline::Estimate,
            scenario: uca.clone(),
            sweep: SweepSpec { snr_db: vec![20.0], trials: 100, ..Default::default() },
        },
        Preset {
            name: "fig8",
            description: "NMSE of (r, θ, φ) vs SNR 0-30 dB for Ũ ∈ {16, 20}, W̃=64",
            pipeline: Pipeline::Estimate,
            scenario: uca.clone(),
            sweep: SweepSpec { snr_db: snr_range(0, 30, 5), training_modes: vec![16, 20], trials: 50, ..Default::default() },
        },
        Preset {
            name: "fig9",
            description: "NMSE of (r, θ, φ) vs Ũ at SNR=15 dB, W̃=64",
            pipeline: Pipeline::Estimate,
            scenario: uca.clone(),
            sweep: SweepSpec { snr_db: vec![15.0], training_modes: vec![8, 10, 12, 14, 16, 18, 20], trials: 50, ..Default::default() },
        },
        Preset {
            name: "fig10",
            description: "NMSE of (r, θ, φ) vs W̃ at SNR=15 dB, Ũ=20",
            pipeline: Pipeline::Estimate,
            scenario: uca.clone(),
            sweep: SweepSpec { snr_db: vec![15.0], training_subcarriers: vec![16, 32, 64, 96, 128], trials: 50, ..Default::default() },
        },
        Preset {
            name: "fig11",
            description: "QPSK BER vs SNR with true and estimated positions, (U, Ũ) ∈ {20,16}²",
            pipeline: Pipeline::Ber,
            scenario: uca.clone(),
            sweep: SweepSpec { snr_db: snr_range(0, 25, 5), cases: four_cases.clone(), trials: 4, ofdm_symbols: 17, ..Default::default() },
        },
        Preset {
            name: "fig12",
            description: "UCA SE vs SNR: true, estimated and identity precoders, T_c=512, W=128",
            pipeline: Pipeline::Se,
            scenario: uca.clone(),
            sweep: SweepSpec { snr_db: snr_range(0, 30, 5), cases: four_cases.clone(), trials: 10, ..Default::default() },
        },
        Preset {
            name: "fig13",
            description: "UCCA (4 rings) SE vs SNR against the ZF MU-MIMO baseline, T_c=512, W=128, W̃=64",
            pipeline: Pipeline::Se,
            scenario: ucca.clone(),
            sweep: SweepSpec { snr_db: snr_range(0, 30, 5), cases: vec![case(20, 20), case(16, 20)], trials: 10, baseline: true, ..Default::default() },
        },
        Preset {
            name: "fig14a",
            description: "UCA EE vs transmit power, B=190 MHz, ρ=0.35, P_BB=200 mW, P_RF=250 mW, P_LNA=20 mW",
            pipeline: Pipeline::Ee,
            scenario: uca,
            sweep: SweepSpec { snr_db: vec![20.0], cases: vec![case(20, 20), case(16, 20), case(20, 16)], trials: 4, ..Default::default() },
        },
        Preset {
            name: "fig14b",
            description: "UCCA (4 rings) EE vs transmit power against the ZF MU-MIMO baseline, B=190 MHz, ρ=0.35",
            pipeline: Pipeline::Ee,
            scenario: ucca,
            sweep: SweepSpec { snr_db: vec![20.0], cases: vec![case(20, 20), case(16, 20)], trials: 4, baseline: true, ..Default::default() },
        },
        Preset {
            name: "table1",
            description: "Operation counts vs M and rings at W=128, W̃=64, U=Ũ=30, P=3",
            pipeline: Pipeline::Complexity,
            scenario: ReferenceScenario::default(),
            sweep: SweepSpec {
                cases: vec![case(30, 30)],
                elements: vec![8, 16, 32, 64, 128],
                rings: vec![1, 2, 3, 4],
                ..Default::default()
            },
        },
    ]
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Parse(format!("unknown preset '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_presets_with_reference_constants() {
        let all = presets();
        assert_eq!(all.len(), 10);
        let f14 = preset("fig14a").unwrap().config().unwrap();
        assert_eq!(f14.power.bandwidth, 190e6);
        assert_eq!(f14.power.pa_efficiency, 0.35);
        let f9 = preset("fig9").unwrap();
        assert_eq!(f9.sweep.snr_db, vec![15.0]);
        assert_eq!(f9.config().unwrap().carriers.training_count, 64);
        assert!(preset("fig99").is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(-4.0, 2.0, 13);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[12] - 100.0).abs() < 1e-12);
    }
}
