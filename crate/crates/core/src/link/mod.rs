//! Link-level evaluation: downlink transmission and detection, interference
//! covariances, SINR, spectral and energy efficiency, Monte-Carlo BER, the
//! zero-forcing MU-MIMO baseline and operation-count estimates.
//!
//! Symbol power is set per (user, mode, subcarrier) before precoding. Radiated
//! power after T·P is reported separately by [`radiated_power`].

mod baseline;
mod ber;
mod chain;
mod complexity;
mod metrics;

pub use baseline::{mu_mimo_baseline, zf_overhead, zf_subcarrier, BaselineResult, ZfBaseline, ZfSubcarrier};
pub use ber::{ber_monte_carlo, gray_qpsk, qpsk_ber_awgn, qpsk_decide, BerCount};
pub use chain::{
    detect_symbols, noise_for_snr, radiated_power, received_power_per_element, transmit_downlink,
};
pub use complexity::{complexity_estimates, ComplexityTable};
pub use metrics::{
    circuit_power, energy_efficiency, interference_covariances, sinr, sinr_table, spectral_efficiency, Covariances,
    SinrTable,
};
