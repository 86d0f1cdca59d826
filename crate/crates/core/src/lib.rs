//! Multi-user OAM wireless backhaul simulator.
//!
//! The crate covers the whole chain: UCA/UCCA line-of-sight channel synthesis,
//! OAM mode transforms, uplink position estimation from OAM training signals,
//! the two-stage null-space/inverse precoder and link-level evaluation
//! (SINR, spectral and energy efficiency, BER, complexity).
//!
//! Index conventions: every element, mode, user and subcarrier index in the
//! public API is zero-based. Angles are radians.

pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod geometry;
pub mod link;
pub mod oam;
pub mod precoding;
pub mod preset;
pub mod rng;
pub mod scenario;
pub mod special;

pub use channel::{assemble_channel, assemble_ucca_channel, channel_coefficient, ChannelMode, ChannelTensor};
pub use config::{
    build_carrier_grid, validate_config, ArrayGeometry, CarrierGrid, ModeSet, NoiseModel, PowerModel,
    SbsPlacement, SystemConfig, UcaGeometry, UccaGeometry, UserConfig, SPEED_OF_LIGHT,
};
pub use error::{Error, Result};
pub use estimation::{estimate_positions, EstimationReport, EstimatorOptions, TrainingObservation};
pub use oam::{build_mode_transform, effective_oam_channel, EffectiveOamChannel, ModeTransform};
pub use precoding::{build_precoder, verify_decoupling, PrecodingSet};

/// Complex double.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
