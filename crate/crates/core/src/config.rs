//! Scenario description types and structural validation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A uniform circular array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcaGeometry {
    /// Radius in meters.
    pub radius: f64,
    pub element_count: usize,
    /// Azimuth of the first element, radians.
    pub initial_angle: f64,
}

impl UcaGeometry {
    pub fn new(radius: f64, element_count: usize, initial_angle: f64) -> Result<Self> {
        let g = Self { radius, element_count, initial_angle };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("UCA radius must be positive, got {}", self.radius)));
        }
        if self.element_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "UCA needs at least 2 elements, got {}",
                self.element_count
            )));
        }
        if !self.initial_angle.is_finite() {
            return Err(Error::InvalidParameter("UCA initial angle must be finite".into()));
        }
        Ok(())
    }

    /// Azimuth of element `i` (zero-based).
    pub fn azimuth(&self, i: usize) -> f64 {
        TAU * i as f64 / self.element_count as f64 + self.initial_angle
    }

    pub fn azimuths(&self) -> Vec<f64> {
        (0..self.element_count).map(|i| self.azimuth(i)).collect()
    }
}

/// Concentric UCAs sharing one center; rings ordered by increasing radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UccaGeometry {
    pub rings: Vec<UcaGeometry>,
}

impl UccaGeometry {
    pub fn new(rings: Vec<UcaGeometry>) -> Result<Self> {
        let g = Self { rings };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if self.rings.is_empty() {
            return Err(Error::InvalidParameter("UCCA needs at least one ring".into()));
        }
        for r in &self.rings {
            r.check()?;
        }
        for w in self.rings.windows(2) {
            if w[1].radius <= w[0].radius {
                return Err(Error::InvalidParameter("UCCA ring radii must be strictly increasing".into()));
            }
            if w[1].element_count != w[0].element_count {
                return Err(Error::InvalidParameter("UCCA rings must share one element count".into()));
            }
        }
        Ok(())
    }
}

/// Either a single UCA or a UCCA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrayGeometry {
    Uca(UcaGeometry),
    Ucca(UccaGeometry),
}

impl ArrayGeometry {
    pub fn rings(&self) -> &[UcaGeometry] {
        match self {
            ArrayGeometry::Uca(g) => std::slice::from_ref(g),
            ArrayGeometry::Ucca(g) => &g.rings,
        }
    }

    pub fn ring_count(&self) -> usize {
        self.rings().len()
    }

    /// Elements per ring.
    pub fn element_count(&self) -> usize {
        self.rings()[0].element_count
    }

    pub fn max_radius(&self) -> f64 {
        self.rings().iter().map(|r| r.radius).fold(0.0, f64::max)
    }

    fn check(&self) -> Result<()> {
        match self {
            ArrayGeometry::Uca(g) => g.check(),
            ArrayGeometry::Ucca(g) => g.check(),
        }
    }
}

/// Position of an SBS array center seen from the MBS.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbsPlacement {
    /// Center distance r_p, meters.
    pub range: f64,
    /// Elevation θ_p, radians in [0, π/2).
    pub elevation: f64,
    /// Azimuth φ_p, radians in [−π, π).
    pub azimuth: f64,
}

impl SbsPlacement {
    pub fn new(range: f64, elevation: f64, azimuth: f64) -> Result<Self> {
        let p = Self { range, elevation, azimuth };
        p.check()?;
        Ok(p)
    }

    /// Convenience constructor taking degrees; azimuth is wrapped to [−π, π).
    pub fn from_degrees(range: f64, elevation_deg: f64, azimuth_deg: f64) -> Result<Self> {
        Self::new(range, elevation_deg.to_radians(), wrap_angle(azimuth_deg.to_radians()))
    }

    fn check(&self) -> Result<()> {
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(Error::InvalidParameter(format!("range must be positive, got {}", self.range)));
        }
        if !(self.elevation >= 0.0 && self.elevation < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "elevation must lie in [0, pi/2), got {}",
                self.elevation
            )));
        }
        if !(self.azimuth >= -PI && self.azimuth < PI) {
            return Err(Error::InvalidParameter(format!("azimuth must lie in [-pi, pi), got {}", self.azimuth)));
        }
        Ok(())
    }

    /// True when the range clears `factor` times the largest array radius.
    pub fn is_far_field(&self, factor: f64, tx_radius: f64, rx_radius: f64) -> bool {
        self.range >= factor * tx_radius.max(rx_radius)
    }
}

/// Wrap an angle to [−π, π).
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// OFDM subcarrier grid. Training uses the first `training_count` carriers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierGrid {
    pub base_frequency: f64,
    pub spacing: f64,
    pub data_count: usize,
    pub training_count: usize,
}

/// Build and check a carrier grid.
pub fn build_carrier_grid(f: f64, df: f64, w: usize, w_train: usize) -> Result<CarrierGrid> {
    let g = CarrierGrid { base_frequency: f, spacing: df, data_count: w, training_count: w_train };
    g.check()?;
    Ok(g)
}

impl CarrierGrid {
    fn check(&self) -> Result<()> {
        if !(self.base_frequency > 0.0 && self.base_frequency.is_finite()) {
            return Err(Error::InvalidParameter("base frequency must be positive".into()));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidParameter("subcarrier spacing must be positive".into()));
        }
        if self.training_count < 1 || self.training_count > self.data_count {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= training subcarriers ({}) <= data subcarriers ({})",
                self.training_count, self.data_count
            )));
        }
        Ok(())
    }

    pub fn frequency(&self, w: usize) -> f64 {
        self.base_frequency + w as f64 * self.spacing
    }

    /// k_w = 2π f_w / c.
    pub fn wave_number(&self, w: usize) -> f64 {
        TAU * self.frequency(w) / SPEED_OF_LIGHT
    }

    pub fn wave_numbers(&self) -> Vec<f64> {
        (0..self.data_count).map(|w| self.wave_number(w)).collect()
    }

    pub fn training_wave_numbers(&self) -> Vec<f64> {
        (0..self.training_count).map(|w| self.wave_number(w)).collect()
    }

    /// Wave-number step Δk = 2πΔf/c.
    pub fn delta_k(&self) -> f64 {
        TAU * self.spacing / SPEED_OF_LIGHT
    }

    /// Unambiguous range c/Δf of the subcarrier FFT.
    pub fn unambiguous_range(&self) -> f64 {
        SPEED_OF_LIGHT / self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.base_frequency
    }
}

/// Data and training OAM mode lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub data_modes: Vec<i32>,
    pub training_modes: Vec<i32>,
}

impl ModeSet {
    /// `count` consecutive modes starting at `first`.
    pub fn consecutive(first: i32, count: usize) -> Vec<i32> {
        (0..count as i32).map(|i| first + i).collect()
    }

    /// Symmetric-ish block −⌊count/2⌋ … ⌈count/2⌉−1, e.g. 20 → −10..9.
    pub fn centered(count: usize) -> Vec<i32> {
        Self::consecutive(-((count / 2) as i32), count)
    }

    pub fn new(data_modes: Vec<i32>, training_modes: Vec<i32>) -> Self {
        Self { data_modes, training_modes }
    }

    /// Index of mode 0 among the training modes.
    pub fn training_zero_index(&self) -> Option<usize> {
        self.training_modes.iter().position(|&l| l == 0)
    }

    pub fn check_list(modes: &[i32], m: usize) -> Result<()> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("mode list is empty".into()));
        }
        for &l in modes {
            if 2 * l.unsigned_abs() as usize >= m {
                return Err(Error::ModeUnresolvable { mode: l, elements: m });
            }
        }
        for (i, &a) in modes.iter().enumerate() {
            for &b in &modes[i + 1..] {
                if (a - b).rem_euclid(m as i32) == 0 {
                    return Err(Error::ModeAlias { a, b, elements: m });
                }
            }
        }
        Ok(())
    }
}

/// Receive-referred noise: SNR is received signal power over noise power per element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub snr_db: f64,
}

impl NoiseModel {
    pub fn new(snr_db: f64) -> Self {
        Self { snr_db }
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Per-element noise variance for a given mean received signal power.
    pub fn noise_variance(&self, signal_power: f64) -> f64 {
        signal_power / self.snr_linear()
    }
}

/// Power-consumption constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Power-amplifier efficiency ρ.
    pub pa_efficiency: f64,
    /// Baseband processor power, W.
    pub p_bb: f64,
    /// Power per RF chain, W.
    pub p_rf: f64,
    /// Power per LNA, W.
    pub p_lna: f64,
    /// Transmit power per subcarrier, W.
    pub p_t: f64,
    /// System bandwidth, Hz.
    pub bandwidth: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { pa_efficiency: 0.35, p_bb: 0.2, p_rf: 0.25, p_lna: 0.02, p_t: 1.0, bandwidth: 190e6 }
    }
}

impl PowerModel {
    fn check(&self) -> Result<()> {
        if !(self.pa_efficiency > 0.0 && self.pa_efficiency <= 1.0) {
            return Err(Error::InvalidParameter("PA efficiency must lie in (0, 1]".into()));
        }
        for (name, v) in [("p_bb", self.p_bb), ("p_rf", self.p_rf), ("p_lna", self.p_lna), ("p_t", self.p_t)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative")));
            }
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidParameter("bandwidth must be positive".into()));
        }
        Ok(())
    }
}

/// One SBS: its array and its position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserConfig {
    pub array: ArrayGeometry,
    pub placement: SbsPlacement,
}

/// Full scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub tx: ArrayGeometry,
    pub users: Vec<UserConfig>,
    pub carriers: CarrierGrid,
    pub modes: ModeSet,
    pub beta: f64,
    pub noise: NoiseModel,
    pub power: PowerModel,
    /// Coherence time T_c in OFDM symbols.
    pub coherence_symbols: usize,
    /// Training time T_t in OFDM symbols.
    pub training_symbols: usize,
    /// Far-field threshold as a multiple of the largest array radius.
    pub far_field_factor: f64,
    /// Downgrade the far-field check from error to warning.
    pub allow_near_field: bool,
    /// Require mode 0 among the training modes.
    pub estimate_elevation: bool,
}

impl SystemConfig {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Receive elements per ring, M.
    pub fn rx_elements(&self) -> usize {
        self.users[0].array.element_count()
    }

    /// Transmit elements per ring, N.
    pub fn tx_elements(&self) -> usize {
        self.tx.element_count()
    }

    pub fn ring_count(&self) -> usize {
        self.tx.ring_count()
    }

    pub fn placements(&self) -> Vec<SbsPlacement> {
        self.users.iter().map(|u| u.placement).collect()
    }

    /// Indices of users that fail the far-field check.
    pub fn near_field_users(&self) -> Vec<usize> {
        let rt = self.tx.max_radius();
        self.users
            .iter()
            .enumerate()
            .filter(|(_, u)| !u.placement.is_far_field(self.far_field_factor, rt, u.array.max_radius()))
            .map(|(i, _)| i)
            .collect()
    }

    /// Training overhead factor 1 − T_t W̃ / (T_c W).
    pub fn training_overhead_factor(&self) -> f64 {
        1.0 - (self.training_symbols * self.carriers.training_count) as f64
            / (self.coherence_symbols * self.carriers.data_count) as f64
    }

    /// Single-UCA view of ring `ring` of every array.
    pub fn ring_view(&self, ring: usize) -> Self {
        let mut c = self.clone();
        c.tx = ArrayGeometry::Uca(self.tx.rings()[ring].clone());
        for (dst, src) in c.users.iter_mut().zip(&self.users) {
            dst.array = ArrayGeometry::Uca(src.array.rings()[ring].clone());
        }
        c
    }

    /// Copy with different placements.
    pub fn with_placements(&self, placements: &[SbsPlacement]) -> Self {
        let mut c = self.clone();
        for (u, p) in c.users.iter_mut().zip(placements) {
            u.placement = *p;
        }
        c
    }
}

/// Check every structural invariant and return the config unchanged.
pub fn validate_config(config: &SystemConfig) -> Result<SystemConfig> {
    config.tx.check()?;
    if config.users.is_empty() {
        return Err(Error::InvalidParameter("at least one user is required".into()));
    }
    let p = config.users.len();
    let rings = config.tx.ring_count();
    let m = config.users[0].array.element_count();
    for (i, u) in config.users.iter().enumerate() {
        u.array.check()?;
        u.placement.check()?;
        if u.array.element_count() != m {
            return Err(Error::DimensionMismatch(format!(
                "user {i} has {} elements per ring, user 0 has {m}",
                u.array.element_count()
            )));
        }
        if u.array.ring_count() != rings {
            return Err(Error::DimensionMismatch(format!(
                "user {i} has {} rings, transmitter has {rings}",
                u.array.ring_count()
            )));
        }
    }
    let n = config.tx.element_count();
    if n != p * m {
        return Err(Error::DimensionMismatch(format!("N = {n} but P*M = {p}*{m} = {}", p * m)));
    }
    config.carriers.check()?;
    ModeSet::check_list(&config.modes.data_modes, m)?;
    ModeSet::check_list(&config.modes.training_modes, m)?;
    if config.estimate_elevation && config.modes.training_zero_index().is_none() {
        return Err(Error::MissingZeroMode);
    }
    if !(config.beta.is_finite()) {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    if !config.noise.snr_db.is_finite() {
        return Err(Error::InvalidParameter("SNR must be finite".into()));
    }
    config.power.check()?;
    if config.coherence_symbols == 0 || config.training_symbols > config.coherence_symbols {
        return Err(Error::InvalidParameter(format!(
            "need T_t ({}) <= T_c ({}) and T_c > 0",
            config.training_symbols, config.coherence_symbols
        )));
    }
    if !(config.far_field_factor >= 0.0) {
        return Err(Error::InvalidParameter("far-field factor must be non-negative".into()));
    }
    if !config.allow_near_field {
        let rt = config.tx.max_radius();
        for (i, u) in config.users.iter().enumerate() {
            let threshold = config.far_field_factor * rt.max(u.array.max_radius());
            if u.placement.range < threshold {
                return Err(Error::NearField { user: i, range: u.placement.range, threshold });
            }
        }
    }
    Ok(config.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn centered_modes() {
        assert_eq!(ModeSet::centered(20), (-10..10).collect::<Vec<_>>());
        assert_eq!(ModeSet::centered(16), (-8..8).collect::<Vec<_>>());
    }

    #[test]
    fn carrier_grid_rejects_zero_training() {
        assert!(build_carrier_grid(9e9, 1.48e6, 4, 0).is_err());
        assert!(build_carrier_grid(9e9, 1.48e6, 4, 5).is_err());
        assert!(build_carrier_grid(-1.0, 1.48e6, 4, 1).is_err());
        assert!(build_carrier_grid(9e9, 0.0, 4, 1).is_err());
    }

    #[test]
    fn single_carrier_grid() {
        let g = build_carrier_grid(9e9, 1.48e6, 1, 1).unwrap();
        assert_eq!(g.wave_numbers().len(), 1);
    }

    #[test]
    fn mode_alias_detected() {
        assert!(matches!(ModeSet::check_list(&[0, 1, 1], 21), Err(Error::ModeAlias { .. })));
        assert!(matches!(ModeSet::check_list(&[11], 21), Err(Error::ModeUnresolvable { .. })));
        assert!(ModeSet::check_list(&[-10, 10], 21).is_ok());
    }
}
