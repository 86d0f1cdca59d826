//! Reference scenarios and the human-readable scenario file format.
//!
//! Scenario files are TOML. Frequencies are in Hz, angles in degrees and
//! lengths either plain meters or strings such as `"30 lambda"` / `"0.5 m"`,
//! resolved against the base frequency. The top-level `schema_version` must
//! equal [`SCHEMA_VERSION`].

use serde::{Deserialize, Serialize};

use crate::config::{
    build_carrier_grid, validate_config, ArrayGeometry, ModeSet, NoiseModel, PowerModel, SbsPlacement, SystemConfig,
    UcaGeometry, UccaGeometry, UserConfig, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Base carrier of every reference scenario, Hz.
pub const BASE_FREQUENCY: f64 = 9e9;
/// Subcarrier spacing, Hz.
pub const SUBCARRIER_SPACING: f64 = 1.48e6;

/// Reference user positions (range m, elevation deg, azimuth deg).
pub const REFERENCE_USERS: [(f64, f64, f64); 3] = [(12.0, 18.0, 2.0), (24.0, 10.0, 10.0), (36.0, 2.0, 18.0)];

/// UCCA radii in wavelengths, innermost first (transmitter, receiver).
pub const UCCA_TX_RADII: [f64; 4] = [7.5, 15.0, 22.5, 30.0];
pub const UCCA_RX_RADII: [f64; 4] = [3.75, 7.5, 11.25, 15.0];

/// Knobs of the reference scenarios.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceScenario {
    pub data_modes: usize,
    pub training_modes: usize,
    pub data_subcarriers: usize,
    pub training_subcarriers: usize,
    pub rings: usize,
    pub snr_db: f64,
}

impl Default for ReferenceScenario {
    fn default() -> Self {
        Self { data_modes: 20, training_modes: 20, data_subcarriers: 128, training_subcarriers: 64, rings: 1, snr_db: 20.0 }
    }
}

impl ReferenceScenario {
    /// Three users, M = 21, N = 63, R_t = 30λ, R_r = 15λ at 9 GHz (UCA), or the
    /// four-ring UCCA with [`UCCA_TX_RADII`] / [`UCCA_RX_RADII`].
    pub fn build(&self) -> Result<SystemConfig> {
        let lambda = SPEED_OF_LIGHT / BASE_FREQUENCY;
        let m = 21;
        let p = REFERENCE_USERS.len();
        let array = |radii: &[f64], count: usize| -> Result<ArrayGeometry> {
            if self.rings == 1 {
                Ok(ArrayGeometry::Uca(UcaGeometry::new(radii[radii.len() - 1] * lambda, count, 0.0)?))
            } else {
                let start = radii.len().checked_sub(self.rings).ok_or_else(|| {
                    Error::InvalidParameter(format!("at most {} rings are defined", radii.len()))
                })?;
                let rings = radii[start..].iter().map(|r| UcaGeometry::new(r * lambda, count, 0.0)).collect::<Result<_>>()?;
                Ok(ArrayGeometry::Ucca(UccaGeometry::new(rings)?))
            }
        };
        let tx = array(&UCCA_TX_RADII, p * m)?;
        let rx = array(&UCCA_RX_RADII, m)?;
        let users = REFERENCE_USERS
            .iter()
            .map(|&(r, t, a)| Ok(UserConfig { array: rx.clone(), placement: SbsPlacement::from_degrees(r, t, a)? }))
            .collect::<Result<Vec<_>>>()?;
        let config = SystemConfig {
            tx,
            users,
            carriers: build_carrier_grid(BASE_FREQUENCY, SUBCARRIER_SPACING, self.data_subcarriers, self.training_subcarriers)?,
            modes: ModeSet::new(ModeSet::centered(self.data_modes), ModeSet::centered(self.training_modes)),
            beta: 1.0,
            noise: NoiseModel::new(self.snr_db),
            power: PowerModel::default(),
            coherence_symbols: 512,
            training_symbols: self.training_modes,
            far_field_factor: 10.0,
            allow_near_field: false,
            estimate_elevation: true,
        };
        validate_config(&config)
    }
}

/// Length in meters or a string with a `m` / `lambda` unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Meters(f64),
    Text(String),
}

impl Length {
    pub fn resolve(&self, wavelength: f64) -> Result<f64> {
        match self {
            Length::Meters(v) => Ok(*v),
            Length::Text(s) => {
                let mut parts = s.split_whitespace();
                let value: f64 = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad length {s:?}")))?;
                match (parts.next(), parts.next()) {
                    (Some("lambda"), None) => Ok(value * wavelength),
                    (Some("m"), None) | (None, None) => Ok(value),
                    _ => Err(Error::Parse(format!("bad length unit in {s:?}; use \"m\" or \"lambda\""))),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSection {
    pub base_frequency_hz: f64,
    pub spacing_hz: f64,
    pub data_count: usize,
    pub training_count: usize,
}

/// One ring or several concentric rings (`radii`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<Length>>,
    pub element_count: usize,
    #[serde(default)]
    pub initial_angle_deg: f64,
}

impl ArraySection {
    fn resolve(&self, wavelength: f64) -> Result<ArrayGeometry> {
        let phase = self.initial_angle_deg.to_radians();
        match (&self.radius, &self.radii) {
            (Some(r), None) => Ok(ArrayGeometry::Uca(UcaGeometry::new(r.resolve(wavelength)?, self.element_count, phase)?)),
            (None, Some(rs)) => {
                let rings = rs
                    .iter()
                    .map(|r| UcaGeometry::new(r.resolve(wavelength)?, self.element_count, phase))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ArrayGeometry::Ucca(UccaGeometry::new(rings)?))
            }
            _ => Err(Error::Parse("array needs exactly one of `radius` or `radii`".into())),
        }
    }

    fn from_geometry(g: &ArrayGeometry) -> Self {
        let rings = g.rings();
        let (radius, radii) = match g {
            ArrayGeometry::Uca(u) => (Some(Length::Meters(u.radius)), None),
            ArrayGeometry::Ucca(_) => (None, Some(rings.iter().map(|r| Length::Meters(r.radius)).collect())),
        };
        Self { radius, radii, element_count: rings[0].element_count, initial_angle_deg: rings[0].initial_angle.to_degrees() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    pub range_m: f64,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

/// Explicit lists or a count of centered modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_count: Option<usize>,
}

fn pick_modes(list: &Option<Vec<i32>>, count: Option<usize>, what: &str) -> Result<Vec<i32>> {
    match (list, count) {
        (Some(l), None) => Ok(l.clone()),
        (None, Some(c)) => Ok(ModeSet::centered(c)),
        _ => Err(Error::Parse(format!("{what} modes need exactly one of a list or a count"))),
    }
}

fn default_factor() -> f64 {
    10.0
}
fn default_true() -> bool {
    true
}
fn default_beta() -> f64 {
    1.0
}

/// Scenario file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub carriers: CarrierSection,
    pub tx: ArraySection,
    /// Array shared by every SBS.
    pub rx: ArraySection,
    pub users: Vec<UserSection>,
    pub modes: ModeSection,
    pub snr_db: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub power: Option<PowerModel>,
    pub coherence_symbols: usize,
    /// Defaults to the number of training modes.
    #[serde(default)]
    pub training_symbols: Option<usize>,
    #[serde(default = "default_factor")]
    pub far_field_factor: f64,
    #[serde(default)]
    pub allow_near_field: bool,
    #[serde(default = "default_true")]
    pub estimate_elevation: bool,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: toml::Value = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match raw.get("schema_version").and_then(|v| v.as_integer()) {
            Some(v) if v == SCHEMA_VERSION as i64 => {}
            Some(v) => return Err(Error::Parse(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"))),
            None => return Err(Error::Parse("missing integer schema_version".into())),
        }
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Resolve units and validate.
    pub fn to_config(&self) -> Result<SystemConfig> {
        let c = &self.carriers;
        let carriers = build_carrier_grid(c.base_frequency_hz, c.spacing_hz, c.data_count, c.training_count)?;
        let lambda = carriers.wavelength();
        let rx = self.rx.resolve(lambda)?;
        let users = self
            .users
            .iter()
            .map(|u| {
                Ok(UserConfig {
                    array: rx.clone(),
                    placement: SbsPlacement::from_degrees(u.range_m, u.elevation_deg, u.azimuth_deg)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let training = pick_modes(&self.modes.training, self.modes.training_count, "training")?;
        let config = SystemConfig {
            tx: self.tx.resolve(lambda)?,
            users,
            carriers,
            modes: ModeSet::new(pick_modes(&self.modes.data, self.modes.data_count, "data")?, training.clone()),
            beta: self.beta,
            noise: NoiseModel::new(self.snr_db),
            power: self.power.unwrap_or_default(),
            coherence_symbols: self.coherence_symbols,
            training_symbols: self.training_symbols.unwrap_or(training.len()),
            far_field_factor: self.far_field_factor,
            allow_near_field: self.allow_near_field,
            estimate_elevation: self.estimate_elevation,
        };
        validate_config(&config)
    }

    /// File form of a config (lengths in meters, angles in degrees).
    pub fn from_config(config: &SystemConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            carriers: CarrierSection {
                base_frequency_hz: config.carriers.base_frequency,
                spacing_hz: config.carriers.spacing,
                data_count: config.carriers.data_count,
                training_count: config.carriers.training_count,
            },
            tx: ArraySection::from_geometry(&config.tx),
            rx: ArraySection::from_geometry(&config.users[0].array),
            users: config
                .users
                .iter()
                .map(|u| UserSection {
                    range_m: u.placement.range,
                    elevation_deg: u.placement.elevation.to_degrees(),
                    azimuth_deg: u.placement.azimuth.to_degrees(),
                })
                .collect(),
            modes: ModeSection {
                data: Some(config.modes.data_modes.clone()),
                data_count: None,
                training: Some(config.modes.training_modes.clone()),
                training_count: None,
            },
            snr_db: config.noise.snr_db,
            beta: config.beta,
            power: Some(config.power),
            coherence_symbols: config.coherence_symbols,
            training_symbols: Some(config.training_symbols),
            far_field_factor: config.far_field_factor,
            allow_near_field: config.allow_near_field,
            estimate_elevation: config.estimate_elevation,
        }
    }
}

/// Parse and validate a scenario file.
pub fn load_scenario(text: &str) -> Result<SystemConfig> {
    ScenarioFile::parse(text)?.to_config()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_uca_dimensions() {
        let c = ReferenceScenario::default().build().unwrap();
        assert_eq!(c.tx_elements(), 63);
        assert_eq!(c.rx_elements(), 21);
        let lambda = SPEED_OF_LIGHT / 9e9;
        assert!((c.tx.max_radius() - 30.0 * lambda).abs() < 1e-15);
    }

    #[test]
    fn reference_ucca_rings() {
        let c = ReferenceScenario { rings: 4, ..Default::default() }.build().unwrap();
        assert_eq!(c.ring_count(), 4);
        assert_eq!(c.users[2].array.ring_count(), 4);
    }

    #[test]
    fn lengths() {
        assert_eq!(Length::Text("30 lambda".into()).resolve(0.1).unwrap(), 3.0);
        assert_eq!(Length::Text("0.5 m".into()).resolve(0.1).unwrap(), 0.5);
        assert_eq!(Length::Meters(2.0).resolve(0.1).unwrap(), 2.0);
        assert!(Length::Text("3 furlongs".into()).resolve(0.1).is_err());
    }

    #[test]
    fn rejects_other_schema() {
        let bad = "schema_version = 2\n";
        assert!(matches!(ScenarioFile::parse(bad), Err(Error::Parse(_))));
    }
}
