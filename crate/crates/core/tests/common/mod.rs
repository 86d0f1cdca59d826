#![allow(dead_code)]

use muoam::config::{validate_config, ArrayGeometry, SbsPlacement, SystemConfig, UcaGeometry, UserConfig};
use muoam::scenario::ReferenceScenario;

/// Three-user 9 GHz UCA scenario (M = 21, N = 63).
pub fn reference() -> SystemConfig {
    ReferenceScenario::default().build().unwrap()
}

pub fn wavelength(c: &SystemConfig) -> f64 {
    c.carriers.wavelength()
}

/// The reference arrays and carriers with a custom user list; N follows P·M.
pub fn with_users(placements: &[SbsPlacement]) -> SystemConfig {
    let base = reference();
    let rx = base.users[0].array.clone();
    let m = base.rx_elements();
    let tx = UcaGeometry::new(base.tx.max_radius(), placements.len() * m, 0.0).unwrap();
    let mut c = base.clone();
    c.tx = ArrayGeometry::Uca(tx);
    c.users = placements.iter().map(|&placement| UserConfig { array: rx.clone(), placement }).collect();
    validate_config(&c).unwrap()
}

pub fn deg(range: f64, elevation: f64, azimuth: f64) -> SbsPlacement {
    SbsPlacement::from_degrees(range, elevation, azimuth).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
