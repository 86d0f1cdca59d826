//! Element positions and element-pair distances.
//!
//! The MBS array lies in the z = 0 plane centered at the origin. An SBS array is
//! parallel to it, centered at r(sinθ cosφ, sinθ sinφ, cosθ).

use crate::config::{SbsPlacement, UcaGeometry};

/// Cartesian position of transmit element `n`.
pub fn tx_element_position(tx: &UcaGeometry, n: usize) -> [f64; 3] {
    let a = tx.azimuth(n);
    [tx.radius * a.cos(), tx.radius * a.sin(), 0.0]
}

/// Cartesian position of the SBS array center.
pub fn rx_center(placement: &SbsPlacement) -> [f64; 3] {
    let (st, ct) = placement.elevation.sin_cos();
    let (sp, cp) = placement.azimuth.sin_cos();
    [placement.range * st * cp, placement.range * st * sp, placement.range * ct]
}

/// Cartesian position of receive element `m` of an SBS.
pub fn rx_element_position(rx: &UcaGeometry, m: usize, placement: &SbsPlacement) -> [f64; 3] {
    let c = rx_center(placement);
    let a = rx.azimuth(m);
    [c[0] + rx.radius * a.cos(), c[1] + rx.radius * a.sin(), c[2]]
}

/// Exact distance from transmit element `n` to receive element `m`.
pub fn exact_distance(n: usize, m: usize, tx: &UcaGeometry, rx: &UcaGeometry, placement: &SbsPlacement) -> f64 {
    exact_distance_angles(tx.radius, rx.radius, tx.azimuth(n), rx.azimuth(m), placement)
}

pub(crate) fn exact_distance_angles(rt: f64, rr: f64, phi_n: f64, alpha_m: f64, pl: &SbsPlacement) -> f64 {
    let r = pl.range;
    let st = pl.elevation.sin();
    let radicand = rt * rt + rr * rr + r * r + 2.0 * r * rr * st * (pl.azimuth - alpha_m).cos()
        - 2.0 * r * rt * st * (pl.azimuth - phi_n).cos()
        - 2.0 * rt * rr * (alpha_m - phi_n).cos();
    radicand.sqrt()
}

/// First-order far-field distance.
pub fn farfield_distance(n: usize, m: usize, tx: &UcaGeometry, rx: &UcaGeometry, placement: &SbsPlacement) -> f64 {
    farfield_distance_angles(tx.radius, rx.radius, tx.azimuth(n), rx.azimuth(m), placement)
}

pub(crate) fn farfield_distance_angles(rt: f64, rr: f64, phi_n: f64, alpha_m: f64, pl: &SbsPlacement) -> f64 {
    let r = pl.range;
    let st = pl.elevation.sin();
    r + rr * st * (pl.azimuth - alpha_m).cos() - rt * st * (pl.azimuth - phi_n).cos()
        - rt * rr / r * (alpha_m - phi_n).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn on_axis_equal_radii_gives_range() {
        let g = UcaGeometry::new(0.7, 8, 0.0).unwrap();
        let p = SbsPlacement::new(10.0, 0.0, 0.0).unwrap();
        assert!((exact_distance(0, 0, &g, &g, &p) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn on_axis_unequal_radii() {
        let tx = UcaGeometry::new(2.0, 8, 0.0).unwrap();
        let rx = UcaGeometry::new(1.0, 8, 0.0).unwrap();
        let p = SbsPlacement::new(10.0, 0.0, 0.0).unwrap();
        assert!((exact_distance(0, 0, &tx, &rx, &p) - 101f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn farfield_on_axis() {
        let tx = UcaGeometry::new(2.0, 8, 0.0).unwrap();
        let rx = UcaGeometry::new(1.0, 4, 0.0).unwrap();
        let p = SbsPlacement::new(50.0, 0.0, 0.3).unwrap();
        for n in 0..8 {
            for m in 0..4 {
                let want = 50.0 - 2.0 / 50.0 * (rx.azimuth(m) - tx.azimuth(n)).cos();
                assert!((farfield_distance(n, m, &tx, &rx, &p) - want).abs() < 1e-13);
            }
        }
    }
}
