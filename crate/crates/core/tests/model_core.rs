mod common;

use common::*;
use muoam::config::{build_carrier_grid, validate_config, ArrayGeometry, ModeSet, UcaGeometry, SPEED_OF_LIGHT};
use muoam::{Error, C64};
use proptest::prelude::*;

#[test]
fn reference_dimensions_accepted() {
    let c = reference();
    assert_eq!((c.tx_elements(), c.user_count(), c.rx_elements()), (63, 3, 21));
    assert_eq!(validate_config(&c).unwrap(), c);
}

#[test]
fn tx_count_must_equal_p_times_m() {
    let mut c = reference();
    c.tx = ArrayGeometry::Uca(UcaGeometry::new(c.tx.max_radius(), 64, 0.0).unwrap());
    assert!(matches!(validate_config(&c), Err(Error::DimensionMismatch(_))));
}

#[test]
fn mode_at_half_m_unresolvable() {
    let mut c = reference();
    c.modes = ModeSet::new(vec![0, 11], c.modes.training_modes.clone());
    assert!(matches!(validate_config(&c), Err(Error::ModeUnresolvable { .. })));
}

#[test]
fn training_needs_zero_mode_for_elevation() {
    let mut c = reference();
    c.modes = ModeSet::new(c.modes.data_modes.clone(), vec![1, 2, 3]);
    assert!(matches!(validate_config(&c), Err(Error::MissingZeroMode)));
    c.estimate_elevation = false;
    assert!(validate_config(&c).is_ok());
}

#[test]
fn near_field_is_downgradable() {
    let mut c = with_users(&[deg(12.0, 18.0, 2.0)]);
    c.far_field_factor = 20.0;
    assert!(matches!(validate_config(&c), Err(Error::NearField { .. })));
    c.allow_near_field = true;
    assert!(validate_config(&c).is_ok());
}

#[test]
fn carrier_grid_examples() {
    let g = build_carrier_grid(9e9, 1.48e6, 128, 64).unwrap();
    let k1 = 2.0 * std::f64::consts::PI * 9e9 / SPEED_OF_LIGHT;
    assert!((g.wave_number(0) - k1).abs() < 1e-12 * k1);
    assert!((k1 - 188.62).abs() < 0.01);
    assert_eq!(g.training_wave_numbers().len(), 64);
    assert_eq!(&g.wave_numbers()[..64], &g.training_wave_numbers()[..]);
    assert_eq!(build_carrier_grid(9e9, 1.48e6, 1, 1).unwrap().wave_numbers().len(), 1);
    assert!(build_carrier_grid(9e9, 1.48e6, 128, 0).is_err());
    assert!(build_carrier_grid(0.0, 1.48e6, 128, 64).is_err());
    assert!(build_carrier_grid(9e9, -1.0, 128, 64).is_err());
    assert!(build_carrier_grid(9e9, 1.48e6, 4, 8).is_err());
}

#[test]
fn unambiguous_range_is_c_over_df() {
    let g = build_carrier_grid(9e9, 1.48e6, 128, 64).unwrap();
    assert!((g.unambiguous_range() - SPEED_OF_LIGHT / 1.48e6).abs() < 1e-9);
    assert!((g.unambiguous_range() - 202.56).abs() < 0.01);
}

fn phasor_sum(g: &UcaGeometry, l: i64) -> C64 {
    g.azimuths().iter().map(|&a| C64::from_polar(1.0, l as f64 * a)).sum()
}

proptest! {
    #[test]
    fn uca_phasor_sum(n in 2usize..40, l in -100i64..100, phi0 in -3.0f64..3.0) {
        let g = UcaGeometry::new(1.0, n, phi0).unwrap();
        let s = phasor_sum(&g, l);
        if l.rem_euclid(n as i64) == 0 {
            let want = C64::from_polar(n as f64, l as f64 * phi0);
            prop_assert!((s - want).norm() < 1e-9 * n as f64);
        } else {
            prop_assert!(s.norm() < 1e-10 * n as f64 * (1.0 + l.abs() as f64));
        }
    }

    #[test]
    fn azimuths_strictly_increase(n in 2usize..200, phi0 in 0.0f64..1.0) {
        let a = UcaGeometry::new(0.5, n, phi0).unwrap().azimuths();
        prop_assert!(a.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(a[n - 1] - a[0] < std::f64::consts::TAU);
    }

    #[test]
    fn wave_numbers_strictly_increase(f in 1e8f64..1e11, df in 1e3f64..1e7, w in 1usize..300) {
        let g = build_carrier_grid(f, df, w, w).unwrap();
        let k = g.wave_numbers();
        prop_assert!(k[0] > 0.0);
        prop_assert!(k.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn validation_is_idempotent(r in 15.0f64..80.0, th in 0.0f64..60.0, ph in -179.0f64..179.0) {
        let c = with_users(&[deg(r, th, ph), deg(r + 5.0, th / 2.0, ph / 2.0)]);
        let again = validate_config(&c).unwrap();
        prop_assert_eq!(validate_config(&again).unwrap(), again);
    }

    #[test]
    fn modes_distinct_mod_m(m in 3usize..40) {
        let modes = ModeSet::centered(if m % 2 == 1 { m } else { m - 1 });
        prop_assert!(ModeSet::check_list(&modes, m).is_ok());
        let mut doubled = modes.clone();
        doubled.push(modes[0] + m as i32);
        prop_assert!(ModeSet::check_list(&doubled, m).is_err());
    }
}
