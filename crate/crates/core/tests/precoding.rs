mod common;

use muoam::channel::ChannelMode;
use muoam::config::SbsPlacement;
use muoam::experiment::{with_mode_counts, Downlink};
use muoam::link::{detect_symbols, transmit_downlink};
use muoam::oam::EffectiveOamChannel;
use muoam::precoding::{
    build_precoder, comode_null_basis, condition_number, decoupling_at, intermode_inverse, stack_other_users,
    verify_decoupling, PrecodingSet,
};
use muoam::rng::{complex_gaussian, stream};
use muoam::{CMat, CVec, C64};
use proptest::prelude::*;

use common::{deg, reference, with_users};

fn gaussian(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = stream(seed, 0, 0);
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng, 1.0))
}

fn unitary(n: usize, seed: u64) -> CMat {
    gaussian(n, n, seed).qr().q()
}

fn block(h: &CMat, p: usize, d: usize) -> CMat {
    h.rows(p * d, d).into_owned()
}

#[test]
fn stacking_examples() {
    let h = CMat::from_fn(6, 6, |r, c| C64::new(r as f64, c as f64));
    let s = stack_other_users(&h, 1, 2).unwrap();
    assert_eq!(s.nrows(), 4);
    assert_eq!(s.rows(0, 2), h.rows(0, 2));
    assert_eq!(s.rows(2, 2), h.rows(4, 2));
    let two = CMat::from_fn(4, 4, |r, c| C64::new((r * 4 + c) as f64, 0.0));
    assert_eq!(stack_other_users(&two, 0, 2).unwrap(), two.rows(2, 2).into_owned());
    assert!(stack_other_users(&two.rows(0, 2).into_owned(), 0, 2).is_err());
}

#[test]
fn null_basis_of_random_full_rank_stack() {
    let (users, d) = (3, 5);
    let hhat = gaussian((users - 1) * d, users * d, 1);
    let e = comode_null_basis(&hhat, d).unwrap();
    assert!((e.adjoint() * &e - CMat::identity(d, d)).norm() < 1e-12);
    assert!((&hhat * &e).norm() < 1e-12 * hhat.norm());
    // One more column would leave the null space: its dimension is exactly d.
    let wider = comode_null_basis(&hhat, d + 1).unwrap();
    assert!((&hhat * &wider).norm() > 1e-3 * hhat.norm());
    let zero = comode_null_basis(&CMat::zeros(4, 6), 2).unwrap();
    assert_eq!(zero, CMat::identity(6, 6).columns(4, 2).into_owned());
    assert!(comode_null_basis(&hhat, 16).is_err());
}

#[test]
fn intermode_inverse_examples() {
    let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, -2.0), C64::new(0.5, 0.5)]));
    let (g, cond) = intermode_inverse(&d, &CMat::identity(3, 3), 0).unwrap();
    let want = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(1.0 / 3.0, 0.0), C64::new(0.0, 0.5), C64::new(1.0, -1.0)]));
    assert!((g - want).norm() < 1e-14);
    assert!((cond - 3.0 / 0.5f64.hypot(0.5)).abs() < 1e-12);
    let u = gaussian(4, 1, 2);
    let rank_one = &u * u.adjoint();
    assert!(intermode_inverse(&rank_one, &CMat::identity(4, 4), 0).is_err());
}

#[test]
fn zero_precoder_leaves_identity_residual() {
    let h = gaussian(6, 6, 3);
    let r = decoupling_at(&h, &CMat::zeros(6, 6), 3, 2);
    for v in r.inter_mode {
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }
    assert!(r.co_mode.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn reference_scenario_decouples_exactly() {
    let dl = Downlink::new(&reference(), ChannelMode::Farfield).unwrap();
    let set = &dl.ideal;
    let d = set.block;
    for (w, h) in dl.effective.matrices.iter().enumerate() {
        for p in 0..3 {
            let ep = set.e[w].columns(p * d, d).into_owned();
            assert!((ep.adjoint() * &ep - CMat::identity(d, d)).norm() < 1e-10);
            for q in (0..3).filter(|&q| q != p) {
                let hq = block(h, q, d);
                assert!((&hq * &ep).norm() < 1e-10 * hq.norm(), "w {w} p {p} q {q}");
            }
            let gp = set.g[w].view((p * d, p * d), (d, d)).into_owned();
            let a = block(h, p, d) * &ep;
            let resid = (&a * &gp - CMat::identity(d, d)).norm();
            // User 3 sits at θ = 2° where cond(H^p E_p) reaches ~6e7, so rounding
            // alone leaves about ε‖A‖‖G‖ in the product.
            let floor = 4.0 * f64::EPSILON * a.norm() * gp.norm();
            assert!(resid < 1e-10f64.max(floor), "w {w} p {p}: {resid:e}");
            if p == 0 {
                assert!(resid < 1e-10);
            }
        }
    }
    // Forming H·P in double precision cannot resolve below ε‖H‖‖P‖.
    for ((h, pw), r) in dl.effective.matrices.iter().zip(&set.p).zip(verify_decoupling(&dl.effective, set)) {
        let floor = 8.0 * f64::EPSILON * h.norm() * pw.norm();
        assert!(r.inter_mode[0] < 1e-9);
        assert!(r.inter_mode.iter().chain(r.co_mode.iter().flatten()).all(|&v| v < 1e-9f64.max(floor)));
        assert!(r.normalized_total < 1e-9f64.max(floor));
    }
}

#[test]
fn noiseless_cascade_returns_the_symbols() {
    // Eight modes keep every H^p E_p below cond 1e3, so the chain is exact to rounding.
    let c = with_mode_counts(&reference(), Some(8), None).unwrap();
    let dl = Downlink::new(&c, ChannelMode::Farfield).unwrap();
    let n = dl.ideal.users * dl.ideal.block;
    let mut rng = stream(4, 0, 0);
    let symbols: Vec<CVec> = (0..dl.channel.subcarriers()).map(|_| CVec::from_fn(n, |_, _| complex_gaussian(&mut rng, 1.0))).collect();
    let y = transmit_downlink(&symbols, &dl.ideal, &dl.transform, &dl.channel, 0.0, &mut rng).unwrap();
    let d = dl.ideal.block;
    for (w, per_user) in y.iter().enumerate() {
        for (p, yp) in per_user.iter().enumerate() {
            let x = detect_symbols(yp, &dl.transform);
            let s = symbols[w].rows(p * d, d);
            assert!((&x - s).camax() < 1e-9, "w {w} p {p}: {:e}", (&x - s).camax());
        }
    }
}

#[test]
fn single_user_reduces_to_channel_inverse() {
    let c = with_users(&[deg(20.0, 0.0, 0.0)]);
    let dl = Downlink::new(&c, ChannelMode::Farfield).unwrap();
    let set = &dl.ideal;
    let n = set.block;
    for (w, h) in dl.effective.matrices.iter().enumerate() {
        assert_eq!(set.e[w], CMat::identity(n, n));
        assert!((&set.p[w] - h.clone().try_inverse().unwrap()).norm() < 1e-9 * set.p[w].norm());
        assert!((h * &set.p[w] - CMat::identity(n, n)).norm() < 1e-9);
    }
}

#[test]
fn range_error_degrades_decoupling_monotonically() {
    let dl = Downlink::new(&reference(), ChannelMode::Farfield).unwrap();
    let truth = dl.config.placements();
    let mut last = -1.0;
    for delta in [0.0, 0.0025, 0.005, 0.01, 0.02, 0.04] {
        let mut est = truth.clone();
        est[0] = SbsPlacement::new(truth[0].range + delta, truth[0].elevation, truth[0].azimuth).unwrap();
        let set = dl.precoder_from(&est).unwrap();
        let res = verify_decoupling(&dl.effective, &set);
        let mean = res.iter().map(|r| r.normalized_total).sum::<f64>() / res.len() as f64;
        assert!(mean > last, "delta {delta}: {mean:e} after {last:e}");
        last = mean;
    }
}

fn effective_of(matrices: Vec<CMat>, users: usize, block: usize) -> EffectiveOamChannel {
    EffectiveOamChannel { users, block, matrices }
}

fn product(set: &PrecodingSet, h: &EffectiveOamChannel) -> Vec<CMat> {
    h.matrices.iter().zip(&set.p).map(|(a, b)| a * b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn null_space_residual_is_invariant_to_left_unitary(seed in 0u64..10_000) {
        let hhat = gaussian(8, 12, seed);
        let q = unitary(8, seed + 1);
        let e1 = comode_null_basis(&hhat, 4).unwrap();
        let e2 = comode_null_basis(&(&q * &hhat), 4).unwrap();
        let r1 = (&hhat * &e1).norm();
        let r2 = (&hhat * &e2).norm();
        prop_assert!((r1 - r2).abs() < 1e-12 * hhat.norm());
        // Same subspace, possibly a different basis.
        prop_assert!((&e1 * e1.adjoint() - &e2 * e2.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn scaling_the_channel_scales_g_inversely(seed in 0u64..10_000, re in 0.1f64..5.0, im in -5.0f64..5.0) {
        let alpha = C64::new(re, im);
        let mats: Vec<CMat> = (0..2).map(|k| gaussian(9, 9, seed * 7 + k)).collect();
        let base = effective_of(mats.clone(), 3, 3);
        let scaled = effective_of(mats.iter().map(|m| m * alpha).collect(), 3, 3);
        let a = build_precoder(&base).unwrap();
        let b = build_precoder(&scaled).unwrap();
        for (pa, pb) in product(&a, &base).iter().zip(product(&b, &scaled)) {
            prop_assert!((pa - pb).norm() < 1e-9 * pa.norm());
        }
        for w in 0..2 {
            for p in 0..3 {
                // G_p depends on the basis E_p; compare the precoder columns E_p G_p, which do not.
                let ca = a.user_columns(w, p);
                let cb = b.user_columns(w, p);
                prop_assert!((&ca - &cb * alpha).norm() < 1e-8 * ca.norm());
            }
            prop_assert!((condition_number(&mats[w]) - condition_number(&(&mats[w] * alpha))).abs() < 1e-6 * condition_number(&mats[w]));
        }
    }
}
