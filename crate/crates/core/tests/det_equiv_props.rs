mod common;

use common::{db, disjoint, overlapping, small_scenario};
use hrs_sim::det_equiv::{hrs_asymptotic_sinrs, solve_fixed_point_from, DetEquiv, DEFAULT_MAX_ITER};
use hrs_sim::power_alloc::scenario_closed_form_split;
use hrs_sim::precoding::PowerSplit;
use proptest::prelude::*;
use std::f64::consts::LOG2_E;

const SWEEP: [f64; 7] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];

#[test]
fn scenario_terms_satisfy_type_invariants() {
    for sc in [disjoint(), overlapping()] {
        let de = DetEquiv::from_scenario(&sc, db(20.0)).unwrap();
        for t in &de.groups {
            assert!(t.fixed_point.m > 0.0);
            assert!(t.fixed_point.residual <= 1e-10);
            assert!(t.fixed_point.t.clone().cholesky().is_some());
            assert!((0.0..1.0).contains(&t.phi));
            assert!(t.kappa > 0.0);
            assert!(t.upsilon.iter().all(|&u| u >= 0.0));
        }
    }
}

#[test]
fn fixed_point_is_independent_of_the_start() {
    for sc in [disjoint(), overlapping()] {
        let p = db(30.0);
        let eps = sc.regularization(p);
        let (k, b) = (sc.users[0] as f64, sc.widths[0] as f64);
        for row in sc.reduced_covariances().iter().enumerate().map(|(g, r)| r[g].clone()) {
            let ms: Vec<f64> = [0.1, 1.0, 10.0]
                .iter()
                .map(|&m0| solve_fixed_point_from(&row, k, b, eps, 1e-14, DEFAULT_MAX_ITER, m0).unwrap().m)
                .collect();
            assert!((ms[0] - ms[1]).abs() <= 1e-10 && (ms[2] - ms[1]).abs() <= 1e-10, "{ms:?}");
        }
    }
}

#[test]
fn disjoint_cross_group_terms_vanish() {
    let de = DetEquiv::from_scenario(&disjoint(), db(30.0)).unwrap();
    for (g, t) in de.groups.iter().enumerate() {
        for (l, &u) in t.upsilon.iter().enumerate() {
            if l != g {
                assert!(u < 1e-6 * t.upsilon[g], "Υ[{g}][{l}] = {u:e}");
            }
        }
    }
}

#[test]
fn two_tier_saturates_with_imperfect_csit() {
    let sc = small_scenario(std::f64::consts::PI / 6.0, 0.4);
    let gamma = |snr: f64| hrs_sim::det_equiv::ttp_asymptotic_rate(&DetEquiv::from_scenario(&sc, db(snr)).unwrap()).1;
    let (r40, r50, r60) = (gamma(40.0), gamma(50.0), gamma(60.0));
    assert!(r50 - r40 < 0.1 && r60 - r50 < 0.01, "{r40} {r50} {r60}");
}

#[test]
fn closed_form_gain_is_never_negative() {
    for sc in [disjoint(), overlapping()] {
        for snr in SWEEP {
            let p = db(snr);
            let de = DetEquiv::from_scenario(&sc, p).unwrap();
            let (_, split) = scenario_closed_form_split(&sc, p).unwrap();
            let r = hrs_asymptotic_sinrs(&de, &split);
            assert!(r.gain >= -1e-12, "{snr} dB: {}", r.gain);
            assert!(r.outer_common >= 0.0 && r.inner_common >= 0.0 && r.private >= 0.0);
        }
    }
}

#[test]
fn high_snr_gain_bounds() {
    let p = db(30.0);
    let sc = disjoint();
    let de = DetEquiv::from_scenario(&sc, p).unwrap();
    let r = hrs_asymptotic_sinrs(&de, &scenario_closed_form_split(&sc, p).unwrap().1);
    let weak: f64 = r.gamma_ic.iter().map(|&s| (1.0 + s).log2() - LOG2_E).sum();
    assert!(r.gain >= weak);

    let sc = overlapping();
    let de = DetEquiv::from_scenario(&sc, p).unwrap();
    let r = hrs_asymptotic_sinrs(&de, &scenario_closed_form_split(&sc, p).unwrap().1);
    let oc = r.gamma_oc.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(r.gain >= (1.0 + oc).log2() - LOG2_E);
}

#[test]
fn closed_form_keeps_private_rates_close_to_two_tier() {
    for sc in [disjoint(), overlapping()] {
        let k_bar = sc.users[0] as f64;
        for snr in [30.0, 40.0, 50.0] {
            let p = db(snr);
            let de = DetEquiv::from_scenario(&sc, p).unwrap();
            let r = hrs_asymptotic_sinrs(&de, &scenario_closed_form_split(&sc, p).unwrap().1);
            let slack: f64 = r
                .gamma_p
                .iter()
                .zip(&r.gamma_ttp)
                .map(|(a, b)| k_bar * ((1.0 + a).log2() - (1.0 + b).log2()).abs())
                .sum();
            assert!(slack <= sc.groups() as f64 * k_bar * LOG2_E);
        }
    }
}

#[test]
fn edge_splits() {
    let sc = overlapping();
    let p = db(20.0);
    let de = DetEquiv::from_scenario(&sc, p).unwrap();
    let r = hrs_asymptotic_sinrs(&de, &PowerSplit::new(0.5, 1.0, p).unwrap());
    assert!(r.gamma_oc.iter().all(|&s| s == 0.0));
    let r = hrs_asymptotic_sinrs(&de, &PowerSplit::private_only(p));
    assert_eq!(r.gamma_p, r.gamma_ttp);
    assert!(r.gain.abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn private_sinr_never_exceeds_two_tier(alpha in 0.0001f64..=1.0, beta in 0.0001f64..=1.0, snr in -10.0f64..50.0) {
        let sc = small_scenario(std::f64::consts::PI / 3.0, 0.4);
        let p = db(snr);
        let de = DetEquiv::from_scenario(&sc, p).unwrap();
        let r = hrs_asymptotic_sinrs(&de, &PowerSplit::new(alpha, beta, p).unwrap());
        for (a, b) in r.gamma_p.iter().zip(&r.gamma_ttp) {
            prop_assert!(*a <= *b * (1.0 + 1e-12));
        }
    }
}
