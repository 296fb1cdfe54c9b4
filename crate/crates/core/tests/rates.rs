mod common;

use common::{db, small_scenario};
use hrs_sim::precoding::{PowerSplit, PrecoderSet};
use hrs_sim::rate_mc::{
    hrs_gain_samples, hrs_rates, hrs_report_from_gains, hrs_sinrs, hrs_sinrs_from_gains, link_gains, monte_carlo,
    scheduled_rates, sum_rate_from_gains, ttp_rates, LinkGains, ScheduleLevel, Scheme, UserGains,
};
use hrs_sim::linalg::CMat;
use proptest::prelude::*;

fn scenario() -> hrs_sim::Scenario {
    small_scenario(std::f64::consts::PI / 5.0, 0.4)
}

#[test]
fn full_private_split_reduces_to_two_tier() {
    let sc = scenario();
    for snr in [0.0, 15.0, 30.0] {
        let p = db(snr);
        let eps = sc.regularization(p);
        for i in 0..4 {
            let draw = sc.draw(9, i).unwrap();
            let pre = PrecoderSet::build(&sc.outer, &draw, eps).unwrap();
            let inner: Vec<CMat> = pre.groups.iter().map(|g| g.inner.clone()).collect();
            let hrs = hrs_rates(&hrs_sinrs(&draw, &pre, &PowerSplit::private_only(p)));
            let ttp = ttp_rates(&draw, &sc.outer, &inner, p);
            assert_eq!(hrs.private, ttp.private);
            assert_eq!(hrs.sum, ttp.sum);
            assert_eq!(hrs.outer_common, 0.0);
            assert!(hrs.inner_common.iter().all(|&r| r == 0.0));
        }
    }
}

/// Two groups of one user each, gains chosen by hand.
fn toy_gains() -> LinkGains {
    LinkGains {
        group_sizes: vec![1, 1],
        users: vec![
            UserGains { group: 0, stream: 0, outer_common: 0.5, inner_common: vec![2.0, 0.1], private: vec![3.0, 0.2] },
            UserGains { group: 1, stream: 1, outer_common: 0.8, inner_common: vec![0.3, 1.5], private: vec![0.4, 2.5] },
        ],
    }
}

#[test]
fn two_user_scalar_oracle() {
    let split = PowerSplit::new(0.6, 0.5, 10.0).unwrap();
    let (p_oc, p_ic, p_p) = (5.0, 10.0 * 0.5 * 0.4 / 2.0, 10.0 * 0.5 * 0.6 / 2.0);
    let t = hrs_sinrs_from_gains(&toy_gains(), &split);
    // user 0
    let den_p0 = 1.0 + p_ic * 0.1 + p_p * 0.2;
    let den_ic0 = den_p0 + p_p * 3.0;
    let den_oc0 = den_ic0 + p_ic * 2.0;
    assert!((t.private[0][0] - p_p * 3.0 / den_p0).abs() < 1e-12);
    assert!((t.inner_common[0][0] - p_ic * 2.0 / den_ic0).abs() < 1e-12);
    assert!((t.outer_common[0][0] - p_oc * 0.5 / den_oc0).abs() < 1e-12);
    // user 1
    let den_p1 = 1.0 + p_ic * 0.3 + p_p * 0.4;
    let den_ic1 = den_p1 + p_p * 2.5;
    let den_oc1 = den_ic1 + p_ic * 1.5;
    assert!((t.private[1][0] - p_p * 2.5 / den_p1).abs() < 1e-12);
    assert!((t.outer_common[1][0] - p_oc * 0.8 / den_oc1).abs() < 1e-12);

    let r = hrs_rates(&t);
    let oc = (1.0 + (p_oc * 0.5 / den_oc0).min(p_oc * 0.8 / den_oc1)).log2();
    assert!((r.outer_common - oc).abs() < 1e-12);
    assert!((r.sum - (r.outer_common + r.inner_common_total() + r.private_total())).abs() < 1e-12);
}

#[test]
fn vanishing_power_gives_vanishing_rates() {
    let sc = scenario();
    let split = PowerSplit::new(0.5, 0.5, 1e-9).unwrap();
    let samples = hrs_gain_samples(&sc, 1e-9, 4, 2, None).unwrap();
    let r = hrs_report_from_gains(&samples, &split, Scheme::Hrs).unwrap();
    assert!(r.sum < 1e-6);
}

#[test]
fn sic_layers_are_ordered_by_interference() {
    let sc = scenario();
    let p = db(20.0);
    let samples = hrs_gain_samples(&sc, p, 8, 4, None).unwrap();
    let split = PowerSplit::new(0.4, 0.6, p).unwrap();
    for g in &samples {
        let t = hrs_sinrs_from_gains(g, &split);
        // Removing a layer's own power from the denominator can only help.
        let g_count = g.group_sizes.len();
        for u in &g.users {
            let k = u.stream - g.group_sizes[..u.group].iter().sum::<usize>();
            let p_ic = split.inner_common_power(g_count) * u.inner_common[u.group];
            let p_p = split.private_power(g_count, g.group_sizes[u.group]) * u.private[u.stream];
            let den_p = p_p / t.private[u.group][k];
            let den_ic = p_ic / t.inner_common[u.group][k];
            assert!(den_ic >= den_p);
            assert!((den_ic - den_p - p_p).abs() <= 1e-9 * den_ic);
        }
    }
}

#[test]
fn common_rate_is_bounded_by_every_member() {
    let sc = scenario();
    let p = db(25.0);
    let split = PowerSplit::new(0.3, 0.5, p).unwrap();
    for i in 0..5 {
        let draw = sc.draw(1, i).unwrap();
        let pre = PrecoderSet::build(&sc.outer, &draw, sc.regularization(p)).unwrap();
        let t = hrs_sinrs(&draw, &pre, &split);
        let r = hrs_rates(&t);
        for s in t.outer_common.iter().flatten() {
            assert!(r.outer_common <= (1.0 + s).log2() + 1e-12);
        }
        for (g, sinrs) in t.inner_common.iter().enumerate() {
            for s in sinrs {
                assert!(r.inner_common[g] <= (1.0 + s).log2() + 1e-12);
            }
        }
    }
}

#[test]
fn two_tier_rate_grows_with_power() {
    let sc = scenario();
    let mut last: Option<(f64, f64)> = None;
    for snr in [0.0, 10.0, 20.0, 30.0] {
        let r = monte_carlo(&sc, Scheme::Ttp, &PowerSplit::private_only(db(snr)), 100, 5, None).unwrap();
        if let Some((prev, se)) = last {
            assert!(r.sum >= prev - 2.0 * (se + r.stderr));
        }
        last = Some((r.sum, r.stderr));
    }
}

#[test]
fn single_user_makes_scheduling_levels_agree() {
    let array = hrs_sim::channel_model::AntennaArray::uca(16).unwrap();
    let stats = vec![hrs_sim::channel_model::GroupStatistics::one_ring(&array, 0.0, 0.4, 4, 0.2).unwrap()];
    let sc = hrs_sim::Scenario::new(array, stats, vec![1], vec![3]).unwrap();
    for i in 0..5 {
        let draw = sc.draw(6, i).unwrap();
        let a = scheduled_rates(&draw, &sc.outer, 100.0, ScheduleLevel::Group);
        let b = scheduled_rates(&draw, &sc.outer, 100.0, ScheduleLevel::System);
        assert!((a.sum - b.sum).abs() < 1e-12);
    }
}

#[test]
fn system_scheduling_gains_one_bit_per_doubling_without_errors() {
    let sc = small_scenario(std::f64::consts::PI / 5.0, 0.0);
    let lo = monte_carlo(&sc, Scheme::ScheduledSystem, &PowerSplit::private_only(db(27.0)), 200, 3, None).unwrap();
    let hi = monte_carlo(&sc, Scheme::ScheduledSystem, &PowerSplit::private_only(db(30.0)), 200, 3, None).unwrap();
    let slope = hi.sum - lo.sum;
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn single_draw_average_is_the_draw() {
    let sc = scenario();
    let p = db(10.0);
    let split = PowerSplit::new(0.5, 0.7, p).unwrap();
    let mc = monte_carlo(&sc, Scheme::Hrs, &split, 1, 21, None).unwrap();
    let draw = sc.draw(21, 0).unwrap();
    let pre = PrecoderSet::build(&sc.outer, &draw, sc.regularization(p)).unwrap();
    let one = hrs_rates(&hrs_sinrs(&draw, &pre, &split));
    assert_eq!(mc.sum, one.sum);
    assert_eq!(mc.stderr, 0.0);
    assert_eq!(mc.draws, 1);
}

#[test]
fn thread_count_does_not_change_results() {
    let sc = scenario();
    let split = PowerSplit::new(0.2, 0.9, db(20.0)).unwrap();
    let one = monte_carlo(&sc, Scheme::Hrs, &split, 24, 8, Some(1)).unwrap();
    let four = monte_carlo(&sc, Scheme::Hrs, &split, 24, 8, Some(4)).unwrap();
    assert_eq!(one, four);
}

#[test]
fn gain_tables_reproduce_direct_evaluation() {
    let sc = scenario();
    let p = db(15.0);
    let samples = hrs_gain_samples(&sc, p, 3, 12, None).unwrap();
    for (i, g) in samples.iter().enumerate() {
        let draw = sc.draw(12, i as u64).unwrap();
        let pre = PrecoderSet::build(&sc.outer, &draw, sc.regularization(p)).unwrap();
        assert_eq!(g, &link_gains(&draw, &pre));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rates_are_finite_and_consistent(alpha in 0.001f64..=1.0, beta in 0.001f64..=1.0, snr in -10.0f64..40.0) {
        let split = PowerSplit::new(alpha, beta, db(snr)).unwrap();
        let t = hrs_sinrs_from_gains(&toy_gains(), &split);
        let r = hrs_rates(&t);
        prop_assert!(r.sum.is_finite() && r.sum >= 0.0);
        prop_assert!((r.sum - (r.outer_common + r.inner_common_total() + r.private_total())).abs() < 1e-9);
        for s in t.outer_common.iter().chain(&t.inner_common).chain(&t.private).flatten() {
            prop_assert!(*s >= 0.0);
        }
    }

    #[test]
    fn fast_sum_rate_is_bitwise_equal(alpha in 0.001f64..=1.0, beta in 0.001f64..=1.0, snr in -10.0f64..40.0) {
        let split = PowerSplit::new(alpha, beta, db(snr)).unwrap();
        let g = toy_gains();
        prop_assert_eq!(sum_rate_from_gains(&g, &split), hrs_rates(&hrs_sinrs_from_gains(&g, &split)).sum);
    }
}

#[test]
fn fast_sum_rate_matches_on_scenario_draws() {
    let sc = scenario();
    let p = db(25.0);
    let samples = hrs_gain_samples(&sc, p, 6, 30, None).unwrap();
    for (a, b) in [(1.0, 1.0), (0.2, 0.3), (0.01, 1.0), (1.0, 0.01)] {
        let split = PowerSplit::new(a, b, p).unwrap();
        for g in &samples {
            assert_eq!(sum_rate_from_gains(g, &split), hrs_rates(&hrs_sinrs_from_gains(g, &split)).sum);
        }
    }
}
