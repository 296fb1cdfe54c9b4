mod common;

use common::{db, disjoint, overlapping};
use hrs_sim::det_equiv::{hrs_asymptotic_sinrs, DetEquiv};
use hrs_sim::power_alloc::{
    closed_form_split, exhaustive_split, grid_argmax, interference_summary, scenario_closed_form_split,
    InterferenceSummary, SplitObjective,
};
use hrs_sim::precoding::PowerSplit;
use hrs_sim::rate_mc::{hrs_gain_samples, mean_sum_rate};
use proptest::prelude::*;

fn summary(inter: f64, intra: f64) -> InterferenceSummary {
    InterferenceSummary {
        inter_group: inter,
        intra_group: intra,
        inter_group_per_group: vec![inter],
        intra_group_per_group: vec![intra],
    }
}

#[test]
fn intra_level_grows_with_csit_error() {
    let sc = overlapping();
    let reduced = sc.reduced_covariances();
    let mut last_level = -1.0;
    let mut last_alpha = f64::INFINITY;
    for tau2 in [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let s = interference_summary(&reduced, tau2, 3, 15).unwrap();
        assert!(s.intra_group >= last_level);
        let split = closed_form_split(&summary(0.0, s.intra_group), db(40.0), 12, 3).unwrap();
        assert!(split.alpha <= last_alpha);
        last_level = s.intra_group;
        last_alpha = split.alpha;
    }
}

#[test]
fn disjoint_high_power_keeps_private_power_fixed() {
    let sc = disjoint();
    let s = hrs_sim::power_alloc::scenario_summary(&sc).unwrap();
    let target = sc.users[0] as f64 / s.intra_group;
    for snr in [40.0, 50.0, 60.0] {
        let (_, split) = scenario_closed_form_split(&sc, db(snr)).unwrap();
        assert_eq!(split.beta, 1.0);
        assert!(split.alpha < 1.0);
        assert!((split.power * split.alpha * split.beta - target).abs() < 1e-9 * target);
    }
}

#[test]
fn overlapping_high_power_private_power_tends_to_k_over_inter_level() {
    let sc = overlapping();
    let s = hrs_sim::power_alloc::scenario_summary(&sc).unwrap();
    let target = sc.total_users() as f64 / s.inter_group;
    let mut last_err = f64::INFINITY;
    for snr in [30.0, 40.0, 50.0, 60.0] {
        let (_, split) = scenario_closed_form_split(&sc, db(snr)).unwrap();
        assert!(split.beta < 1.0);
        assert_eq!(split.alpha, 1.0);
        let err = (split.power * split.beta - target).abs() / target;
        assert!(err < last_err);
        last_err = err;
    }
    assert!(last_err < 1e-3);
}

#[test]
fn coarse_grid_turns_outer_common_off_for_disjoint_groups() {
    let objective = SplitObjective::MonteCarlo { n_draws: 100, base_seed: 1 };
    let split = exhaustive_split(&disjoint(), db(30.0), 0.25, objective, None).unwrap();
    assert_eq!(split.beta, 1.0);
}

#[test]
fn asymptotic_search_is_at_least_closed_form() {
    for sc in [disjoint(), overlapping()] {
        for snr in [0.0, 10.0, 20.0, 30.0] {
            let p = db(snr);
            let de = DetEquiv::from_scenario(&sc, p).unwrap();
            let (_, clf) = scenario_closed_form_split(&sc, p).unwrap();
            let exs = exhaustive_split(&sc, p, 0.01, SplitObjective::Asymptotic, None).unwrap();
            let r_clf = hrs_asymptotic_sinrs(&de, &clf).sum;
            let r_exs = hrs_asymptotic_sinrs(&de, &exs).sum;
            assert!(r_exs >= r_clf - 0.2, "{snr} dB: {r_exs} < {r_clf}");
        }
    }
}

#[test]
fn simulated_search_is_at_least_closed_form() {
    let sc = overlapping();
    for snr in [0.0, 10.0, 20.0, 30.0] {
        let p = db(snr);
        let samples = hrs_gain_samples(&sc, p, 40, 3, None).unwrap();
        let (_, clf) = scenario_closed_form_split(&sc, p).unwrap();
        let (_, _, r_exs) = grid_argmax(0.01, |a, b| mean_sum_rate(&samples, &PowerSplit { alpha: a, beta: b, power: p })).unwrap();
        let r_clf = mean_sum_rate(&samples, &clf);
        assert!(r_exs >= r_clf - 0.2, "{snr} dB: {r_exs} < {r_clf}");
    }
}

proptest! {
    #[test]
    fn beta_nonincreasing_in_inter_level(a in 0.0f64..10.0, d in 0.0f64..10.0, snr in -10.0f64..50.0) {
        let p = db(snr);
        let lo = closed_form_split(&summary(a, 0.1), p, 12, 3).unwrap();
        let hi = closed_form_split(&summary(a + d, 0.1), p, 12, 3).unwrap();
        prop_assert!(hi.beta <= lo.beta);
    }

    #[test]
    fn ratios_nonincreasing_in_power(og in 0.0f64..1.0, ig in 0.0f64..1.0, snr in -10.0f64..50.0, step in 0.0f64..20.0) {
        let s = summary(og, ig);
        let lo = closed_form_split(&s, db(snr), 12, 3).unwrap();
        let hi = closed_form_split(&s, db(snr + step), 12, 3).unwrap();
        prop_assert!(hi.beta <= lo.beta);
        if hi.beta == 1.0 {
            prop_assert!(hi.alpha <= lo.alpha);
        }
        prop_assert!(hi.alpha > 0.0 && hi.alpha <= 1.0 && hi.beta > 0.0 && hi.beta <= 1.0);
        if hi.beta < 1.0 {
            prop_assert_eq!(hi.alpha, 1.0);
        }
    }
}
