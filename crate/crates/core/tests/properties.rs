use hrs_sim::experiment::{format_sig6, ScenarioConfig};
use hrs_sim::power_alloc::split_grid;
use hrs_sim::precoding::PowerSplit;
use proptest::prelude::*;

proptest! {
    #[test]
    fn split_allocates_the_full_budget(
        alpha in 0.0001f64..=1.0,
        beta in 0.0001f64..=1.0,
        power in 1e-3f64..1e6,
        groups in 1usize..6,
        per_group in 1usize..5,
    ) {
        let s = PowerSplit::new(alpha, beta, power).unwrap();
        let users = vec![per_group; groups];
        prop_assert!((s.allocated(&users) - power).abs() <= 1e-10 * power);
        prop_assert!((s.outer_common_power() - power * (1.0 - beta)).abs() <= 1e-12 * power);
    }

    #[test]
    fn out_of_range_ratios_are_rejected(alpha in -1.0f64..0.0, beta in 1.0001f64..2.0) {
        prop_assert!(PowerSplit::new(alpha, 0.5, 1.0).is_err());
        prop_assert!(PowerSplit::new(0.5, beta, 1.0).is_err());
    }

    #[test]
    fn grid_is_increasing_and_ends_at_one(step in 0.001f64..=0.5) {
        let g = split_grid(step).unwrap();
        prop_assert!(g[0] > 0.0);
        prop_assert_eq!(*g.last().unwrap(), 1.0);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sig6_keeps_six_digits(x in -1e12f64..1e12) {
        let s = format_sig6(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-6 * x.abs().max(f64::MIN_POSITIVE));
        let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 6);
    }

    #[test]
    fn config_text_round_trips(
        tau2 in 0.0f64..=1.0,
        draws in 1usize..1000,
        seed in any::<u64>(),
        snrs in prop::collection::vec(-20i32..60, 1..6),
    ) {
        let list: Vec<String> = snrs.iter().map(|s| s.to_string()).collect();
        let text = format!(
            "name = custom\ntau2 = {tau2}\ndraws = {draws}\nseed = {seed}\nsnr_db = {}\nspread = pi/5\n",
            list.join(", ")
        );
        let cfg = ScenarioConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.tau2, tau2);
        prop_assert_eq!(cfg.n_draws, draws);
        prop_assert_eq!(cfg.base_seed, seed);
        prop_assert_eq!(cfg.snr_db, snrs.iter().map(|&s| s as f64).collect::<Vec<_>>());
        prop_assert!((cfg.spread - std::f64::consts::PI / 5.0).abs() < 1e-15);
        prop_assert_eq!(cfg.name, "custom");
    }
}
