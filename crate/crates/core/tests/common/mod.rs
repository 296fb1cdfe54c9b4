#![allow(dead_code)]

use std::f64::consts::PI;

use hrs_sim::channel_model::{AntennaArray, GroupStatistics};
use hrs_sim::experiment::ScenarioConfig;
use hrs_sim::Scenario;

/// Three groups on a 32-element UCA; quick enough for per-draw invariants.
pub fn small_scenario(spread: f64, tau2: f64) -> Scenario {
    let array = AntennaArray::uca(32).unwrap();
    let stats: Vec<GroupStatistics> = (0..3)
        .map(|g| GroupStatistics::one_ring(&array, -PI / 2.0 + g as f64 * 2.0 * PI / 3.0, spread, 8, tau2).unwrap())
        .collect();
    Scenario::new(array, stats, vec![2, 2, 2], vec![6, 6, 6]).unwrap()
}

pub fn disjoint() -> Scenario {
    ScenarioConfig::disjoint().build().unwrap()
}

pub fn overlapping() -> Scenario {
    ScenarioConfig::overlapping().build().unwrap()
}

pub fn db(snr: f64) -> f64 {
    10f64.powf(snr / 10.0)
}
