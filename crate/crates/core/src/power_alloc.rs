//! Power splitting between common and private messages: the closed-form
//! rule driven by long-term interference summaries, and a grid search.

use rayon::prelude::*;

use crate::det_equiv::{hrs_asymptotic_sinrs, DetEquiv};
use crate::error::{config_err, Error, Result};
use crate::linalg::{hpd_inverse, trace_of_product, trace_re, CMat};
use crate::precoding::PowerSplit;
use crate::rate_mc::{hrs_gain_samples, mean_sum_rate};
use crate::scenario::Scenario;

/// Inter-group (`Γ_OG`) and intra-group (`Γ_IG`) interference levels.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSummary {
    pub inter_group: f64,
    pub intra_group: f64,
    /// Per-group values before taking the minimum.
    pub inter_group_per_group: Vec<f64>,
    pub intra_group_per_group: Vec<f64>,
}

/// Interference summaries from `R̄_gl` (indexed `[g][l]`).
pub fn interference_summary(reduced: &[Vec<CMat>], tau2: f64, k_bar: usize, b_bar: usize) -> Result<InterferenceSummary> {
    let g_count = reduced.len();
    if g_count == 0 || reduced.iter().any(|row| row.len() != g_count) {
        return Err(config_err("reduced covariances must form a G x G family"));
    }
    let inverses: Vec<CMat> = (0..g_count)
        .map(|l| {
            hpd_inverse(&reduced[l][l]).ok_or_else(|| {
                Error::InvalidConfiguration(format!(
                    "R̄_{l}{l} is singular: b_g exceeds the effective rank of the projected covariance"
                ))
            })
        })
        .collect::<Result<_>>()?;
    let inv_traces: Vec<f64> = inverses.iter().map(trace_re).collect();
    let g = g_count as f64;
    let k = k_bar as f64;
    let inter: Vec<f64> = (0..g_count)
        .map(|gi| {
            (0..g_count)
                .filter(|&l| l != gi)
                .map(|l| trace_of_product(&reduced[gi][l], &inverses[l]) / (g * inv_traces[l]))
                .sum()
        })
        .collect();
    let intra: Vec<f64> = inv_traces
        .iter()
        .map(|&tr| tau2 / g * b_bar as f64 / tr * (k - 1.0) / k)
        .collect();
    Ok(InterferenceSummary {
        inter_group: inter.iter().copied().fold(f64::INFINITY, f64::min),
        intra_group: intra.iter().copied().fold(f64::INFINITY, f64::min),
        inter_group_per_group: inter,
        intra_group_per_group: intra,
    })
}

/// Weak inter-group regime: `β = 1`, `α = min(K̄/(P Γ_IG), 1)`.
pub fn weak_regime_ratios(summary: &InterferenceSummary, power: f64, k_bar: usize) -> (f64, f64) {
    let alpha = if summary.intra_group > 0.0 {
        (k_bar as f64 / (power * summary.intra_group)).min(1.0)
    } else {
        1.0
    };
    (alpha, 1.0)
}

/// Strong inter-group regime: `α = 1`, `β = min(K/(P Γ_OG + K̄), 1)`.
pub fn strong_regime_ratios(summary: &InterferenceSummary, power: f64, users: usize, k_bar: usize) -> (f64, f64) {
    let beta = (users as f64 / (power * summary.inter_group + k_bar as f64)).min(1.0);
    (1.0, beta)
}

/// Combined rule: `α` from the weak regime, `β` from the strong regime, and
/// `α` reset to 1 whenever `β < 1`.
pub fn closed_form_split(summary: &InterferenceSummary, power: f64, users: usize, k_bar: usize) -> Result<PowerSplit> {
    if !(power > 0.0) {
        return Err(config_err(format!("total power must be positive, got {power}")));
    }
    let (alpha_weak, _) = weak_regime_ratios(summary, power, k_bar);
    let (_, beta) = strong_regime_ratios(summary, power, users, k_bar);
    let alpha = if beta < 1.0 { 1.0 } else { alpha_weak };
    PowerSplit::new(alpha, beta, power)
}

/// Closed-form split for a scenario at total power `power`.
pub fn scenario_closed_form_split(scenario: &Scenario, power: f64) -> Result<(InterferenceSummary, PowerSplit)> {
    let summary = scenario_summary(scenario)?;
    let split = closed_form_split(&summary, power, scenario.total_users(), scenario.users[0])?;
    Ok((summary, split))
}

pub fn scenario_summary(scenario: &Scenario) -> Result<InterferenceSummary> {
    interference_summary(
        &scenario.reduced_covariances(),
        scenario.stats[0].csit_error,
        scenario.users[0],
        scenario.widths[0],
    )
}

/// `{step, 2 step, …, 1}`; the last point is pinned to exactly 1.
pub fn split_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(config_err(format!("grid step must lie in (0, 0.5], got {step}")));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
    match pts.last_mut() {
        Some(last) if (*last - 1.0).abs() < 1e-9 => *last = 1.0,
        _ => pts.push(1.0),
    }
    Ok(pts)
}

/// Grid argmax of `objective(α, β)`. Ties go to larger `α`, then larger `β`.
pub fn grid_argmax<F>(step: f64, objective: F) -> Result<(f64, f64, f64)>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let grid = split_grid(step)?;
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&a| grid.iter().map(move |&b| (a, b))).collect();
    let values: Vec<f64> = points.par_iter().map(|&(a, b)| objective(a, b)).collect();
    let mut best = 0;
    for i in 1..points.len() {
        let (v, bv) = (values[i], values[best]);
        let better = v > bv
            || (v == bv && (points[i].0 > points[best].0 || (points[i].0 == points[best].0 && points[i].1 > points[best].1)));
        if better {
            best = i;
        }
    }
    Ok((points[best].0, points[best].1, values[best]))
}

/// What the grid search maximizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitObjective {
    /// Deterministic-equivalent sum rate.
    Asymptotic,
    /// Mean Monte Carlo sum rate over seeded draws.
    MonteCarlo { n_draws: usize, base_seed: u64 },
}

/// Grid-searched split for a scenario at total power `power`.
pub fn exhaustive_split(
    scenario: &Scenario,
    power: f64,
    grid_step: f64,
    objective: SplitObjective,
    threads: Option<usize>,
) -> Result<PowerSplit> {
    let (alpha, beta, _) = match objective {
        SplitObjective::Asymptotic => {
            let de = DetEquiv::from_scenario(scenario, power)?;
            grid_argmax(grid_step, |a, b| hrs_asymptotic_sinrs(&de, &PowerSplit { alpha: a, beta: b, power }).sum)?
        }
        SplitObjective::MonteCarlo { n_draws, base_seed } => {
            let samples = hrs_gain_samples(scenario, power, n_draws, base_seed, threads)?;
            grid_argmax(grid_step, |a, b| mean_sum_rate(&samples, &PowerSplit { alpha: a, beta: b, power }))?
        }
    };
    PowerSplit::new(alpha, beta, power)
}
