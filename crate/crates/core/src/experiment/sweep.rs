//! SNR sweeps over all schemes.

use std::time::Instant;

use crate::det_equiv::{hrs_asymptotic_sinrs, DetEquiv};
use crate::error::Result;
use crate::experiment::config::{Allocation, ExsObjective, ScenarioConfig};
use crate::power_alloc::{exhaustive_split, scenario_closed_form_split, SplitObjective};
use crate::precoding::PowerSplit;
use crate::rate_mc::{hrs_gain_samples, hrs_report_from_gains, monte_carlo, LinkGains, RateReport, Scheme};
use crate::scenario::Scenario;

/// One `(scheme, SNR)` result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r_oc: f64,
    pub r_ic: f64,
    pub r_p: f64,
    pub r_sum: f64,
    pub stderr: f64,
    pub n_draws: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn get(&self, scheme: Scheme, snr_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.snr_db == snr_db)
    }

    pub fn sum_rate(&self, scheme: Scheme, snr_db: f64) -> Option<f64> {
        self.get(scheme, snr_db).map(|r| r.r_sum)
    }
}

/// Total power `P` of an SNR in dB (unit noise variance).
pub fn snr_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn mc_row(cfg: &ScenarioConfig, snr_db: f64, split: &PowerSplit, report: &RateReport, wall_ms: f64) -> SweepRow {
    SweepRow {
        scenario: cfg.name.clone(),
        scheme: report.scheme,
        snr_db,
        alpha: split.alpha,
        beta: split.beta,
        r_oc: report.outer_common,
        r_ic: report.inner_common_total(),
        r_p: report.private_total(),
        r_sum: report.sum,
        stderr: report.stderr,
        n_draws: report.draws,
        wall_ms,
    }
}

/// Per-SNR state shared by the rate-splitting schemes.
struct PointContext<'a> {
    cfg: &'a ScenarioConfig,
    scenario: &'a Scenario,
    power: f64,
    samples: Option<Vec<LinkGains>>,
}

impl PointContext<'_> {
    fn samples(&mut self) -> Result<&[LinkGains]> {
        if self.samples.is_none() {
            self.samples = Some(hrs_gain_samples(
                self.scenario,
                self.power,
                self.cfg.n_draws,
                self.cfg.base_seed,
                self.cfg.threads,
            )?);
        }
        Ok(self.samples.as_deref().unwrap_or_default())
    }

    fn exhaustive(&self) -> Result<PowerSplit> {
        let objective = match self.cfg.exs_objective {
            ExsObjective::Asymptotic => SplitObjective::Asymptotic,
            ExsObjective::MonteCarlo => SplitObjective::MonteCarlo {
                n_draws: self.cfg.n_draws,
                base_seed: self.cfg.base_seed,
            },
        };
        exhaustive_split(self.scenario, self.power, self.cfg.grid_step, objective, self.cfg.threads)
    }
}

fn run_point(ctx: &mut PointContext<'_>, scheme: Scheme, snr_db: f64) -> Result<SweepRow> {
    let cfg = ctx.cfg;
    let power = ctx.power;
    let start = Instant::now();
    let mut row = match scheme {
        Scheme::Ttp | Scheme::ScheduledGroup | Scheme::ScheduledSystem => {
            let split = PowerSplit::private_only(power);
            let report = monte_carlo(ctx.scenario, scheme, &split, cfg.n_draws, cfg.base_seed, cfg.threads)?;
            mc_row(cfg, snr_db, &split, &report, 0.0)
        }
        Scheme::HrsClosedForm | Scheme::HrsExhaustive | Scheme::Hrs => {
            let split = match scheme {
                Scheme::HrsClosedForm => scenario_closed_form_split(ctx.scenario, power)?.1,
                Scheme::HrsExhaustive => {
                    if cfg.exs_objective == ExsObjective::MonteCarlo {
                        // Reuse the cached draws instead of drawing them again.
                        let samples = ctx.samples()?;
                        let (a, b, _) = crate::power_alloc::grid_argmax(cfg.grid_step, |a, b| {
                            crate::rate_mc::mean_sum_rate(samples, &PowerSplit { alpha: a, beta: b, power })
                        })?;
                        PowerSplit::new(a, b, power)?
                    } else {
                        ctx.exhaustive()?
                    }
                }
                _ => fixed_or_closed_form(ctx, power)?,
            };
            let report = hrs_report_from_gains(ctx.samples()?, &split, scheme)?;
            mc_row(cfg, snr_db, &split, &report, 0.0)
        }
        Scheme::HrsDetEquiv => {
            let split = match cfg.allocation {
                Allocation::ClosedForm => scenario_closed_form_split(ctx.scenario, power)?.1,
                Allocation::Exhaustive => exhaustive_split(
                    ctx.scenario,
                    power,
                    cfg.grid_step,
                    SplitObjective::Asymptotic,
                    cfg.threads,
                )?,
                Allocation::Fixed { alpha, beta } => PowerSplit::new(alpha, beta, power)?,
            };
            let de = DetEquiv::from_scenario(ctx.scenario, power)?;
            let r = hrs_asymptotic_sinrs(&de, &split);
            SweepRow {
                scenario: cfg.name.clone(),
                scheme,
                snr_db,
                alpha: split.alpha,
                beta: split.beta,
                r_oc: r.outer_common,
                r_ic: r.inner_common,
                r_p: r.private,
                r_sum: r.sum,
                stderr: 0.0,
                n_draws: 0,
                wall_ms: 0.0,
            }
        }
        Scheme::TtpDetEquiv => {
            let de = DetEquiv::from_scenario(ctx.scenario, power)?;
            let (_, sum) = crate::det_equiv::ttp_asymptotic_rate(&de);
            SweepRow {
                scenario: cfg.name.clone(),
                scheme,
                snr_db,
                alpha: 1.0,
                beta: 1.0,
                r_oc: 0.0,
                r_ic: 0.0,
                r_p: sum,
                r_sum: sum,
                stderr: 0.0,
                n_draws: 0,
                wall_ms: 0.0,
            }
        }
    };
    if cfg.timing {
        row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    Ok(row)
}

fn fixed_or_closed_form(ctx: &PointContext<'_>, power: f64) -> Result<PowerSplit> {
    match ctx.cfg.allocation {
        Allocation::Fixed { alpha, beta } => PowerSplit::new(alpha, beta, power),
        Allocation::Exhaustive => ctx.exhaustive(),
        Allocation::ClosedForm => Ok(scenario_closed_form_split(ctx.scenario, power)?.1),
    }
}

/// Run every configured scheme at every SNR on a prebuilt scenario. Rows are
/// ordered scheme-major in configuration order, then by SNR.
pub fn run_sweep_on(cfg: &ScenarioConfig, scenario: &Scenario) -> Result<SweepResult> {
    let mut by_snr: Vec<Vec<SweepRow>> = Vec::with_capacity(cfg.snr_db.len());
    for &snr_db in &cfg.snr_db {
        let mut ctx = PointContext { cfg, scenario, power: snr_to_power(snr_db), samples: None };
        let rows = cfg
            .schemes
            .iter()
            .map(|&s| run_point(&mut ctx, s, snr_db))
            .collect::<Result<Vec<_>>>()?;
        by_snr.push(rows);
    }
    let mut rows = Vec::with_capacity(cfg.schemes.len() * cfg.snr_db.len());
    for s in 0..cfg.schemes.len() {
        for snr_rows in &by_snr {
            rows.push(snr_rows[s].clone());
        }
    }
    Ok(SweepResult { rows })
}

/// Build the scenario and run the sweep.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    let scenario = cfg.build()?;
    run_sweep_on(cfg, &scenario)
}
