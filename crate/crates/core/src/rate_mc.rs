//! Instantaneous SINRs and rates for rate splitting, conventional two-tier
//! broadcasting and the two scheduling baselines, plus seeded Monte Carlo
//! averaging.
//!
//! Every scheme's SINRs are functions of a small table of per-user link
//! gains `|h_gk^H x|²` toward each transmitted beam. The table does not depend
//! on the power split, which makes a grid search over `(α, β)` cheap.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel_model::ChannelDraw;
use crate::error::{config_err, Error, Result};
use crate::linalg::{CMat, CVec};
use crate::precoding::{PowerSplit, PrecoderSet};
use crate::scenario::Scenario;

/// Transmission scheme tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Conventional two-tier broadcasting (Baseline 1).
    Ttp,
    /// Group-level scheduling with matched beamforming (Baseline 2).
    ScheduledGroup,
    /// System-level scheduling of the single best user (Baseline 3).
    ScheduledSystem,
    /// Rate splitting with the closed-form power split.
    HrsClosedForm,
    /// Rate splitting with the grid-searched power split.
    HrsExhaustive,
    /// Deterministic-equivalent rate splitting sum rate.
    HrsDetEquiv,
    /// Deterministic-equivalent two-tier sum rate.
    TtpDetEquiv,
    /// Rate splitting with a caller-supplied power split.
    Hrs,
}

impl Scheme {
    pub const SWEEP: [Scheme; 7] = [
        Scheme::Ttp,
        Scheme::ScheduledGroup,
        Scheme::ScheduledSystem,
        Scheme::HrsClosedForm,
        Scheme::HrsExhaustive,
        Scheme::HrsDetEquiv,
        Scheme::TtpDetEquiv,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Ttp => "TTP",
            Scheme::ScheduledGroup => "Baseline2",
            Scheme::ScheduledSystem => "Baseline3",
            Scheme::HrsClosedForm => "HRS_CLF",
            Scheme::HrsExhaustive => "HRS_EXS",
            Scheme::HrsDetEquiv => "HRS_DetEquiv",
            Scheme::TtpDetEquiv => "TTP_DetEquiv",
            Scheme::Hrs => "HRS",
        }
    }

    pub fn is_rate_splitting(self) -> bool {
        matches!(self, Scheme::HrsClosedForm | Scheme::HrsExhaustive | Scheme::Hrs)
    }

    pub fn is_asymptotic(self) -> bool {
        matches!(self, Scheme::HrsDetEquiv | Scheme::TtpDetEquiv)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Ok(match key.as_str() {
            "ttp" | "baseline1" => Scheme::Ttp,
            "baseline2" => Scheme::ScheduledGroup,
            "baseline3" => Scheme::ScheduledSystem,
            "hrs_clf" => Scheme::HrsClosedForm,
            "hrs_exs" => Scheme::HrsExhaustive,
            "hrs_detequiv" => Scheme::HrsDetEquiv,
            "ttp_detequiv" => Scheme::TtpDetEquiv,
            "hrs" => Scheme::Hrs,
            _ => return Err(config_err(format!("unknown scheme '{s}'"))),
        })
    }
}

/// Gains of one user toward every beam of a draw.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGains {
    pub group: usize,
    /// Global stream index of this user's private stream.
    pub stream: usize,
    /// `|h^H w_oc|²`.
    pub outer_common: f64,
    /// `|h^H B_l w_ic,l|²` per group `l`.
    pub inner_common: Vec<f64>,
    /// `|h^H B_l w_lj|²` per global stream `(l, j)`.
    pub private: Vec<f64>,
}

/// Link-gain table of one draw; users in group-major stream order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub group_sizes: Vec<usize>,
    pub users: Vec<UserGains>,
}

fn stream_groups(group_sizes: &[usize]) -> Vec<usize> {
    group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &k)| std::iter::repeat_n(g, k))
        .collect()
}

fn all_channels(draw: &ChannelDraw) -> CMat {
    let m = draw.groups[0].channel.nrows();
    let mut out = CMat::zeros(m, draw.users());
    let mut col = 0;
    for g in &draw.groups {
        out.columns_mut(col, g.channel.ncols()).copy_from(&g.channel);
        col += g.channel.ncols();
    }
    out
}

/// `|h_u^H B_l w_lj|²` for every user `u` (rows) and stream (columns).
fn private_gain_matrix(draw: &ChannelDraw, outer: &[CMat], inner: &[CMat]) -> Vec<Vec<f64>> {
    let h = all_channels(draw);
    let users = h.ncols();
    let mut rows = vec![Vec::with_capacity(users); users];
    for (b, w) in outer.iter().zip(inner) {
        let projected = b.adjoint() * &h;
        let cross = projected.adjoint() * w;
        for (u, row) in rows.iter_mut().enumerate() {
            row.extend((0..w.ncols()).map(|j| cross[(u, j)].norm_sqr()));
        }
    }
    rows
}

/// Gains of every user toward the common and private beams of `precoders`.
pub fn link_gains(draw: &ChannelDraw, precoders: &PrecoderSet) -> LinkGains {
    let outer: Vec<CMat> = precoders.groups.iter().map(|p| p.outer.clone()).collect();
    let inner: Vec<CMat> = precoders.groups.iter().map(|p| p.inner.clone()).collect();
    let private = private_gain_matrix(draw, &outer, &inner);
    let h = all_channels(draw);
    let group_sizes: Vec<usize> = draw.groups.iter().map(|g| g.channel.ncols()).collect();
    let oc = h.adjoint() * &precoders.outer_common;
    let ic: Vec<CVec> = precoders
        .groups
        .iter()
        .map(|p| h.adjoint() * (&p.outer * &p.inner_common))
        .collect();
    let groups = stream_groups(&group_sizes);
    let users = private
        .into_iter()
        .enumerate()
        .map(|(u, row)| UserGains {
            group: groups[u],
            stream: u,
            outer_common: oc[u].norm_sqr(),
            inner_common: ic.iter().map(|v| v[u].norm_sqr()).collect(),
            private: row,
        })
        .collect();
    LinkGains { group_sizes, users }
}

/// Per-user SINRs, indexed `[g][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrTable {
    pub scheme: Scheme,
    pub outer_common: Vec<Vec<f64>>,
    pub inner_common: Vec<Vec<f64>>,
    pub private: Vec<Vec<f64>>,
}

impl SinrTable {
    fn zeros(scheme: Scheme, group_sizes: &[usize]) -> Self {
        let z: Vec<Vec<f64>> = group_sizes.iter().map(|&k| vec![0.0; k]).collect();
        Self { scheme, outer_common: z.clone(), inner_common: z.clone(), private: z }
    }
}

/// Denominator of the private SINR after SIC: every beam except the user's
/// own inner common and own private stream, plus unit noise.
fn private_denominator(user: &UserGains, ic_power: &[f64], stream_power: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (l, (&p, &gain)) in ic_power.iter().zip(&user.inner_common).enumerate() {
        if l != user.group {
            acc += p * gain;
        }
    }
    for (j, (&p, &gain)) in stream_power.iter().zip(&user.private).enumerate() {
        if j != user.stream {
            acc += p * gain;
        }
    }
    acc + 1.0
}

/// Rate-splitting SINRs from a gain table.
pub fn hrs_sinrs_from_gains(gains: &LinkGains, split: &PowerSplit) -> SinrTable {
    let g_count = gains.group_sizes.len();
    let ic_power = vec![split.inner_common_power(g_count); g_count];
    let stream_power: Vec<f64> = stream_groups(&gains.group_sizes)
        .into_iter()
        .map(|g| split.private_power(g_count, gains.group_sizes[g]))
        .collect();
    let oc_power = split.outer_common_power();
    let mut table = SinrTable::zeros(Scheme::Hrs, &gains.group_sizes);
    let mut k_in_group = vec![0usize; g_count];
    for user in &gains.users {
        let g = user.group;
        let k = k_in_group[g];
        k_in_group[g] += 1;
        let own_ic = ic_power[g] * user.inner_common[g];
        let own_p = stream_power[user.stream] * user.private[user.stream];
        let den_p = private_denominator(user, &ic_power, &stream_power);
        let den_ic = den_p + own_p;
        let den_oc = den_ic + own_ic;
        table.outer_common[g][k] = oc_power * user.outer_common / den_oc;
        table.inner_common[g][k] = own_ic / den_ic;
        table.private[g][k] = own_p / den_p;
    }
    table
}

/// Rate-splitting SINRs of one draw.
pub fn hrs_sinrs(draw: &ChannelDraw, precoders: &PrecoderSet, split: &PowerSplit) -> SinrTable {
    hrs_sinrs_from_gains(&link_gains(draw, precoders), split)
}

/// Rates of one draw or a Monte Carlo average.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    pub outer_common: f64,
    /// Per group.
    pub inner_common: Vec<f64>,
    /// Per user, `[g][k]`.
    pub private: Vec<Vec<f64>>,
    pub sum: f64,
    pub draws: usize,
    /// Standard error of `sum` across draws; zero for a single draw.
    pub stderr: f64,
}

impl RateReport {
    fn assemble(scheme: Scheme, outer_common: f64, inner_common: Vec<f64>, private: Vec<Vec<f64>>) -> Self {
        let mut r = Self { scheme, outer_common, inner_common, private, sum: 0.0, draws: 1, stderr: 0.0 };
        r.sum = r.outer_common + r.inner_common_total() + r.private_total();
        r
    }

    pub fn inner_common_total(&self) -> f64 {
        self.inner_common.iter().sum()
    }

    pub fn private_total(&self) -> f64 {
        self.private.iter().flatten().sum()
    }

    fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

/// Common rates use the weakest decoder; private rates sum over users.
pub fn hrs_rates(table: &SinrTable) -> RateReport {
    let oc = min_of(table.outer_common.iter().flatten().copied());
    let outer_common = if oc.is_finite() { log2_1p(oc) } else { 0.0 };
    let inner_common = table
        .inner_common
        .iter()
        .map(|g| {
            let m = min_of(g.iter().copied());
            if m.is_finite() {
                log2_1p(m)
            } else {
                0.0
            }
        })
        .collect();
    let private = table
        .private
        .iter()
        .map(|g| g.iter().map(|&s| log2_1p(s)).collect())
        .collect();
    RateReport::assemble(table.scheme, outer_common, inner_common, private)
}

/// Conventional two-tier SINRs with `P/K` per stream.
pub fn ttp_sinrs(draw: &ChannelDraw, outer: &[CMat], inner: &[CMat], power: f64) -> SinrTable {
    let private = private_gain_matrix(draw, outer, inner);
    let group_sizes: Vec<usize> = inner.iter().map(|w| w.ncols()).collect();
    let users: usize = group_sizes.iter().sum();
    let g_count = group_sizes.len();
    let groups = stream_groups(&group_sizes);
    let stream_power = vec![power / users as f64; users];
    let ic_power = vec![0.0; g_count];
    let mut table = SinrTable::zeros(Scheme::Ttp, &group_sizes);
    let mut k_in_group = vec![0usize; g_count];
    for (u, row) in private.into_iter().enumerate() {
        let g = groups[u];
        let k = k_in_group[g];
        k_in_group[g] += 1;
        let user = UserGains {
            group: g,
            stream: u,
            outer_common: 0.0,
            inner_common: vec![0.0; g_count],
            private: row,
        };
        let den = private_denominator(&user, &ic_power, &stream_power);
        table.private[g][k] = stream_power[u] * user.private[u] / den;
    }
    table
}

/// Conventional two-tier sum rate of one draw.
pub fn ttp_rates(draw: &ChannelDraw, outer: &[CMat], inner: &[CMat], power: f64) -> RateReport {
    hrs_rates(&ttp_sinrs(draw, outer, inner, power)).with_scheme(Scheme::Ttp)
}

/// Scheduling granularity of the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleLevel {
    /// Best user per group, `P/G` each.
    Group,
    /// Best user overall, full power.
    System,
}

/// Index of the largest value; ties keep the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Baselines 2 and 3: schedule by estimated effective gain `‖B_g^H ĥ_gk‖`,
/// serve with a matched beam, evaluate on the true channels.
pub fn scheduled_rates(draw: &ChannelDraw, outer: &[CMat], power: f64, level: ScheduleLevel) -> RateReport {
    let g_count = draw.groups.len();
    let mut private: Vec<Vec<f64>> = draw.groups.iter().map(|g| vec![0.0; g.channel.ncols()]).collect();
    let est_gains: Vec<Vec<f64>> = draw
        .groups
        .iter()
        .zip(outer)
        .map(|(g, b)| {
            let eff = b.adjoint() * &g.estimate;
            (0..eff.ncols()).map(|k| eff.column(k).norm()).collect()
        })
        .collect();
    let beam = |g: usize, k: usize| -> CVec {
        let v = outer[g].adjoint() * draw.groups[g].estimate.column(k);
        let n = v.norm();
        if n > 0.0 {
            &outer[g] * v.unscale(n)
        } else {
            CVec::zeros(outer[g].nrows())
        }
    };
    match level {
        ScheduleLevel::Group => {
            let picks: Vec<usize> = est_gains.iter().map(|g| argmax(g)).collect();
            let beams: Vec<CVec> = picks.iter().enumerate().map(|(g, &k)| beam(g, k)).collect();
            let p = power / g_count as f64;
            for (g, &k) in picks.iter().enumerate() {
                let h = draw.groups[g].channel.column(k);
                let mut interference = 0.0;
                for (l, w) in beams.iter().enumerate() {
                    if l != g {
                        interference += p * h.dotc(w).norm_sqr();
                    }
                }
                let signal = p * h.dotc(&beams[g]).norm_sqr();
                private[g][k] = log2_1p(signal / (interference + 1.0));
            }
        }
        ScheduleLevel::System => {
            let mut best = (0, 0);
            for (g, gains) in est_gains.iter().enumerate() {
                for (k, &v) in gains.iter().enumerate() {
                    if v > est_gains[best.0][best.1] {
                        best = (g, k);
                    }
                }
            }
            let (g, k) = best;
            let w = beam(g, k);
            let h = draw.groups[g].channel.column(k);
            private[g][k] = log2_1p(power * h.dotc(&w).norm_sqr());
        }
    }
    let scheme = match level {
        ScheduleLevel::Group => Scheme::ScheduledGroup,
        ScheduleLevel::System => Scheme::ScheduledSystem,
    };
    RateReport::assemble(scheme, 0.0, vec![0.0; g_count], private)
}

/// Mean of per-draw reports, summed in draw order.
pub fn average_reports(reports: &[RateReport]) -> Result<RateReport> {
    let first = reports.first().ok_or_else(|| config_err("cannot average zero reports"))?;
    let n = reports.len() as f64;
    let mut outer_common = 0.0;
    let mut inner_common = vec![0.0; first.inner_common.len()];
    let mut private: Vec<Vec<f64>> = first.private.iter().map(|g| vec![0.0; g.len()]).collect();
    for r in reports {
        outer_common += r.outer_common;
        for (acc, v) in inner_common.iter_mut().zip(&r.inner_common) {
            *acc += v;
        }
        for (acc_g, g) in private.iter_mut().zip(&r.private) {
            for (acc, v) in acc_g.iter_mut().zip(g) {
                *acc += v;
            }
        }
    }
    outer_common /= n;
    inner_common.iter_mut().for_each(|v| *v /= n);
    private.iter_mut().flatten().for_each(|v| *v /= n);
    let mut out = RateReport::assemble(first.scheme, outer_common, inner_common, private);
    out.draws = reports.len();
    out.stderr = if reports.len() > 1 {
        let mean = reports.iter().map(|r| r.sum).sum::<f64>() / n;
        let var = reports.iter().map(|r| (r.sum - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(out)
}

/// Run `f(i)` for `i in 0..n`, results in index order, optionally on a
/// dedicated pool of `threads` workers.
pub fn parallel_map<T, F>(n: usize, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| config_err(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Link-gain tables of `n_draws` draws at total power `power`.
pub fn hrs_gain_samples(
    scenario: &Scenario,
    power: f64,
    n_draws: usize,
    base_seed: u64,
    threads: Option<usize>,
) -> Result<Vec<LinkGains>> {
    let eps = scenario.regularization(power);
    parallel_map(n_draws, threads, |i| {
        let draw = scenario.draw(base_seed, i as u64)?;
        let precoders = PrecoderSet::build(&scenario.outer, &draw, eps)?;
        Ok(link_gains(&draw, &precoders))
    })
}

/// Averaged rate-splitting report over precomputed gain tables.
pub fn hrs_report_from_gains(samples: &[LinkGains], split: &PowerSplit, scheme: Scheme) -> Result<RateReport> {
    let reports: Vec<RateReport> = samples
        .iter()
        .map(|g| hrs_rates(&hrs_sinrs_from_gains(g, split)).with_scheme(scheme))
        .collect();
    average_reports(&reports)
}

/// Per-beam powers of a split for a fixed group layout.
struct BeamPowers {
    outer_common: f64,
    inner_common: Vec<f64>,
    streams: Vec<f64>,
}

impl BeamPowers {
    fn new(group_sizes: &[usize], split: &PowerSplit) -> Self {
        let g_count = group_sizes.len();
        Self {
            outer_common: split.outer_common_power(),
            inner_common: vec![split.inner_common_power(g_count); g_count],
            streams: stream_groups(group_sizes)
                .into_iter()
                .map(|g| split.private_power(g_count, group_sizes[g]))
                .collect(),
        }
    }
}

fn sum_rate_with_powers(gains: &LinkGains, powers: &BeamPowers) -> f64 {
    let rate = |m: f64| if m.is_finite() { log2_1p(m) } else { 0.0 };
    let mut oc_min = f64::INFINITY;
    let mut inner = 0.0;
    let mut private = 0.0;
    let mut current = (0usize, f64::INFINITY);
    for user in &gains.users {
        let g = user.group;
        if g != current.0 {
            inner += rate(current.1);
            current = (g, f64::INFINITY);
        }
        let own_ic = powers.inner_common[g] * user.inner_common[g];
        let own_p = powers.streams[user.stream] * user.private[user.stream];
        let den_p = private_denominator(user, &powers.inner_common, &powers.streams);
        let den_ic = den_p + own_p;
        let den_oc = den_ic + own_ic;
        oc_min = oc_min.min(powers.outer_common * user.outer_common / den_oc);
        current.1 = current.1.min(own_ic / den_ic);
        private += log2_1p(own_p / den_p);
    }
    if !gains.users.is_empty() {
        inner += rate(current.1);
    }
    rate(oc_min) + inner + private
}

/// Rate-splitting sum rate of one gain table without building the SINR
/// table. Bitwise equal to `hrs_rates(&hrs_sinrs_from_gains(..)).sum`.
pub fn sum_rate_from_gains(gains: &LinkGains, split: &PowerSplit) -> f64 {
    sum_rate_with_powers(gains, &BeamPowers::new(&gains.group_sizes, split))
}

/// Mean rate-splitting sum rate over precomputed gain tables sharing one
/// group layout.
pub fn mean_sum_rate(samples: &[LinkGains], split: &PowerSplit) -> f64 {
    let Some(first) = samples.first() else {
        return f64::NAN;
    };
    let powers = BeamPowers::new(&first.group_sizes, split);
    let total: f64 = samples.iter().map(|g| sum_rate_with_powers(g, &powers)).sum();
    total / samples.len() as f64
}

/// Seeded Monte Carlo average of one scheme. Draw `i` uses the seed derived
/// from `(base_seed, i)`, so the result does not depend on `threads`.
pub fn monte_carlo(
    scenario: &Scenario,
    scheme: Scheme,
    split: &PowerSplit,
    n_draws: usize,
    base_seed: u64,
    threads: Option<usize>,
) -> Result<RateReport> {
    if n_draws == 0 {
        return Err(config_err("Monte Carlo needs at least one draw"));
    }
    if scheme.is_asymptotic() {
        return Err(config_err(format!("{scheme} is not a Monte Carlo scheme")));
    }
    let power = split.power;
    let eps = scenario.regularization(power);
    let reports = parallel_map(n_draws, threads, |i| {
        let draw = scenario.draw(base_seed, i as u64)?;
        Ok(match scheme {
            Scheme::ScheduledGroup => scheduled_rates(&draw, &scenario.outer, power, ScheduleLevel::Group),
            Scheme::ScheduledSystem => scheduled_rates(&draw, &scenario.outer, power, ScheduleLevel::System),
            Scheme::Ttp => {
                let p = PrecoderSet::build(&scenario.outer, &draw, eps)?;
                let inner: Vec<CMat> = p.groups.iter().map(|g| g.inner.clone()).collect();
                ttp_rates(&draw, &scenario.outer, &inner, power)
            }
            _ => {
                let p = PrecoderSet::build(&scenario.outer, &draw, eps)?;
                hrs_rates(&hrs_sinrs(&draw, &p, split)).with_scheme(scheme)
            }
        })
    })?;
    average_reports(&reports)
}
