//! Large-system deterministic equivalents of the rate-splitting and
//! two-tier SINRs.
//!
//! Every group solves its own scalar fixed point `(m°_g, T_g)` on the reduced
//! covariance `R̄_gg = B_g^H R_g B_g`. Cross-group terms only enter through the
//! derivative quantities `m'_gl`, evaluated after all fixed points converge.

use std::io::Write;

use crate::error::{config_err, Error, Result};
use crate::linalg::{hermitian_defect, trace_of_product, trace_re, CMat, C64};
use crate::precoding::PowerSplit;
use crate::scenario::Scenario;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Converged `(m°, T)`.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub m: f64,
    pub t: CMat,
    pub iterations: usize,
    /// `|m - (1/b̄) tr(R̄ T(m))|` at the returned point.
    pub residual: f64,
}

/// `T(m) = (K̄/b̄ · R̄/(1+m) + ε I)^{-1}`.
fn resolvent(r_bar: &CMat, k_bar: f64, b_bar: f64, eps: f64, m: f64) -> Result<CMat> {
    let n = r_bar.nrows();
    let mut a = r_bar.scale(k_bar / (b_bar * (1.0 + m)));
    for i in 0..n {
        a[(i, i)] += C64::new(eps, 0.0);
    }
    a.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::InvalidInput("resolvent argument is not positive definite".into()))
}

fn fixed_point_map(r_bar: &CMat, k_bar: f64, b_bar: f64, eps: f64, m: f64) -> Result<(f64, CMat)> {
    let t = resolvent(r_bar, k_bar, b_bar, eps, m)?;
    Ok((trace_of_product(r_bar, &t) / b_bar, t))
}

/// Plain fixed-point iteration from `m = 1`. Stops once `|Δm| ≤ tol`, or
/// within a few ulps of `m` when `tol` is below its resolution.
pub fn solve_fixed_point(
    r_bar: &CMat,
    k_bar: f64,
    b_bar: f64,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    solve_fixed_point_from(r_bar, k_bar, b_bar, eps, tol, max_iter, 1.0)
}

pub fn solve_fixed_point_from(
    r_bar: &CMat,
    k_bar: f64,
    b_bar: f64,
    eps: f64,
    tol: f64,
    max_iter: usize,
    init: f64,
) -> Result<FixedPoint> {
    if !(eps > 0.0) {
        return Err(config_err(format!("regularization must be positive, got {eps}")));
    }
    if !r_bar.is_square() || hermitian_defect(r_bar) > 1e-8 * r_bar.norm().max(1.0) {
        return Err(Error::InvalidInput("reduced covariance must be Hermitian".into()));
    }
    let mut m = init;
    let mut delta = f64::INFINITY;
    for it in 1..=max_iter {
        let (next, t) = fixed_point_map(r_bar, k_bar, b_bar, eps, m)?;
        delta = (next - m).abs();
        m = next;
        if delta <= tol.max(4.0 * f64::EPSILON * m.abs()) {
            let (check, _) = fixed_point_map(r_bar, k_bar, b_bar, eps, m)?;
            return Ok(FixedPoint { m, t, iterations: it, residual: (check - m).abs() });
        }
    }
    Err(Error::Convergence { iterations: max_iter, residual: delta })
}

/// `m'(Θ) = (1/b̄) tr(R̄_ll T_l Θ T_l) / (1 - (K̄/b̄) tr(R̄_ll T_l R̄_ll T_l) / (b̄ (1+m°_l)²))`.
///
/// `Θ = B_g^H B_g = I` gives `m'_g`; `Θ = R̄_gl` gives `m'_gl`.
pub fn m_prime(r_ll: &CMat, fp: &FixedPoint, theta: &CMat, k_bar: f64, b_bar: f64) -> Result<f64> {
    let rt = r_ll * &fp.t;
    let numerator = trace_of_product(&rt, &(theta * &fp.t)) / b_bar;
    let coupling = (k_bar / b_bar) * trace_of_product(&rt, &rt) / (b_bar * (1.0 + fp.m).powi(2));
    let denominator = 1.0 - coupling;
    if !(denominator > 0.0) {
        return Err(Error::Instability(format!(
            "m' denominator {denominator:e} is not positive"
        )));
    }
    Ok(numerator / denominator)
}

/// System parameters of the symmetric large-system analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetEquivConfig {
    /// Users per group `K̄`.
    pub k_bar: usize,
    /// Outer precoder width `b̄`.
    pub b_bar: usize,
    pub eps: f64,
    /// Common CSIT error `τ²`.
    pub tau2: f64,
    pub power: f64,
    pub groups: usize,
}

impl DetEquivConfig {
    pub fn total_users(&self) -> usize {
        self.k_bar * self.groups
    }
}

/// Per-group deterministic-equivalent terms.
#[derive(Debug, Clone)]
pub struct GroupTerms {
    pub fixed_point: FixedPoint,
    pub m_prime: f64,
    /// `m'_gl` for every `l`.
    pub m_prime_cross: Vec<f64>,
    pub psi: f64,
    /// `(ξ°_g)²`.
    pub xi2: f64,
    pub phi: f64,
    /// `Υ°_gl` for every `l`.
    pub upsilon: Vec<f64>,
    pub kappa: f64,
    pub omega: f64,
}

#[derive(Debug, Clone)]
pub struct DetEquiv {
    pub config: DetEquivConfig,
    /// `R̄_gl = B_l^H R_g B_l`, indexed `[g][l]`.
    pub reduced: Vec<Vec<CMat>>,
    pub groups: Vec<GroupTerms>,
}

/// Assemble all terms from reduced covariances.
pub fn assemble_det_equiv(reduced: Vec<Vec<CMat>>, config: DetEquivConfig) -> Result<DetEquiv> {
    let g_count = reduced.len();
    if g_count == 0 || g_count != config.groups || reduced.iter().any(|row| row.len() != g_count) {
        return Err(config_err("reduced covariances must form a G x G family"));
    }
    if reduced.iter().flatten().any(|r| r.nrows() != config.b_bar || r.ncols() != config.b_bar) {
        return Err(config_err(format!("reduced covariances must be {0}x{0}", config.b_bar)));
    }
    if !(0.0..=1.0).contains(&config.tau2) {
        return Err(config_err(format!("τ² must lie in [0,1], got {}", config.tau2)));
    }
    let k_bar = config.k_bar as f64;
    let b_bar = config.b_bar as f64;
    let fixed: Vec<FixedPoint> = (0..g_count)
        .map(|g| solve_fixed_point(&reduced[g][g], k_bar, b_bar, config.eps, DEFAULT_TOL, DEFAULT_MAX_ITER))
        .collect::<Result<_>>()?;
    let identity = CMat::identity(config.b_bar, config.b_bar);
    let trace_sum: f64 = (0..g_count).map(|l| trace_re(&reduced[l][l])).sum();
    let mut groups = Vec::with_capacity(g_count);
    for g in 0..g_count {
        let fp = &fixed[g];
        let m = fp.m;
        let mp = m_prime(&reduced[g][g], fp, &identity, k_bar, b_bar)?;
        let cross: Vec<f64> = (0..g_count)
            .map(|l| m_prime(&reduced[l][l], &fixed[l], &reduced[g][l], k_bar, b_bar))
            .collect::<Result<_>>()?;
        let psi = k_bar / b_bar * mp / (1.0 + m).powi(2);
        let upsilon: Vec<f64> = (0..g_count)
            .map(|l| config.power / g_count as f64 / b_bar * cross[l] / (1.0 + fixed[l].m).powi(2))
            .collect();
        let phi = (1.0 - config.tau2) * m * m / (1.0 + m).powi(2);
        let kappa = trace_re(&reduced[g][g]).powi(2) / (k_bar * trace_sum);
        let omega = (k_bar - 1.0) / k_bar * (1.0 - config.tau2 * (1.0 - (1.0 + m).powi(2))) / (1.0 + m).powi(2);
        groups.push(GroupTerms {
            fixed_point: fp.clone(),
            m_prime: mp,
            m_prime_cross: cross,
            psi,
            xi2: k_bar / psi,
            phi,
            upsilon,
            kappa,
            omega,
        });
    }
    Ok(DetEquiv { config, reduced, groups })
}

impl DetEquiv {
    /// Build from a scenario at total power `power`. All groups must share
    /// `K̄`, `b̄` and `τ²`.
    pub fn from_scenario(scenario: &Scenario, power: f64) -> Result<Self> {
        let k_bar = scenario.users[0];
        let b_bar = scenario.widths[0];
        let tau2 = scenario.stats[0].csit_error;
        if scenario.users.iter().any(|&k| k != k_bar)
            || scenario.widths.iter().any(|&b| b != b_bar)
            || scenario.stats.iter().any(|s| s.csit_error != tau2)
        {
            return Err(config_err(
                "deterministic equivalents need equal K_g, b_g and τ_g across groups",
            ));
        }
        let config = DetEquivConfig {
            k_bar,
            b_bar,
            eps: scenario.regularization(power),
            tau2,
            power,
            groups: scenario.groups(),
        };
        assemble_det_equiv(scenario.reduced_covariances(), config)
    }

    /// `Σ_{l≠g} (ξ°_l)² Υ°_gl`.
    fn inter_group(&self, g: usize) -> f64 {
        (0..self.groups.len())
            .filter(|&l| l != g)
            .map(|l| self.groups[l].xi2 * self.groups[g].upsilon[l])
            .sum()
    }

    /// `(ξ°_g)² Υ°_gg Ω_g`.
    fn intra_group(&self, g: usize) -> f64 {
        let t = &self.groups[g];
        t.xi2 * t.upsilon[g] * t.omega
    }

    /// `(P/K)(ξ°_g)² Φ_g`.
    fn desired(&self, g: usize) -> f64 {
        let t = &self.groups[g];
        self.config.power / self.config.total_users() as f64 * t.xi2 * t.phi
    }

    /// Write one diagnostic row per `(g, l)` pair.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "group,other,m,m_prime,m_prime_cross,psi,xi2,phi,kappa,omega,upsilon")?;
        for (g, t) in self.groups.iter().enumerate() {
            for l in 0..self.groups.len() {
                writeln!(
                    out,
                    "{g},{l},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                    t.fixed_point.m, t.m_prime, t.m_prime_cross[l], t.psi, t.xi2, t.phi, t.kappa, t.omega, t.upsilon[l]
                )?;
            }
        }
        Ok(())
    }
}

/// Asymptotic SINRs and rates of both schemes under one split.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticRates {
    pub gamma_oc: Vec<f64>,
    pub gamma_ic: Vec<f64>,
    pub gamma_p: Vec<f64>,
    pub gamma_ttp: Vec<f64>,
    pub outer_common: f64,
    pub inner_common: f64,
    pub private: f64,
    pub sum: f64,
    pub ttp_sum: f64,
    /// Rate-splitting gain over two-tier broadcasting.
    pub gain: f64,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Asymptotic two-tier SINR per group and sum rate.
pub fn ttp_asymptotic_rate(de: &DetEquiv) -> (Vec<f64>, f64) {
    let k_bar = de.config.k_bar as f64;
    let gamma: Vec<f64> = (0..de.groups.len())
        .map(|g| de.desired(g) / (de.inter_group(g) + de.intra_group(g) + 1.0))
        .collect();
    let sum = gamma.iter().map(|&s| k_bar * log2_1p(s)).sum();
    (gamma, sum)
}

/// Asymptotic rate-splitting SINRs and rates under `split`. The split's
/// total power must match the power the equivalent was built at.
pub fn hrs_asymptotic_sinrs(de: &DetEquiv, split: &PowerSplit) -> AsymptoticRates {
    let (alpha, beta) = (split.alpha, split.beta);
    let p = de.config.power;
    let tau2 = de.config.tau2;
    let k_bar = de.config.k_bar as f64;
    let g_count = de.groups.len();
    let mut gamma_oc = Vec::with_capacity(g_count);
    let mut gamma_ic = Vec::with_capacity(g_count);
    let mut gamma_p = Vec::with_capacity(g_count);
    for g in 0..g_count {
        let inter = de.inter_group(g);
        let intra = de.intra_group(g);
        let desired = de.desired(g);
        let t = &de.groups[g];
        gamma_oc.push(t.kappa * p * (1.0 - beta) * (1.0 - tau2) / (beta * (inter + intra + desired) + 1.0));
        gamma_ic.push(beta * (1.0 - alpha) * (intra + desired) / (beta * inter + beta * alpha * (intra + desired) + 1.0));
        gamma_p.push(beta * alpha * desired / (beta * inter + beta * alpha * intra + 1.0));
    }
    let (gamma_ttp, ttp_sum) = ttp_asymptotic_rate(de);
    let oc_min = gamma_oc.iter().copied().fold(f64::INFINITY, f64::min);
    let outer_common = log2_1p(oc_min);
    let inner_common: f64 = gamma_ic.iter().map(|&s| log2_1p(s)).sum();
    let private: f64 = gamma_p.iter().map(|&s| k_bar * log2_1p(s)).sum();
    let private_gap: f64 = gamma_p
        .iter()
        .zip(&gamma_ttp)
        .map(|(&hp, &tp)| k_bar * (log2_1p(hp) - log2_1p(tp)))
        .sum();
    AsymptoticRates {
        sum: outer_common + inner_common + private,
        gain: outer_common + inner_common + private_gap,
        gamma_oc,
        gamma_ic,
        gamma_p,
        gamma_ttp,
        outer_common,
        inner_common,
        private,
        ttp_sum,
    }
}
