//! Two-tier precoders and the power split between common and private
//! messages.
//!
//! The outer precoder `B_g` depends on covariances only. The inner RZF
//! precoder `W_g` and both common-message precoders depend on the effective
//! channel estimates `B_g^H Ĥ_g` of a single draw.

use crate::channel_model::{ChannelDraw, GroupStatistics};
use crate::error::{config_err, Error, Result};
use crate::linalg::{hermitian_eigen_desc, CMat, CVec, C64};

/// Singular values of `U_{-g}` below this are treated as vanishing.
pub const VANISHING_SINGULAR_VALUE: f64 = 1e-8;

const DEGENERATE_NORM: f64 = 1e-14;

/// Orthonormal basis of the orthogonal complement of `range(u)`.
///
/// The range is taken from the SVD of `u`; the complement is read off the
/// unit eigenvalues of the projector `I - Q Q^H`, whose spectrum is exactly
/// `{0, 1}` so the eigenvectors are well separated.
pub fn complement_basis(u: &CMat) -> Result<CMat> {
    let m = u.nrows();
    if u.ncols() == 0 {
        return Ok(CMat::identity(m, m));
    }
    if u.ncols() > m {
        return Err(config_err(format!(
            "cannot null {} directions with {m} antennas",
            u.ncols()
        )));
    }
    let svd = u.clone().svd(true, false);
    let left = svd.u.as_ref().expect("left singular vectors requested");
    let tiny = svd.singular_values.iter().filter(|&&s| s < VANISHING_SINGULAR_VALUE).count();
    if tiny > 0 {
        return Err(config_err(format!(
            "stacked dominant eigenvectors are rank deficient ({tiny} singular values below {VANISHING_SINGULAR_VALUE:e}); \
             the null space would exceed M - Σ_{{l≠g}} r^d_l"
        )));
    }
    let projector = CMat::identity(m, m) - left * left.adjoint();
    let (values, vectors) = hermitian_eigen_desc(&projector)?;
    let dim = m - u.ncols();
    let count = values.iter().filter(|&&v| v > 0.5).count();
    if count != dim {
        return Err(config_err(format!(
            "null-space dimension {count} disagrees with M - Σ_{{l≠g}} r^d_l = {dim}"
        )));
    }
    Ok(vectors.columns(0, dim).into_owned())
}

/// Outer precoder `B_g = E^(0)_{-g} F^(1)_g` with `b_g` columns.
pub fn build_outer_precoder(
    stats: &[GroupStatistics],
    group: usize,
    width: usize,
    users: usize,
) -> Result<CMat> {
    let target = stats
        .get(group)
        .ok_or_else(|| config_err(format!("group index {group} out of range")))?;
    let m = target.antennas();
    let others: usize = stats
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != group)
        .map(|(_, s)| s.dominant_rank)
        .sum();
    if users > width {
        return Err(config_err(format!("K_g ≤ b_g violated: K_g = {users} > b_g = {width}")));
    }
    if others >= m || width > m - others {
        return Err(config_err(format!(
            "b_g ≤ M - Σ_{{l≠g}} r^d_l violated: b_g = {width}, M - Σ = {}",
            m as i64 - others as i64
        )));
    }
    if width > target.dominant_rank {
        return Err(config_err(format!(
            "b_g ≤ r^d_g violated: b_g = {width} > r^d_g = {}",
            target.dominant_rank
        )));
    }
    let total_dominant: usize = stats.iter().map(|s| s.dominant_rank).sum();
    if total_dominant > m {
        return Err(config_err(format!("Σ_g r^d_g ≤ M violated: {total_dominant} > {m}")));
    }

    let blocks: Vec<CMat> = stats
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != group)
        .map(|(_, s)| s.dominant_eigenvectors())
        .collect();
    let stacked = if blocks.is_empty() {
        CMat::zeros(m, 0)
    } else {
        let mut out = CMat::zeros(m, others);
        let mut col = 0;
        for b in &blocks {
            out.columns_mut(col, b.ncols()).copy_from(b);
            col += b.ncols();
        }
        out
    };
    let null = complement_basis(&stacked)?;
    let projected = null.adjoint() * &target.covariance * &null;
    let (values, vectors) = hermitian_eigen_desc(&projected)?;
    let lambda_max = values.first().copied().unwrap_or(0.0);
    let effective = values.iter().filter(|&&v| v > 1e-12 * lambda_max.max(0.0)).count();
    if effective < width {
        return Err(config_err(format!(
            "projected covariance has rank {effective} < b_g = {width}"
        )));
    }
    Ok(&null * vectors.columns(0, width))
}

/// `ε = K / (b P)`.
pub fn regularization(total_users: usize, total_width: usize, power: f64) -> f64 {
    total_users as f64 / (total_width as f64 * power)
}

/// RZF inner precoder of one group.
#[derive(Debug, Clone)]
pub struct Rzf {
    /// `b_g x K_g`, includes `ξ_g`.
    pub precoder: CMat,
    pub xi: f64,
}

/// `W_g = ξ_g (Ĥ̄ Ĥ̄^H + b_g ε I)^{-1} Ĥ̄` with `tr(W^H B^H B W) = K_g`.
pub fn rzf_inner_precoder(effective: &CMat, outer: &CMat, eps: f64) -> Result<Rzf> {
    if !(eps > 0.0) {
        return Err(config_err(format!("regularization must be positive, got {eps}")));
    }
    let width = effective.nrows();
    let users = effective.ncols();
    let mut gram = effective * effective.adjoint();
    for i in 0..width {
        gram[(i, i)] += C64::new(width as f64 * eps, 0.0);
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::DegenerateChannel("RZF matrix is not positive definite".into()))?;
    let raw = chol.solve(effective);
    let mapped = outer * &raw;
    let norm_trace = mapped.norm_squared();
    if effective.norm_squared() < DEGENERATE_NORM || !(norm_trace > 0.0) {
        return Err(Error::DegenerateChannel(format!(
            "RZF normalization trace {norm_trace:e} vanishes"
        )));
    }
    let xi = (users as f64 / norm_trace).sqrt();
    Ok(Rzf { precoder: raw.scale(xi), xi })
}

/// Equally weighted matched beamformer over all users' `B_g Ĥ̄_g`, unit norm.
pub fn outer_common_precoder(outer: &[CMat], effective: &[CMat]) -> Result<CVec> {
    let weights: Vec<Vec<f64>> = effective.iter().map(|h| vec![1.0; h.ncols()]).collect();
    outer_common_precoder_weighted(outer, effective, &weights)
}

/// Weighted variant of [`outer_common_precoder`]; `weights[g][k]` scales user `(g,k)`.
pub fn outer_common_precoder_weighted(
    outer: &[CMat],
    effective: &[CMat],
    weights: &[Vec<f64>],
) -> Result<CVec> {
    let m = outer.first().map(|b| b.nrows()).ok_or_else(|| config_err("no groups"))?;
    if effective.iter().all(|h| h.ncols() == 0) {
        return Err(config_err("outer common precoder needs at least one user"));
    }
    let mut sum = CVec::zeros(m);
    for ((b, h), w) in outer.iter().zip(effective).zip(weights) {
        let mut combined = CVec::zeros(h.nrows());
        for (k, &wk) in w.iter().enumerate().take(h.ncols()) {
            combined += h.column(k).scale(wk);
        }
        sum += b * combined;
    }
    let norm = sum.norm();
    if norm < DEGENERATE_NORM {
        return Err(Error::DegenerateChannel("outer common beam sums to zero".into()));
    }
    Ok(sum.unscale(norm))
}

/// `w_ic,g = ζ q̄` with `q̄` the mean RZF column and `‖B_g w_ic,g‖ = 1`.
pub fn inner_common_precoder(inner: &CMat, outer: &CMat) -> Result<(CVec, f64)> {
    let users = inner.ncols();
    if users == 0 {
        return Err(config_err("inner common precoder needs K_g ≥ 1"));
    }
    let mean = inner.column_sum().unscale(users as f64);
    let mapped = outer * &mean;
    let energy = mapped.norm_squared();
    if energy < DEGENERATE_NORM * DEGENERATE_NORM {
        return Err(Error::DegenerateChannel("mean RZF column vanishes".into()));
    }
    let zeta = 1.0 / energy.sqrt();
    Ok((mean.scale(zeta), zeta))
}

/// Precoders of one group for one draw.
#[derive(Debug, Clone)]
pub struct GroupPrecoder {
    /// `B_g`, `M x b_g`.
    pub outer: CMat,
    /// `W_g`, `b_g x K_g`.
    pub inner: CMat,
    pub xi: f64,
    /// `w_ic,g`, length `b_g`.
    pub inner_common: CVec,
    pub zeta: f64,
}

/// All precoders of one draw.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub groups: Vec<GroupPrecoder>,
    /// `w_oc`, length `M`.
    pub outer_common: CVec,
    pub regularization: f64,
}

impl PrecoderSet {
    pub fn build(outer: &[CMat], draw: &ChannelDraw, eps: f64) -> Result<Self> {
        if outer.len() != draw.groups.len() {
            return Err(config_err("one outer precoder per group required"));
        }
        let effective: Vec<CMat> = outer
            .iter()
            .zip(&draw.groups)
            .map(|(b, g)| b.adjoint() * &g.estimate)
            .collect();
        let mut groups = Vec::with_capacity(outer.len());
        for (b, h) in outer.iter().zip(&effective) {
            let rzf = rzf_inner_precoder(h, b, eps)?;
            let (inner_common, zeta) = inner_common_precoder(&rzf.precoder, b)?;
            groups.push(GroupPrecoder {
                outer: b.clone(),
                inner: rzf.precoder,
                xi: rzf.xi,
                inner_common,
                zeta,
            });
        }
        let outer_common = outer_common_precoder(outer, &effective)?;
        Ok(Self { groups, outer_common, regularization: eps })
    }

    /// `E‖x‖²` of the rate-split signal with unit-power symbols.
    pub fn transmit_power(&self, split: &PowerSplit) -> f64 {
        let g = self.groups.len();
        let mut total = split.outer_common_power() * self.outer_common.norm_squared();
        for p in &self.groups {
            let k = p.inner.ncols();
            total += split.inner_common_power(g) * (&p.outer * &p.inner_common).norm_squared();
            total += split.private_power(g, k) * (&p.outer * &p.inner).norm_squared();
        }
        total
    }

    /// `E‖x‖²` of conventional two-tier broadcasting with `P/K` per stream.
    pub fn ttp_transmit_power(&self, power: f64) -> f64 {
        let users: usize = self.groups.iter().map(|p| p.inner.ncols()).sum();
        self.groups
            .iter()
            .map(|p| power / users as f64 * (&p.outer * &p.inner).norm_squared())
            .sum()
    }
}

/// Power-splitting ratios and total power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    /// Fraction of each group's power given to private messages.
    pub alpha: f64,
    /// Fraction of the total power given to group messages.
    pub beta: f64,
    pub power: f64,
}

impl PowerSplit {
    pub fn new(alpha: f64, beta: f64, power: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0) {
            return Err(config_err(format!(
                "power ratios must lie in (0,1], got α = {alpha}, β = {beta}"
            )));
        }
        if !(power >= 0.0) || !power.is_finite() {
            return Err(config_err(format!("total power must be finite and ≥ 0, got {power}")));
        }
        Ok(Self { alpha, beta, power })
    }

    /// All power to private messages.
    pub fn private_only(power: f64) -> Self {
        Self { alpha: 1.0, beta: 1.0, power }
    }

    /// `P_oc = P(1-β)`.
    pub fn outer_common_power(&self) -> f64 {
        self.power * (1.0 - self.beta)
    }

    /// `P_ic,g = Pβ(1-α)/G`.
    pub fn inner_common_power(&self, groups: usize) -> f64 {
        self.power * self.beta * (1.0 - self.alpha) / groups as f64
    }

    /// `P_gk = Pβα/(G K_g)`.
    pub fn private_power(&self, groups: usize, group_users: usize) -> f64 {
        self.power * self.beta * self.alpha / (groups * group_users) as f64
    }

    /// `P_oc + Σ_g P_ic,g + Σ_g K_g P_gk`.
    pub fn allocated(&self, group_users: &[usize]) -> f64 {
        let g = group_users.len();
        self.outer_common_power()
            + group_users
                .iter()
                .map(|&k| self.inner_common_power(g) + k as f64 * self.private_power(g, k))
                .sum::<f64>()
    }
}
