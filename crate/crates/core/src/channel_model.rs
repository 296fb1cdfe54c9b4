//! Antenna geometry, one-ring spatial covariances and correlated channel
//! sampling with imperfect CSIT.
//!
//! Positions are expressed in wavelengths, so the one-ring integrand only
//! depends on `r_i - r_j` measured in units of λ.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{config_err, Error, Result};
use crate::linalg::{fro, hermitian_eigen_desc, CMat, CVec, C64};

/// Default number of Gauss-Legendre nodes for the one-ring integral.
pub const DEFAULT_QUADRATURE_NODES: usize = 200;

/// Default relative eigenvalue threshold for the numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Planar antenna array, positions in wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    positions: Vec<[f64; 2]>,
}

/// Radius (in wavelengths) of a uniform circular array whose adjacent
/// elements are half a wavelength apart.
pub fn uca_radius(m: usize) -> f64 {
    let step = 2.0 * PI / m as f64;
    0.5 / ((1.0 - step.cos()).powi(2) + step.sin().powi(2)).sqrt()
}

/// Wave vector `[cos a, sin a]`.
fn wave_vector(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

impl AntennaArray {
    /// Uniform circular array with `m` elements.
    pub fn uca(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(config_err(format!("UCA needs at least 2 antennas, got {m}")));
        }
        let radius = uca_radius(m);
        let positions = (0..m)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / m as f64;
                [radius * phi.cos(), radius * phi.sin()]
            })
            .collect();
        Ok(Self { positions })
    }

    pub fn from_positions(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(config_err("antenna array must have at least one element"));
        }
        Ok(Self { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                best = best.min(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        best
    }

    /// Steering vector `v_i = exp(-j 2π ψ(θ)·r_i)`.
    pub fn steering(&self, angle: f64) -> CVec {
        let psi = wave_vector(angle);
        CVec::from_iterator(
            self.len(),
            self.positions.iter().map(|r| {
                let phase = -2.0 * PI * (psi[0] * r[0] + psi[1] * r[1]);
                C64::from_polar(1.0, phase)
            }),
        )
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, started from the Chebyshev-like
    /// approximation `cos(π(i + 3/4)/(n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// One-ring covariance with the default 200-node rule.
pub fn one_ring_covariance(array: &AntennaArray, azimuth: f64, spread: f64) -> Result<CMat> {
    one_ring_covariance_with(array, azimuth, spread, &GaussLegendre::new(DEFAULT_QUADRATURE_NODES))
}

/// `R_ij = (1/2Δ) ∫_{θ-Δ}^{θ+Δ} exp(-j 2π ψ(a)·(r_i - r_j)) da`.
pub fn one_ring_covariance_with(
    array: &AntennaArray,
    azimuth: f64,
    spread: f64,
    rule: &GaussLegendre,
) -> Result<CMat> {
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(config_err(format!("angular spread must be positive, got {spread}")));
    }
    let m = array.len();
    let pos = array.positions();
    let samples: Vec<([f64; 2], f64)> = rule
        .mapped(azimuth - spread, azimuth + spread)
        .map(|(a, w)| (wave_vector(a), w / (2.0 * spread)))
        .collect();
    let mut r = CMat::zeros(m, m);
    for j in 0..m {
        r[(j, j)] = C64::new(1.0, 0.0);
        for i in 0..j {
            let dx = pos[i][0] - pos[j][0];
            let dy = pos[i][1] - pos[j][1];
            let mut acc = C64::new(0.0, 0.0);
            for (psi, w) in &samples {
                let phase = -2.0 * PI * (psi[0] * dx + psi[1] * dy);
                acc += C64::from_polar(*w, phase);
            }
            r[(i, j)] = acc;
            r[(j, i)] = acc.conj();
        }
    }
    Ok(r)
}

/// Vanishing-spread reference: the rank-one steering outer product.
pub fn steering_covariance(array: &AntennaArray, azimuth: f64) -> CMat {
    let v = array.steering(azimuth);
    &v * v.adjoint()
}

/// Eigenpairs retained above the rank threshold.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    /// `M x r`, orthonormal columns.
    pub vectors: CMat,
    /// Descending, length `r`.
    pub values: Vec<f64>,
}

impl Eigenbasis {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> CMat {
        let scaled = CMat::from_fn(self.vectors.nrows(), self.rank(), |i, j| {
            self.vectors[(i, j)] * self.values[j]
        });
        scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition restricted to eigenvalues above `rank_tol * λ_max`.
pub fn eigendecompose(r: &CMat, rank_tol: f64) -> Result<Eigenbasis> {
    let (values, vectors) = hermitian_eigen_desc(r)?;
    let lambda_max = values.first().copied().unwrap_or(0.0);
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidInput("covariance has no positive eigenvalue".into()));
    }
    let rank = values.iter().take_while(|&&v| v > rank_tol * lambda_max).count();
    Ok(Eigenbasis {
        vectors: vectors.columns(0, rank).into_owned(),
        values: values[..rank].to_vec(),
    })
}

/// Second-order statistics of one user group.
#[derive(Debug, Clone)]
pub struct GroupStatistics {
    pub covariance: CMat,
    pub eigen: Eigenbasis,
    pub dominant_rank: usize,
    pub azimuth: f64,
    pub spread: f64,
    /// CSIT error variance `τ²`.
    pub csit_error: f64,
}

impl GroupStatistics {
    pub fn one_ring(
        array: &AntennaArray,
        azimuth: f64,
        spread: f64,
        dominant_rank: usize,
        csit_error: f64,
    ) -> Result<Self> {
        let cov = one_ring_covariance(array, azimuth, spread)?;
        Self::from_covariance(cov, dominant_rank, csit_error, azimuth, spread)
    }

    pub fn from_covariance(
        covariance: CMat,
        dominant_rank: usize,
        csit_error: f64,
        azimuth: f64,
        spread: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&csit_error) {
            return Err(config_err(format!("CSIT error τ² must lie in [0,1], got {csit_error}")));
        }
        let eigen = eigendecompose(&covariance, DEFAULT_RANK_TOL)?;
        if dominant_rank == 0 || dominant_rank > eigen.rank() {
            return Err(config_err(format!(
                "dominant rank {dominant_rank} must lie in 1..={} (numerical rank)",
                eigen.rank()
            )));
        }
        Ok(Self { covariance, eigen, dominant_rank, azimuth, spread, csit_error })
    }

    pub fn antennas(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn rank(&self) -> usize {
        self.eigen.rank()
    }

    /// `U^d`: the dominant eigenvectors.
    pub fn dominant_eigenvectors(&self) -> CMat {
        self.eigen.vectors.columns(0, self.dominant_rank).into_owned()
    }

    /// `U Λ^{1/2}`, the Karhunen-Loeve colouring matrix.
    pub fn coloring(&self) -> CMat {
        CMat::from_fn(self.antennas(), self.rank(), |i, j| {
            self.eigen.vectors[(i, j)] * self.eigen.values[j].sqrt()
        })
    }
}

/// One group's channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDraw {
    /// `r x K_g` innovation.
    pub innovation: CMat,
    /// `r x K_g` CSIT error innovation.
    pub error: CMat,
    /// True channel `M x K_g`.
    pub channel: CMat,
    /// Estimated channel `M x K_g`.
    pub estimate: CMat,
}

/// One Monte Carlo realization across all groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub groups: Vec<GroupDraw>,
    pub seed: u64,
}

impl ChannelDraw {
    pub fn users(&self) -> usize {
        self.groups.iter().map(|g| g.channel.ncols()).sum()
    }
}

/// Per-draw seed from a base seed and a draw index (SplitMix64 finalizer),
/// so every draw owns an independent stream.
pub fn draw_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    // Column-major fill so the stream order is fixed.
    let mut out = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(i, j)] = C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2);
        }
    }
    out
}

/// Draw `H_g = U Λ^{1/2} G_g` and `Ĥ_g = U Λ^{1/2}(√(1-τ²) G_g + τ Z_g)`.
pub fn sample_draw(stats: &[GroupStatistics], users: &[usize], seed: u64) -> Result<ChannelDraw> {
    let colorings: Vec<CMat> = stats.iter().map(GroupStatistics::coloring).collect();
    sample_draw_colored(stats, &colorings, users, seed)
}

/// Same as [`sample_draw`] with precomputed colouring matrices.
pub fn sample_draw_colored(
    stats: &[GroupStatistics],
    colorings: &[CMat],
    users: &[usize],
    seed: u64,
) -> Result<ChannelDraw> {
    if stats.len() != users.len() || stats.len() != colorings.len() {
        return Err(config_err("one user count and colouring per group required"));
    }
    let m = stats.first().map(|s| s.antennas()).unwrap_or(0);
    if stats.iter().any(|s| s.antennas() != m) {
        return Err(config_err("all groups must share the antenna count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = stats
        .iter()
        .zip(colorings)
        .zip(users)
        .map(|((s, coloring), &k)| {
            let innovation = complex_gaussian(&mut rng, s.rank(), k);
            let error = complex_gaussian(&mut rng, s.rank(), k);
            let tau = s.csit_error.sqrt();
            let keep = (1.0 - s.csit_error).sqrt();
            let est_innovation = innovation.map(|z| z * keep) + error.map(|z| z * tau);
            let channel = coloring * &innovation;
            let estimate = coloring * &est_innovation;
            GroupDraw { innovation, error, channel, estimate }
        })
        .collect();
    Ok(ChannelDraw { groups, seed })
}

/// Write a complex matrix as CSV, row-major, each cell as a `re,im` pair.
pub fn write_matrix_csv<W: Write>(matrix: &CMat, mut out: W) -> Result<()> {
    for i in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols())
            .map(|j| format!("{:e},{:e}", matrix[(i, j)].re, matrix[(i, j)].im))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// `‖A - B‖_F / ‖B‖_F`.
pub fn relative_error(a: &CMat, b: &CMat) -> f64 {
    fro(&(a - b)) / fro(b)
}
