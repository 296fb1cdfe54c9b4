//! A fully built single-cell scenario: array, group statistics and the
//! statistics-only outer precoders.

use crate::channel_model::{draw_seed, sample_draw_colored, AntennaArray, ChannelDraw, GroupStatistics};
use crate::error::{config_err, Result};
use crate::linalg::CMat;
use crate::precoding::{build_outer_precoder, regularization};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub array: AntennaArray,
    pub stats: Vec<GroupStatistics>,
    /// `K_g` per group.
    pub users: Vec<usize>,
    /// `b_g` per group.
    pub widths: Vec<usize>,
    /// `B_g` per group.
    pub outer: Vec<CMat>,
    colorings: Vec<CMat>,
}

impl Scenario {
    pub fn new(
        array: AntennaArray,
        stats: Vec<GroupStatistics>,
        users: Vec<usize>,
        widths: Vec<usize>,
    ) -> Result<Self> {
        if stats.is_empty() {
            return Err(config_err("scenario needs at least one group"));
        }
        if stats.len() != users.len() || stats.len() != widths.len() {
            return Err(config_err("users and widths must be given per group"));
        }
        if users.contains(&0) {
            return Err(config_err("every group needs at least one user"));
        }
        if stats.iter().any(|s| s.antennas() != array.len()) {
            return Err(config_err("covariance size does not match the array"));
        }
        let outer = (0..stats.len())
            .map(|g| build_outer_precoder(&stats, g, widths[g], users[g]))
            .collect::<Result<Vec<_>>>()?;
        let colorings = stats.iter().map(GroupStatistics::coloring).collect();
        Ok(Self { array, stats, users, widths, outer, colorings })
    }

    pub fn groups(&self) -> usize {
        self.stats.len()
    }

    pub fn total_users(&self) -> usize {
        self.users.iter().sum()
    }

    pub fn total_width(&self) -> usize {
        self.widths.iter().sum()
    }

    /// `ε = K/(bP)`.
    pub fn regularization(&self, power: f64) -> f64 {
        regularization(self.total_users(), self.total_width(), power)
    }

    /// Draw number `index` of the stream rooted at `base_seed`.
    pub fn draw(&self, base_seed: u64, index: u64) -> Result<ChannelDraw> {
        sample_draw_colored(&self.stats, &self.colorings, &self.users, draw_seed(base_seed, index))
    }

    /// `R̄_gl = B_l^H R_g B_l`, indexed `[g][l]`.
    pub fn reduced_covariances(&self) -> Vec<Vec<CMat>> {
        self.stats
            .iter()
            .map(|s| {
                self.outer
                    .iter()
                    .map(|b| b.adjoint() * &s.covariance * b)
                    .collect()
            })
            .collect()
    }

    /// Largest `‖B_l^H U^d_g‖_F` over `l ≠ g`.
    pub fn nulling_leakage(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (g, s) in self.stats.iter().enumerate() {
            let ud = s.dominant_eigenvectors();
            for (l, b) in self.outer.iter().enumerate() {
                if l != g {
                    worst = worst.max((b.adjoint() * &ud).norm());
                }
            }
        }
        worst
    }
}
