//! Scenario configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! name = disjoint
//! antennas = 100
//! users = 12
//! groups = 4
//! width = 15
//! dominant_rank = 20
//! tau2 = 0.4
//! spread = pi/8
//! azimuth_start = -pi/2
//! azimuth_step = pi/3
//! snr_db = 0, 5, 10, 15, 20, 25, 30
//! draws = 500
//! seed = 1
//! schemes = TTP, Baseline2, Baseline3, HRS_CLF, HRS_EXS, HRS_DetEquiv, TTP_DetEquiv
//! allocation = closed_form        # or exhaustive, fixed(0.5, 0.9)
//! grid_step = 0.01
//! exs_objective = asymptotic      # or monte_carlo
//! threads = 8
//! ```
//!
//! Angles accept plain numbers (radians) or `a*pi/b` forms.

use std::f64::consts::PI;
use std::path::Path;

use crate::channel_model::{AntennaArray, GroupStatistics};
use crate::error::{config_err, Error, Result};
use crate::rate_mc::Scheme;
use crate::scenario::Scenario;

/// How the split of the `HRS_DetEquiv` row is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Allocation {
    ClosedForm,
    Exhaustive,
    Fixed { alpha: f64, beta: f64 },
}

/// Objective of the `HRS_EXS` grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsObjective {
    Asymptotic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub antennas: usize,
    pub users: usize,
    pub groups: usize,
    /// Outer precoder width `b̄`.
    pub width: usize,
    pub dominant_rank: usize,
    pub tau2: f64,
    /// Angular spread `Δ` in radians.
    pub spread: f64,
    /// `θ_g = azimuth_start + g·azimuth_step`, `g = 0..G`.
    pub azimuth_start: f64,
    pub azimuth_step: f64,
    pub snr_db: Vec<f64>,
    pub n_draws: usize,
    pub base_seed: u64,
    pub schemes: Vec<Scheme>,
    pub allocation: Allocation,
    pub grid_step: f64,
    pub exs_objective: ExsObjective,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Record wall-clock time per row. Off keeps CSV output reproducible.
    pub timing: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::disjoint()
    }
}

impl ScenarioConfig {
    /// Non-overlapping angular supports, `Δ = π/8`.
    pub fn disjoint() -> Self {
        Self {
            name: "disjoint".into(),
            antennas: 100,
            users: 12,
            groups: 4,
            width: 15,
            dominant_rank: 20,
            tau2: 0.4,
            spread: PI / 8.0,
            azimuth_start: -PI / 2.0,
            azimuth_step: PI / 3.0,
            snr_db: (0..=6).map(|i| 5.0 * i as f64).collect(),
            n_draws: 500,
            base_seed: 1,
            schemes: Scheme::SWEEP.to_vec(),
            allocation: Allocation::ClosedForm,
            grid_step: 0.01,
            exs_objective: ExsObjective::Asymptotic,
            threads: None,
            timing: false,
        }
    }

    /// Overlapping angular supports, `Δ = π/3`.
    pub fn overlapping() -> Self {
        Self { name: "overlapping".into(), spread: PI / 3.0, ..Self::disjoint() }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "disjoint" => Ok(Self::disjoint()),
            "overlapping" => Ok(Self::overlapping()),
            _ => Err(config_err(format!("unknown preset '{name}'"))),
        }
    }

    pub fn users_per_group(&self) -> usize {
        self.users / self.groups.max(1)
    }

    pub fn azimuth(&self, group: usize) -> f64 {
        self.azimuth_start + group as f64 * self.azimuth_step
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.users == 0 {
            return Err(config_err("users and groups must be positive"));
        }
        if !self.users.is_multiple_of(self.groups) {
            return Err(config_err(format!(
                "K = {} must be divisible by G = {}",
                self.users, self.groups
            )));
        }
        if self.snr_db.is_empty() {
            return Err(config_err("SNR list must not be empty"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(config_err("SNR values must be finite"));
        }
        if self.n_draws == 0 {
            return Err(config_err("draws must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.tau2) {
            return Err(config_err(format!("τ² must lie in [0,1], got {}", self.tau2)));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 0.5) {
            return Err(config_err(format!("grid_step must lie in (0, 0.5], got {}", self.grid_step)));
        }
        if self.groups * self.dominant_rank > self.antennas {
            return Err(config_err(format!(
                "Σ_g r^d_g ≤ M violated: {} > {}",
                self.groups * self.dominant_rank,
                self.antennas
            )));
        }
        if let Allocation::Fixed { alpha, beta } = self.allocation {
            if !(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0) {
                return Err(config_err("fixed allocation ratios must lie in (0,1]"));
            }
        }
        Ok(())
    }

    /// Build covariances and outer precoders.
    pub fn build(&self) -> Result<Scenario> {
        self.validate()?;
        let array = AntennaArray::uca(self.antennas)?;
        let stats = (0..self.groups)
            .map(|g| GroupStatistics::one_ring(&array, self.azimuth(g), self.spread, self.dominant_rank, self.tau2))
            .collect::<Result<Vec<_>>>()?;
        let k_bar = self.users_per_group();
        Scenario::new(array, stats, vec![k_bar; self.groups], vec![self.width; self.groups])
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse a config file on top of the disjoint defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::disjoint();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        }
        Ok(cfg)
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "name" => self.name = value.to_string(),
            "antennas" => self.antennas = parse_int(value)?,
            "users" => self.users = parse_int(value)?,
            "groups" => self.groups = parse_int(value)?,
            "width" | "b_bar" => self.width = parse_int(value)?,
            "dominant_rank" => self.dominant_rank = parse_int(value)?,
            "tau2" => self.tau2 = parse_real(value)?,
            "spread" => self.spread = parse_angle(value)?,
            "azimuth_start" => self.azimuth_start = parse_angle(value)?,
            "azimuth_step" => self.azimuth_step = parse_angle(value)?,
            "snr_db" => self.snr_db = parse_list(value, parse_real)?,
            "draws" => self.n_draws = parse_int(value)?,
            "seed" => self.base_seed = parse_int(value)?,
            "schemes" => self.schemes = parse_list(value, |s| s.parse())?,
            "allocation" => self.allocation = parse_allocation(value)?,
            "grid_step" => self.grid_step = parse_real(value)?,
            "exs_objective" => {
                self.exs_objective = match value {
                    "asymptotic" => ExsObjective::Asymptotic,
                    "monte_carlo" => ExsObjective::MonteCarlo,
                    _ => return Err(config_err(format!("unknown exs_objective '{value}'"))),
                }
            }
            "threads" => self.threads = Some(parse_int(value)?),
            "timing" => self.timing = matches!(value, "true" | "1" | "yes"),
            _ => return Err(config_err(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| config_err(format!("expected an integer, got '{s}'")))
}

fn parse_real(s: &str) -> Result<f64> {
    s.parse().map_err(|_| config_err(format!("expected a number, got '{s}'")))
}

/// Plain radians or `[a*]pi[/b]`, optionally negated.
pub fn parse_angle(s: &str) -> Result<f64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if !compact.contains("pi") {
        return parse_real(&compact);
    }
    let (num, den) = match compact.split_once('/') {
        Some((n, d)) => (n.to_string(), parse_real(d)?),
        None => (compact.clone(), 1.0),
    };
    let coeff = match num.as_str() {
        "pi" => 1.0,
        "-pi" => -1.0,
        other => {
            let c = other
                .strip_suffix("*pi")
                .ok_or_else(|| config_err(format!("cannot parse angle '{s}'")))?;
            parse_real(c)?
        }
    };
    Ok(coeff * PI / den)
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(f).collect()
}

fn parse_allocation(s: &str) -> Result<Allocation> {
    match s {
        "closed_form" => Ok(Allocation::ClosedForm),
        "exhaustive" => Ok(Allocation::Exhaustive),
        _ => {
            let inner = s
                .strip_prefix("fixed(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| config_err(format!("unknown allocation '{s}'")))?;
            let parts = parse_list(inner, parse_real)?;
            match parts.as_slice() {
                [alpha, beta] => Ok(Allocation::Fixed { alpha: *alpha, beta: *beta }),
                _ => Err(config_err("fixed allocation needs two ratios")),
            }
        }
    }
}
