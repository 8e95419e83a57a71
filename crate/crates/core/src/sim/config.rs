use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Number of generators in the reference microgrid.
pub const DEFAULT_DG_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DroopParams {
    /// Frequency droop slope, rad/s per W.
    pub m: f64,
    /// Voltage droop slope, pu per var.
    pub n: f64,
    pub p_star: f64,
    pub q_star: f64,
}

impl Default for DroopParams {
    fn default() -> Self {
        Self {
            m: 1e-4,
            n: 1e-3,
            p_star: 5_000.0,
            q_star: 1_000.0,
        }
    }
}

impl DroopParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.m, self.n, self.p_star, self.q_star];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("droop parameters {self:?}")));
        }
        if self.m < 0.0 || self.n < 0.0 {
            return Err(Error::Config(format!(
                "droop slopes must be non-negative (m = {}, n = {})",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecondaryGains {
    pub k_p: f64,
    pub k_q: f64,
    pub c_f: f64,
    pub c_v: f64,
}

impl Default for SecondaryGains {
    fn default() -> Self {
        Self {
            k_p: 4.0,
            k_q: 4.0,
            c_f: 10.0,
            c_v: 10.0,
        }
    }
}

impl SecondaryGains {
    pub fn validate(&self) -> Result<()> {
        let g = [self.k_p, self.k_q, self.c_f, self.c_v];
        if g.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!(
                "secondary gains must be >= 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Undirected weighted communication graph between secondary controllers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct CommGraph {
    weights: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRepr {
    #[serde(default)]
    ring: Option<usize>,
    #[serde(default)]
    weights: Option<Vec<Vec<f64>>>,
}

impl TryFrom<GraphRepr> for CommGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        match (r.ring, r.weights) {
            (Some(n), None) => Ok(CommGraph::ring(n)),
            (None, Some(w)) => CommGraph::from_weights(w),
            (None, None) => Ok(CommGraph::default()),
            (Some(_), Some(_)) => Err(Error::Config(
                "graph: give either `ring` or `weights`, not both".into(),
            )),
        }
    }
}

impl From<CommGraph> for GraphRepr {
    fn from(g: CommGraph) -> Self {
        GraphRepr {
            ring: None,
            weights: Some(g.weights),
        }
    }
}

impl Default for CommGraph {
    fn default() -> Self {
        Self::ring(DEFAULT_DG_COUNT)
    }
}

impl CommGraph {
    /// Bidirectional ring with unit weights.
    pub fn ring(n: usize) -> Self {
        let mut weights = vec![vec![0.0; n]; n];
        if n >= 2 {
            for i in 0..n {
                let j = (i + 1) % n;
                weights[i][j] = 1.0;
                weights[j][i] = 1.0;
            }
        }
        Self { weights }
    }

    pub fn from_weights(weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.len();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "adjacency row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(Error::Config(format!("adjacency a[{i}][{i}] must be 0")));
            }
            for (j, &a) in row.iter().enumerate() {
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Config(format!(
                        "adjacency a[{i}][{j}] = {a} is invalid"
                    )));
                }
                if a != weights[j][i] {
                    return Err(Error::Config(format!(
                        "adjacency not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let g = Self { weights };
        if !g.is_connected() {
            return Err(Error::Config("communication graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i][j]
    }

    /// Neighbour set N_i = { j : a_ij > 0 }.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights[i]
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(j, _)| j)
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Piecewise-constant load: `breakpoints[k] = [t_k, value_k]`, sorted by time.
/// The value before the first breakpoint is that of the first breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadProfile {
    pub breakpoints: Vec<[f64; 2]>,
}

impl LoadProfile {
    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: vec![[0.0, value]],
        }
    }

    pub fn step(base: f64, at: f64, after: f64) -> Self {
        Self {
            breakpoints: vec![[0.0, base], [at, after]],
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let mut value = self.breakpoints.first().map_or(0.0, |b| b[1]);
        for &[tk, vk] in &self.breakpoints {
            if t >= tk {
                value = vk;
            } else {
                break;
            }
        }
        value
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.breakpoints.is_empty() {
            return Err(Error::Config(format!("{what}: load profile is empty")));
        }
        if self.breakpoints.windows(2).any(|w| w[1][0] < w[0][0]) {
            return Err(Error::Config(format!(
                "{what}: breakpoints must be time-sorted"
            )));
        }
        if self.breakpoints.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("{what}: load profile")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    pub tau_p: f64,
    pub tau_q: f64,
    pub p_load: LoadProfile,
    pub q_load: LoadProfile,
    /// Generators (1-based) attached to each measured bus.
    pub bus_map: Vec<Vec<usize>>,
    // Inner-loop PI gains. The surrogate plant folds the voltage/current
    // loops into `tau_p` / `tau_q`; these are carried for reference only.
    pub k_pv: f64,
    pub k_iv: f64,
    pub k_pc: f64,
    pub k_ic: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            tau_p: 0.05,
            tau_q: 0.05,
            p_load: LoadProfile::step(60_000.0, 0.3, 66_000.0),
            q_load: LoadProfile::constant(11_000.0),
            bus_map: vec![vec![1, 2, 3, 4], vec![5, 6, 7], vec![8, 9, 10]],
            k_pv: 0.05,
            k_iv: 390.0,
            k_pc: 10.5,
            k_ic: 16e3,
        }
    }
}

impl PlantParams {
    pub fn validate(&self, n_dg: usize) -> Result<()> {
        if !(self.tau_p > 0.0 && self.tau_q > 0.0) {
            return Err(Error::Config("tau_p and tau_q must be positive".into()));
        }
        self.p_load.validate("p_load")?;
        self.q_load.validate("q_load")?;
        let mut seen = vec![false; n_dg];
        for (b, group) in self.bus_map.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Config(format!("bus {} has no generators", b + 1)));
            }
            for &dg in group {
                if dg == 0 || dg > n_dg || seen[dg - 1] {
                    return Err(Error::Config(format!(
                        "bus_map must partition 1..={n_dg}; bad entry {dg}"
                    )));
                }
                seen[dg - 1] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Config(format!(
                "bus_map does not cover all {n_dg} generators"
            )));
        }
        Ok(())
    }

    pub(crate) fn bus_of(&self, n_dg: usize) -> Vec<usize> {
        let mut out = vec![0; n_dg];
        for (b, group) in self.bus_map.iter().enumerate() {
            for &dg in group {
                out[dg - 1] = b;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub ripple_amp_v: f64,
    /// Relative current ripple.
    pub ripple_amp_i: f64,
    pub f_sw: f64,
    pub quant_step_v: f64,
    /// Quantisation of the bus current magnitudes.
    pub quant_step_i: f64,
    /// Quantisation of both P and Q.
    pub quant_step_p: f64,
    pub quant_step_f: f64,
    /// Maximum extra delay of a neighbour read, in control periods.
    pub jitter_max: u32,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            ripple_amp_v: 0.005,
            ripple_amp_i: 0.005,
            f_sw: 10_000.0,
            quant_step_v: 0.0,
            quant_step_i: 1.0,
            quant_step_p: 1.0,
            quant_step_f: 1e-3,
            jitter_max: 1,
            seed: 2024,
        }
    }
}

impl NoiseConfig {
    /// All noise sources switched off.
    pub fn silent() -> Self {
        Self {
            ripple_amp_v: 0.0,
            ripple_amp_i: 0.0,
            quant_step_v: 0.0,
            quant_step_i: 0.0,
            quant_step_p: 0.0,
            quant_step_f: 0.0,
            jitter_max: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = [
            self.ripple_amp_v,
            self.ripple_amp_i,
            self.f_sw,
            self.quant_step_v,
            self.quant_step_i,
            self.quant_step_p,
            self.quant_step_f,
        ];
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!(
                "noise magnitudes must be >= 0: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub ctrl_period: f64,
    pub omega_star: f64,
    pub v_star: f64,
    pub droop: Vec<DroopParams>,
    pub gains: SecondaryGains,
    pub graph: CommGraph,
    pub plant: PlantParams,
    pub noise: NoiseConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_end: 1.0,
            ctrl_period: 1e-3,
            omega_star: TAU * 60.0,
            v_star: 1.0,
            droop: vec![DroopParams::default(); DEFAULT_DG_COUNT],
            gains: SecondaryGains::default(),
            graph: CommGraph::default(),
            plant: PlantParams::default(),
            noise: NoiseConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn n_dg(&self) -> usize {
        self.droop.len()
    }

    pub fn n_bus(&self) -> usize {
        self.plant.bus_map.len()
    }

    /// Logged rows per scenario: `round(t_end / dt) + 1`.
    pub fn sample_count(&self) -> usize {
        (self.t_end / self.dt).round() as usize + 1
    }

    /// Plant steps per secondary-control update.
    pub fn ctrl_stride(&self) -> usize {
        ((self.ctrl_period / self.dt).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.ctrl_period && self.ctrl_period <= self.t_end) {
            return Err(Error::Config(format!(
                "require 0 < dt <= ctrl_period <= t_end (dt = {}, ctrl_period = {}, t_end = {})",
                self.dt, self.ctrl_period, self.t_end
            )));
        }
        let ratio = self.ctrl_period / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "ctrl_period ({}) must be an integer multiple of dt ({})",
                self.ctrl_period, self.dt
            )));
        }
        if !(self.omega_star.is_finite() && self.v_star.is_finite()) {
            return Err(Error::NonFinite("nominal frequency / voltage".into()));
        }
        let n = self.n_dg();
        if self.graph.n() != n {
            return Err(Error::Dimension(format!(
                "graph has {} nodes but {} droop entries are configured",
                self.graph.n(),
                n
            )));
        }
        for d in &self.droop {
            d.validate()?;
        }
        if self.droop.iter().map(|d| d.m).all(|m| m == 0.0)
            || self.droop.iter().map(|d| d.n).all(|n| n == 0.0)
        {
            return Err(Error::Config("all droop slopes are zero".into()));
        }
        self.gains.validate()?;
        self.plant.validate(n)?;
        self.noise.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_is_symmetric_and_connected() {
        let g = CommGraph::ring(10);
        assert_eq!(g.n(), 10);
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![1, 9]);
        assert!(CommGraph::from_weights(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn disconnected_graph_rejected() {
        let w = vec![vec![0.0; 3]; 3];
        assert!(CommGraph::from_weights(w).is_err());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(CommGraph::from_weights(asym).is_err());
    }

    #[test]
    fn load_profile_is_piecewise_constant() {
        let p = LoadProfile::step(60e3, 0.3, 66e3);
        assert_eq!(p.at(0.0), 60e3);
        assert_eq!(p.at(0.2999), 60e3);
        assert_eq!(p.at(0.3), 66e3);
        assert_eq!(p.at(5.0), 66e3);
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = SimConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sample_count(), 10_001);
        assert_eq!(cfg.ctrl_stride(), 10);
    }

    #[test]
    fn fine_step_row_count() {
        let cfg = SimConfig {
            dt: 2e-6,
            ..SimConfig::default()
        };
        assert_eq!(cfg.sample_count(), 500_001);
    }

    #[test]
    fn bus_map_must_partition() {
        let mut cfg = SimConfig::default();
        cfg.plant.bus_map = vec![vec![1, 2, 3, 4], vec![5, 6, 7], vec![8, 9]];
        assert!(cfg.validate().is_err());
        cfg.plant.bus_map = vec![vec![1, 2, 3, 4], vec![4, 5, 6, 7], vec![8, 9, 10]];
        assert!(cfg.validate().is_err());
    }
}
