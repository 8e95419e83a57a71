//! Secondary-control attack injection.
//!
//! Every attack is a pure transformation of the consensus corrections
//! `(xi, zeta)` that a targeted generator *receives* from its neighbours.
//! Before the onset time the transformation is the identity; afterwards,
//! with `tau = t - onset`:
//!
//! | mode     | xi'                 | zeta'                   |
//! |----------|---------------------|-------------------------|
//! | Additive | xi + b              | zeta + b                |
//! | Ramp     | xi + r tau          | zeta                    |
//! | SlowRamp | xi                  | zeta + r_s tau          |
//! | Sinusoid | xi + A sin(w_a tau) | zeta + A sin(w_a tau)   |
//! | Stealth  | xi + f_s(tau)       | zeta + alpha f_s(tau)   |
//! | DoS      | xi latched at onset | zeta                    |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackMode {
    Normal,
    Additive,
    Ramp,
    SlowRamp,
    Sinusoid,
    Stealth,
    DoS,
}

impl AttackMode {
    pub const ALL: [AttackMode; 7] = [
        AttackMode::Normal,
        AttackMode::Additive,
        AttackMode::Ramp,
        AttackMode::SlowRamp,
        AttackMode::Sinusoid,
        AttackMode::Stealth,
        AttackMode::DoS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackMode::Normal => "Normal",
            AttackMode::Additive => "Additive",
            AttackMode::Ramp => "Ramp",
            AttackMode::SlowRamp => "SlowRamp",
            AttackMode::Sinusoid => "Sinusoid",
            AttackMode::Stealth => "Stealth",
            AttackMode::DoS => "DoS",
        }
    }

    /// Multiclass label index.
    pub fn class_index(self) -> usize {
        self as usize
    }

    pub fn from_class_index(k: usize) -> Option<Self> {
        Self::ALL.get(k).copied()
    }
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackParams {
    /// Additive bias.
    pub b: f64,
    /// Ramp slope on xi, per second.
    pub r: f64,
    /// Slow ramp slope on zeta, per second.
    pub r_s: f64,
    /// Sinusoid amplitude.
    pub amplitude: f64,
    /// Sinusoid angular frequency, rad/s.
    pub omega_a: f64,
    /// Stealth zeta scaling.
    pub alpha_s: f64,
    /// Peak bound of the stealth waveform.
    pub a_stealth: f64,
    /// Seed of the stealth waveform; 0 gives zero phases and equal tones.
    pub stealth_seed: u64,
}

impl Default for AttackParams {
    fn default() -> Self {
        Self {
            b: 0.05,
            r: 0.2,
            r_s: 0.02,
            amplitude: 0.05,
            omega_a: TAU * 5.0,
            alpha_s: 0.5,
            a_stealth: 0.01,
            stealth_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSpec {
    pub mode: AttackMode,
    /// Onset time t_a, seconds.
    pub onset: f64,
    /// Targeted generators, 1-based.
    pub targets: Vec<usize>,
    pub params: AttackParams,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self {
            mode: AttackMode::Normal,
            onset: 0.7,
            targets: vec![1],
            params: AttackParams::default(),
        }
    }
}

impl AttackSpec {
    pub fn new(mode: AttackMode, onset: f64) -> Self {
        Self {
            mode,
            onset,
            ..Self::default()
        }
    }

    pub fn normal() -> Self {
        Self::new(AttackMode::Normal, 0.0)
    }

    pub fn validate(&self, t_end: f64, n_dg: usize) -> Result<()> {
        if !(self.onset >= 0.0 && self.onset <= t_end) {
            return Err(Error::Config(format!(
                "attack onset {} outside [0, {t_end}]",
                self.onset
            )));
        }
        if self.mode == AttackMode::Normal {
            return Ok(());
        }
        if self.targets.is_empty() {
            return Err(Error::Config(format!(
                "{} attack has no targets",
                self.mode
            )));
        }
        if let Some(&bad) = self.targets.iter().find(|&&t| t == 0 || t > n_dg) {
            return Err(Error::Config(format!(
                "attack target {bad} outside 1..={n_dg}"
            )));
        }
        let p = &self.params;
        if p.r > 0.0 && p.r_s > 0.0 && p.r_s > p.r / 10.0 {
            return Err(Error::Config(format!(
                "slow ramp slope r_s = {} must be at most r / 10 = {}",
                p.r_s,
                p.r / 10.0
            )));
        }
        if !(p.a_stealth >= 0.0) {
            return Err(Error::Config("a_stealth must be non-negative".into()));
        }
        Ok(())
    }

    pub fn targets_dg(&self, dg: usize) -> bool {
        self.mode != AttackMode::Normal && self.targets.contains(&(dg + 1))
    }
}

/// Sample-and-hold memory for the DoS freeze, one per received link.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DosLatch {
    frozen_xi: Option<f64>,
}

impl DosLatch {
    pub fn frozen_xi(&self) -> Option<f64> {
        self.frozen_xi
    }

    pub fn is_latched(&self) -> bool {
        self.frozen_xi.is_some()
    }
}

/// Ratios of the three stealth tones to the base frequency.
const STEALTH_TONES: [f64; 3] = [1.0, std::f64::consts::SQRT_2, 2.236_067_977_499_79];
/// Base frequency of the stealth multisine, Hz.
const STEALTH_BASE_HZ: f64 = 1.5;

/// Three-tone multisine `f_s(tau)`, peak-bounded by `a_stealth`. The same
/// spec yields the same waveform for every target.
pub fn stealth_waveform(tau: f64, spec: &AttackSpec) -> f64 {
    let a = spec.params.a_stealth;
    let (weights, phases) = if spec.params.stealth_seed == 0 {
        ([1.0 / 3.0; 3], [0.0; 3])
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.params.stealth_seed);
        let raw: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.5..1.5));
        let total: f64 = raw.iter().sum();
        let phases: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
        (raw.map(|w| w / total), phases)
    };
    (0..3)
        .map(|k| {
            let w = TAU * STEALTH_BASE_HZ * STEALTH_TONES[k];
            a * weights[k] * (w * tau + phases[k]).sin()
        })
        .sum()
}

/// Corrupts one received `(xi, zeta)` pair at time `t`.
pub fn apply_attack(
    spec: &AttackSpec,
    xi: f64,
    zeta: f64,
    t: f64,
    latch: &mut DosLatch,
) -> (f64, f64) {
    if t < spec.onset {
        return (xi, zeta);
    }
    let tau = t - spec.onset;
    let p = &spec.params;
    match spec.mode {
        AttackMode::Normal => (xi, zeta),
        AttackMode::Additive => (xi + p.b, zeta + p.b),
        AttackMode::Ramp => (xi + p.r * tau, zeta),
        AttackMode::SlowRamp => (xi, zeta + p.r_s * tau),
        AttackMode::Sinusoid => {
            let s = p.amplitude * (p.omega_a * tau).sin();
            (xi + s, zeta + s)
        }
        AttackMode::Stealth => {
            let fs = stealth_waveform(tau, spec);
            (xi + fs, zeta + p.alpha_s * fs)
        }
        AttackMode::DoS => {
            let frozen = *latch.frozen_xi.get_or_insert(xi);
            (frozen, zeta)
        }
    }
}
