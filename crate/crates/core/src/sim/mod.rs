//! Reduced-order islanded microgrid: P-f / Q-V droop at each generator,
//! a distributed consensus layer that restores frequency and voltage, and a
//! first-order surrogate plant standing in for the inverter electronics.
//!
//! All dynamics are integrated with forward Euler at a fixed step. The
//! secondary layer runs on a slower control clock and exchanges its
//! correction states over a [`CommGraph`]; that exchange is the attack
//! surface handled by [`crate::attack`].

mod config;
mod control;
mod measure;
mod plant;
mod scenario;

pub use config::{
    CommGraph, DroopParams, LoadProfile, NoiseConfig, PlantParams, SecondaryGains, SimConfig,
};
pub use control::{droop_eval, secondary_step, Inbox};
pub use measure::{feature_names, measure, quantize, MeasureContext};
pub use plant::{plant_step, sharing, steady_state, Sharing};
pub use scenario::{run_scenario, simulate, ScenarioRun};

use std::f64::consts::TAU;

/// Dynamic state of one distributed generator.
///
/// `omega` and `v` hold the commanded (secondary-corrected) frequency and
/// voltage, which are the quantities the network actually sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DGState {
    pub omega: f64,
    pub v: f64,
    pub p: f64,
    pub q: f64,
    pub xi: f64,
    pub zeta: f64,
    pub f: f64,
}

impl DGState {
    pub fn new(omega: f64, v: f64, p: f64, q: f64, xi: f64, zeta: f64) -> Self {
        Self {
            omega,
            v,
            p,
            q,
            xi,
            zeta,
            f: omega / TAU,
        }
    }

    pub fn set_omega(&mut self, omega: f64) {
        self.omega = omega;
        self.f = omega / TAU;
    }

    pub fn is_finite(&self) -> bool {
        [self.omega, self.v, self.p, self.q, self.xi, self.zeta]
            .iter()
            .all(|x| x.is_finite())
    }
}
