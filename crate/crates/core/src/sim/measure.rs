use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use super::{DGState, NoiseConfig, SimConfig};

/// Floor applied to bus voltages before dividing by them.
const V_EPS: f64 = 1e-6;

/// Measurement column names in logging order:
/// `V1..Vb, I1..Ib, P_DG1, Q_DG1, f_DG1, ..., P_DGn, Q_DGn, f_DGn`.
pub fn feature_names(n_bus: usize, n_dg: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(2 * n_bus + 3 * n_dg);
    names.extend((1..=n_bus).map(|b| format!("V{b}")));
    names.extend((1..=n_bus).map(|b| format!("I{b}")));
    for i in 1..=n_dg {
        names.push(format!("P_DG{i}"));
        names.push(format!("Q_DG{i}"));
        names.push(format!("f_DG{i}"));
    }
    names
}

/// Round-half-even onto a grid of `step`; a zero step is the identity.
pub fn quantize(x: f64, step: f64) -> f64 {
    if step > 0.0 {
        (x / step).round_ties_even() * step
    } else {
        x
    }
}

/// Per-scenario measurement state: bus membership and the fixed ripple
/// phase of each bus, drawn once from the noise seed.
#[derive(Debug, Clone)]
pub struct MeasureContext {
    noise: NoiseConfig,
    bus_of: Vec<usize>,
    phases: Vec<f64>,
}

impl MeasureContext {
    pub fn new(cfg: &SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
        let phases = (0..cfg.n_bus()).map(|_| rng.gen_range(0.0..TAU)).collect();
        Self {
            noise: cfg.noise.clone(),
            bus_of: cfg.plant.bus_of(cfg.n_dg()),
            phases,
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn measure(&self, states: &[DGState], t: f64) -> Vec<f64> {
        let nb = self.phases.len();
        let nz = &self.noise;
        let mut v_sum = vec![0.0; nb];
        let mut count = vec![0usize; nb];
        let mut p_sum = vec![0.0; nb];
        let mut q_sum = vec![0.0; nb];
        for (s, &b) in states.iter().zip(&self.bus_of) {
            v_sum[b] += s.v;
            count[b] += 1;
            p_sum[b] += s.p;
            q_sum[b] += s.q;
        }
        let mut row = Vec::with_capacity(2 * nb + 3 * states.len());
        let mut volts = Vec::with_capacity(nb);
        for b in 0..nb {
            let ripple = (TAU * nz.f_sw * t + self.phases[b]).sin();
            let v = v_sum[b] / count[b] as f64 + nz.ripple_amp_v * ripple;
            volts.push(v);
            row.push(quantize(v, nz.quant_step_v));
        }
        for b in 0..nb {
            let ripple = (TAU * nz.f_sw * t + self.phases[b]).sin();
            let s = (p_sum[b] * p_sum[b] + q_sum[b] * q_sum[b]).sqrt();
            let i = s / volts[b].max(V_EPS);
            row.push(quantize(
                i * (1.0 + nz.ripple_amp_i * ripple),
                nz.quant_step_i,
            ));
        }
        for s in states {
            row.push(quantize(s.p, nz.quant_step_p));
            row.push(quantize(s.q, nz.quant_step_p));
            row.push(quantize(s.omega / TAU, nz.quant_step_f));
        }
        row
    }
}

/// Convenience wrapper building a fresh [`MeasureContext`].
pub fn measure(states: &[DGState], cfg: &SimConfig, t: f64) -> Vec<f64> {
    MeasureContext::new(cfg).measure(states, t)
}
