use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

use super::{
    feature_names, plant_step, secondary_step, steady_state, DGState, Inbox, MeasureContext,
    SimConfig,
};
use crate::attack::{apply_attack, AttackSpec, DosLatch};
use crate::dataset::{label_scenario, round_sig9, SampleTable, TIME};
use crate::error::{Error, Result};

/// Stream separation constant for the communication-jitter RNG.
const JITTER_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    /// Labelled measurement table, one row per plant step.
    pub table: SampleTable,
    /// True (noise-free) states after the last step.
    pub final_states: Vec<DGState>,
    /// `max_ij |xi_i - xi_j|` at every logged row.
    pub xi_spread: Vec<f64>,
}

/// Runs one scenario and returns its labelled measurement table.
pub fn run_scenario(cfg: &SimConfig, attack: &AttackSpec) -> Result<SampleTable> {
    simulate(cfg, attack).map(|r| r.table)
}

/// Fixed-step simulation of the microgrid under `attack`.
///
/// Each plant step logs the measurement at time `t`, runs the secondary
/// layer if `t` falls on the control clock, then advances the plant.
/// Neighbour values are read with a delay of `1 + U{0..jitter_max}`
/// control periods; values received by targeted generators pass through
/// [`apply_attack`] before the consensus update.
pub fn simulate(cfg: &SimConfig, attack: &AttackSpec) -> Result<ScenarioRun> {
    cfg.validate()?;
    attack.validate(cfg.t_end, cfg.n_dg())?;
    let n = cfg.n_dg();
    let rows = cfg.sample_count();
    let stride = cfg.ctrl_stride();
    let h = cfg.ctrl_period;
    let jitter = cfg.noise.jitter_max as usize;

    let mut states = steady_state(cfg, 0.0)?;
    let meas = MeasureContext::new(cfg);
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed ^ JITTER_STREAM);
    // broadcast history, newest at the back
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(jitter + 2);
    let mut latches = vec![vec![DosLatch::default(); n]; n];

    let mut columns = vec![TIME.to_string()];
    columns.extend(feature_names(cfg.n_bus(), n));
    let mut table = SampleTable::new(columns);
    let mut xi_spread = Vec::with_capacity(rows);
    let mut row = Vec::with_capacity(table.n_cols());

    for k in 0..rows {
        let t = round_sig9(k as f64 * cfg.dt);
        row.clear();
        row.push(t);
        row.extend(meas.measure(&states, t).into_iter().map(round_sig9));
        table.push_row(&row)?;
        xi_spread.push(spread(&states));

        if k + 1 == rows {
            break;
        }
        if k % stride == 0 {
            if history.len() == jitter + 2 {
                history.pop_front();
            }
            history.push_back((
                states.iter().map(|s| s.xi).collect(),
                states.iter().map(|s| s.zeta).collect(),
            ));
            let mut inbox = Inbox {
                xi: vec![vec![0.0; n]; n],
                zeta: vec![vec![0.0; n]; n],
            };
            for i in 0..n {
                for j in cfg.graph.neighbors(i) {
                    let extra = if jitter > 0 {
                        jitter_rng.gen_range(0..=jitter)
                    } else {
                        0
                    };
                    let back = (1 + extra).min(history.len() - 1);
                    let (xs, zs) = &history[history.len() - 1 - back];
                    let (mut x, mut z) = (xs[j], zs[j]);
                    if attack.targets_dg(i) {
                        (x, z) = apply_attack(attack, x, z, t, &mut latches[i][j]);
                    }
                    inbox.xi[i][j] = x;
                    inbox.zeta[i][j] = z;
                }
            }
            secondary_step(
                &mut states,
                &inbox,
                &cfg.graph,
                &cfg.gains,
                cfg.omega_star,
                cfg.v_star,
                h,
            )?;
        }
        plant_step(&mut states, cfg, t).map_err(|e| match e {
            Error::NonFinite(detail) => Error::Diverged { time: t, detail },
            e => e,
        })?;
        if let Some(i) = states.iter().position(|s| !s.is_finite()) {
            return Err(Error::Diverged {
                time: t,
                detail: format!("DG{} state {:?}", i + 1, states[i]),
            });
        }
    }
    let table = label_scenario(&table, attack)?;
    Ok(ScenarioRun {
        table,
        final_states: states,
        xi_spread,
    })
}

fn spread(states: &[DGState]) -> f64 {
    let (lo, hi) = states
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.xi), hi.max(s.xi))
        });
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::AttackMode;

    fn short() -> SimConfig {
        SimConfig {
            t_end: 0.05,
            ..SimConfig::default()
        }
    }

    #[test]
    fn row_count_and_schema() {
        let t = run_scenario(&short(), &AttackSpec::normal()).unwrap();
        assert_eq!(t.n_rows(), 501);
        assert_eq!(t.n_cols(), 39);
        assert_eq!(t.columns()[0], "time");
        assert_eq!(t.columns()[38], "label_multi");
    }

    #[test]
    fn normal_run_is_unlabelled_attack() {
        let t = run_scenario(&short(), &AttackSpec::normal()).unwrap();
        assert!(t.labels_bin().unwrap().iter().all(|&y| y == 0));
    }

    #[test]
    fn deterministic() {
        let a = AttackSpec::new(AttackMode::Stealth, 0.02);
        let x = run_scenario(&short(), &a).unwrap();
        let y = run_scenario(&short(), &a).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn onset_outside_horizon_rejected() {
        let a = AttackSpec::new(AttackMode::Ramp, 0.5);
        assert!(run_scenario(&short(), &a).is_err());
    }

    #[test]
    fn pre_onset_rows_match_normal() {
        let cfg = short();
        let n = run_scenario(&cfg, &AttackSpec::normal()).unwrap();
        let a = run_scenario(&cfg, &AttackSpec::new(AttackMode::Additive, 0.03)).unwrap();
        let w = n.n_cols() - 2;
        for k in 0..300 {
            assert_eq!(n.row(k)[..w], a.row(k)[..w], "row {k}");
        }
        assert_ne!(n.row(500)[..w], a.row(500)[..w]);
    }

    #[test]
    fn blow_up_reports_time() {
        let mut cfg = SimConfig {
            t_end: 0.3,
            ..SimConfig::default()
        };
        cfg.gains.c_f = 1e6;
        let err = simulate(&cfg, &AttackSpec::new(AttackMode::Additive, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }
}
