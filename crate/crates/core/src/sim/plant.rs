//! Surrogate electrical plant.
//!
//! Instead of switching-level inverters the plant solves the algebraic
//! droop load-flow (every generator settles on a common frequency and the
//! shares add up to the load) and lets each generator's output track its
//! share through a first-order lag. The lag stands in for the inner
//! voltage/current loops.

use super::{droop_eval, DGState, SimConfig};
use crate::error::{Error, Result};

/// Steady-state load sharing for the current correction states.
#[derive(Debug, Clone, PartialEq)]
pub struct Sharing {
    pub p_ss: Vec<f64>,
    pub q_ss: Vec<f64>,
    pub omega_com: f64,
    pub v_com: f64,
}

/// Solves `sum_i P_i = load` subject to every generator sitting on the same
/// corrected droop line value. `offsets` are the per-generator corrections.
fn share(
    nominal: f64,
    slopes: impl Iterator<Item = f64> + Clone,
    setpoints: impl Iterator<Item = f64> + Clone,
    offsets: &[f64],
    load: f64,
    what: &str,
) -> Result<(Vec<f64>, f64)> {
    let inv_sum: f64 = slopes.clone().map(|k| 1.0 / k).sum();
    if !(inv_sum.is_finite() && inv_sum > 0.0) {
        return Err(Error::Config(format!(
            "degenerate {what} droop configuration (sum of inverse slopes = {inv_sum})"
        )));
    }
    let set_sum: f64 = setpoints.clone().sum();
    let weighted: f64 = slopes
        .clone()
        .zip(offsets)
        .map(|(k, o)| (nominal + o) / k)
        .sum();
    let common = (weighted + set_sum - load) / inv_sum;
    let shares = slopes
        .zip(setpoints)
        .zip(offsets)
        .map(|((k, s), o)| s + (nominal + o - common) / k)
        .collect();
    Ok((shares, common))
}

pub fn sharing(states: &[DGState], cfg: &SimConfig, t: f64) -> Result<Sharing> {
    let p_load = cfg.plant.p_load.at(t);
    let q_load = cfg.plant.q_load.at(t);
    if !(p_load > 0.0) {
        return Err(Error::Config(format!(
            "active load must be positive at t = {t} (got {p_load})"
        )));
    }
    let xi: Vec<f64> = states.iter().map(|s| s.xi).collect();
    let zeta: Vec<f64> = states.iter().map(|s| s.zeta).collect();
    let d = &cfg.droop;
    let (p_ss, omega_com) = share(
        cfg.omega_star,
        d.iter().map(|x| x.m),
        d.iter().map(|x| x.p_star),
        &xi,
        p_load,
        "frequency",
    )?;
    let (q_ss, v_com) = share(
        cfg.v_star,
        d.iter().map(|x| x.n),
        d.iter().map(|x| x.q_star),
        &zeta,
        q_load,
        "voltage",
    )?;
    Ok(Sharing {
        p_ss,
        q_ss,
        omega_com,
        v_com,
    })
}

/// Advances `p`, `q` by one plant step toward their droop-consistent shares
/// and refreshes the commanded `omega`, `v`.
pub fn plant_step(states: &mut [DGState], cfg: &SimConfig, t: f64) -> Result<()> {
    if states.len() != cfg.n_dg() {
        return Err(Error::Dimension(format!(
            "{} states for {} configured generators",
            states.len(),
            cfg.n_dg()
        )));
    }
    let sh = sharing(states, cfg, t)?;
    let ap = cfg.dt / cfg.plant.tau_p;
    let aq = cfg.dt / cfg.plant.tau_q;
    for (i, s) in states.iter_mut().enumerate() {
        s.p += ap * (sh.p_ss[i] - s.p);
        s.q += aq * (sh.q_ss[i] - s.q);
        let (omega, v) = droop_eval(s, &cfg.droop[i], cfg.omega_star, cfg.v_star)?;
        s.set_omega(omega + s.xi);
        s.v = v + s.zeta;
    }
    Ok(())
}

/// Restored equilibrium for the loads at time `t`: nominal frequency and
/// voltage everywhere, equal corrections, outputs at their shares.
pub fn steady_state(cfg: &SimConfig, t: f64) -> Result<Vec<DGState>> {
    let d = &cfg.droop;
    let inv_m: f64 = d.iter().map(|x| 1.0 / x.m).sum();
    let inv_n: f64 = d.iter().map(|x| 1.0 / x.n).sum();
    if !(inv_m.is_finite() && inv_m > 0.0 && inv_n.is_finite() && inv_n > 0.0) {
        return Err(Error::Config("degenerate droop configuration".into()));
    }
    let xi = (cfg.plant.p_load.at(t) - d.iter().map(|x| x.p_star).sum::<f64>()) / inv_m;
    let zeta = (cfg.plant.q_load.at(t) - d.iter().map(|x| x.q_star).sum::<f64>()) / inv_n;
    let mut states: Vec<DGState> = d
        .iter()
        .map(|_| DGState::new(cfg.omega_star, cfg.v_star, 0.0, 0.0, xi, zeta))
        .collect();
    let sh = sharing(&states, cfg, t)?;
    for (i, s) in states.iter_mut().enumerate() {
        s.p = sh.p_ss[i];
        s.q = sh.q_ss[i];
        let (omega, v) = droop_eval(s, &d[i], cfg.omega_star, cfg.v_star)?;
        s.set_omega(omega + s.xi);
        s.v = v + s.zeta;
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::super::{DroopParams, LoadProfile};
    use super::*;

    fn two_dg_cfg() -> SimConfig {
        let mut cfg = SimConfig {
            droop: vec![
                DroopParams {
                    m: 1e-4,
                    p_star: 0.0,
                    ..DroopParams::default()
                };
                2
            ],
            ..SimConfig::default()
        };
        cfg.graph = super::super::CommGraph::ring(2);
        cfg.plant.bus_map = vec![vec![1], vec![2]];
        cfg.plant.p_load = LoadProfile::constant(1000.0);
        cfg
    }

    #[test]
    fn balanced_load_keeps_setpoints() {
        let cfg = SimConfig {
            plant: super::super::PlantParams {
                p_load: LoadProfile::constant(50_000.0),
                ..Default::default()
            },
            ..SimConfig::default()
        };
        let states = vec![DGState::new(cfg.omega_star, 1.0, 0.0, 0.0, 0.0, 0.0); 10];
        let sh = sharing(&states, &cfg, 0.0).unwrap();
        for p in &sh.p_ss {
            assert!((p - 5_000.0).abs() < 1e-9);
        }
        assert!((sh.omega_com - cfg.omega_star).abs() < 1e-12);
    }

    #[test]
    fn two_identical_generators_split_load() {
        let cfg = two_dg_cfg();
        let states = vec![DGState::new(cfg.omega_star, 1.0, 0.0, 0.0, 0.0, 0.0); 2];
        let sh = sharing(&states, &cfg, 0.0).unwrap();
        assert!((sh.p_ss[0] - 500.0).abs() < 1e-9);
        assert!((sh.p_ss[1] - 500.0).abs() < 1e-9);
    }

    #[test]
    fn power_balance_holds_for_any_offsets() {
        let cfg = SimConfig::default();
        let mut states = steady_state(&cfg, 0.0).unwrap();
        for (i, s) in states.iter_mut().enumerate() {
            s.xi += 0.01 * i as f64 - 0.03;
            s.zeta -= 0.002 * i as f64;
        }
        let sh = sharing(&states, &cfg, 0.5).unwrap();
        let total: f64 = sh.p_ss.iter().sum();
        let load = cfg.plant.p_load.at(0.5);
        assert!(((total - load) / load).abs() < 1e-9);
        let qt: f64 = sh.q_ss.iter().sum();
        let ql = cfg.plant.q_load.at(0.5);
        assert!(((qt - ql) / ql).abs() < 1e-9);
    }

    #[test]
    fn huge_lag_freezes_output() {
        let mut cfg = SimConfig::default();
        cfg.plant.tau_p = 1e12;
        cfg.plant.tau_q = 1e12;
        let mut states = steady_state(&cfg, 0.0).unwrap();
        let before: Vec<f64> = states.iter().map(|s| s.p).collect();
        plant_step(&mut states, &cfg, 0.5).unwrap();
        for (s, b) in states.iter().zip(before) {
            assert!((s.p - b).abs() < 1e-9);
        }
    }

    #[test]
    fn steady_state_is_restored() {
        let cfg = SimConfig::default();
        let states = steady_state(&cfg, 0.0).unwrap();
        for s in &states {
            assert!((s.omega - cfg.omega_star).abs() < 1e-9);
            assert!((s.v - cfg.v_star).abs() < 1e-12);
        }
        let mut next = states.clone();
        plant_step(&mut next, &cfg, 0.0).unwrap();
        for (a, b) in states.iter().zip(&next) {
            assert!((a.p - b.p).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_droop_rejected() {
        let mut cfg = two_dg_cfg();
        for d in &mut cfg.droop {
            d.m = f64::INFINITY;
        }
        let mut states = vec![DGState::new(cfg.omega_star, 1.0, 0.0, 0.0, 0.0, 0.0); 2];
        assert!(plant_step(&mut states, &cfg, 0.0).is_err());
    }

    #[test]
    fn non_positive_load_rejected() {
        let mut cfg = two_dg_cfg();
        cfg.plant.p_load = LoadProfile::constant(0.0);
        let mut states = vec![DGState::new(cfg.omega_star, 1.0, 0.0, 0.0, 0.0, 0.0); 2];
        assert!(plant_step(&mut states, &cfg, 0.0).is_err());
    }
}
