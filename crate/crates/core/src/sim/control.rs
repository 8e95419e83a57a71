use super::{CommGraph, DGState, DroopParams, SecondaryGains};
use crate::error::{Error, Result};

/// Primary droop law: returns the uncorrected `(omega, v)` for the given
/// measured powers.
pub fn droop_eval(
    state: &DGState,
    params: &DroopParams,
    omega_star: f64,
    v_star: f64,
) -> Result<(f64, f64)> {
    if !(state.p.is_finite() && state.q.is_finite() && omega_star.is_finite() && v_star.is_finite())
    {
        return Err(Error::NonFinite(format!(
            "droop inputs p = {}, q = {}",
            state.p, state.q
        )));
    }
    let omega = omega_star - params.m * (state.p - params.p_star);
    let v = v_star - params.n * (state.q - params.q_star);
    Ok((omega, v))
}

/// Correction values each controller has received from its neighbours.
///
/// `xi[i][j]` is what node `i` believes `xi_j` to be; entries for
/// non-neighbours are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Inbox {
    pub xi: Vec<Vec<f64>>,
    pub zeta: Vec<Vec<f64>>,
}

impl Inbox {
    /// Undelayed, uncorrupted exchange.
    pub fn direct(states: &[DGState]) -> Self {
        let n = states.len();
        let xi_row: Vec<f64> = states.iter().map(|s| s.xi).collect();
        let zeta_row: Vec<f64> = states.iter().map(|s| s.zeta).collect();
        Self {
            xi: vec![xi_row; n],
            zeta: vec![zeta_row; n],
        }
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }
}

/// One forward-Euler step of the distributed restoration dynamics
///
/// ```text
/// xi_i'   = -k_p (omega_i - omega*) - c_f sum_j a_ij (xi_i - xi_j)
/// zeta_i' = -k_q (V_i - V*)         - c_v sum_j a_ij (zeta_i - zeta_j)
/// ```
///
/// `omega_i`, `V_i` are the generators' present commanded values and the
/// neighbour terms come from `inbox`, which may be delayed or corrupted.
pub fn secondary_step(
    states: &mut [DGState],
    inbox: &Inbox,
    graph: &CommGraph,
    gains: &SecondaryGains,
    omega_star: f64,
    v_star: f64,
    h: f64,
) -> Result<()> {
    let n = states.len();
    if graph.n() != n || inbox.n() != n {
        return Err(Error::Dimension(format!(
            "{} states, graph of {} nodes, inbox of {} rows",
            n,
            graph.n(),
            inbox.n()
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!(
            "secondary step h = {h} must be positive"
        )));
    }
    let updates: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let s = &states[i];
            let (mut cx, mut cz) = (0.0, 0.0);
            for j in graph.neighbors(i) {
                let a = graph.weight(i, j);
                cx += a * (s.xi - inbox.xi[i][j]);
                cz += a * (s.zeta - inbox.zeta[i][j]);
            }
            let dxi = -gains.k_p * (s.omega - omega_star) - gains.c_f * cx;
            let dzeta = -gains.k_q * (s.v - v_star) - gains.c_v * cz;
            (s.xi + h * dxi, s.zeta + h * dzeta)
        })
        .collect();
    for (s, (xi, zeta)) in states.iter_mut().zip(updates) {
        s.xi = xi;
        s.zeta = zeta;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn state(p: f64, q: f64) -> DGState {
        DGState::new(TAU * 60.0, 1.0, p, q, 0.0, 0.0)
    }

    #[test]
    fn zero_slope_returns_nominal_frequency() {
        let d = DroopParams {
            m: 0.0,
            ..DroopParams::default()
        };
        let (w, _) = droop_eval(&state(12_345.0, 0.0), &d, 377.0, 1.0).unwrap();
        assert_eq!(w, 377.0);
    }

    #[test]
    fn setpoint_is_equilibrium() {
        let d = DroopParams::default();
        let (w, v) = droop_eval(&state(d.p_star, d.q_star), &d, 376.9911, 1.0).unwrap();
        assert_eq!((w, v), (376.9911, 1.0));
    }

    #[test]
    fn hand_evaluated_droop() {
        let d = DroopParams {
            m: 1e-4,
            p_star: 500.0,
            ..DroopParams::default()
        };
        let (w, _) = droop_eval(&state(1000.0, 0.0), &d, 376.9911, 1.0).unwrap();
        assert!((w - 376.9411).abs() < 1e-12);
    }

    #[test]
    fn droop_rejects_non_finite() {
        let d = DroopParams::default();
        assert!(droop_eval(&state(f64::NAN, 0.0), &d, 377.0, 1.0).is_err());
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let g = CommGraph::ring(4);
        let mut s = vec![DGState::new(377.0, 1.0, 0.0, 0.0, 0.3, -0.1); 4];
        let before = s.clone();
        let inbox = Inbox::direct(&s);
        secondary_step(
            &mut s,
            &inbox,
            &g,
            &SecondaryGains::default(),
            377.0,
            1.0,
            1e-3,
        )
        .unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn restoration_term_alone() {
        let g = CommGraph::ring(3);
        let gains = SecondaryGains {
            k_p: 1.0,
            c_f: 0.0,
            ..SecondaryGains::default()
        };
        let mut s = vec![DGState::new(377.1, 1.0, 0.0, 0.0, 0.0, 0.0); 3];
        let inbox = Inbox::direct(&s);
        secondary_step(&mut s, &inbox, &g, &gains, 377.0, 1.0, 0.001).unwrap();
        for st in &s {
            assert!((st.xi - (-1e-4)).abs() < 1e-12, "{}", st.xi);
        }
    }

    #[test]
    fn two_node_consensus() {
        let g = CommGraph::from_weights(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let gains = SecondaryGains {
            k_p: 0.0,
            k_q: 0.0,
            c_f: 1.0,
            c_v: 0.0,
        };
        let mut s = vec![
            DGState::new(377.0, 1.0, 0.0, 0.0, 1.0, 0.0),
            DGState::new(377.0, 1.0, 0.0, 0.0, -1.0, 0.0),
        ];
        let inbox = Inbox::direct(&s);
        secondary_step(&mut s, &inbox, &g, &gains, 377.0, 1.0, 0.1).unwrap();
        assert!((s[0].xi - 0.8).abs() < 1e-12);
        assert!((s[1].xi + 0.8).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let g = CommGraph::ring(3);
        let mut s = vec![DGState::new(377.0, 1.0, 0.0, 0.0, 0.0, 0.0); 2];
        let inbox = Inbox::direct(&s);
        let r = secondary_step(
            &mut s,
            &inbox,
            &g,
            &SecondaryGains::default(),
            377.0,
            1.0,
            1e-3,
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
