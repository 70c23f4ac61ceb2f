//! Self-similar variables
//!
//! ```text
//! s = ln(T_e/(T_e − t)),   y = r (T_e − t)^β,   v = (T_e − t)^{−α} u,
//! ```
//!
//! and the rescaled norms `‖v(s)‖_r = ‖u(t)‖_r / (T_e − t)^{α − Nβ/r}`,
//! which need no regridding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{DerivedExponents, NormOrder};
use crate::grid::{RadialGrid, State};
use crate::solver::Record;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RescaleError {
    #[error("time {t} is not before the extinction time {t_e}")]
    TimeOutOfRange { t: f64, t_e: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledFrame {
    pub s: f64,
    pub y_nodes: Vec<f64>,
    pub v_values: Vec<f64>,
}

fn remaining(t: f64, t_e: f64) -> Result<f64, RescaleError> {
    if t < t_e && t >= 0.0 {
        Ok(t_e - t)
    } else {
        Err(RescaleError::TimeOutOfRange { t, t_e })
    }
}

pub fn to_selfsimilar(
    state: &State,
    grid: &RadialGrid,
    t_e: f64,
    exps: &DerivedExponents,
) -> Result<RescaledFrame, RescaleError> {
    let tau = remaining(state.t, t_e)?;
    let space = tau.powf(exps.beta);
    let amp = tau.powf(-exps.alpha);
    Ok(RescaledFrame {
        s: (t_e / tau).ln(),
        y_nodes: grid.nodes().iter().map(|r| r * space).collect(),
        v_values: state.values.iter().map(|u| u * amp).collect(),
    })
}

/// Inverse map: returns `(t, r_nodes, u_values)`.
pub fn from_selfsimilar(
    frame: &RescaledFrame,
    t_e: f64,
    exps: &DerivedExponents,
) -> (f64, Vec<f64>, Vec<f64>) {
    let tau = t_e * (-frame.s).exp();
    let t = t_e * (1.0 - (-frame.s).exp());
    let space = tau.powf(-exps.beta);
    let amp = tau.powf(exps.alpha);
    (
        t,
        frame.y_nodes.iter().map(|y| y * space).collect(),
        frame.v_values.iter().map(|v| v * amp).collect(),
    )
}

/// `(s, ‖v(s)‖_1, ‖v(s)‖_{m+1}, ‖v(s)‖_2, ‖v(s)‖_∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledNorms {
    pub s: f64,
    pub v: [f64; 4],
}

pub fn rescaled_norm_series(
    records: &[Record],
    t_e: f64,
    exps: &DerivedExponents,
) -> Result<Vec<RescaledNorms>, RescaleError> {
    let orders = [
        NormOrder::ONE,
        exps.lm1(),
        NormOrder::TWO,
        NormOrder::Infinity,
    ];
    let rates = orders.map(|o| exps.rate(o));
    records
        .iter()
        .map(|rec| {
            let tau = remaining(rec.t, t_e)?;
            let mut v = [0.0; 4];
            for k in 0..4 {
                v[k] = rec.norms[k] / tau.powf(rates[k]);
            }
            Ok(RescaledNorms {
                s: (t_e / tau).ln(),
                v,
            })
        })
        .collect()
}

/// Spread of `series` over the last decade of `T_e − t` ending at `s_hi`
/// (`s ∈ [s_hi − ln 10, s_hi]`), as `(max − min)/median`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub relative: f64,
    pub points: usize,
}

pub fn last_decade_oscillation(points: &[(f64, f64)], s_hi: f64) -> Option<Oscillation> {
    let lo = s_hi - std::f64::consts::LN_10;
    let mut vals: Vec<f64> = points
        .iter()
        .filter(|(s, _)| *s >= lo && *s <= s_hi)
        .map(|&(_, v)| v)
        .collect();
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    let k = vals.len();
    let median = if k % 2 == 1 {
        vals[k / 2]
    } else {
        0.5 * (vals[k / 2 - 1] + vals[k / 2])
    };
    let (min, max) = (vals[0], vals[k - 1]);
    Some(Oscillation {
        min,
        max,
        median,
        relative: (max - min) / median,
        points: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::Params;
    use approx::assert_relative_eq;

    fn exps() -> DerivedExponents {
        Params::validate(1.0, 0.5, 0.75).unwrap().derive().unwrap()
    }

    fn grid() -> RadialGrid {
        RadialGrid::uniform_in_dimension(1.0, 4.0, 16).unwrap()
    }

    #[test]
    fn unit_remaining_time_is_identity() {
        let g = grid();
        let st = g.sample(3.0, |r| (-r).exp()).unwrap();
        let f = to_selfsimilar(&st, &g, 4.0, &exps()).unwrap();
        assert_relative_eq!(f.s, 4f64.ln(), max_relative = 1e-15);
        assert_eq!(f.y_nodes, g.nodes());
        assert_eq!(f.v_values, st.values);
    }

    #[test]
    fn quarter_remaining_time() {
        let g = grid();
        let st = g.sample(3.75, |r| 1.0 / (1.0 + r)).unwrap();
        let f = to_selfsimilar(&st, &g, 4.0, &exps()).unwrap();
        assert_relative_eq!(f.s, 16f64.ln(), max_relative = 1e-15);
        for (y, r) in f.y_nodes.iter().zip(g.nodes()) {
            assert_relative_eq!(*y, 0.5 * r, max_relative = 1e-15);
        }
        for (v, u) in f.v_values.iter().zip(&st.values) {
            assert_relative_eq!(*v, 256.0 * u, max_relative = 1e-14);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let g = grid();
        let st = g.sample(1.3, |r| (-r * r).exp()).unwrap();
        let f = to_selfsimilar(&st, &g, 2.7, &exps()).unwrap();
        let (t, r, u) = from_selfsimilar(&f, 2.7, &exps());
        assert_relative_eq!(t, 1.3, max_relative = 1e-14);
        for (a, b) in r.iter().zip(g.nodes()) {
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
        for (a, b) in u.iter().zip(&st.values) {
            assert_relative_eq!(*a, *b, max_relative = 1e-13);
        }
    }

    #[test]
    fn rejects_time_at_extinction() {
        let g = grid();
        let st = g.sample(4.0, |_| 0.0).unwrap();
        assert_eq!(
            to_selfsimilar(&st, &g, 4.0, &exps()),
            Err(RescaleError::TimeOutOfRange { t: 4.0, t_e: 4.0 })
        );
    }

    fn rec(t: f64, norms: [f64; 4]) -> Record {
        Record {
            t,
            norms,
            dt: 0.01,
            newton_iters: 1,
            energy: Default::default(),
            absorption: 0.0,
            outflux: 0.0,
        }
    }

    #[test]
    fn exact_power_law_norms_rescale_to_one() {
        let e = exps();
        let te = 2.0;
        let orders = [NormOrder::ONE, e.lm1(), NormOrder::TWO, NormOrder::Infinity];
        let recs: Vec<Record> = (0..150)
            .map(|k| {
                let t = k as f64 * 0.013;
                rec(t, orders.map(|o| (te - t).powf(e.rate(o))))
            })
            .collect();
        for p in rescaled_norm_series(&recs, te, &e).unwrap() {
            for v in p.v {
                assert_relative_eq!(v, 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn flat_solution_has_constant_linf() {
        let e = exps();
        let p = Params::validate(1.0, 0.5, 0.75).unwrap();
        let recs: Vec<Record> = (0..100)
            .map(|k| {
                let t = k as f64 * 0.039;
                rec(t, [1.0, 1.0, 1.0, p.flat_profile_height(4.0 - t)])
            })
            .collect();
        for pt in rescaled_norm_series(&recs, 4.0, &e).unwrap() {
            assert_relative_eq!(pt.v[3], 0.25f64.powi(4), max_relative = 1e-12);
        }
        let mut late = recs.clone();
        late.push(rec(4.0, [0.0; 4]));
        assert!(rescaled_norm_series(&late, 4.0, &e).is_err());
    }

    #[test]
    fn oscillation_of_constant_and_ramp() {
        let pts: Vec<(f64, f64)> = (0..100).map(|k| (k as f64 * 0.05, 2.0)).collect();
        let o = last_decade_oscillation(&pts, 4.0).unwrap();
        assert_eq!(o.relative, 0.0);
        let ramp: Vec<(f64, f64)> = (0..=10).map(|k| (k as f64, 1.0 + k as f64)).collect();
        // s in [10 - ln 10, 10] = [7.70, 10] -> values 9, 10, 11
        let o = last_decade_oscillation(&ramp, 10.0).unwrap();
        assert_eq!(o.points, 3);
        assert_relative_eq!(o.relative, 2.0 / 10.0);
        assert!(last_decade_oscillation(&[], 1.0).is_none());
    }
}
