//! Log-log regression of `‖u(t)‖_r` against `T_e − t` near extinction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{DerivedExponents, NormOrder};
use crate::solver::Trajectory;

pub const MIN_POINTS: usize = 10;
pub const DEFAULT_WINDOW: (f64, f64) = (0.7, 0.99);
pub const DEFAULT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateFitError {
    #[error("only {got} records in the fit window, need at least {MIN_POINTS}")]
    InsufficientData { got: usize },
    #[error("fit window ({0}, {1}) must satisfy 0 < lo < hi < 1")]
    InvalidWindow(f64, f64),
    #[error("trajectory has no extinction-time estimate")]
    NoExtinctionTime,
    #[error("norm order {0} is not recorded")]
    UnknownOrder(String),
}

/// Least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let stderr = if n > 2 {
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        stderr,
        points: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    pub order: NormOrder,
    pub slope: f64,
    pub stderr: f64,
    /// Slope change when `T_e` moves by one final step either way.
    pub sensitivity: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub expected: f64,
    pub rel_dev: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RateFitResult {
    /// `stderr + sensitivity`.
    pub fn error_band(&self) -> f64 {
        self.stderr + self.sensitivity
    }
}

fn window_points(series: &[(f64, f64)], t_e: f64, window: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = (window.0 * t_e, window.1 * t_e);
    series
        .iter()
        .filter(|(t, v)| *t >= lo && *t <= hi && *t < t_e && *v > 0.0)
        .map(|&(t, v)| ((t_e - t).ln(), v.ln()))
        .unzip()
}

/// Fits `ln ‖u‖_r` against `ln(T_e − t)` over `t ∈ [lo·T_e, hi·T_e]`.
/// `t_e_shift` is the step used for the sensitivity refits.
pub fn fit_series(
    series: &[(f64, f64)],
    t_e: f64,
    t_e_shift: f64,
    window: (f64, f64),
    order: NormOrder,
    expected: f64,
    tolerance: f64,
) -> Result<RateFitResult, RateFitError> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi < 1.0) {
        return Err(RateFitError::InvalidWindow(lo, hi));
    }
    let (xs, ys) = window_points(series, t_e, window);
    if xs.len() < MIN_POINTS {
        return Err(RateFitError::InsufficientData { got: xs.len() });
    }
    let fit = least_squares(&xs, &ys).ok_or(RateFitError::InsufficientData { got: xs.len() })?;
    let mut sensitivity: f64 = 0.0;
    if t_e_shift > 0.0 {
        for shifted in [t_e - t_e_shift, t_e + t_e_shift] {
            let (xs, ys) = window_points(series, shifted, window);
            if let Some(f) = least_squares(&xs, &ys) {
                sensitivity = sensitivity.max((f.slope - fit.slope).abs());
            }
        }
    }
    let rel_dev = (fit.slope - expected).abs() / expected.abs();
    Ok(RateFitResult {
        order,
        slope: fit.slope,
        stderr: fit.stderr,
        sensitivity,
        window,
        points: fit.points,
        expected,
        rel_dev,
        tolerance,
        pass: rel_dev <= tolerance,
    })
}

/// Column of `Record::norms` holding `order`.
pub fn norm_column(order: NormOrder, m: f64) -> Result<usize, RateFitError> {
    match order {
        NormOrder::Infinity => Ok(3),
        NormOrder::Finite(1.0) => Ok(0),
        NormOrder::Finite(2.0) => Ok(2),
        NormOrder::Finite(r) if (r - (m + 1.0)).abs() < 1e-12 => Ok(1),
        other => Err(RateFitError::UnknownOrder(other.to_string())),
    }
}

pub fn fit_rate(
    traj: &Trajectory,
    order: NormOrder,
    window: (f64, f64),
    tolerance: f64,
) -> Result<RateFitResult, RateFitError> {
    let t_e = traj.t_e_est.ok_or(RateFitError::NoExtinctionTime)?;
    let exps = traj
        .params
        .derive()
        .map_err(|e| RateFitError::UnknownOrder(e.to_string()))?;
    let col = norm_column(order, traj.params.m())?;
    let series: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.t, r.norms[col])).collect();
    fit_series(
        &series,
        t_e,
        traj.final_dt(),
        window,
        order,
        exps.rate(order),
        tolerance,
    )
}

/// Spread of `‖u(t)‖_r/(T_e − t)^{rate(r)}` over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub order: NormOrder,
    pub lower: f64,
    pub upper: f64,
    pub ratio: f64,
    pub points: usize,
}

pub fn sandwich(
    series: &[(f64, f64)],
    t_e: f64,
    window: (f64, f64),
    order: NormOrder,
    exps: &DerivedExponents,
) -> Option<Sandwich> {
    let rate = exps.rate(order);
    let (lo, hi) = (window.0 * t_e, window.1 * t_e);
    let (mut c, mut big_c, mut k) = (f64::INFINITY, 0.0f64, 0usize);
    for &(t, v) in series {
        if t < lo || t > hi || t >= t_e {
            continue;
        }
        let ratio = v / (t_e - t).powf(rate);
        c = c.min(ratio);
        big_c = big_c.max(ratio);
        k += 1;
    }
    (k > 0 && c > 0.0).then(|| Sandwich {
        order,
        lower: c,
        upper: big_c,
        ratio: big_c / c,
        points: k,
    })
}
