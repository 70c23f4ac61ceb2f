//! Post-hoc checks over trajectories. Every check is a pure function of its
//! inputs and returns a [`CheckReport`] carrying the worst signed margin and
//! where it occurred.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{ParamError, Params};
use crate::grid::{RadialGrid, State};
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("decay constant is unbounded (sup of u0·r^decay is not finite)")]
    Unbounded,
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// Most negative margin seen; `+∞` when nothing constrained the check.
    pub worst_margin: f64,
    pub t: f64,
    pub r: f64,
    pub tolerance: f64,
    /// Number of (time, node) or (step) items examined.
    pub checked: usize,
    pub note: String,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            pass: true,
            worst_margin: f64::INFINITY,
            t: f64::NAN,
            r: f64::NAN,
            tolerance,
            checked: 0,
            note: String::new(),
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(name: &str, note: impl Into<String>) -> Self {
        CheckReport {
            pass: false,
            worst_margin: f64::NEG_INFINITY,
            note: note.into(),
            ..CheckReport::new(name, 0.0)
        }
    }

    fn observe(&mut self, margin: f64, t: f64, r: f64) {
        self.checked += 1;
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.t = t;
            self.r = r;
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.worst_margin >= -self.tolerance;
        self
    }
}

/// The decaying barrier `κ_eff·r^{−2/(q−m)}` with `κ_eff = max(κ₀, κ*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub kappa0: f64,
    pub kappa_star: f64,
    pub kappa_eff: f64,
    pub decay: f64,
}

impl BarrierSpec {
    pub fn new(kappa0: f64, params: &Params) -> Result<Self, ParamError> {
        let d = params.derive()?;
        Ok(BarrierSpec {
            kappa0,
            kappa_star: d.kappa_star,
            kappa_eff: kappa0.max(d.kappa_star),
            decay: d.decay,
        })
    }

    pub fn from_initial(
        u0: &State,
        grid: &RadialGrid,
        params: &Params,
    ) -> Result<Self, DiagnosticsError> {
        let kappa0 = fit_kappa0(u0, grid, params)?;
        Ok(Self::new(kappa0, params)?)
    }

    pub fn threshold(&self, r: f64) -> f64 {
        self.kappa_eff * r.powf(-self.decay)
    }
}

impl From<DiagnosticsError> for crate::solver::SolverError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Params(p) => p.into(),
            DiagnosticsError::Unbounded => {
                crate::solver::SolverError::InvalidConfig("barrier constant is unbounded".into())
            }
        }
    }
}

/// Smallest `κ₀` with `u₀(r_i) ≤ κ₀ r_i^{−2/(q−m)}` at every node `r_i > 0`.
pub fn fit_kappa0(u0: &State, grid: &RadialGrid, params: &Params) -> Result<f64, DiagnosticsError> {
    let decay = params.derive()?.decay;
    let k = grid
        .nodes()
        .iter()
        .zip(&u0.values)
        .filter(|(&r, _)| r > 0.0)
        .map(|(&r, &u)| if u == 0.0 { 0.0 } else { u * r.powf(decay) })
        .fold(0.0, f64::max);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(DiagnosticsError::Unbounded)
    }
}

/// `−ΔΣ^m + Σ^q` for `Σ = κ r^{−2/(q−m)}` in closed form.
pub fn barrier_residual(params: &Params, kappa: f64, r: f64) -> f64 {
    let (n, m, q) = (params.n(), params.m(), params.q());
    let a = 2.0 * m / (q - m);
    let b = 2.0 * q / (q - m);
    -kappa.powf(m) * a * (a + 2.0 - n) * r.powf(-b) + kappa.powf(q) * r.powf(-b)
}

/// Lower bound `κ^m(κ^{q−m} − κ*^{q−m}) r^{−2q/(q−m)}` for [`barrier_residual`].
pub fn barrier_residual_lower_bound(
    params: &Params,
    kappa: f64,
    r: f64,
) -> Result<f64, ParamError> {
    let d = params.derive()?;
    let (m, q) = (params.m(), params.q());
    Ok(kappa.powf(m)
        * (kappa.powf(q - m) - d.kappa_star.powf(q - m))
        * r.powf(-d.absorption_decay()))
}

pub const BARRIER_TOL: f64 = 1e-6;

/// `u(t, r_i) ≤ κ_eff r_i^{−decay}(1 + tol)` at every snapshot node `r_i > 0`.
/// Margin is the relative slack `1 − u/threshold`.
pub fn check_barrier(traj: &Trajectory, barrier: &BarrierSpec, tol: f64) -> CheckReport {
    let mut rep = CheckReport::new("barrier", tol);
    for snap in &traj.snapshots {
        for (&r, &u) in traj.grid.nodes().iter().zip(&snap.values) {
            if r == 0.0 || u == 0.0 {
                continue;
            }
            rep.observe(1.0 - u / barrier.threshold(r), snap.t, r);
        }
    }
    rep.finish()
}

pub const LINF_SLACK: f64 = 5e-2;
pub const LINF_WINDOW_STEPS: f64 = 100.0;

/// `‖u(t)‖_∞ ≥ [(1−q)(T_e − t)]^{1/(1−q)}` on records with
/// `T_e − t ≥ 100·dt_final`, relative slack 5%. Margin is `‖u‖_∞ − threshold`
/// and the tolerance is `5%·threshold` at the worst point.
pub fn check_linf_lower(traj: &Trajectory, t_e: f64) -> CheckReport {
    check_linf_lower_records(&traj.params, &traj.records_view(), t_e, traj.final_dt())
}

/// Record-level form of [`check_linf_lower`], for trajectories read back from disk.
pub fn check_linf_lower_records(
    params: &Params,
    points: &[(f64, f64)],
    t_e: f64,
    dt: f64,
) -> CheckReport {
    let mut rep = CheckReport::new("linf_lower", 0.0);
    let mut worst_rel = f64::INFINITY;
    for &(t, linf) in points {
        if t_e - t < LINF_WINDOW_STEPS * dt {
            continue;
        }
        let thr = params.flat_profile_height(t_e - t);
        rep.checked += 1;
        let rel = (linf - thr) / thr;
        if rel < worst_rel {
            worst_rel = rel;
            rep.worst_margin = linf - thr;
            rep.tolerance = LINF_SLACK * thr;
            rep.t = t;
            rep.r = f64::NAN;
        }
    }
    rep.note = format!("window T_e - t >= {LINF_WINDOW_STEPS}*{dt:e}");
    rep.finish()
}

pub const POSITIVITY_WINDOW_STEPS: f64 = 10.0;

/// Every node except the boundary node is strictly positive on snapshots with
/// `0 < t < T_e − 10·dt_final`. Margin is the smallest value; the tolerance is
/// `−f64::MIN_POSITIVE`, so a pass requires a positive normal number.
pub fn check_positivity(traj: &Trajectory, t_e: f64) -> CheckReport {
    let mut rep = CheckReport::new("positivity", -f64::MIN_POSITIVE);
    let cutoff = t_e - POSITIVITY_WINDOW_STEPS * traj.final_dt();
    let interior = traj.grid.cells();
    let mut skipped = 0usize;
    for snap in &traj.snapshots {
        if !(snap.t > 0.0 && snap.t < cutoff) {
            skipped += 1;
            continue;
        }
        for (&r, &u) in traj.grid.nodes()[..interior].iter().zip(&snap.values) {
            rep.observe(u, snap.t, r);
        }
    }
    rep.note = format!("{skipped} snapshots outside (0, {cutoff})");
    rep.finish()
}

/// `(u₂ − u₁)/(t₂ − t₁) ≤ u₂/((1−m)t₂) + tol` nodewise over consecutive
/// snapshot pairs with `t₁ > 0`. Margin is `u₂/((1−m)t₂) − quotient`.
pub fn check_dt_bound(traj: &Trajectory, params: &Params) -> CheckReport {
    check_dt_bound_snapshots(&traj.snapshots, &traj.grid, params, traj.config.newton_tol)
}

pub fn check_dt_bound_snapshots(
    snapshots: &[State],
    grid: &RadialGrid,
    params: &Params,
    tol: f64,
) -> CheckReport {
    let mut rep = CheckReport::new("dt_bound", tol);
    let mut excluded = 0usize;
    for pair in snapshots.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.t <= 0.0 {
            excluded += 1;
            continue;
        }
        let dt = b.t - a.t;
        if dt <= 0.0 {
            continue;
        }
        let scale = 1.0 / ((1.0 - params.m()) * b.t);
        for ((&r, &u1), &u2) in grid.nodes().iter().zip(&a.values).zip(&b.values) {
            rep.observe(u2 * scale - (u2 - u1) / dt, b.t, r);
        }
    }
    rep.note = format!("{excluded} pair(s) starting at t <= 0 excluded");
    rep.finish()
}

/// Nodewise `lower ≤ upper + tol` at snapshot times present in both
/// trajectories. Margin is `upper − lower`.
pub fn check_comparison(lower: &Trajectory, upper: &Trajectory, tol: f64) -> CheckReport {
    let mut rep = CheckReport::new("comparison", tol);
    let mut j = 0usize;
    let mut matched = 0usize;
    for a in &lower.snapshots {
        while j < upper.snapshots.len() && upper.snapshots[j].t < a.t - 1e-12 {
            j += 1;
        }
        let Some(b) = upper.snapshots.get(j) else {
            break;
        };
        if (b.t - a.t).abs() > 1e-12 * a.t.abs().max(1.0) {
            continue;
        }
        matched += 1;
        for ((&r, &lo), &hi) in lower.grid.nodes().iter().zip(&a.values).zip(&b.values) {
            rep.observe(hi - lo, a.t, r);
        }
    }
    rep.note = format!("{matched} matched snapshot times");
    if matched == 0 {
        rep.worst_margin = f64::NEG_INFINITY;
        rep.note = "no matched snapshot times".into();
    }
    rep.finish()
}

pub const ENERGY_REL_TOL: f64 = 1e-3;
pub const ENERGY_STEP_FRACTION: f64 = 0.99;
pub const MASS_REL_TOL: f64 = 1e-3;

/// Per-step balance statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceStats {
    pub steps: usize,
    pub satisfied: usize,
    pub fraction: f64,
    /// Largest `|residual|/allowed` over all steps.
    pub worst_ratio: f64,
    pub worst_t: f64,
}

impl BalanceStats {
    fn from_ratios(ratios: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut s = BalanceStats {
            steps: 0,
            satisfied: 0,
            fraction: 1.0,
            worst_ratio: 0.0,
            worst_t: f64::NAN,
        };
        for (t, ratio) in ratios {
            s.steps += 1;
            if ratio <= 1.0 {
                s.satisfied += 1;
            }
            if ratio.is_nan() || ratio > s.worst_ratio {
                s.worst_ratio = ratio;
                s.worst_t = t;
            }
        }
        if s.steps > 0 {
            s.fraction = s.satisfied as f64 / s.steps as f64;
        }
        s
    }

    fn report(&self, name: &str, required: f64) -> CheckReport {
        let mut rep = CheckReport::new(name, 0.0);
        rep.worst_margin = self.fraction - required;
        rep.t = self.worst_t;
        rep.checked = self.steps;
        rep.note = format!(
            "{}/{} steps within tolerance, worst ratio {:e}",
            self.satisfied, self.steps, self.worst_ratio
        );
        rep.finish()
    }
}

/// Discrete `X'/(m+1) + D + Y = 0`, step by step: the residual
/// `(X^{n+1}−X^n)/((m+1)dt) + D^{n+1} + Y^{n+1}` must stay within
/// `1e-3·max(1e-2·X^n/dt, D^{n+1} + Y^{n+1})`.
pub fn energy_balance(traj: &Trajectory) -> BalanceStats {
    let m = traj.params.m();
    BalanceStats::from_ratios(traj.records.windows(2).map(|w| {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        let res = (b.energy.x - a.energy.x) / ((m + 1.0) * dt) + b.energy.d + b.energy.y;
        let allowed = ENERGY_REL_TOL * (1e-2 * a.energy.x / dt).max(b.energy.d + b.energy.y);
        (b.t, res.abs() / allowed)
    }))
}

pub fn check_energy_balance(traj: &Trajectory) -> CheckReport {
    energy_balance(traj).report("energy_identity", ENERGY_STEP_FRACTION)
}

/// Discrete `‖u‖₁` balance: `‖u^n‖₁ − ‖u^{n+1}‖₁ ≈ dt·(∫(u^{n+1})^q + outflux)`
/// within `1e-3` relative. Mass leaving through `R_max` is part of the
/// budget; on a truncated domain it can dominate absorption near extinction.
pub fn mass_balance(traj: &Trajectory) -> BalanceStats {
    BalanceStats::from_ratios(traj.records.windows(2).map(|w| {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        let lost = a.l1() - b.l1();
        let budget = dt * (b.absorption + b.outflux);
        (b.t, (lost - budget).abs() / (MASS_REL_TOL * budget.abs()))
    }))
}

pub fn check_mass_balance(traj: &Trajectory) -> CheckReport {
    mass_balance(traj).report("mass_balance", ENERGY_STEP_FRACTION)
}

impl Trajectory {
    /// `(t, ‖u(t)‖_∞)` for every record.
    pub fn records_view(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.linf())).collect()
    }
}
