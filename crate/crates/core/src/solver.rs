//! Backward Euler time stepping for `∂t u = Δu^m − u^q` in radial
//! coordinates, with adaptive steps and extinction-time estimation.
//!
//! Each step solves
//!
//! ```text
//! u_i − dt·(Δ_h w)_i + dt·u_i^q = u_i^n,    w = u^m,
//! ```
//!
//! where `Δ_h` is the three-point flux form of `w'' + (N−1)/r·w'` on the
//! node shells of [`RadialGrid`] (symmetry at the origin, a prescribed value
//! at `R_max`). Newton iterates on `w`: in that variable `u = w^{1/m}` and
//! `u^q = w^{q/m}` have bounded derivatives at zero because `m ≤ q < 1`,
//! so the Jacobian is a tridiagonal M-matrix at every iterate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::BarrierSpec;
use crate::exponents::{NormOrder, ParamError, Params};
use crate::grid::{
    energy_terms_from_powers, lr_norm_of, EnergyTerms, GridError, RadialGrid, State,
};
use crate::tridiag;

/// Consecutive accepted steps before the step size grows.
pub const GROWTH_AFTER: usize = 5;
pub const GROWTH_FACTOR: f64 = 1.2;
/// A run that is still alive this far past the a-priori bound is a bug.
pub const NON_EXTINCTION_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `u(R_max) = 0`.
    DirichletZero,
    /// `u(R_max) = max(κ₀, κ*)·R_max^{−2/(q−m)}`, the barrier value.
    BarrierClamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Stop once `‖u‖_∞ ≤ eps_ext`.
    pub eps_ext: f64,
    /// Keep a full snapshot every this many accepted steps.
    pub snapshot_stride: usize,
    pub boundary: Boundary,
    /// Cap `dt` at this fraction of the flat-majorant lifetime `‖u‖_∞^{1−q}/(1−q)`.
    pub remaining_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_init: 1e-3,
            dt_min: 1e-12,
            dt_max: 1e-3,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            eps_ext: 1e-8,
            snapshot_stride: 10,
            boundary: Boundary::DirichletZero,
            remaining_fraction: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::InvalidConfig(what.to_string()));
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad("need 0 < dt_min <= dt_init <= dt_max");
        }
        if self.newton_tol.is_nan() || self.newton_tol <= 0.0 || self.newton_max_iter == 0 {
            return bad("need newton_tol > 0 and newton_max_iter >= 1");
        }
        if self.eps_ext.is_nan() || self.eps_ext <= 0.0 {
            return bad("need eps_ext > 0");
        }
        if self.snapshot_stride == 0 {
            return bad("need snapshot_stride >= 1");
        }
        if !(self.remaining_fraction > 0.0 && self.remaining_fraction <= 1.0) {
            return bad("need 0 < remaining_fraction <= 1");
        }
        Ok(())
    }

    /// Same run with every step-size control halved.
    pub fn refined(&self) -> Self {
        SolverConfig {
            dt_init: 0.5 * self.dt_init,
            dt_max: 0.5 * self.dt_max,
            dt_min: (0.5 * self.dt_min).min(0.5 * self.dt_init),
            remaining_fraction: 0.5 * self.remaining_fraction,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(
        "Newton did not converge at t={t}, dt={dt}: residual {residual:e} after {iters} iterations"
    )]
    NewtonDivergence {
        t: f64,
        dt: f64,
        residual: f64,
        iters: usize,
    },
    #[error("time step {dt:e} at t={t} fell below dt_min")]
    StepTooSmall { t: f64, dt: f64 },
    #[error("no extinction by t={t}; a-priori bound is {bound}")]
    NonExtinction { t: f64, bound: f64 },
    #[error("trajectory never reached the extinction threshold")]
    NotExtinguished,
    #[error("initial datum is identically zero")]
    ZeroInitialData,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Norm orders recorded at every step: `1`, `m+1`, `2`, `∞`.
pub fn recorded_orders(params: &Params) -> [NormOrder; 4] {
    [
        NormOrder::ONE,
        NormOrder::Finite(params.m() + 1.0),
        NormOrder::TWO,
        NormOrder::Infinity,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    /// `‖u‖_1, ‖u‖_{m+1}, ‖u‖_2, ‖u‖_∞`.
    pub norms: [f64; 4],
    /// Step that produced this record; zero for the initial record.
    pub dt: f64,
    pub newton_iters: usize,
    pub energy: EnergyTerms,
    /// `∫ u^q` over the nodes the scheme updates.
    pub absorption: f64,
    /// Flux of `−∇u^m` out through `R_max`.
    pub outflux: f64,
}

impl Record {
    pub fn linf(&self) -> f64 {
        self.norms[3]
    }

    pub fn l1(&self) -> f64 {
        self.norms[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: Params,
    pub grid: RadialGrid,
    pub config: SolverConfig,
    pub records: Vec<Record>,
    /// Full states; always contains the initial datum and the final state.
    pub snapshots: Vec<State>,
    pub t_e_est: Option<f64>,
    /// Value imposed at `R_max`.
    pub boundary_value: f64,
    /// `Σ w_i |u_i|` removed by clipping negative values, over the whole run.
    pub clipped_mass: f64,
    /// Largest single clipped magnitude.
    pub max_clip: f64,
    pub initial_l1: f64,
}

impl Trajectory {
    pub fn extinguished(&self) -> bool {
        self.records
            .last()
            .is_some_and(|r| r.linf() <= self.config.eps_ext)
    }

    /// Clipped mass above `1e-6·‖u₀‖₁`.
    pub fn clipping_flagged(&self) -> bool {
        self.clipped_mass > 1e-6 * self.initial_l1
    }

    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// Smallest accepted step, used for the "k·dt before extinction" windows.
    pub fn final_dt(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.dt)
    }
}

#[derive(Debug, Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: SolverError,
    pub partial: Box<Trajectory>,
}

/// The flux-form radial Laplacian restricted to the unknowns `0..M`.
#[derive(Debug, Clone)]
struct RadialLaplacian {
    /// Coefficient of `w_{i−1} − w_i`.
    left: Vec<f64>,
    /// Coefficient of `w_{i+1} − w_i`.
    right: Vec<f64>,
}

impl RadialLaplacian {
    fn new(grid: &RadialGrid) -> Self {
        let m = grid.cells();
        let h = grid.spacing();
        let a = grid.face_areas();
        let w = grid.weights();
        let left = (0..m)
            .map(|i| if i == 0 { 0.0 } else { a[i - 1] / (h * w[i]) })
            .collect();
        let right = (0..m).map(|i| a[i] / (h * w[i])).collect();
        RadialLaplacian { left, right }
    }

    fn apply(&self, w: &[f64], boundary: f64, i: usize) -> f64 {
        let n = self.left.len();
        let wr = if i + 1 < n { w[i + 1] } else { boundary };
        let wl = if i > 0 { w[i - 1] } else { 0.0 };
        self.right[i] * (wr - w[i]) - self.left[i] * (w[i] - wl)
    }
}

struct Workspace {
    lap: RadialLaplacian,
    w: Vec<f64>,
    trial: Vec<f64>,
    res: Vec<f64>,
    trial_res: Vec<f64>,
    /// `(w^{1/m}, w^{q/m})` from the last residual evaluation.
    pow: Vec<(f64, f64)>,
    trial_pow: Vec<(f64, f64)>,
    dir: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(grid: &RadialGrid) -> Self {
        let n = grid.cells();
        Workspace {
            lap: RadialLaplacian::new(grid),
            w: vec![0.0; n],
            trial: vec![0.0; n],
            res: vec![0.0; n],
            trial_res: vec![0.0; n],
            pow: vec![(0.0, 0.0); n],
            trial_pow: vec![(0.0, 0.0); n],
            dir: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    pub newton_iters: usize,
    pub clipped_mass: f64,
    pub max_clip: f64,
}

/// `(w^a, w^b)` through one logarithm.
#[inline]
fn powers(w: f64, a: f64, b: f64) -> (f64, f64) {
    let l = w.ln();
    ((a * l).exp(), (b * l).exp())
}

#[allow(clippy::too_many_arguments)]
fn residual_into(
    ws_lap: &RadialLaplacian,
    w: &[f64],
    prev: &[f64],
    out: &mut [f64],
    pow: &mut [(f64, f64)],
    dt: f64,
    inv_m: f64,
    q_over_m: f64,
    boundary_w: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..w.len() {
        let (u, a) = powers(w[i], inv_m, q_over_m);
        pow[i] = (u, a);
        let r = u + dt * a - dt * ws_lap.apply(w, boundary_w, i) - prev[i];
        out[i] = r;
        worst = worst.max(r.abs());
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

/// Multiple of machine epsilon, relative to the largest residual term,
/// below which Newton is not asked to go.
const ROUNDOFF_FLOOR: f64 = 64.0;

fn newton_solve(
    ws: &mut Workspace,
    prev: &[f64],
    params: &Params,
    config: &SolverConfig,
    dt: f64,
    t: f64,
    boundary_value: f64,
) -> Result<usize, SolverError> {
    let m = params.m();
    let inv_m = 1.0 / m;
    let q_over_m = params.q() / m;
    let boundary_w = boundary_value.powf(m);
    let n = ws.w.len();
    for (w, &u) in ws.w.iter_mut().zip(prev) {
        *w = u.powf(m);
    }
    let mut rnorm = residual_into(
        &ws.lap,
        &ws.w,
        prev,
        &mut ws.res,
        &mut ws.pow,
        dt,
        inv_m,
        q_over_m,
        boundary_w,
    );
    // The residual carries the units of u: an absolute tolerance would
    // accept the unchanged state once dt·u^q drops below it.
    // Near extinction dt·Δw can dwarf u itself; the floor keeps the target
    // above the rounding noise of the largest term in the residual.
    let scale = prev.iter().fold(boundary_value, |a, &u| a.max(u));
    let stiffness = (0..n).fold(0.0f64, |a, i| a.max(ws.lap.left[i] + ws.lap.right[i]));
    let terms = scale + dt * (stiffness * scale.powf(m) + scale.powf(params.q()));
    let tol = (config.newton_tol * scale)
        .max(ROUNDOFF_FLOOR * f64::EPSILON * terms)
        .max(f64::MIN_POSITIVE);
    let mut iters = 0;
    while rnorm > tol || (iters == 0 && rnorm > 0.0) {
        if iters >= config.newton_max_iter {
            return Err(SolverError::NewtonDivergence {
                t,
                dt,
                residual: rnorm,
                iters,
            });
        }
        iters += 1;
        for i in 0..n {
            let wi = ws.w[i];
            let (du, da) = if wi > 0.0 {
                let (u, a) = ws.pow[i];
                (inv_m * u / wi, q_over_m * a / wi)
            } else {
                (0.0, if q_over_m == 1.0 { 1.0 } else { 0.0 })
            };
            ws.diag[i] = du + dt * da + dt * (ws.lap.left[i] + ws.lap.right[i]);
            ws.lower[i] = -dt * ws.lap.left[i];
            ws.upper[i] = -dt * ws.lap.right[i];
            ws.dir[i] = -ws.res[i];
        }
        if !tridiag::solve_in_place(&ws.lower, &ws.diag, &ws.upper, &mut ws.dir, &mut ws.scratch) {
            return Err(SolverError::NewtonDivergence {
                t,
                dt,
                residual: rnorm,
                iters,
            });
        }
        // backtrack on the residual, projecting onto w >= 0
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            for i in 0..n {
                ws.trial[i] = (ws.w[i] + lambda * ws.dir[i]).max(0.0);
            }
            let r = residual_into(
                &ws.lap,
                &ws.trial,
                prev,
                &mut ws.trial_res,
                &mut ws.trial_pow,
                dt,
                inv_m,
                q_over_m,
                boundary_w,
            );
            if r < rnorm || r <= tol {
                std::mem::swap(&mut ws.w, &mut ws.trial);
                std::mem::swap(&mut ws.res, &mut ws.trial_res);
                std::mem::swap(&mut ws.pow, &mut ws.trial_pow);
                rnorm = r;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NewtonDivergence {
                t,
                dt,
                residual: rnorm,
                iters,
            });
        }
    }
    Ok(iters)
}

fn boundary_value_for(
    u0: &State,
    grid: &RadialGrid,
    params: &Params,
    boundary: Boundary,
) -> Result<f64, SolverError> {
    Ok(match boundary {
        Boundary::DirichletZero => 0.0,
        Boundary::BarrierClamp => {
            let spec = BarrierSpec::from_initial(u0, grid, params)?;
            spec.threshold(grid.r_max())
        }
    })
}

/// One backward Euler step of size `dt` from `state`.
pub fn step(
    state: &State,
    grid: &RadialGrid,
    params: &Params,
    config: &SolverConfig,
    dt: f64,
) -> Result<StepOutcome, SolverError> {
    let boundary_value = match config.boundary {
        Boundary::DirichletZero => 0.0,
        Boundary::BarrierClamp => *state.values.last().unwrap_or(&0.0),
    };
    let mut ws = Workspace::new(grid);
    step_with(&mut ws, state, grid, params, config, dt, boundary_value)
}

fn step_with(
    ws: &mut Workspace,
    state: &State,
    grid: &RadialGrid,
    params: &Params,
    config: &SolverConfig,
    dt: f64,
    boundary_value: f64,
) -> Result<StepOutcome, SolverError> {
    if dt < config.dt_min || !dt.is_finite() {
        return Err(SolverError::StepTooSmall { t: state.t, dt });
    }
    if state.values.len() != grid.len() {
        return Err(GridError::LengthMismatch {
            expected: grid.len(),
            got: state.values.len(),
        }
        .into());
    }
    let n = grid.cells();
    let iters = newton_solve(
        ws,
        &state.values[..n],
        params,
        config,
        dt,
        state.t,
        boundary_value,
    )?;
    let inv_m = 1.0 / params.m();
    let mut values = Vec::with_capacity(n + 1);
    let mut clipped_mass = 0.0;
    let mut max_clip: f64 = 0.0;
    for (i, &w) in ws.w.iter().enumerate() {
        // iterates are projected onto w >= 0, so this only catches rounding
        if w < 0.0 {
            let u = w.abs().powf(inv_m);
            clipped_mass += grid.weights()[i] * u;
            max_clip = max_clip.max(u);
            values.push(0.0);
        } else {
            values.push(w.powf(inv_m));
        }
    }
    values.push(boundary_value);
    Ok(StepOutcome {
        state: State {
            t: state.t + dt,
            values,
        },
        newton_iters: iters,
        clipped_mass,
        max_clip,
    })
}

fn make_record(state: &State, grid: &RadialGrid, params: &Params, dt: f64, iters: usize) -> Record {
    let (m, q) = (params.m(), params.q());
    let (pm, mut pq): (Vec<f64>, Vec<f64>) = state.values.iter().map(|&u| powers(u, m, q)).unzip();
    let cells = grid.cells();
    let outflux = grid.face_areas()[cells - 1] * (pm[cells - 1] - pm[cells]) / grid.spacing();
    let energy = energy_terms_from_powers(&state.values, &pm, &pq, grid);
    let norms = [
        lr_norm_of(&state.values, grid, NormOrder::ONE),
        energy.x.powf(1.0 / (m + 1.0)),
        lr_norm_of(&state.values, grid, NormOrder::TWO),
        lr_norm_of(&state.values, grid, NormOrder::Infinity),
    ];
    Record {
        t: state.t,
        norms,
        dt,
        newton_iters: iters,
        energy,
        absorption: {
            // the boundary node is prescribed, not absorbed
            pq[cells] = 0.0;
            grid.integrate(&pq, |a| a)
        },
        outflux,
    }
}

/// How the next step size is chosen.
enum Schedule<'a> {
    Adaptive,
    /// Step exactly onto these times (strictly increasing, all > 0).
    Fixed(&'a [f64]),
}

/// Integrates from `u0` until `‖u‖_∞ ≤ eps_ext`.
pub fn run(
    u0: &State,
    grid: &RadialGrid,
    params: &Params,
    config: &SolverConfig,
) -> Result<Trajectory, RunFailure> {
    integrate(u0, grid, params, config, Schedule::Adaptive)
}

/// Like [`run`], but steps exactly onto the given times (for example the
/// accepted times of another run, so that two runs can be compared at
/// matched instants). Stops at extinction or at the last time.
pub fn run_on_schedule(
    u0: &State,
    grid: &RadialGrid,
    params: &Params,
    config: &SolverConfig,
    times: &[f64],
) -> Result<Trajectory, RunFailure> {
    integrate(u0, grid, params, config, Schedule::Fixed(times))
}

fn integrate(
    u0: &State,
    grid: &RadialGrid,
    params: &Params,
    config: &SolverConfig,
    schedule: Schedule<'_>,
) -> Result<Trajectory, RunFailure> {
    let mut traj = Trajectory {
        params: *params,
        grid: grid.clone(),
        config: config.clone(),
        records: Vec::new(),
        snapshots: Vec::new(),
        t_e_est: None,
        boundary_value: 0.0,
        clipped_mass: 0.0,
        max_clip: 0.0,
        initial_l1: 0.0,
    };
    macro_rules! fail {
        ($e:expr) => {
            return Err(RunFailure {
                error: $e.into(),
                partial: Box::new(traj),
            })
        };
    }
    if let Err(e) = config.validate() {
        fail!(e);
    }
    let mut state = match State::new(u0.t, u0.values.clone(), grid) {
        Ok(s) => s,
        Err(e) => fail!(e),
    };
    if state.is_zero() {
        fail!(SolverError::ZeroInitialData);
    }
    let boundary_value = match boundary_value_for(&state, grid, params, config.boundary) {
        Ok(v) => v,
        Err(e) => fail!(e),
    };
    traj.boundary_value = boundary_value;
    if let Some(last) = state.values.last_mut() {
        *last = boundary_value;
    }
    let first = make_record(&state, grid, params, 0.0, 0);
    traj.initial_l1 = first.l1();
    traj.records.push(first);
    traj.snapshots.push(state.clone());

    let bound = state.t + params.flat_extinction_time(state.max());
    let mut ws = Workspace::new(grid);
    let mut dt = config.dt_init;
    let mut streak = 0usize;
    let mut next_fixed = 0usize;
    let mut since_snapshot = 0usize;

    loop {
        let linf = state.max();
        if linf <= config.eps_ext {
            traj.t_e_est = Some(state.t + extinction_tail(&traj.records, params));
            break;
        }
        if state.t > bound * (1.0 + NON_EXTINCTION_MARGIN) {
            fail!(SolverError::NonExtinction { t: state.t, bound });
        }
        let dt_step = match schedule {
            Schedule::Adaptive => dt
                .min(config.dt_max)
                .min(config.remaining_fraction * params.flat_extinction_time(linf)),
            Schedule::Fixed(times) => {
                let Some(&target) = times.get(next_fixed) else {
                    break;
                };
                target - state.t
            }
        };
        if dt_step < config.dt_min {
            fail!(SolverError::StepTooSmall {
                t: state.t,
                dt: dt_step
            });
        }
        match step_with(
            &mut ws,
            &state,
            grid,
            params,
            config,
            dt_step,
            boundary_value,
        ) {
            Ok(out) => {
                traj.clipped_mass += out.clipped_mass;
                traj.max_clip = traj.max_clip.max(out.max_clip);
                state = out.state;
                if let Schedule::Fixed(times) = schedule {
                    // land exactly on the requested instant
                    state.t = times[next_fixed];
                    next_fixed += 1;
                }
                traj.records
                    .push(make_record(&state, grid, params, dt_step, out.newton_iters));
                since_snapshot += 1;
                if since_snapshot >= config.snapshot_stride || state.max() <= config.eps_ext {
                    traj.snapshots.push(state.clone());
                    since_snapshot = 0;
                }
                streak += 1;
                if streak >= GROWTH_AFTER {
                    dt = (dt * GROWTH_FACTOR).min(config.dt_max);
                    streak = 0;
                }
            }
            Err(SolverError::NewtonDivergence { .. }) if matches!(schedule, Schedule::Adaptive) => {
                dt = 0.5 * dt_step;
                streak = 0;
                if dt < config.dt_min {
                    fail!(SolverError::StepTooSmall { t: state.t, dt });
                }
            }
            Err(e) => fail!(e),
        }
    }
    if traj.snapshots.last().map(|s| s.t) != Some(state.t) {
        traj.snapshots.push(state);
    }
    Ok(traj)
}

/// Remaining lifetime after the last record.
///
/// `‖u‖_∞^{1−q}` is linear in `T_e − t` both for flat data and along a
/// self-similar decay, so the secant through the last two records is
/// extrapolated to zero. Below the threshold diffusion still dominates
/// absorption when `m < q`, so the flat-solution lifetime
/// `‖u‖_∞^{1−q}/(1−q)` is only an upper bound; it caps the secant and is
/// the fallback when the secant is unusable.
pub fn extinction_tail(records: &[Record], params: &Params) -> f64 {
    let Some(last) = records.last() else {
        return 0.0;
    };
    let flat = params.flat_extinction_time(last.linf());
    let Some(prev) = records.len().checked_sub(2).map(|k| &records[k]) else {
        return flat;
    };
    let p = 1.0 - params.q();
    let (a0, a1) = (prev.linf().powf(p), last.linf().powf(p));
    let dt = last.t - prev.t;
    if a0 > a1 && dt > 0.0 {
        (a1 * dt / (a0 - a1)).min(flat)
    } else {
        flat
    }
}

/// `t_stop` plus [`extinction_tail`].
pub fn estimate_extinction(traj: &Trajectory) -> Result<f64, SolverError> {
    estimate_from_records(&traj.records, &traj.params, traj.config.eps_ext)
}

pub fn estimate_from_records(
    records: &[Record],
    params: &Params,
    eps_ext: f64,
) -> Result<f64, SolverError> {
    let last = records.last().ok_or(SolverError::NotExtinguished)?;
    if last.linf() > eps_ext {
        return Err(SolverError::NotExtinguished);
    }
    Ok(last.t + extinction_tail(records, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonEstimate {
    pub coarse: f64,
    pub fine: f64,
    /// `2·fine − coarse`, first-order extrapolation.
    pub extrapolated: f64,
}

/// Reruns with every step control halved and extrapolates the two estimates.
pub fn estimate_extinction_richardson(
    u0: &State,
    grid: &RadialGrid,
    params: &Params,
    config: &SolverConfig,
) -> Result<RichardsonEstimate, SolverError> {
    let coarse = run(u0, grid, params, config).map_err(|f| f.error)?;
    let fine = run(u0, grid, params, &config.refined()).map_err(|f| f.error)?;
    let coarse = estimate_extinction(&coarse)?;
    let fine = estimate_extinction(&fine)?;
    Ok(RichardsonEstimate {
        coarse,
        fine,
        extrapolated: 2.0 * fine - coarse,
    })
}
