//! A single experiment: solve, check, fit, write.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fastdiff_core::diagnostics::{self, BarrierSpec, BARRIER_TOL};
use fastdiff_core::io::{self as csvio, fmt_f64, IoError};
use fastdiff_core::ratefit::{self, Sandwich};
use fastdiff_core::rescale::{self, Oscillation, RescaledNorms};
use fastdiff_core::{
    solver, CheckReport, DerivedExponents, NormOrder, Params, RadialGrid, RateFitResult,
    SolverConfig, SolverError, State, Trajectory,
};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Partial outputs have been written; `summary` describes them.
    #[error("solver failed: {error}")]
    Solver {
        error: SolverError,
        summary: Box<RunSummary>,
    },
    #[error(transparent)]
    Io(#[from] IoError),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => EXIT_CONFIG,
            ExperimentError::Solver { .. } | ExperimentError::Io(_) => EXIT_SOLVER,
        }
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.into())
    }
}

/// Slopes of one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub level: usize,
    pub cells: usize,
    pub dt_init: f64,
    pub t_e_est: Option<f64>,
    pub fits: Vec<RateFitResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub exponents: Option<DerivedExponents>,
    pub steps: usize,
    pub t_e_est: Option<f64>,
    pub final_dt: f64,
    pub clipped_mass: f64,
    pub clipping_flagged: bool,
    pub checks: Vec<CheckReport>,
    pub ratefits: Vec<RateFitResult>,
    pub ratefit_errors: Vec<String>,
    pub sandwiches: Vec<Sandwich>,
    pub vnorm_oscillation: Option<Oscillation>,
    pub refinement: Vec<RefinementLevel>,
    /// Every deviation non-increasing across levels; `None` without refinement.
    pub refinement_monotone: Option<bool>,
    pub pass: bool,
    pub error: Option<String>,
    pub wall_clock_s: f64,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_VERDICT
        }
    }

    /// Smallest check margin; `+∞` without checks.
    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.worst_margin)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Runs the enabled checks on a finished trajectory.
pub fn run_checks(cfg: &ExperimentConfig, traj: &Trajectory, u0: &State) -> Vec<CheckReport> {
    let params = &traj.params;
    let t_e = traj.t_e_est.unwrap_or(f64::NAN);
    let mut out = Vec::new();
    for name in &cfg.checks {
        let report = match name.as_str() {
            "barrier" => match BarrierSpec::from_initial(u0, &traj.grid, params) {
                Ok(spec) => diagnostics::check_barrier(traj, &spec, BARRIER_TOL),
                Err(e) => CheckReport::failed("barrier", e.to_string()),
            },
            "linf_lower" => diagnostics::check_linf_lower(traj, t_e),
            "positivity" => diagnostics::check_positivity(traj, t_e),
            "dt_bound" => diagnostics::check_dt_bound(traj, params),
            "energy_identity" => diagnostics::check_energy_balance(traj),
            "mass_balance" => diagnostics::check_mass_balance(traj),
            other => CheckReport::failed(other, "unknown check"),
        };
        out.push(report);
    }
    out
}

fn fits_for(
    traj: &Trajectory,
    orders: &[NormOrder],
    cfg: &ExperimentConfig,
) -> (Vec<RateFitResult>, Vec<String>) {
    let mut fits = Vec::new();
    let mut errors = Vec::new();
    for &o in orders {
        match ratefit::fit_rate(traj, o, cfg.ratefit.window, cfg.ratefit.tolerance) {
            Ok(f) => fits.push(f),
            Err(e) => errors.push(format!("r={o}: {e}")),
        }
    }
    (fits, errors)
}

fn rescaled(traj: &Trajectory, exps: &DerivedExponents) -> Vec<RescaledNorms> {
    let Some(t_e) = traj.t_e_est else {
        return Vec::new();
    };
    let live: Vec<_> = traj.records.iter().copied().filter(|r| r.t < t_e).collect();
    rescale::rescaled_norm_series(&live, t_e, exps).unwrap_or_default()
}

fn create(path: PathBuf) -> Result<BufWriter<fs::File>, IoError> {
    fs::File::create(&path)
        .map(BufWriter::new)
        .map_err(|source| IoError::File { path, source })
}

fn write_summary(dir: &Path, summary: &RunSummary) -> Result<(), ExperimentError> {
    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}

fn write_refinement(
    dir: &Path,
    levels: &[RefinementLevel],
    hash: &str,
) -> Result<(), ExperimentError> {
    let mut h = csvio::Header::new(hash);
    h.push("levels", levels.len());
    let mut w = create(dir.join("refinement.csv"))?;
    use std::io::Write;
    write!(w, "{}", h.render())?;
    writeln!(w, "level,M,dt_init,T_e_est,r,slope,expected,rel_dev")?;
    for l in levels {
        for f in &l.fits {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                l.level,
                l.cells,
                fmt_f64(l.dt_init),
                l.t_e_est.map_or_else(|| "none".into(), fmt_f64),
                f.order,
                fmt_f64(f.slope),
                fmt_f64(f.expected),
                fmt_f64(f.rel_dev)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Deviations non-increasing from each level to the next, per order.
pub fn monotone(levels: &[RefinementLevel]) -> bool {
    levels.windows(2).all(|w| {
        w[1].fits.iter().all(|b| {
            w[0].fits
                .iter()
                .find(|a| a.order == b.order)
                .is_some_and(|a| b.rel_dev <= a.rel_dev)
        }) && w[1].fits.len() == w[0].fits.len()
    })
}

fn setup(cfg: &ExperimentConfig) -> Result<(Params, RadialGrid, State), ConfigError> {
    let params = cfg.params()?;
    let bad = |key: &str, e: &dyn std::fmt::Display| ConfigError::Invalid {
        key: key.into(),
        reason: e.to_string(),
    };
    let grid = RadialGrid::uniform(&params, cfg.grid.r_max, cfg.grid.cells)
        .map_err(|e| bad("grid", &e))?;
    let u0 = cfg
        .initial
        .sample(&grid, &params)
        .map_err(|e| bad("initial", &e))?;
    Ok((params, grid, u0))
}

fn refined_config(base: &SolverConfig, level: usize) -> SolverConfig {
    (0..level).fold(base.clone(), |c, _| c.refined())
}

/// Solves, checks and fits one configuration, writing every output file
/// into `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, ExperimentError> {
    let started = Instant::now();
    let (params, grid, u0) = setup(cfg)?;
    let hash = cfg.hash();
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let exps = params.derive().ok();
    let orders = match exps {
        Some(_) => cfg.orders(params.m())?,
        None => Vec::new(),
    };

    let mut summary = RunSummary {
        config_hash: hash.clone(),
        config: cfg.clone(),
        exponents: exps,
        steps: 0,
        t_e_est: None,
        final_dt: 0.0,
        clipped_mass: 0.0,
        clipping_flagged: false,
        checks: Vec::new(),
        ratefits: Vec::new(),
        ratefit_errors: Vec::new(),
        sandwiches: Vec::new(),
        vnorm_oscillation: None,
        refinement: Vec::new(),
        refinement_monotone: None,
        pass: false,
        error: None,
        wall_clock_s: 0.0,
    };

    let traj = match solver::run(&u0, &grid, &params, &cfg.solver) {
        Ok(t) => t,
        Err(failure) => {
            csvio::write_trajectory_dir(&dir, &failure.partial, &hash)?;
            summary.steps = failure.partial.steps();
            summary.error = Some(failure.error.to_string());
            summary.wall_clock_s = started.elapsed().as_secs_f64();
            write_summary(&dir, &summary)?;
            return Err(ExperimentError::Solver {
                error: failure.error,
                summary: Box::new(summary),
            });
        }
    };
    csvio::write_trajectory_dir(&dir, &traj, &hash)?;
    summary.steps = traj.steps();
    summary.t_e_est = traj.t_e_est;
    summary.final_dt = traj.final_dt();
    summary.clipped_mass = traj.clipped_mass;
    summary.clipping_flagged = traj.clipping_flagged();

    summary.checks = run_checks(cfg, &traj, &u0);
    csvio::write_checks(create(dir.join("checks.csv"))?, &summary.checks, &hash)?;

    let (fits, errors) = fits_for(&traj, &orders, cfg);
    summary.ratefits = fits;
    summary.ratefit_errors = errors;
    csvio::write_ratefits(create(dir.join("ratefit.csv"))?, &summary.ratefits, &hash)?;

    if let (Some(e), Some(t_e)) = (exps.as_ref(), traj.t_e_est) {
        for &o in &orders {
            let col = ratefit::norm_column(o, params.m());
            if let Ok(col) = col {
                let series: Vec<(f64, f64)> =
                    traj.records.iter().map(|r| (r.t, r.norms[col])).collect();
                summary.sandwiches.extend(ratefit::sandwich(
                    &series,
                    t_e,
                    cfg.ratefit.window,
                    o,
                    e,
                ));
            }
        }
        let vn = rescaled(&traj, e);
        csvio::write_vnorms(create(dir.join("vnorms.csv"))?, &vn, &hash)?;
        let s_hi = (1.0 / (1.0 - cfg.ratefit.window.1)).ln();
        let pts: Vec<(f64, f64)> = vn.iter().map(|p| (p.s, p.v[3])).collect();
        summary.vnorm_oscillation = rescale::last_decade_oscillation(&pts, s_hi);
    }

    if cfg.ratefit.refine > 0 && !orders.is_empty() {
        let mut levels = vec![RefinementLevel {
            level: 0,
            cells: grid.cells(),
            dt_init: cfg.solver.dt_init,
            t_e_est: traj.t_e_est,
            fits: summary.ratefits.clone(),
        }];
        for level in 1..=cfg.ratefit.refine {
            let mut c = cfg.clone();
            c.grid.cells = cfg.grid.cells << level;
            c.solver = refined_config(&cfg.solver, level);
            let (p, g, u) = setup(&c)?;
            let t = match solver::run(&u, &g, &p, &c.solver) {
                Ok(t) => t,
                Err(failure) => {
                    summary.error = Some(format!("refinement level {level}: {}", failure.error));
                    break;
                }
            };
            let (fits, errors) = fits_for(&t, &orders, &c);
            summary
                .ratefit_errors
                .extend(errors.into_iter().map(|e| format!("level {level}: {e}")));
            levels.push(RefinementLevel {
                level,
                cells: c.grid.cells,
                dt_init: c.solver.dt_init,
                t_e_est: t.t_e_est,
                fits,
            });
        }
        write_refinement(&dir, &levels, &hash)?;
        summary.refinement_monotone = Some(summary.error.is_none() && monotone(&levels));
        summary.refinement = levels;
    }

    summary.pass = summary.checks.iter().all(|c| c.pass)
        && summary.ratefits.iter().all(|f| f.pass)
        && summary.ratefit_errors.is_empty()
        && summary.refinement_monotone != Some(false)
        && summary.error.is_none();
    summary.wall_clock_s = started.elapsed().as_secs_f64();
    write_summary(&dir, &summary)?;
    Ok(summary)
}
