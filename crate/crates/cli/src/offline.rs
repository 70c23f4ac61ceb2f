//! Checks and fits on trajectories already written to disk.

use std::fs;
use std::path::Path;

use fastdiff_core::diagnostics::{self, BarrierSpec, BARRIER_TOL};
use fastdiff_core::io::{self as csvio, IoError};
use fastdiff_core::ratefit;
use fastdiff_core::{CheckReport, NormOrder, RateFitResult, Trajectory};

use crate::experiment::ExperimentError;

/// Checks that can be replayed from a trajectory directory. The balance
/// checks need per-step energy terms, which are not persisted.
pub const REPLAYABLE_CHECKS: [&str; 4] = ["barrier", "linf_lower", "positivity", "dt_bound"];

/// Re-runs the replayable checks on `dir`. The barrier is built from the
/// first snapshot, which the solver always records at `t = 0`.
pub fn check_dir(dir: &Path) -> Result<(String, Vec<CheckReport>), ExperimentError> {
    let (header, traj) = csvio::read_trajectory_dir(dir)?;
    let hash = header.require("config_hash")?.to_string();
    let t_e = traj.t_e_est.unwrap_or(f64::NAN);
    let barrier = match traj.snapshots.first() {
        Some(u0) if u0.t == 0.0 => match BarrierSpec::from_initial(u0, &traj.grid, &traj.params) {
            Ok(spec) => diagnostics::check_barrier(&traj, &spec, BARRIER_TOL),
            Err(e) => CheckReport::failed("barrier", e.to_string()),
        },
        _ => CheckReport::failed("barrier", "no snapshot at t = 0"),
    };
    Ok((
        hash,
        vec![
            barrier,
            diagnostics::check_linf_lower(&traj, t_e),
            diagnostics::check_positivity(&traj, t_e),
            diagnostics::check_dt_bound(&traj, &traj.params),
        ],
    ))
}

/// Fits every recorded order of a standalone `trajectory.csv`.
pub fn ratefit_file(
    path: &Path,
    window: (f64, f64),
    tolerance: f64,
) -> Result<(String, Vec<RateFitResult>, Vec<String>), ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let (header, records) = csvio::read_trajectory(&text)?;
    let (params, grid, config) = csvio::setup_from_header(&header)?;
    let t_e_est = match header.require("T_e_est")? {
        "none" => None,
        _ => Some(header.parse("T_e_est")?),
    };
    let traj = Trajectory {
        initial_l1: records.first().map_or(0.0, |r| r.l1()),
        params,
        grid,
        config,
        records,
        snapshots: Vec::new(),
        t_e_est,
        boundary_value: header.parse("boundary_value")?,
        clipped_mass: header.parse("clipped_mass")?,
        max_clip: 0.0,
    };
    let m = traj.params.m();
    let mut fits = Vec::new();
    let mut errors = Vec::new();
    for order in [
        NormOrder::Infinity,
        NormOrder::ONE,
        NormOrder::Finite(m + 1.0),
        NormOrder::TWO,
    ] {
        match ratefit::fit_rate(&traj, order, window, tolerance) {
            Ok(f) => fits.push(f),
            Err(e) => errors.push(format!("r={order}: {e}")),
        }
    }
    Ok((header.require("config_hash")?.to_string(), fits, errors))
}
