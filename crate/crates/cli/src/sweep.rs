//! Parameter sweeps over `(N, m, q)` on a bounded worker pool.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use fastdiff_core::io::{fmt_f64, Header};
use fastdiff_core::NormOrder;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, ParamsSpec};
use crate::experiment::{run_experiment, ExperimentError, RunSummary};

pub const SWEEP_COLUMNS: [&str; 17] = [
    "N",
    "m",
    "q",
    "status",
    "alpha",
    "beta",
    "gamma",
    "theta",
    "kappa_star",
    "rate_Linf",
    "T_e_est",
    "worst_margin",
    "dev_L1",
    "dev_Lm1",
    "dev_L2",
    "dev_Linf",
    "note",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowStatus {
    Pass,
    Fail,
    /// Inadmissible parameters, tagged with the violated condition.
    Skipped(String),
    Error,
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowStatus::Pass => f.write_str("pass"),
            RowStatus::Fail => f.write_str("fail"),
            RowStatus::Skipped(kind) => write!(f, "skipped({kind})"),
            RowStatus::Error => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: ParamsSpec,
    pub status: RowStatus,
    pub summary: Option<RunSummary>,
    pub note: String,
}

impl SweepRow {
    fn deviation(&self, k: usize) -> f64 {
        let Some(s) = &self.summary else {
            return f64::NAN;
        };
        let m = self.params.m;
        let wanted = [
            NormOrder::ONE,
            NormOrder::Finite(m + 1.0),
            NormOrder::TWO,
            NormOrder::Infinity,
        ][k];
        s.ratefits
            .iter()
            .find(|f| f.order == wanted)
            .map_or(f64::NAN, |f| f.rel_dev)
    }

    pub fn cells(&self) -> Vec<String> {
        let p = self.params;
        let exps = self.summary.as_ref().and_then(|s| s.exponents);
        let e = |f: fn(&fastdiff_core::DerivedExponents) -> f64| exps.as_ref().map_or(f64::NAN, f);
        let mut row = vec![
            fmt_f64(p.n),
            fmt_f64(p.m),
            fmt_f64(p.q),
            self.status.to_string(),
        ];
        row.extend(
            [
                e(|x| x.alpha),
                e(|x| x.beta),
                e(|x| x.gamma),
                e(|x| x.theta),
                e(|x| x.kappa_star),
                e(|x| x.rate(NormOrder::Infinity)),
                self.summary
                    .as_ref()
                    .and_then(|s| s.t_e_est)
                    .unwrap_or(f64::NAN),
                self.summary.as_ref().map_or(f64::NAN, |s| s.worst_margin()),
            ]
            .map(fmt_f64),
        );
        row.extend((0..4).map(|k| fmt_f64(self.deviation(k))));
        row.push(self.note.clone());
        row
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// 0 if every executed run passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let bad = self
            .rows
            .iter()
            .any(|r| matches!(r.status, RowStatus::Fail | RowStatus::Error));
        i32::from(bad)
    }
}

fn run_dir(base: &std::path::Path, p: &ParamsSpec) -> PathBuf {
    base.join("runs").join(format!(
        "N{}_m{}_q{}",
        fmt_f64(p.n),
        fmt_f64(p.m),
        fmt_f64(p.q)
    ))
}

fn run_point(cfg: &ExperimentConfig, p: ParamsSpec) -> SweepRow {
    let mut c = cfg.with_params(p);
    c.output.dir = run_dir(&cfg.output.dir, &p);
    if let Err(e) = c.params() {
        let (status, note) = match &e {
            ConfigError::Validation(pe) => (RowStatus::Skipped(pe.kind().into()), pe.to_string()),
            other => (RowStatus::Error, other.to_string()),
        };
        return SweepRow {
            params: p,
            status,
            summary: None,
            note,
        };
    }
    match run_experiment(&c) {
        Ok(s) => SweepRow {
            params: p,
            status: if s.pass {
                RowStatus::Pass
            } else {
                RowStatus::Fail
            },
            note: String::new(),
            summary: Some(s),
        },
        Err(ExperimentError::Solver { error, summary }) => SweepRow {
            params: p,
            status: RowStatus::Error,
            note: error.to_string(),
            summary: Some(*summary),
        },
        Err(e) => SweepRow {
            params: p,
            status: RowStatus::Error,
            summary: None,
            note: e.to_string(),
        },
    }
}

/// Runs every admissible `(N, m, q)` on `workers` threads and writes
/// `sweep.csv`. Rows keep the axis order regardless of completion order.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepReport, ExperimentError> {
    let points = cfg.sweep_points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let rows: Vec<SweepRow> =
        pool.install(|| points.par_iter().map(|&p| run_point(cfg, p)).collect());
    let report = SweepReport {
        config_hash: cfg.hash(),
        rows,
    };
    write_sweep_csv(cfg, &report)?;
    Ok(report)
}

fn write_sweep_csv(cfg: &ExperimentConfig, report: &SweepReport) -> Result<(), ExperimentError> {
    fs::create_dir_all(&cfg.output.dir)?;
    let mut out = std::io::BufWriter::new(fs::File::create(cfg.output.dir.join("sweep.csv"))?);
    let mut h = Header::new(&report.config_hash);
    h.push("runs", report.rows.len());
    out.write_all(h.render().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)
        .and_then(|_| {
            report
                .rows
                .iter()
                .try_for_each(|r| w.write_record(r.cells()))
        })
        .and_then(|_| w.flush().map_err(Into::into))
        .map_err(|e| ExperimentError::Io(e.into()))?;
    Ok(())
}
