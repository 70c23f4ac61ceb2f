//! CSV formats.
//!
//! Every file starts with a block of `# key=value` lines, the first of which
//! is always `# config_hash=…`, followed by a CSV table. Floats are written
//! with the shortest representation that round-trips.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::CheckReport;
use crate::exponents::{ParamError, Params};
use crate::grid::{GridError, RadialGrid, State};
use crate::ratefit::RateFitResult;
use crate::rescale::RescaledNorms;
use crate::solver::{Boundary, Record, SolverConfig, Trajectory};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub const TRAJECTORY_COLUMNS: [&str; 7] = [
    "t",
    "norm_L1",
    "norm_Lm1",
    "norm_L2",
    "norm_Linf",
    "dt",
    "newton_iters",
];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header is missing `{0}`")]
    MissingKey(String),
    #[error("`{key}` has unparsable value `{value}`")]
    BadValue { key: String, value: String },
    #[error("expected columns {expected:?}, found {found:?}")]
    Columns {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Ordered `# key=value` block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    pub entries: Vec<(String, String)>,
}

impl Header {
    pub fn new(config_hash: &str) -> Self {
        Header {
            entries: vec![("config_hash".into(), config_hash.into())],
        }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn push_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, fmt_f64(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, IoError> {
        self.get(key).ok_or_else(|| IoError::MissingKey(key.into()))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, IoError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| IoError::BadValue {
            key: key.into(),
            value: v.into(),
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }

    /// Leading `#` lines of `text`; lines without `=` are ignored.
    pub fn scan(text: &str) -> Header {
        let entries = text
            .lines()
            .map_while(|l| l.strip_prefix('#'))
            .filter_map(|l| {
                let (k, v) = l.trim().split_once('=')?;
                Some((k.trim().to_string(), v.trim().to_string()))
            })
            .collect();
        Header { entries }
    }
}

fn boundary_tag(b: Boundary) -> &'static str {
    match b {
        Boundary::DirichletZero => "dirichlet-zero",
        Boundary::BarrierClamp => "barrier-clamp",
    }
}

fn parse_boundary(s: &str) -> Option<Boundary> {
    match s {
        "dirichlet-zero" => Some(Boundary::DirichletZero),
        "barrier-clamp" => Some(Boundary::BarrierClamp),
        _ => None,
    }
}

/// Appends the grid block (`N`, `R_max`, `M`).
pub fn grid_header(h: &mut Header, grid: &RadialGrid) {
    h.push_f64("N", grid.dimension())
        .push_f64("R_max", grid.r_max())
        .push("M", grid.cells());
}

pub fn trajectory_header(traj: &Trajectory, config_hash: &str) -> Header {
    let mut h = Header::new(config_hash);
    h.push_f64("m", traj.params.m())
        .push_f64("q", traj.params.q());
    grid_header(&mut h, &traj.grid);
    h.push("boundary", boundary_tag(traj.config.boundary))
        .push_f64("boundary_value", traj.boundary_value)
        .push_f64("eps_ext", traj.config.eps_ext)
        .push_f64("newton_tol", traj.config.newton_tol)
        .push(
            "T_e_est",
            traj.t_e_est.map_or_else(|| "none".into(), fmt_f64),
        )
        .push_f64("final_dt", traj.final_dt())
        .push_f64("clipped_mass", traj.clipped_mass);
    h
}

fn table<W: Write>(
    mut out: W,
    header: &Header,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), IoError> {
    out.write_all(header.render().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(
    out: W,
    traj: &Trajectory,
    config_hash: &str,
) -> Result<(), IoError> {
    let rows = traj.records.iter().map(|r| {
        let mut row: Vec<String> = std::iter::once(r.t)
            .chain(r.norms)
            .chain([r.dt])
            .map(fmt_f64)
            .collect();
        row.push(r.newton_iters.to_string());
        row
    });
    table(
        out,
        &trajectory_header(traj, config_hash),
        &TRAJECTORY_COLUMNS,
        rows,
    )
}

pub fn write_state<W: Write>(
    out: W,
    state: &State,
    grid: &RadialGrid,
    config_hash: &str,
) -> Result<(), IoError> {
    let mut h = Header::new(config_hash);
    h.push_f64("t", state.t);
    grid_header(&mut h, grid);
    let rows = grid
        .nodes()
        .iter()
        .zip(&state.values)
        .map(|(r, u)| vec![fmt_f64(*r), fmt_f64(*u)]);
    table(out, &h, &["r", "u"], rows)
}

pub fn write_checks<W: Write>(
    out: W,
    checks: &[CheckReport],
    config_hash: &str,
) -> Result<(), IoError> {
    let rows = checks.iter().map(|c| {
        vec![
            c.name.clone(),
            c.pass.to_string(),
            fmt_f64(c.worst_margin),
            fmt_f64(c.t),
            fmt_f64(c.r),
            fmt_f64(c.tolerance),
        ]
    });
    table(
        out,
        &Header::new(config_hash),
        &["check", "pass", "worst_margin", "t", "r", "tolerance"],
        rows,
    )
}

pub fn write_ratefits<W: Write>(
    out: W,
    fits: &[RateFitResult],
    config_hash: &str,
) -> Result<(), IoError> {
    let rows = fits.iter().map(|f| {
        vec![
            f.order.to_string(),
            fmt_f64(f.slope),
            fmt_f64(f.stderr),
            fmt_f64(f.expected),
            fmt_f64(f.rel_dev),
            f.pass.to_string(),
            fmt_f64(f.window.0),
            fmt_f64(f.window.1),
            fmt_f64(f.sensitivity),
        ]
    });
    table(
        out,
        &Header::new(config_hash),
        &[
            "r",
            "slope",
            "stderr",
            "expected",
            "rel_dev",
            "pass",
            "window_lo",
            "window_hi",
            "sensitivity",
        ],
        rows,
    )
}

pub fn write_vnorms<W: Write>(
    out: W,
    series: &[RescaledNorms],
    config_hash: &str,
) -> Result<(), IoError> {
    let rows = series
        .iter()
        .map(|p| std::iter::once(p.s).chain(p.v).map(fmt_f64).collect());
    table(
        out,
        &Header::new(config_hash),
        &["s", "v_L1", "v_Lm1", "v_L2", "v_Linf"],
        rows,
    )
}

fn read_table(text: &str, expected: &[&str]) -> Result<(Header, Vec<csv::StringRecord>), IoError> {
    let header = Header::scan(text);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found.len() < expected.len() || found.iter().zip(expected).any(|(a, b)| a != b) {
        return Err(IoError::Columns {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    let rows = rdr.records().collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn field<T: std::str::FromStr>(
    row: &csv::StringRecord,
    k: usize,
    name: &str,
) -> Result<T, IoError> {
    let v = row.get(k).unwrap_or("");
    v.parse().map_err(|_| IoError::BadValue {
        key: name.into(),
        value: v.into(),
    })
}

/// Header and records of a trajectory CSV. Energy terms are not stored and
/// come back zeroed.
pub fn read_trajectory(text: &str) -> Result<(Header, Vec<Record>), IoError> {
    let (header, rows) = read_table(text, &TRAJECTORY_COLUMNS)?;
    let records = rows
        .iter()
        .map(|row| {
            let mut norms = [0.0; 4];
            for (k, slot) in norms.iter_mut().enumerate() {
                *slot = field(row, k + 1, TRAJECTORY_COLUMNS[k + 1])?;
            }
            Ok(Record {
                t: field(row, 0, "t")?,
                norms,
                dt: field(row, 5, "dt")?,
                newton_iters: field(row, 6, "newton_iters")?,
                energy: Default::default(),
                absorption: 0.0,
                outflux: 0.0,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok((header, records))
}

/// Header and `(r, u)` columns of a snapshot CSV.
pub fn read_state(text: &str) -> Result<(Header, Vec<f64>, Vec<f64>), IoError> {
    let (header, rows) = read_table(text, &["r", "u"])?;
    let mut rs = Vec::with_capacity(rows.len());
    let mut us = Vec::with_capacity(rows.len());
    for row in &rows {
        rs.push(field(row, 0, "r")?);
        us.push(field(row, 1, "u")?);
    }
    Ok((header, rs, us))
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Params, grid and solver settings recorded in a trajectory header.
pub fn setup_from_header(h: &Header) -> Result<(Params, RadialGrid, SolverConfig), IoError> {
    let params = Params::validate(h.parse("N")?, h.parse("m")?, h.parse("q")?)?;
    let grid = RadialGrid::uniform(&params, h.parse("R_max")?, h.parse("M")?)?;
    let tag = h.require("boundary")?;
    let boundary = parse_boundary(tag).ok_or_else(|| IoError::BadValue {
        key: "boundary".into(),
        value: tag.into(),
    })?;
    let config = SolverConfig {
        eps_ext: h.parse("eps_ext")?,
        newton_tol: h.parse("newton_tol")?,
        boundary,
        ..SolverConfig::default()
    };
    Ok((params, grid, config))
}

/// Rebuilds a trajectory from an output directory holding `trajectory.csv`
/// and `snapshots/*.csv`. Snapshots are read in file-name order.
pub fn read_trajectory_dir(dir: &Path) -> Result<(Header, Trajectory), IoError> {
    let (header, records) = read_trajectory(&read_file(&dir.join(TRAJECTORY_FILE))?)?;
    let (params, grid, config) = setup_from_header(&header)?;
    let t_e_est = match header.require("T_e_est")? {
        "none" => None,
        _ => Some(header.parse("T_e_est")?),
    };
    let mut names: Vec<PathBuf> = match fs::read_dir(dir.join(SNAPSHOT_DIR)) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort();
    let mut snapshots = Vec::with_capacity(names.len());
    for path in &names {
        let (h, _, values) = read_state(&read_file(path)?)?;
        snapshots.push(State::new(h.parse("t")?, values, &grid)?);
    }
    let initial_l1 = records.first().map_or(0.0, |r| r.l1());
    let traj = Trajectory {
        params,
        grid,
        config,
        records,
        snapshots,
        t_e_est,
        boundary_value: header.parse("boundary_value")?,
        clipped_mass: header.parse("clipped_mass")?,
        max_clip: 0.0,
        initial_l1,
    };
    Ok((header, traj))
}

/// File name of the `k`-th snapshot; zero-padded so names sort by index.
pub fn snapshot_name(k: usize) -> String {
    format!("snap_{k:06}.csv")
}

/// Writes `trajectory.csv` and `snapshots/` into `dir`.
pub fn write_trajectory_dir(
    dir: &Path,
    traj: &Trajectory,
    config_hash: &str,
) -> Result<(), IoError> {
    let snap_dir = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snap_dir)?;
    let create = |path: PathBuf| {
        fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|source| IoError::File { path, source })
    };
    write_trajectory(create(dir.join(TRAJECTORY_FILE))?, traj, config_hash)?;
    for (k, s) in traj.snapshots.iter().enumerate() {
        write_state(
            create(snap_dir.join(snapshot_name(k)))?,
            s,
            &traj.grid,
            config_hash,
        )?;
    }
    Ok(())
}
