//! Experiment configuration: TOML schema, defaults, validation and hashing.
//!
//! ```toml
//! [params]            # required for `simulate`
//! N = 1
//! m = 0.5
//! q = 0.75
//!
//! [initial]           # flat | capped-power | indicator | gaussian
//! family = "capped-power"
//! amplitude = 1.0
//!
//! [grid]              # defaults shown
//! R_max = 20.0
//! M = 2048
//!
//! [solver]            # any SolverConfig field; eps_ext defaults to 1e-8
//! dt_init = 1e-3
//!
//! checks = ["barrier", "linf_lower", "positivity", "dt_bound", "energy_identity", "mass_balance"]
//!
//! [ratefit]
//! window = [0.7, 0.99]
//! tolerance = 0.1
//! orders = ["inf", "1", "m+1", "2"]
//! refine = 0          # extra levels, each doubling M and halving the steps
//!
//! [output]
//! dir = "fastdiff-out"
//!
//! [sweep]             # Cartesian product; a missing axis uses [params]
//! N = [1]
//! m = [0.4, 0.5, 0.6]
//! q = [0.7, 0.8]
//! ```

use std::path::PathBuf;

use fastdiff_core::ratefit::{DEFAULT_TOLERANCE, DEFAULT_WINDOW};
use fastdiff_core::{InitialDatum, NormOrder, ParamError, Params, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_R_MAX: f64 = 20.0;
pub const DEFAULT_CELLS: usize = 2048;
pub const DEFAULT_OUT_DIR: &str = "fastdiff-out";

pub const CHECK_NAMES: [&str; 6] = [
    "barrier",
    "linf_lower",
    "positivity",
    "dt_bound",
    "energy_identity",
    "mass_balance",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), key.as_ref().map(|k| format!(" (key `{k}`)")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },
    #[error("invalid parameters: {0}")]
    Validation(#[from] ParamError),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("sweep has an empty axis or no [sweep] section")]
    EmptySweep,
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(rename = "N")]
    pub n: f64,
    pub m: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "R_max")]
    pub r_max: f64,
    #[serde(rename = "M")]
    pub cells: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_max: DEFAULT_R_MAX,
            cells: DEFAULT_CELLS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateFitSpec {
    pub window: (f64, f64),
    pub tolerance: f64,
    /// `"inf"`, `"m+1"` or a number.
    pub orders: Vec<String>,
    pub refine: usize,
}

impl Default for RateFitSpec {
    fn default() -> Self {
        RateFitSpec {
            window: DEFAULT_WINDOW,
            tolerance: DEFAULT_TOLERANCE,
            orders: ["inf", "1", "m+1", "2"].map(String::from).to_vec(),
            refine: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(rename = "N")]
    pub n: Vec<f64>,
    pub m: Vec<f64>,
    pub q: Vec<f64>,
}

/// Fully resolved configuration; serializing it echoes every default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub checks: Vec<String>,
    pub params: Option<ParamsSpec>,
    pub initial: InitialDatum,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub ratefit: RateFitSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
}

/// Raw file layout: like [`ExperimentConfig`] with `checks` optional.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    checks: Option<Vec<String>>,
    params: Option<ParamsSpec>,
    initial: InitialDatum,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    ratefit: RateFitSpec,
    #[serde(default)]
    output: OutputSpec,
    sweep: Option<SweepAxes>,
}

/// Command-line overrides, applied after parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub r_max: Option<f64>,
    pub cells: Option<usize>,
    pub dt_init: Option<f64>,
    pub eps_ext: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
}

fn parse_error(text: &str, err: toml::de::Error) -> ConfigError {
    let (line, key) = match err.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            let key = text
                .lines()
                .nth(line - 1)
                .and_then(|l| l.split_once('='))
                .map(|(k, _)| k.trim().to_string())
                .filter(|k| !k.is_empty());
            (Some(line), key)
        }
        None => (None, None),
    };
    ConfigError::Parse {
        line,
        key,
        message: err.message().to_string(),
    }
}

/// Parses, fills defaults and validates.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(
    text: &str,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let mut cfg = ExperimentConfig {
        checks: raw
            .checks
            .unwrap_or_else(|| CHECK_NAMES.map(String::from).to_vec()),
        params: raw.params,
        initial: raw.initial,
        grid: raw.grid,
        solver: raw.solver,
        ratefit: raw.ratefit,
        output: raw.output,
        sweep: raw.sweep,
    };
    cfg.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.r_max {
            self.grid.r_max = v;
        }
        if let Some(v) = o.cells {
            self.grid.cells = v;
        }
        if let Some(v) = o.dt_init {
            self.solver.dt_init = v;
        }
        if let Some(v) = o.eps_ext {
            self.solver.eps_ext = v;
        }
        if let Some(v) = o.window {
            self.ratefit.window = v;
        }
        if let Some(v) = &o.out {
            self.output.dir = v.clone();
        }
    }

    /// Everything except the parameter triple, which a sweep may leave open.
    fn validate_settings(&self) -> Result<(), ConfigError> {
        if !(self.grid.r_max > 0.0 && self.grid.r_max.is_finite()) {
            return Err(invalid("grid.R_max", "must be positive and finite"));
        }
        if self.grid.cells < fastdiff_core::grid::MIN_CELLS {
            return Err(invalid(
                "grid.M",
                format!("need at least {}", fastdiff_core::grid::MIN_CELLS),
            ));
        }
        self.solver
            .validate()
            .map_err(|e| invalid("solver", e.to_string()))?;
        for c in &self.checks {
            if !CHECK_NAMES.contains(&c.as_str()) {
                return Err(invalid("checks", format!("unknown check `{c}`")));
            }
        }
        let (lo, hi) = self.ratefit.window;
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(invalid("ratefit.window", "need 0 < lo < hi < 1"));
        }
        if self.ratefit.tolerance.is_nan() || self.ratefit.tolerance <= 0.0 {
            return Err(invalid("ratefit.tolerance", "must be positive"));
        }
        for o in &self.ratefit.orders {
            parse_order(o, 0.5)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_settings()?;
        match (&self.params, &self.sweep) {
            (Some(p), _) => {
                self.params_for(p)?;
            }
            (None, Some(_)) => {}
            (None, None) => return Err(invalid("params", "missing [params] section")),
        }
        Ok(())
    }

    /// Positivity runs may use `q = m` when only positivity is checked.
    pub fn params_for(&self, p: &ParamsSpec) -> Result<Params, ConfigError> {
        let strict = Params::validate(p.n, p.m, p.q);
        match strict {
            Ok(v) => Ok(v),
            Err(ParamError::OrderViolation { .. }) if p.q == p.m && self.only_positivity() => {
                Ok(Params::validate_positivity(p.n, p.m, p.q)?)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn only_positivity(&self) -> bool {
        self.checks.iter().all(|c| c == "positivity") && self.ratefit.orders.is_empty()
    }

    pub fn params(&self) -> Result<Params, ConfigError> {
        let p = self
            .params
            .as_ref()
            .ok_or_else(|| invalid("params", "missing [params] section"))?;
        self.params_for(p)
    }

    pub fn check_enabled(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c == name)
    }

    /// Rate-fit orders for a given `m`.
    pub fn orders(&self, m: f64) -> Result<Vec<NormOrder>, ConfigError> {
        self.ratefit
            .orders
            .iter()
            .map(|o| parse_order(o, m))
            .collect()
    }

    /// `(N, m, q)` triples in axis order (N outermost).
    pub fn sweep_points(&self) -> Result<Vec<ParamsSpec>, ConfigError> {
        let axes = self.sweep.as_ref().ok_or(ConfigError::EmptySweep)?;
        let pick = |axis: &Vec<f64>, base: Option<f64>| -> Vec<f64> {
            if axis.is_empty() {
                base.into_iter().collect()
            } else {
                axis.clone()
            }
        };
        let base = self.params;
        let ns = pick(&axes.n, base.map(|p| p.n));
        let ms = pick(&axes.m, base.map(|p| p.m));
        let qs = pick(&axes.q, base.map(|p| p.q));
        if ns.is_empty() || ms.is_empty() || qs.is_empty() {
            return Err(ConfigError::EmptySweep);
        }
        let mut out = Vec::with_capacity(ns.len() * ms.len() * qs.len());
        for &n in &ns {
            for &m in &ms {
                for &q in &qs {
                    out.push(ParamsSpec { n, m, q });
                }
            }
        }
        Ok(out)
    }

    /// The same experiment at one `(N, m, q)`.
    pub fn with_params(&self, p: ParamsSpec) -> ExperimentConfig {
        ExperimentConfig {
            params: Some(p),
            sweep: None,
            ..self.clone()
        }
    }

    /// Canonical TOML of the resolved config.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`ExperimentConfig::echo`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.echo().as_bytes()))
    }
}

pub fn parse_order(s: &str, m: f64) -> Result<NormOrder, ConfigError> {
    match s.trim() {
        "inf" | "infinity" => Ok(NormOrder::Infinity),
        "m+1" => Ok(NormOrder::Finite(m + 1.0)),
        other => match other.parse::<f64>() {
            Ok(r) if r >= 1.0 && r.is_finite() => Ok(NormOrder::Finite(r)),
            _ => Err(invalid(
                "ratefit.orders",
                format!("unknown order `{other}`"),
            )),
        },
    }
}

/// `"lo,hi"` as used by `--window`.
pub fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let lo = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "[params]\nN = 1\nm = 0.5\nq = 0.75\n\n[initial]\nfamily = \"flat\"\namplitude = 1.0\n";

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid.r_max, 20.0);
        assert_eq!(c.grid.cells, 2048);
        assert_eq!(c.solver.eps_ext, 1e-8);
        assert_eq!(c.ratefit.window, (0.7, 0.99));
        assert_eq!(c.checks.len(), CHECK_NAMES.len());
        assert_eq!(c.initial, InitialDatum::Flat { amplitude: 1.0 });
        let echo = c.echo();
        assert!(echo.contains("R_max = 20.0"), "{echo}");
        assert!(echo.contains("eps_ext = 0.00000001"), "{echo}");
    }

    #[test]
    fn echo_reparses_to_the_same_config() {
        let c = parse_config(MINIMAL).unwrap();
        let back = parse_config(&c.echo()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn order_violation_is_forwarded() {
        let text = MINIMAL.replace("q = 0.75", "q = 0.4");
        match parse_config(&text) {
            Err(ConfigError::Validation(ParamError::OrderViolation { .. })) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_and_key() {
        let text = MINIMAL.replace("m = 0.5", "m = \"half\"");
        match parse_config(&text) {
            Err(ConfigError::Parse { line, key, .. }) => {
                assert_eq!(line, Some(3));
                assert_eq!(key.as_deref(), Some("m"));
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{MINIMAL}\n[grid]\nRmax = 3.0\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("Rmax"), "{err}");
    }

    #[test]
    fn overrides_apply_before_validation() {
        let o = Overrides {
            r_max: Some(50.0),
            cells: Some(64),
            eps_ext: Some(1e-10),
            window: Some((0.5, 0.9)),
            ..Overrides::default()
        };
        let c = parse_config_with(MINIMAL, &o).unwrap();
        assert_eq!((c.grid.r_max, c.grid.cells), (50.0, 64));
        assert_eq!(c.solver.eps_ext, 1e-10);
        assert_eq!(c.ratefit.window, (0.5, 0.9));
        let bad = Overrides {
            cells: Some(4),
            ..Overrides::default()
        };
        assert!(matches!(
            parse_config_with(MINIMAL, &bad),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn sweep_is_a_cartesian_product() {
        let text = "[initial]\nfamily = \"capped-power\"\namplitude = 1.0\n[sweep]\nN = [1]\nm = [0.4, 0.5, 0.6]\nq = [0.7, 0.8]\n";
        let c = parse_config(text).unwrap();
        let pts = c.sweep_points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(
            pts[1],
            ParamsSpec {
                n: 1.0,
                m: 0.4,
                q: 0.8
            }
        );
        let empty = text.replace("q = [0.7, 0.8]", "q = []");
        let c = parse_config(&empty).unwrap();
        assert!(matches!(c.sweep_points(), Err(ConfigError::EmptySweep)));
        let c = parse_config(MINIMAL).unwrap();
        assert!(matches!(c.sweep_points(), Err(ConfigError::EmptySweep)));
    }

    #[test]
    fn windows_and_orders() {
        assert_eq!(parse_window("0.6, 0.95").unwrap(), (0.6, 0.95));
        assert!(parse_window("0.6").is_err());
        assert_eq!(parse_order("m+1", 0.5).unwrap(), NormOrder::Finite(1.5));
        assert_eq!(parse_order("inf", 0.5).unwrap(), NormOrder::Infinity);
        assert!(parse_order("0.5", 0.5).is_err());
    }
}
