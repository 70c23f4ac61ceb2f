use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fastdiff_cli::config::parse_config;
use fastdiff_cli::sweep::run_sweep;
use fastdiff_core::io::Header;

fn fastdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn flat_config(dir: &Path) -> String {
    format!(
        r#"
checks = ["barrier", "linf_lower", "positivity", "dt_bound", "energy_identity", "mass_balance"]
[params]
N = 1
m = 0.5
q = 0.75
[initial]
family = "flat"
amplitude = 1.0
[grid]
R_max = 100.0
M = 128
[ratefit]
orders = ["inf"]
[output]
dir = {:?}
"#,
        dir.join("out")
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn flat_simulation_reproduces_the_ode_lifetime() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "flat.toml", &flat_config(tmp.path()));
    let out = fastdiff(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/summary.json")).unwrap())
            .unwrap();
    let t_e = summary["t_e_est"].as_f64().unwrap();
    assert!((t_e - 4.0).abs() < 1e-2, "{t_e}");
    assert_eq!(summary["pass"], true);
    for f in ["trajectory.csv", "checks.csv", "ratefit.csv", "vnorms.csv"] {
        let text = fs::read_to_string(tmp.path().join("out").join(f)).unwrap();
        assert_eq!(
            Header::scan(&text).get("config_hash"),
            summary["config_hash"].as_str(),
            "{f}"
        );
    }
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "flat.toml", &flat_config(tmp.path()));
    let out_dir = tmp.path().join("out");
    let files = [
        "trajectory.csv",
        "checks.csv",
        "ratefit.csv",
        "vnorms.csv",
        "snapshots/snap_000003.csv",
    ];
    assert_eq!(fastdiff(&["simulate", &cfg]).status.code(), Some(0));
    let first: Vec<Vec<u8>> = files
        .iter()
        .map(|f| fs::read(out_dir.join(f)).unwrap())
        .collect();
    assert_eq!(fastdiff(&["simulate", &cfg]).status.code(), Some(0));
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(&fs::read(out_dir.join(f)).unwrap(), bytes, "{f} differs");
    }
}

#[test]
fn offline_subcommands_read_written_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "flat.toml", &flat_config(tmp.path()));
    assert_eq!(fastdiff(&["simulate", &cfg]).status.code(), Some(0));
    let dir = tmp.path().join("out");

    let check = fastdiff(&["check", dir.to_str().unwrap()]);
    let text = stdout(&check);
    assert_eq!(check.status.code(), Some(0), "{text}");
    for name in fastdiff_cli::offline::REPLAYABLE_CHECKS {
        assert!(text.contains(&format!("\n{name},true,")), "{name}: {text}");
    }

    let traj = dir.join("trajectory.csv");
    let fit = fastdiff(&["ratefit", traj.to_str().unwrap(), "--window", "0.7,0.99"]);
    let text = stdout(&fit);
    let inf = text
        .lines()
        .find(|l| l.starts_with("inf,"))
        .expect("inf row");
    let slope: f64 = inf.split(',').nth(1).unwrap().parse().unwrap();
    assert!((slope - 4.0).abs() < 0.05, "{inf}");
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "flat.toml", &flat_config(tmp.path()));
    let other = tmp.path().join("elsewhere");
    let out = fastdiff(&[
        "simulate",
        &cfg,
        "--M",
        "64",
        "--eps-ext",
        "1e-6",
        "--out",
        other.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = fs::read_to_string(other.join("trajectory.csv")).unwrap();
    let h = Header::scan(&text);
    assert_eq!(h.get("M"), Some("64"));
    assert_eq!(h.parse::<f64>("eps_ext").unwrap(), 1e-6);
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_order = flat_config(tmp.path()).replace("q = 0.75", "q = 0.4");
    let cfg = write(tmp.path(), "bad.toml", &bad_order);
    let out = fastdiff(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order violation"));

    let cfg = write(
        tmp.path(),
        "typo.toml",
        "[params]\nN = 1\nm = 0.5\nqq = 0.75\n",
    );
    assert_eq!(fastdiff(&["simulate", &cfg]).status.code(), Some(2));
    assert_eq!(
        fastdiff(&["simulate", "/nonexistent/config.toml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fastdiff(&["exponents", "--N", "3", "--m", "0.2", "--q", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exponents_table_is_printed() {
    let out = fastdiff(&["exponents", "--N", "1", "--m", "0.5", "--q", "0.75"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value = |key: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(key))
            .unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert_eq!(value("alpha"), 4.0);
    assert_eq!(value("kappa_star"), 160000.0);
    assert_eq!(value("rate_L1"), 3.5);
}

fn sweep_config(dir: &Path, axes: &str) -> String {
    format!(
        r#"
checks = ["positivity"]
[initial]
family = "capped-power"
amplitude = 1.0
[grid]
R_max = 10.0
M = 64
[ratefit]
orders = ["inf"]
[output]
dir = {:?}
[sweep]
{axes}
"#,
        dir
    )
}

#[test]
fn six_point_sweep_matches_exponents() {
    let tmp = tempfile::tempdir().unwrap();
    let text = sweep_config(tmp.path(), "N = [1]\nm = [0.4, 0.5, 0.6]\nq = [0.7, 0.8]");
    let cfg = parse_config(&text).unwrap();
    let report = run_sweep(&cfg, 3).unwrap();
    assert_eq!(report.rows.len(), 6);

    let csv_text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let body: String = csv_text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let q: f64 = row[col("q")].parse().unwrap();
        let rate: f64 = row[col("rate_Linf")].parse().unwrap();
        assert!((rate - 1.0 / (1.0 - q)).abs() < 1e-12, "{row:?}");
        assert_ne!(&row[col("status")], "error", "{row:?}");
    }
    // N outermost, q innermost.
    let ms: Vec<&str> = rows.iter().map(|r| r.get(col("m")).unwrap()).collect();
    assert_eq!(ms, ["0.4", "0.4", "0.5", "0.5", "0.6", "0.6"]);
}

#[test]
fn inadmissible_sweep_points_are_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let text = sweep_config(tmp.path(), "N = [3]\nm = [0.2, 0.5]\nq = [0.75]");
    let path = write(tmp.path(), "sweep.toml", &text);
    let out = fastdiff(&["sweep", &path, "--workers", "2"]);
    let printed = stdout(&out);
    assert!(
        printed.contains("m=0.2 q=0.75 skipped(SobolevViolation)"),
        "{printed}"
    );
    let csv_text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(csv_text.contains("skipped(SobolevViolation)"));
    assert!(!tmp.path().join("runs/N3_m0.2_q0.75").exists());
    assert!(tmp
        .path()
        .join("runs/N3_m0.5_q0.75/trajectory.csv")
        .exists());
}

#[test]
fn empty_sweep_axes_are_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = sweep_config(tmp.path(), "N = [1]\nm = []\nq = [0.75]");
    let path = write(tmp.path(), "sweep.toml", &text);
    let out = fastdiff(&["sweep", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr)
        .to_lowercase()
        .contains("empty"));
}
