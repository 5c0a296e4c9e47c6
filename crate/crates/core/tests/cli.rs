use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use roundavg::cli::{
    cmd_lyapunov, cmd_simulate, read_table, simulate, write_filtered, write_traditional, BuiltinSeries, CliError,
    ExperimentConfig, FilterSwitch, LyapunovSource, Simulation, FILTERED_HEADER, TRADITIONAL_HEADER,
};
use roundavg::rounding::RoundingBackend;
use tempfile::TempDir;

fn default_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/lorenz_default.toml")
}

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roundavg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn key(text: &str, k: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{k}=")).map(str::to_string))
}

#[test]
fn shipped_config_equals_defaults() {
    let cfg = ExperimentConfig::load(&default_config_path()).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
}

#[test]
fn default_traditional_run_has_10001_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("orbit.csv");
    let summary = cmd_simulate(&ExperimentConfig::default(), &out).unwrap();
    assert_eq!(summary.rows, 10_001);
    let table = read_table(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(table.headers, TRADITIONAL_HEADER);
    assert_eq!(table.rows(), 10_001);
    assert_eq!(table.column("t").unwrap()[10_000], 100.0);
}

#[test]
fn single_step_run_has_two_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("orbit.csv");
    let mut cfg = ExperimentConfig::default();
    cfg.t_final = cfg.h;
    cfg.filter = FilterSwitch::On;
    cmd_simulate(&cfg, &out).unwrap();
    let table = read_table(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(table.headers, FILTERED_HEADER);
    assert_eq!(table.rows(), 2);
}

#[test]
fn csv_round_trip_is_bit_exact() {
    for filter in [FilterSwitch::Off, FilterSwitch::On] {
        let cfg = ExperimentConfig {
            filter,
            t_final: 20.0,
            ..Default::default()
        };
        let sim = simulate(&cfg, RoundingBackend::SoftwareEmulated).unwrap();
        let mut buf = Vec::new();
        let columns: Vec<(&str, Vec<f64>)> = match &sim {
            Simulation::Traditional(o) => {
                write_traditional(&mut buf, o).unwrap();
                vec![("x", o.component(0)), ("y", o.component(1)), ("z", o.component(2))]
            }
            Simulation::Filtered(p) => {
                write_filtered(&mut buf, p).unwrap();
                vec![
                    ("x_lo", p.lower.component(0)),
                    ("z_lo", p.lower.component(2)),
                    ("y_hi", p.upper.component(1)),
                    ("x_avg", p.averaged.component(0)),
                    ("z_avg", p.averaged.component(2)),
                ]
            }
        };
        let table = read_table(buf.as_slice()).unwrap();
        for (name, values) in columns {
            let parsed = table.column(name).unwrap();
            assert_eq!(parsed.len(), values.len());
            for (a, b) in parsed.iter().zip(&values) {
                assert_eq!(a.to_bits(), b.to_bits(), "column {name}");
            }
        }
    }
}

#[test]
fn zero_model_filter_identity_in_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("zero.csv");
    let cfg = ExperimentConfig {
        model: "zero".into(),
        filter: FilterSwitch::On,
        t_final: 1.0,
        ..Default::default()
    };
    cmd_simulate(&cfg, &out).unwrap();
    let table = read_table(fs::File::open(&out).unwrap()).unwrap();
    for c in ["x", "y", "z"] {
        let lo = table.column(&format!("{c}_lo")).unwrap();
        assert_eq!(lo, table.column(&format!("{c}_hi")).unwrap());
        assert_eq!(lo, table.column(&format!("{c}_avg")).unwrap());
    }
    assert!(table.column("delta").unwrap().iter().all(|&d| d == 0.0));
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = ExperimentConfig {
        method: "rk5".into(),
        filter: FilterSwitch::On,
        t_final: 10.0,
        lyapunov_tau: Some(12),
        ..Default::default()
    };
    let path = dir.path().join("effective.toml");
    fs::write(&path, cfg.to_toml_string()).unwrap();
    let reread = ExperimentConfig::load(&path).unwrap();
    assert_eq!(reread, cfg);
    let backend = RoundingBackend::SoftwareEmulated;
    assert_eq!(simulate(&cfg, backend).unwrap(), simulate(&reread, backend).unwrap());
}

#[test]
fn logistic_builtin_estimate() {
    let report = cmd_lyapunov(
        &LyapunovSource::Builtin(BuiltinSeries::Logistic),
        &ExperimentConfig::default(),
    )
    .unwrap();
    let lambda = report.analysis.estimate.lambda_max;
    assert!((lambda - std::f64::consts::LN_2).abs() < 0.1, "{lambda}");
}

#[test]
fn traditional_file_series_is_chaotic() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("orbit.csv");
    cmd_simulate(&ExperimentConfig::default(), &out).unwrap();
    let source = LyapunovSource::File {
        path: out,
        column: None,
        dt: None,
    };
    let report = cmd_lyapunov(&source, &ExperimentConfig::default()).unwrap();
    assert!(report.analysis.estimate.lambda_max > 0.0);
    assert_eq!(report.analysis.h, 0.01);
}

#[test]
fn constant_series_file_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("flat.csv");
    let mut text = String::from("t,x\n");
    for k in 0..10_000 {
        text.push_str(&format!("{},1.5\n", k as f64 * 0.01));
    }
    fs::write(&path, text).unwrap();
    let source = LyapunovSource::File {
        path: path.clone(),
        column: None,
        dt: None,
    };
    let err = cmd_lyapunov(&source, &ExperimentConfig::default()).unwrap_err();
    assert!(matches!(err, CliError::Lyapunov(_)), "{err}");
    assert_eq!(err.exit_code(), 2);

    let out = bin(&["lyapunov", "--input", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn binary_simulate_then_lyapunov() {
    let dir = TempDir::new().unwrap();
    let cfg_path = default_config_path();
    let out = bin(
        &[
            "simulate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--method",
            "rk3",
            "--filter",
            "on",
            "--out",
            "filtered.csv",
            "--save-config",
            "effective.toml",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read_table(fs::File::open(dir.path().join("filtered.csv")).unwrap()).unwrap();
    assert_eq!(table.rows(), 10_001);
    let saved = ExperimentConfig::load(&dir.path().join("effective.toml")).unwrap();
    assert_eq!(saved.method, "rk3");
    assert_eq!(saved.filter, FilterSwitch::On);

    let out = bin(&["lyapunov", "--input", "filtered.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lambda: f64 = key(&text, "lambda_max").unwrap().parse().unwrap();
    assert!(lambda < 0.01, "{text}");
    assert!(key(&text, "source").unwrap().ends_with(":x_avg"));
    for k in ["tau", "m", "fit_r2"] {
        assert!(key(&text, k).is_some(), "missing {k} in {text}");
    }
}

#[test]
fn binary_logistic_builtin() {
    let dir = TempDir::new().unwrap();
    let out = bin(&["lyapunov", "--builtin", "logistic"], dir.path());
    assert!(out.status.success());
    let lambda: f64 = key(&stdout(&out), "lambda_max").unwrap().parse().unwrap();
    assert!((lambda - 0.693).abs() < 0.1);
}

#[test]
fn binary_usage_and_config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(bin(&["simulate", "--method", "rk9"], dir.path()).status.code(), Some(1));
    assert_eq!(
        bin(&["simulate", "--filter", "maybe"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(bin(&["frobnicate"], dir.path()).status.code(), Some(1));
    fs::write(dir.path().join("bad.toml"), "h = 0.0\n").unwrap();
    let out = bin(&["simulate", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field `h`"));
    assert_eq!(bin(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn binary_reproduce_meets_criteria() {
    let dir = TempDir::new().unwrap();
    let out = bin(&["reproduce", "--out", "report.json"], dir.path());
    let text = stdout(&out);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{text}{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    let methods: Vec<&str> = rows.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["rk3", "rk4", "rk5"]);
    assert_eq!(rows[1]["published_traditional"], 0.087915);
    assert_eq!(rows[0]["published_filtered"], -0.01137);
    assert!(rows.iter().all(|r| r["sign_match"] == serde_json::json!([true, true])));
    assert_eq!(report["criteria_met"], true);
}
