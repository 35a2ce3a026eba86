//! End-to-end runs of the `burgers-rg` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL_RUN: &str = r#"
[grid]
half_width = 40.0
num_points = 512

[rg]
max_iters = 4

[nonlinearity]
form = "burgers"
lambda = -0.5

[initial_data]
normalize_to = 0.02

[[initial_data.components]]
profile = "fixed_point"

[[initial_data.components]]
profile = "gaussian"
amplitude = 0.2
width = 0.6

[[initial_data.components]]
profile = "gaussian"
amplitude = -0.2
width = 0.9
"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burgers-rg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_writes_outputs_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL_RUN);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = bin(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["resolved_config.toml", "run_records.csv", "profile_final.csv", "summary.toml"] {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let records = fs::read_to_string(a.join("run_records.csv")).unwrap();
    let mut lines = records.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,t,A_n,g_norm,f_norm,lambda_n,mass,parity_defect,e_n"
    );
    assert_eq!(lines.count(), 5);
    let resolved = fs::read_to_string(a.join("resolved_config.toml")).unwrap();
    assert!(resolved.contains("num_steps"));
    assert!(resolved.contains("tail_tolerance"));
}

#[test]
fn resolved_config_reruns_to_the_same_records() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL_RUN);
    let a = tmp.path().join("a");
    assert!(bin(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let b = tmp.path().join("b");
    let resolved = a.join("resolved_config.toml");
    assert!(bin(&["run", "--config", resolved.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .status
        .success());
    assert_eq!(
        fs::read(a.join("run_records.csv")).unwrap(),
        fs::read(b.join("run_records.csv")).unwrap()
    );
}

#[test]
fn unknown_key_exits_2_before_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "[rg]\nmax_iter = 3\n");
    let out = tmp.path().join("out");
    let o = bin(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[config]"));
    assert!(!out.exists());
}

#[test]
fn data_with_mass_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL_RUN.replace("amplitude = -0.2", "amplitude = 0.2");
    let cfg = write(tmp.path(), "mass.toml", &body);
    let o = bin(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oversized_data_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL_RUN.replace("normalize_to = 0.02", "normalize_to = 0.5");
    let cfg = write(tmp.path(), "big.toml", &body);
    let o = bin(&["run", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn linear_oracle_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = bin(&["oracle", "--case", "linear", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("oracle_report.csv")).unwrap();
    assert!(csv.starts_with("pair,max_diff,tolerance,passed"));
    assert!(!csv.contains("false"));
}

#[test]
fn constants_table_and_probe_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL_RUN);
    let out = tmp.path().join("c");
    let o = bin(&["constants", "--config", &cfg, "--q", "2.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    for key in ["k_q", "G_q", "K ", "epsilon_bar", "C_emp", "C_Lqdelta"] {
        assert!(table.contains(key), "missing {key}");
    }
    let probes = fs::read_to_string(out.join("contraction_probes.csv")).unwrap();
    // 32 probes at L = 2, 4, 8
    assert_eq!(probes.lines().count(), 1 + 32 * 3);
}

#[test]
fn halfline_keeps_the_origin_pinned() {
    let tmp = tempfile::tempdir().unwrap();
    let dx = 80.0 / 512.0;
    let mut data = String::from("x,f\n");
    for k in 0..256 {
        let x = k as f64 * dx;
        data.push_str(&format!("{x},{}\n", x * (-x * x / 4.0).exp()));
    }
    write(tmp.path(), "half.csv", &data);
    let body = r#"
[grid]
num_points = 512

[rg]
max_iters = 4

[initial_data]
components = []
halfline_file = "half.csv"
"#;
    let cfg = write(tmp.path(), "half.toml", body);
    let out = tmp.path().join("h");
    let o = bin(&["halfline", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: toml::Value = fs::read_to_string(out.join("summary.toml")).unwrap().parse().unwrap();
    let drift = summary["origin_drift"].as_float().unwrap();
    assert!(drift <= 1e-14, "u(0, t) drifted by {drift}");
}

#[test]
fn halfline_without_data_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", SMALL_RUN);
    let o = bin(&["halfline", "--config", &cfg, "--out", tmp.path().join("h").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_runs_each_config_into_its_own_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(tmp.path(), "first.toml", SMALL_RUN);
    let b = write(tmp.path(), "second.toml", &SMALL_RUN.replace("lambda = -0.5", "lambda = -0.25"));
    let out = tmp.path().join("s");
    let o = bin(&["sweep", "--config", &a, "--config", &b, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("first/summary.toml").exists());
    assert!(out.join("second/summary.toml").exists());
}
