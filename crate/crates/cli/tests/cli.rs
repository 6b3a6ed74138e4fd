use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const SQUARE: &str = include_str!("../../core/configs/square.toml");
const TWO_VERTEX: &str = include_str!("../../core/configs/two_vertex.toml");

const ONE_WAY: &str = r#"
vertices = 2

[[edge]]
from = 1
to = 2
[[edge.atom]]
weight = 1.0
coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]

[[edge]]
from = 2
to = 2
[[edge.atom]]
weight = 1.0
coeffs = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
"#;

fn mrds(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mrds"));
    cmd.args(args).env_remove("MRDS_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn help_lists_defaults() {
    let o = mrds(&["tinf", "--help"], &[]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in ["[default: 512,512]", "[default: tree]", "[default: 24]", "[default: 0.001]", "MRDS_THREADS"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn rows_that_do_not_sum_to_one_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &SQUARE.replace("weight = 1.0", "weight = 0.7"));
    let out = dir.path().join("out");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "check"], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("row 1"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = mrds(&["--config", "/nonexistent/system.toml", "--out", out.to_str().unwrap(), "check"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = mrds(&["--out", out.to_str().unwrap(), "tinf", "--res", "4,4"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reducible_system_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one_way.toml", ONE_WAY);
    let out = dir.path().join("out");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "check", "--points", "500"], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("check.json")).unwrap()).unwrap();
    assert_eq!(report["irreducible"], false);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn tinf_writes_fields_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "two.toml", TWO_VERTEX);
    let out = dir.path().join("out");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "tinf", "--res", "20,10", "--depth", "10"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));

    for stem in ["T_v1", "T_v2", "T_aggregate", "one_minus_T"] {
        let pgm = fs::read(out.join(format!("{stem}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n"));
        assert!(pgm.windows(12).any(|w| w == b"20 10\n65535\n"));
        let csv = fs::read_to_string(out.join(format!("{stem}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.lines().all(|l| l.split(',').count() == 20));
    }
    let agg: Vec<f64> = read_csv(&out.join("T_aggregate.csv"));
    let inv: Vec<f64> = read_csv(&out.join("one_minus_T.csv"));
    assert!(agg.iter().zip(&inv).all(|(a, b)| (a + b - 1.0).abs() < 1e-12));

    let m = manifest(&out);
    assert_eq!(m["command"], "tinf");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["resolution"], serde_json::json!([20, 10]));
    assert_eq!(m["window"], serde_json::json!([-3.0, 3.0, -3.0, 3.0]));
    assert_eq!(m["escape_radius"], 128.0);
    assert_eq!(m["params"]["depth"], 10);
    let digest = Sha256::digest(TWO_VERTEX.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(m["config"]["sha256"], hex);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 8);
}

fn read_csv(path: &PathBuf) -> Vec<f64> {
    fs::read_to_string(path).unwrap().lines().flat_map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap())).collect()
}

#[test]
fn format_flag_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sq.toml", SQUARE);
    let out = dir.path().join("out");
    let o = mrds(
        &["--config", &cfg, "--out", out.to_str().unwrap(), "--format", "pgm", "filled", "--res", "8,8"],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("filled_v1.pgm").exists());
    assert!(!out.join("filled_v1.csv").exists());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "two.toml", TWO_VERTEX);
    let run = |threads: &str| {
        let out = dir.path().join(format!("out{threads}"));
        let o = mrds(
            &["--config", &cfg, "--out", out.to_str().unwrap(), "tinf", "--method", "monte-carlo", "--res", "12,12",
                "--samples", "32", "--depth", "12"],
            &[("MRDS_THREADS", threads)],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(out.join("T_aggregate.pgm")).unwrap(), fs::read(out.join("T_v2.csv")).unwrap())
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn bad_thread_variable_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sq.toml", SQUARE);
    let out = dir.path().join("out");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "check"], &[("MRDS_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn square_map_fixed_points_and_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sq.toml", SQUARE);
    let out = dir.path().join("out");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "fixedpoints", "--max-word-len", "1"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("fixedpoints.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{csv}");
    let fields: Vec<f64> = rows[0].split(',').take(2).map(|x| x.parse().unwrap()).collect();
    assert!((fields[0] - 1.0).abs() < 1e-10 && fields[1].abs() < 1e-10, "{csv}");

    let out = dir.path().join("orbit");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "orbit", "--z", "0.5,0", "--steps", "3"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("orbit.csv")).unwrap();
    let re: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(re, [0.5, 0.25, 0.0625, 0.00390625]);
}

#[test]
fn vertex_out_of_range_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sq.toml", SQUARE);
    let out = dir.path().join("out");
    let o = mrds(&["--config", &cfg, "--out", out.to_str().unwrap(), "filled", "--vertex", "2", "--res", "4,4"], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
