use std::path::Path;
use std::process::{Command, Output};

use qreflect::scenario::ResultRecord;

fn qreflect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qreflect")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_GRATING: &str = r#"{
  "particle": "helium",
  "surface": { "d_z_m": 4e-6, "sigma_m_e_per_m2": 1e16, "profile": { "kind": "stripe", "f": 0.5 } },
  "numerics": { "steps": 1024 },
  "mode": "diffract-sudden"
}"#;

#[test]
fn specular_preset_succeeds() {
    let o = qreflect(&["specular"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("R_total = 1.61004523"), "{}", stdout(&o));
}

#[test]
fn csv_and_json_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "grating.json", SMALL_GRATING);
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    for out in [&csv, &json] {
        let o = qreflect(&["diffract", "--method", "sudden", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let rec: ResultRecord = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,k_n_per_m,re_r,im_r,R_n");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), rec.table.len());
    for (row, r) in rows.iter().zip(&rec.table) {
        assert_eq!(row[0].parse::<i64>().unwrap(), r.n);
        assert_eq!(row[4].parse::<f64>().unwrap(), r.big_r_n);
    }
    assert!(rec.r_total.unwrap() <= 1.0);
}

#[test]
fn invalid_documents_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.json", r#"{ "particle": "helium", "mode": "specular", "colour": 1 }"#);
    let theta = write(dir.path(), "b.json", r#"{ "particle": { "preset": "helium", "theta_rad": 2.0 }, "mode": "specular" }"#);
    for cfg in [&unknown, &theta] {
        let o = qreflect(&["specular", "--config", cfg]);
        assert_eq!(code(&o), 1, "{cfg}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    }
    let bad_ext = dir.path().join("out.txt");
    let o = qreflect(&["specular", "--out", bad_ext.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn solver_failure_exits_with_two() {
    // Fixed bounds whose inner end lies deep in the badlands.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bounds.json",
        r#"{
  "particle": "helium",
  "numerics": { "auto_bounds": false, "y_start_m": 40e-9, "y_end_m": 1e-5 },
  "mode": "specular"
}"#,
    );
    let o = qreflect(&["specular", "--config", &cfg]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_reports_each_check() {
    let o = qreflect(&["validate"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 5, "{out}");

    // Far too coarse for the convergence-order check.
    let o = qreflect(&["validate", "--order-base-steps", "64"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL convergence-order")), "{}", stdout(&o));
}

#[test]
fn sweep_writes_axis_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = qreflect(&[
        "sweep",
        "--axis",
        "theta",
        "--values",
        "5e-4,1e-3,2e-3",
        "--point-mode",
        "specular",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("theta_rad,"));
    let r: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(r.len(), 3);
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}

#[test]
fn bundled_documents_load_and_run() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    let o = qreflect(&["sweep", "--config", &format!("{dir}/fraction-sweep.json")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("R_total")).count(), 9);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "grating.json", SMALL_GRATING);
    let runs: Vec<String> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("run{i}.json"));
            let o = qreflect(&["diffract", "--method", "sudden", "--config", &cfg, "--out", out.to_str().unwrap()]);
            assert_eq!(code(&o), 0);
            std::fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}
