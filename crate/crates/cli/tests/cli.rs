use std::path::Path;
use std::process::{Command, Output};

fn fsladder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsladder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn zeff_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.json");
    let o = fsladder(&["zeff", "--t", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["in_band"], true);
    let re = v["zeff"][0].as_f64().unwrap();
    assert!((re - 1.0380269746).abs() < 1e-9);
    assert!((v["zeff"][1].as_f64().unwrap() - 0.85).abs() < 1e-9);
}

#[test]
fn zeff_out_of_band_exits_two() {
    let o = fsladder(&["zeff", "--t", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-dissipative"));
}

#[test]
fn sweep_flips_at_band_edges() {
    let o = fsladder(&["sweep", "--points", "160"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,t,in_band,zeff_re,zeff_im,status"));
    let lower = 9.0 * (4.0 - 15f64.sqrt());
    let upper = 9.0 * (4.0 + 15f64.sqrt());
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let t: f64 = f[1].parse().unwrap();
        let dissipative = f[5] == "ok";
        assert_eq!(dissipative, lower < t && t < upper, "t = {t}");
        rows += 1;
    }
    assert_eq!(rows, 160);
}

#[test]
fn sweep_single_point_and_bad_range() {
    let o = fsladder(&["sweep", "--t-min", "8", "--t-max", "8", "--points", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
    let o = fsladder(&["sweep", "--t-min", "9", "--t-max", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("usage"));
}

#[test]
fn harmonic_cells() {
    let o = fsladder(&["harmonic", "--t", "8", "--u", "1,0,0", "--words", "e,1,12"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);
    let o = fsladder(&["harmonic", "--t", "8", "--u", "2,2,2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dissipation"].as_f64().unwrap(), 0.0);
    for cell in v["cells"].as_array().unwrap() {
        for x in cell["values"].as_array().unwrap() {
            assert_eq!(x[0].as_f64().unwrap(), 2.0);
            assert_eq!(x[1].as_f64().unwrap(), 0.0);
        }
    }
    assert_eq!(fsladder(&["harmonic", "--t", "100"]).status.code(), Some(2));
}

#[test]
fn measure_table_totals() {
    let o = fsladder(&["measure", "--t", "8", "--level", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 27);
    let total = v["total"].as_f64().unwrap();
    assert!((v["nu_sum"].as_f64().unwrap() - total).abs() < 1e-10 * total);
    let o = fsladder(&["measure", "--level", "0"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
    let o = fsladder(&["measure", "--u", "1,1,1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["nu"].as_f64() == Some(0.0)));
}

#[test]
fn lyapunov_rejects_constant_and_out_of_band() {
    assert_eq!(
        fsladder(&["lyapunov", "--u", "1,1,1", "--quick"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        fsladder(&["lyapunov", "--t", "100", "--quick"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lyapunov_is_reproducible() {
    let a = fsladder(&["lyapunov", "--quick", "--seed", "7"]);
    let b = fsladder(&["lyapunov", "--quick", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["lyapunov"]["pass"], true);
}

#[test]
fn geometry_rows() {
    let o = fsladder(&["geometry", "--level", "1"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 15);
    let o = fsladder(&["geometry", "--level", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let segs = v.as_array().unwrap();
    assert_eq!(segs.len(), 3);
    assert!(segs
        .iter()
        .all(|s| (s["len"].as_f64().unwrap() - 1.0).abs() < 1e-12));
}

#[test]
fn config_file_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "t = 100\nformat = csv\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(fsladder(&["zeff", "--config", c]).status.code(), Some(2));
    let o = fsladder(&["zeff", "--config", c, "--t", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .starts_with("omega,t,in_band"));
}

#[test]
fn level_above_eight_is_refused() {
    assert_eq!(
        fsladder(&["measure", "--level", "9"]).status.code(),
        Some(1)
    );
}

#[test]
fn verify_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let oa = fsladder(&["verify", "--quick", "--out", a.to_str().unwrap()]);
    let ob = fsladder(&["verify", "--quick", "--out", b.to_str().unwrap()]);
    assert_eq!(oa.status.code(), ob.status.code());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = json(&a);
    let ids: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    for n in 1..=16 {
        assert!(
            ids.iter().any(|id| id.starts_with(&format!("{n:02}"))),
            "criterion {n} missing"
        );
    }
    assert_eq!(
        oa.status.code(),
        Some(if v["all_pass"] == true { 0 } else { 1 })
    );
}

#[test]
fn verify_override_names_failing_check() {
    let o = Command::new(env!("CARGO_BIN_EXE_fsladder"))
        .args(["verify", "--quick", "--format", "csv"])
        .env("FSLADDER_VERIFY_OVERRIDE", "14=0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[FAIL] 14 exhaustive-identity"));
}
