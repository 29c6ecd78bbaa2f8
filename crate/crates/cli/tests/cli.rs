use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypmass::quadrature::sphere_area;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypmass-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn hypmass(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hypmass"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.env_remove("HYPMASS_THREADS");
    cmd.output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn boost_demo_succeeds_and_writes_tables() {
    let dir = scratch("boost");
    let out = hypmass(&dir, &["boost-demo"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["pass"], true);
    let csv = std::fs::read_to_string(dir.join("out/boost.csv")).unwrap();
    assert!(csv.starts_with("eps,v,gamma,k,y0,y1,y2,height\n"));
    assert!(!csv.contains('\r'));
    let on_disk = std::fs::read(dir.join("out/report.json")).unwrap();
    assert_eq!(on_disk, out.stdout);
}

#[test]
fn schwarzschild_ads_mass_matches_closed_form() {
    let dir = scratch("sads");
    let out = hypmass(&dir, &["mass"], Some(r#"{"mass": {"metric": {"family": "schwarzschild-ads", "mass": 1.0}}}"#));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let m0 = r["results"]["momentum"]["components"][0].as_f64().unwrap();
    let expect = 2.0 * sphere_area(3);
    assert!((m0 - expect).abs() < 1e-4 * expect, "{m0} vs {expect}");
    assert_eq!(r["results"]["momentum"]["character"], "timelike-future");
}

#[test]
fn negative_mass_is_past_timelike_and_hyperbolic_mass_vanishes() {
    let dir = scratch("negative");
    let out = hypmass(&dir, &["mass"], Some(r#"{"mass": {"metric": {"family": "schwarzschild-ads", "mass": -1.0}}}"#));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let m = r["results"]["momentum"]["components"].as_array().unwrap();
    assert!(m[0].as_f64().unwrap() < 0.0);
    assert!(m[1..].iter().all(|c| c.as_f64().unwrap().abs() < 1e-6));
    assert_eq!(r["results"]["momentum"]["character"], "timelike-past");
    assert!(r["results"]["std_error"].is_null());
    let csv = std::fs::read_to_string(dir.join("out/mass.csv")).unwrap();
    assert!(csv.starts_with("radius,m0,m1,m2,m3,ext0,ext1,ext2,ext3\n"));
    assert_eq!(csv.lines().count(), 7);

    let out = hypmass(&dir, &["mass"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for c in r["results"]["momentum"]["components"].as_array().unwrap() {
        assert!(c.as_f64().unwrap().abs() < 1e-6);
    }
}

#[test]
fn monte_carlo_mass_reports_standard_error() {
    let dir = scratch("mc");
    let cfg = r#"{"dim": 5, "mass": {"monte_carlo_samples": 2000, "radii": [8, 16, 32]}}"#;
    let out = hypmass(&dir, &["mass"], Some(cfg));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["std_error"].as_array().unwrap().len(), 6);
}

#[test]
fn corrupted_kid_fails_verification() {
    let dir = scratch("corrupt");
    let cfg = r#"{"verify": {"corrupt_kid": true, "points": 50, "graphs": 1}}"#;
    let out = hypmass(&dir, &["verify"], Some(cfg));
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["results"]["kid"]["pass"], false);
    assert_eq!(r["results"]["killing"]["pass"], true);
}

#[test]
fn verify_passes_in_every_dimension() {
    for n in ["3", "5", "8"] {
        let dir = scratch(&format!("verify{n}"));
        let out = hypmass(&dir, &["verify", "--dim", n], Some(r#"{"verify": {"points": 100, "graphs": 2}}"#));
        assert_eq!(out.status.code(), Some(0), "n = {n}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn coarse_glue_grid_reports_no_threshold() {
    let dir = scratch("noglue");
    let cfg = r#"{"dim": 4, "glue": {"decay": "exact", "constant": 500, "order": 0.5, "levels": 4}}"#;
    let out = hypmass(&dir, &["glue"], Some(cfg));
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(r["results"]["threshold"].is_null());
    assert!(!r["results"]["diagnostics"]["offending_rows"].as_array().unwrap().is_empty());
}

#[test]
fn default_glue_finds_threshold() {
    let dir = scratch("glue");
    let out = hypmass(&dir, &["glue", "--dim", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["results"]["threshold"].as_f64().unwrap() > 0.0);
    assert_eq!(r["results"]["bound_holds"], true);
    let csv = std::fs::read_to_string(dir.join("out/glue.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn config_errors_exit_with_three() {
    let dir = scratch("errors");
    for cfg in [
        "{not json",
        r#"{"dim": 2}"#,
        r#"{"dimension": 3}"#,
        r#"{"mass": {"radii": [2, 1]}}"#,
        r#"{"mass": {"decay": [1.0, 1.5]}}"#,
    ] {
        let out = hypmass(&dir, &["mass"], Some(cfg));
        assert_eq!(out.status.code(), Some(3), "{cfg}");
    }
    let out = hypmass(&dir, &["glue"], Some(r#"{"glue": {"base": [1, 0, 0, 0]}}"#));
    assert_eq!(out.status.code(), Some(3));
    let out = hypmass(&dir, &["constraints"], Some(r#"{"constraints": {"shift": true}}"#));
    assert_eq!(out.status.code(), Some(3));
    let missing = dir.join("missing.json");
    let out = Command::new(env!("CARGO_BIN_EXE_hypmass"))
        .args(["glue", "--config"])
        .arg(&missing)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = scratch("threads");
    let out = Command::new(env!("CARGO_BIN_EXE_hypmass"))
        .arg("boost-demo")
        .arg("--out")
        .arg(dir.join("out"))
        .env("HYPMASS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let cases: [(&[&str], &str); 3] = [
        (&["glue", "--seed", "9"], r#"{"dim": 6, "glue": {"independent_corrections": true}}"#),
        (&["constraints"], r#"{"constraints": {"data": {"family": "trig", "modes": 3, "slope": 0.8}}}"#),
        (&["mass", "--dim", "5"], r#"{"mass": {"monte_carlo_samples": 2000, "radii": [8, 16, 32]}}"#),
    ];
    for (args, cfg) in cases {
        let a_dir = scratch("det-a");
        let a = hypmass(&a_dir, args, Some(cfg));
        let b_dir = scratch("det-b");
        let b = hypmass(&b_dir, args, Some(cfg));
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        for entry in std::fs::read_dir(a_dir.join("out")).unwrap() {
            let name = entry.unwrap().file_name();
            let x = std::fs::read(a_dir.join("out").join(&name)).unwrap();
            let y = std::fs::read(b_dir.join("out").join(&name)).unwrap();
            assert_eq!(x, y, "{name:?}");
        }
    }
}

#[test]
fn threads_do_not_change_results() {
    let cfg = r#"{"constraints": {"data": {"family": "interpolating", "radius": 2.0}, "radius": 7.0}}"#;
    let one = scratch("t1");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hypmass"));
    std::fs::write(one.join("c.json"), cfg).unwrap();
    let a = cmd
        .args(["constraints", "--config"])
        .arg(one.join("c.json"))
        .arg("--out")
        .arg(one.join("out"))
        .env("HYPMASS_THREADS", "1")
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_hypmass"))
        .args(["constraints", "--config"])
        .arg(one.join("c.json"))
        .arg("--out")
        .arg(one.join("out2"))
        .env("HYPMASS_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
