use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wulffkit(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_wulffkit"))
        .args(args)
        .arg("-c")
        .arg(&cfg)
        .arg("-o")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["check"] == name).unwrap()
}

const WULFF_DIAG: &str = r#"{
    "norm": {"family": "quadratic", "Q": [[4, 0, 0], [0, 1, 0], [0, 0, 1]]},
    "shape": {"kind": "scaled_wulff", "rho": 2, "center": [1, 0, 0]},
    "checks": ["minkowski", "hk", "fit"]
}"#;

#[test]
fn constant_norm_gives_the_unit_sphere() {
    let dir = TempDir::new().unwrap();
    let out = wulffkit(dir.path(), &["wulff"], r#"{"norm": {"family": "constant"}}"#);
    assert_eq!(out.status.code(), Some(0));
    let summary = read_json(&dir.path().join("out/wulff_summary.json"));
    assert!(summary["membership_residual"].as_f64().unwrap() <= 1e-8);
    assert!(summary["convexity_margin"].as_f64().unwrap() > 0.0);
    let obj = fs::read_to_string(dir.path().join("out/wulff.obj")).unwrap();
    for line in obj.lines().filter(|l| l.starts_with("v ")) {
        let v: Vec<f64> = line[2..].split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < 1e-12);
    }
    assert!(obj.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn quadratic_norm_gives_an_ellipsoid_mesh() {
    let dir = TempDir::new().unwrap();
    let out = wulffkit(dir.path(), &["wulff"], WULFF_DIAG);
    assert_eq!(out.status.code(), Some(0));
    let obj = fs::read_to_string(dir.path().join("out/wulff.obj")).unwrap();
    let mut count = 0;
    for line in obj.lines().filter(|l| l.starts_with("v ")) {
        let v: Vec<f64> = line[2..].split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert!((v[0] * v[0] / 4.0 + v[1] * v[1] + v[2] * v[2] - 1.0).abs() <= 1e-8);
        count += 1;
    }
    assert_eq!(read_json(&dir.path().join("out/wulff_summary.json"))["vertices"], count);
}

#[test]
fn planar_wulff_shape_is_a_csv_polyline() {
    let dir = TempDir::new().unwrap();
    let out = wulffkit(dir.path(), &["wulff", "--resolution", "64"], r#"{"norm": {"family": "smoothed-lp", "p": 3, "eps": 0.3}, "dim": 2}"#);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/wulff.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 64 + 1);
}

#[test]
fn nonconvex_norm_exits_2_without_files() {
    let dir = TempDir::new().unwrap();
    let out = wulffkit(dir.path(), &["wulff"], r#"{"norm": {"family": "smoothed-lp", "p": 0.5, "eps": 0.05}}"#);
    assert_eq!(out.status.code(), Some(2));
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["error"], "ConvexityViolation");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn scaled_wulff_passes_and_fits_scale_two() {
    let dir = TempDir::new().unwrap();
    let out = wulffkit(dir.path(), &["verify"], WULFF_DIAG);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("out/report.json"));
    assert_eq!(report["pass"], true);
    let fit = check(&report, "fit");
    assert!((fit["details"]["scale"].as_f64().unwrap() - 2.0).abs() < 1e-7);
    assert_eq!(fit["reports"][0]["verdict"], "wulff");
    assert_eq!(check(&report, "hk")["reports"][0]["verdict"], "equality");
}

#[test]
fn bumpy_sphere_is_strict_and_not_wulff() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "norm": {"family": "smoothed-lp", "p": 3, "eps": 0.3},
        "shape": {"kind": "radial_graph", "radial": {"type": "bump", "amplitude": 0.2}},
        "checks": ["hk", "fit"]
    }"#;
    let out = wulffkit(dir.path(), &["verify"], cfg);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("out/report.json"));
    let hk = &check(&report, "hk")["reports"][0];
    assert_eq!(hk["verdict"], "strict");
    assert!(hk["value"].as_f64().unwrap() > 0.0);
    let fit = &check(&report, "fit")["reports"][0];
    assert!(fit["value"].as_f64().unwrap() > 1e-2);
    assert_eq!(fit["verdict"], "not Wulff");
}

#[test]
fn reports_are_byte_identical_and_echo_overrides() {
    let cfg = r#"{
        "norm": {"family": "constant"},
        "shape": {"kind": "ellipse", "semi_axes": [2, 1]},
        "checks": ["cut", "tube", "stationarity", "maclaurin"],
        "tolerances": {"tube": 0.002, "binding": 0.0002}
    }"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(wulffkit(a.path(), &["verify"], cfg).status.code(), Some(0));
    assert_eq!(wulffkit(b.path(), &["verify", "--threads", "1"], cfg).status.code(), Some(0));
    for f in ["report.json", "cut_profile.csv"] {
        assert_eq!(fs::read(a.path().join("out").join(f)).unwrap(), fs::read(b.path().join("out").join(f)).unwrap());
    }
    let report = read_json(&a.path().join("out/report.json"));
    assert_eq!(report["overrides"]["tube"], 0.002);
    assert_eq!(report["tolerances"]["binding"], 0.0002);
    assert_eq!(check(&report, "tube")["reports"][0]["tolerance"], 0.002);
}

#[test]
fn failing_check_exits_1_with_report() {
    let dir = TempDir::new().unwrap();
    // a lax fit bar calls the bumpy sphere Wulff, which contradicts its strict HK deficit
    let cfg = r#"{
        "norm": {"family": "constant"},
        "shape": {"kind": "radial_graph", "radial": {"type": "bump", "amplitude": 0.2}},
        "checks": ["fit", "minkowski"],
        "tolerances": {"fit": 1.0}
    }"#;
    let out = wulffkit(dir.path(), &["verify"], cfg);
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(&dir.path().join("out/report.json"));
    assert_eq!(report["pass"], false);
    assert_eq!(check(&report, "fit")["pass"], false);
    assert_eq!(check(&report, "minkowski")["pass"], true);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"norm": {"family": "constant"}, "shape": {"kind": "sphere", "radius": 1}, "checks": ["stationarity"]}"#;
    let out = wulffkit(dir.path(), &["verify"], cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out/report.json").exists());
    let out = wulffkit(dir.path(), &["verify"], r#"{"norm": {"family": "constant"}, "checks": ["nope"]}"#);
    assert_eq!(out.status.code(), Some(2));
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["error"], "Configuration");
}

#[test]
fn curvature_tables() {
    let dir = TempDir::new().unwrap();
    let out = wulffkit(dir.path(), &["curvature"], r#"{"norm": {"family": "constant"}, "shape": {"kind": "sphere", "radius": 2}}"#);
    assert_eq!(out.status.code(), Some(0));
    let s = read_json(&dir.path().join("out/curvature_summary.json"));
    for (r, want) in [(1, 0.5), (2, 0.25)] {
        assert!((s["hfr"][r]["mean"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!(s["hfr"][r]["std"].as_f64().unwrap() < 1e-12);
    }
    let csv = fs::read_to_string(dir.path().join("out/curvature.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 32 * 64);

    let dir = TempDir::new().unwrap();
    wulffkit(dir.path(), &["curvature"], r#"{"norm": {"family": "constant"}, "shape": {"kind": "ellipse", "semi_axes": [2, 1]}}"#);
    let s = read_json(&dir.path().join("out/curvature_summary.json"));
    assert!((s["lambdas"][0]["min"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((s["lambdas"][0]["max"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let dir = TempDir::new().unwrap();
    wulffkit(dir.path(), &["curvature", "--fd"], WULFF_DIAG);
    let s = read_json(&dir.path().join("out/curvature_summary.json"));
    assert_eq!(s["norm"]["derivative_mode"], "finite-difference");
    for r in 0..3 {
        assert!(s["hfr"][r]["std"].as_f64().unwrap() <= 1e-4);
    }
    let dir = TempDir::new().unwrap();
    wulffkit(dir.path(), &["curvature"], WULFF_DIAG);
    let s = read_json(&dir.path().join("out/curvature_summary.json"));
    for r in 0..3 {
        assert!(s["hfr"][r]["std"].as_f64().unwrap() <= 1e-6);
    }
}
