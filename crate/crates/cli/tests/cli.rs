use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sasaki_tg::expedition::{read_csv_summary, read_json, read_trajectory};
use sasaki_tg::immersion::Verdict;

fn expedition(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expedition")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const DEGENERATE: &str = r#"name = "degenerate_cylinder"

[chart]
family = "cos"
r = 1.0

[construction]
kind = "cylinder"
q0 = [-0.5, -0.6]
direction = [0.7, 0.6]
e0 = [0.2, 1.0]
length = 1.4
rho = { kind = "affine", c0 = -0.7, cu = 1.0, cv = 0.0 }

[grid]
resolution = [15, 15]
"#;

#[test]
fn fiber_scenario_prints_a_json_report() {
    let o = expedition(&["run", "fiber_sphere"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(o.stdout.as_slice()).unwrap();
    assert_eq!(report.scenarios.len(), 1);
    assert_eq!(report.verdict, Some(Verdict::TotallyGeodesic));
    assert!(report.max_residual <= 1e-6);
}

#[test]
fn cylinder_report_records_flat_intrinsic_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cyl.json");
    let o = expedition(&["run", "cylinder_sphere", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(fs::File::open(&out).unwrap()).unwrap();
    let s = &report.scenarios[0];
    assert_eq!(s.verdict, Some(Verdict::TotallyGeodesic));
    assert!(s.intrinsic_gauss_max.unwrap() <= 1e-4);
}

#[test]
fn missing_chart_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path =
        scenario(dir.path(), "bad.toml", "name = \"bad\"\n\n[construction]\nkind = \"fiber\"\nq0 = [0.0, 0.0]\n");
    let o = expedition(&["run", &path]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("chart"), "{}", stderr(&o));
}

#[test]
fn unknown_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let body = "name = \"bad\"\n\n[chart]\nfamily = \"cos\"\nradius = 1.0\n\n[construction]\nkind = \"fiber\"\nq0 = [0.0, 0.0]\n";
    let o = expedition(&["run", &scenario(dir.path(), "bad.toml", body)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn bad_overrides_are_config_errors() {
    assert_eq!(code(&expedition(&["run", "fiber_sphere", "--tol", "-1"])), 2);
    assert_eq!(code(&expedition(&["run", "fiber_sphere", "--grid", "0"])), 2);
    assert_eq!(code(&expedition(&["suite", "nonsense"])), 2);
}

#[test]
fn vanishing_radius_is_a_numerical_degeneracy() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "degenerate.toml", DEGENERATE);
    let out = dir.path().join("degenerate.json");
    let o = expedition(&["run", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let report = read_json(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(report.verdict, Some(Verdict::Inconclusive));
    assert!(!report.scenarios[0].failures.is_empty());
}

#[test]
fn io_failures_exit_with_four() {
    assert_eq!(code(&expedition(&["run", "/nonexistent/scenario.toml"])), 4);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("report.json");
    assert_eq!(code(&expedition(&["run", "fiber_sphere", "--out", out.to_str().unwrap()])), 4);
}

#[test]
fn tightened_suite_tolerance_fails_expectations() {
    let o = expedition(&["suite", "theorem2", "--tol", "1e-12"]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    assert!(read_json(o.stdout.as_slice()).unwrap().suites.iter().any(|s| !s.passed));
}

#[test]
fn suite_csv_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theorem1.csv");
    let o = expedition(&["suite", "theorem1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv_summary(fs::File::open(&out).unwrap()).unwrap();
    assert!(rows.len() >= 10);
    assert!(rows.iter().any(|r| r.name == "cylinder_sphere" && r.verdict == Some(Verdict::TotallyGeodesic)));
    assert!(rows.iter().any(|r| r.name == "graph_frame_sphere" && r.verdict == Some(Verdict::NotTotallyGeodesic)));
}

#[test]
fn trajectory_dump() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let body = format!(
        "name = \"geo\"\n[chart]\nfamily = \"cosh\"\n[construction]\nkind = \"tm_geodesic\"\nq0 = [0.1, -0.2]\n\
         xi0 = [0.3, 0.5]\nhorizontal = [0.6, 0.4]\nvertical = [0.2, -0.5]\nlength = 1.0\n\
         [outputs]\ntrajectory = {:?}\n",
        traj.to_str().unwrap()
    );
    let o = expedition(&["run", &scenario(dir.path(), "geo.toml", &body), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_trajectory(fs::File::open(&traj).unwrap()).unwrap();
    assert!(rows.len() > 100);
    assert!((rows.last().unwrap().s - 1.0).abs() < 1e-9);
    let speed0 = rows[0].speed;
    assert!(rows.iter().all(|r| (r.speed - speed0).abs() < 1e-8));
    let summary = read_csv_summary(o.stdout.as_slice()).unwrap();
    assert_eq!(summary[0].name, "geo");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = |n: &str| {
        let p = dir.path().join(n);
        let o = expedition(&["suite", "theorem3", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read(p).unwrap()
    };
    assert_eq!(csv("a.csv"), csv("b.csv"));
}

#[test]
fn list_names_suites_and_builtins() {
    let o = expedition(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in ["theorem1", "theorem2", "theorem3", "invariants", "fiber_sphere", "checks_cubic"] {
        assert!(text.contains(needle), "{needle}");
    }
}
