use sasaki_tg::expedition::*;
use sasaki_tg::immersion::Verdict;

fn theorem1() -> RunReport {
    run_suite("theorem1", &Overrides::default()).unwrap()
}

#[test]
fn suite_report_round_trips_through_json() {
    let report = theorem1();
    assert!(report.passed);
    let mut buf = Vec::new();
    write_json(&report, &mut buf).unwrap();
    let back = read_json(buf.as_slice()).unwrap();
    assert_eq!(back, report);
    assert_eq!(to_json_string(&back), String::from_utf8(buf).unwrap());
}

#[test]
fn csv_summary_has_one_row_per_scenario() {
    let report = theorem1();
    let mut buf = Vec::new();
    write_csv_summary(&report, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("name,verdict,max_residual\n"));
    let rows = read_csv_summary(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), report.scenarios.len());
    for (row, s) in rows.iter().zip(&report.scenarios) {
        assert_eq!(row, &SummaryRow::from_report(s));
    }
}

#[test]
fn runs_are_deterministic_up_to_timing() {
    let a = run_suite("theorem2", &Overrides::default()).unwrap().without_timing();
    let b = run_suite("theorem2", &Overrides::default()).unwrap().without_timing();
    assert_eq!(to_json_string(&a), to_json_string(&b));
}

#[test]
fn histogram_counts_every_grid_point() {
    for s in theorem1().scenarios {
        assert_eq!(s.histogram.total() as usize, s.grid_points, "{}", s.name);
    }
}

#[test]
fn tightened_tolerance_breaks_expectations() {
    let report = run_suite("theorem2", &Overrides { tolerance: Some(1e-12), grid: None }).unwrap();
    let err = suite_outcome(&report).unwrap_err();
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn unknown_suite_is_a_config_error() {
    assert_eq!(run_suite("nonsense", &Overrides::default()).unwrap_err().exit_code(), 2);
}

#[test]
fn config_errors_carry_line_numbers() {
    let src = "name = \"x\"\n\n[chart]\nfamily = \"cos\"\nradius = 2.0\n\n[construction]\nkind = \"fiber\"\nq0 = [0.0, 0.0]\n";
    let issue = parse_scenario(src).unwrap_err();
    assert_eq!(issue.line, Some(5));
    assert!(issue.message.contains("radius"), "{}", issue.message);

    let issue = parse_scenario("name = \"x\"\n[construction]\nkind = \"fiber\"\nq0 = [0.0, 0.0]\n").unwrap_err();
    assert!(issue.message.contains("chart"), "{}", issue.message);

    let bad_kind = "name = \"x\"\n[chart]\nfamily = \"cos\"\n[construction]\nkind = \"torus\"\n";
    assert!(parse_scenario(bad_kind).is_err());
}

#[test]
fn points_outside_the_chart_are_rejected() {
    let src = "name = \"x\"\n[chart]\nfamily = \"sin\"\nr = 1.0\n[construction]\nkind = \"fiber\"\nq0 = [-0.5, 0.0]\n";
    let config = parse_scenario(src).unwrap();
    let err = run_config(&config, Some(src), &Overrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn geodesic_scenario_keeps_its_trajectory() {
    let run = run_builtin("tm_geodesic_sphere", &Overrides::default()).unwrap();
    let rows = run.trajectory.expect("trajectory");
    assert!(rows.len() > 10);
    let mut buf = Vec::new();
    write_trajectory(&rows, &mut buf).unwrap();
    assert_eq!(read_trajectory(buf.as_slice()).unwrap(), rows);
    let (lo, hi) = rows.iter().fold((f64::MAX, f64::MIN), |(a, b), r| (a.min(r.speed), b.max(r.speed)));
    assert!(hi - lo < 1e-8, "{lo} {hi}");
}

#[test]
fn cylinder_is_intrinsically_flat() {
    let run = run_builtin("cylinder_sphere", &Overrides::default()).unwrap();
    assert_eq!(run.report.verdict, Some(Verdict::TotallyGeodesic));
    assert!(run.report.intrinsic_gauss_max.unwrap() <= 1e-4);
}

#[test]
fn every_builtin_parses_and_belongs_to_a_suite() {
    let members: Vec<&str> = SUITE_NAMES.iter().flat_map(|s| suite_members(s).unwrap()).collect();
    for n in builtin_names() {
        load_builtin(n).unwrap();
        assert!(members.contains(&n), "{n}");
    }
}
