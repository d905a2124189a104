use symmheat::scenario::{
    prepare_and_run, write_run, write_summary, ScenarioConfig, ScenarioSummary, Status, Summary,
    SuiteConfig,
};
use tempfile::TempDir;

fn small() -> ScenarioConfig {
    let suite = SuiteConfig::parse(
        r#"{"name": "small", "domain": {"kind": "polar_disc", "radius": 1, "radial_cells": 12, "angular_cells": 16},
            "f": 1, "g": {"preset": "gaussian", "center": [0.2, 0.1], "width": 0.3},
            "resolution": 128, "dt": 0.01, "times": [0.02, 0.1]}"#,
    )
    .unwrap();
    suite.scenarios.into_iter().next().unwrap()
}

#[test]
fn comparison_csv_matches_the_run() {
    let run = prepare_and_run(&small()).unwrap();
    let dir = TempDir::new().unwrap();
    let artifacts = write_run(dir.path(), &run).unwrap();
    assert_eq!(artifacts.directory, dir.path().join("small"));

    let csv = std::fs::read_to_string(dir.path().join("small/comparison.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,a,U,V,V_minus_U"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), run.u_scan.times.len() * run.u_scan.a_grid.len());
    for (k, row) in rows.iter().enumerate() {
        let (j, i) = (k / run.u_scan.a_grid.len(), k % run.u_scan.a_grid.len());
        // 17 significant digits round-trip exactly
        assert_eq!(row[0], run.u_scan.times[j]);
        assert_eq!(row[1], run.u_scan.a_grid[i]);
        assert_eq!(row[2], run.u_scan.values[j][i]);
        assert_eq!(row[3], run.v_surface.values[j][i]);
        assert_eq!(row[4], row[3] - row[2]);
    }

    let lp = std::fs::read_to_string(dir.path().join("small/lp.csv")).unwrap();
    assert!(lp.starts_with("t,p,lhs,rhs,gap\n"));
    assert_eq!(lp.lines().count(), 1 + 3 * run.u_scan.times.len());
    assert!(lp.contains(",inf,"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("small/report.json")).unwrap()).unwrap();
    assert_eq!(report["name"], "small");
}

#[test]
fn summary_round_trips_and_combines_statuses() {
    let run = prepare_and_run(&small()).unwrap();
    let mut summary = Summary::new("run");
    summary.push_scenario(ScenarioSummary::from_run(&run));
    assert_eq!(summary.status, Status::Pass);
    let mut failing = ScenarioSummary::from_run(&run);
    failing.status = Status::Fail;
    summary.push_scenario(failing);
    assert_eq!(summary.status, Status::Fail);
    assert_eq!(summary.status.exit_code(), 1);

    let dir = TempDir::new().unwrap();
    let path = write_summary(&dir.path().join("nested/out"), &summary).unwrap();
    let back: Summary = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, summary);
}
