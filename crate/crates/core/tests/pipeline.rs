use lpplab::experiments::{
    export_long_csv, json_path, load_result, render_csv, run_experiment, ExperimentConfig, OnExisting, Report,
    CSV_HEADER,
};

fn small(name: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::default_for(name).unwrap();
    c.replicas = vec![300];
    c.aux_replicas = 300;
    c.m = c.m.min(8);
    c.n = c.n.min(8);
    c.aux_vertex = [6, 6];
    if c.uses_ladder() {
        c.ladder = vec![16, 24, 32];
    }
    c
}

#[test]
fn persisted_results_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("variance-identity");
    c.output = Some(dir.path().to_path_buf());
    let res = run_experiment(&c).unwrap();
    let back = load_result(&json_path(dir.path(), "variance-identity")).unwrap();
    assert_eq!(back.verdicts, res.verdicts);
    assert_eq!(back.statistics, res.statistics);
    assert_eq!(back.schema, 1);
    assert!(back.timing.is_none());

    let mut long = Vec::new();
    let rows = export_long_csv(&json_path(dir.path(), "variance-identity"), &mut long).unwrap();
    assert_eq!(rows, res.statistics.len() + res.slopes.len() * 3);
    let text = String::from_utf8(long).unwrap();
    assert_eq!(text.lines().count(), rows + 1);
}

#[test]
fn csv_has_the_documented_columns() {
    let res = run_experiment(&small("rains")).unwrap();
    let csv = String::from_utf8(render_csv(&res).unwrap()).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(csv.lines().count(), res.statistics.len() + 1);
}

#[test]
fn ladder_experiments_do_not_depend_on_workers() {
    for name in ["mean-gap", "inc-tail"] {
        let a = small(name);
        let mut b = a.clone();
        b.workers = 3;
        let (ra, rb) = (run_experiment(&a).unwrap(), run_experiment(&b).unwrap());
        assert_eq!(render_csv(&ra).unwrap(), render_csv(&rb).unwrap(), "{name}");
    }
}

#[test]
fn verify_mode_accepts_an_identical_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("mean-gap");
    c.output = Some(dir.path().to_path_buf());
    run_experiment(&c).unwrap();
    c.on_existing = OnExisting::Verify;
    c.workers = 2;
    run_experiment(&c).unwrap();
}

#[test]
fn nan_margins_fail_and_survive_serialization() {
    let mut rep = Report::default();
    rep.verdict("x", f64::NAN, "broken");
    let res = rep.into_result(small("rains"), 0.0);
    assert!(!res.all_pass());
    let json = serde_json::to_string(&res).unwrap();
    let back: lpplab::experiments::ExperimentResult = serde_json::from_str(&json).unwrap();
    assert!(back.verdicts[0].margin.is_nan());
    assert_eq!(back.verdicts[0].line(), "CRITERION x FAIL margin=NaN");
}
