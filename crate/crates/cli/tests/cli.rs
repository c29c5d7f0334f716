use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lpplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpplab")).args(args).env_remove("LPP_LAB_OUT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_rains(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "rains", "--out", dir.to_str().unwrap(), "--override", "m=8", "n=8", "w=0.55", "z=0.45", "replicas=[3000]"];
    args.extend_from_slice(extra);
    lpplab(&args)
}

#[test]
fn list_shows_the_catalog() {
    let o = lpplab(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["rains", "stationarity", "exit", "var-lipschitz", "sums-tails"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn unknown_experiment_exits_2() {
    let o = lpplab(&["run", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_2_with_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_rains(dir.path(), &["bogus_key=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus_key"));
    let o = small_rains(dir.path(), &["replicas=[10]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("replicas[0]"), "{}", stderr(&o));
    let o = lpplab(&["run", "rains", "--override", "m"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lpplab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rains_run_writes_results_and_verdict_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_rains(dir.path(), &[]);
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("CRITERION C2 ")).expect("verdict line");
    let pass = line.contains(" PASS margin=");
    assert!(pass || line.contains(" FAIL margin="), "{line}");
    assert_eq!(o.status.code(), Some(if pass { 0 } else { 1 }));

    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("rains.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    let stats = json["statistics"].as_array().unwrap();
    let closed = stats.iter().find(|s| s["statistic"] == "closed_form").unwrap()["value"].as_f64().unwrap();
    assert!((closed - 24.80).abs() < 0.01, "{closed}");
    assert!(stats.iter().any(|s| s["statistic"] == "mc_estimate"));
    assert!(dir.path().join("rains.csv").exists());
    assert!(dir.path().join("rains.timing.json").exists());
}

#[test]
fn reruns_error_unless_verifying() {
    let dir = tempfile::tempdir().unwrap();
    small_rains(dir.path(), &[]);
    let again = small_rains(dir.path(), &[]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).contains("exists"));
    let verify = small_rains(dir.path(), &["on_existing=\"verify\""]);
    assert!(verify.status.code().unwrap() <= 1, "{}", stderr(&verify));
    assert!(!stderr(&verify).contains("differs"));
    let workers = small_rains(dir.path(), &["on_existing=\"verify\"", "workers=3"]);
    assert!(!stderr(&workers).contains("differs"), "{}", stderr(&workers));
    let reseeded = small_rains(dir.path(), &["on_existing=\"verify\"", "master_seed=99"]);
    assert!(stderr(&reseeded).contains("differs"));
}

#[test]
fn config_file_then_flags_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rains.toml");
    fs::write(&cfg, "name = \"rains\"\nm = 4\nn = 5\nreplicas = [500]\nmaster_seed = 1\n").unwrap();
    let out = dir.path().join("out");
    let o = lpplab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7", "--override", "n=6"]);
    assert!(o.status.code().unwrap() <= 1, "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("rains.json")).unwrap()).unwrap();
    let c = &json["config"];
    assert_eq!((c["m"].as_u64(), c["n"].as_u64(), c["master_seed"].as_u64()), (Some(4), Some(6), Some(7)));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lpplab"))
        .args(["run", "rains", "--override", "m=3", "n=3", "replicas=[200]"])
        .env("LPP_LAB_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.code().unwrap() <= 1, "{}", stderr(&o));
    assert!(dir.path().join("rains.json").exists());
}

#[test]
fn export_emits_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    small_rains(dir.path(), &[]);
    let target = dir.path().join("long.csv");
    let o = lpplab(&["export", dir.path().join("rains.json").to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("experiment,N,param,statistic,value,lo,hi"), "{text}");
    assert!(text.contains("closed_form"));
    let from_csv = lpplab(&["export", dir.path().join("rains.csv").to_str().unwrap()]);
    assert_eq!(from_csv.status.code(), Some(0));
    assert!(stdout(&from_csv).contains("mc_estimate"));
    assert_eq!(lpplab(&["export", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn verify_passes_quickly() {
    let start = std::time::Instant::now();
    let o = lpplab(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("INVARIANT ") && l.contains(" PASS ")), "{text}");
    assert!(start.elapsed().as_secs() < 60);
}
