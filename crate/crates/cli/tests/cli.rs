use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn leadnav(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leadnav"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path) {
    let mut crowd = String::from("frame,id,kind,x,y\n");
    for f in 0..=240u64 {
        let t = f as f64 / 30.0;
        crowd += &format!("{f},1,pedestrian,{},0.2\n", 3.0 + 1.2 * t);
        crowd += &format!("{f},7,Biker,{},{}\n", 14.0, -9.0 + 4.0 * t);
    }
    fs::write(dir.join("crowd.csv"), crowd).unwrap();
    fs::write(
        dir.join("s.toml"),
        "trials = 3\nbase_seed = 10\n[scene]\nrobot_start = [0.0, 0.0]\ngoal = [15.0, 0.0]\n\
         obstacles = [[[5.0, 4.0], [12.0, 4.0]]]\n\
         [trajectories]\npath = \"crowd.csv\"\nscale = 1.0\nframe_rate = 30.0\n",
    )
    .unwrap();
}

#[test]
fn run_writes_record_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    let out = leadnav(&["run", "--scenario", "s.toml", "--mode", "framework", "--seed", "0", "--scores"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("record.csv")).unwrap();
    assert!(csv.starts_with("tick,agent_id,kind,x,y,vx,vy,is_robot,leader_id,subgoal_x,subgoal_y,collision_flag\n"));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    for key in ["tcc_uniform", "tcc_realistic", "t_avg", "d_avg", "per_trial", "trial_count"] {
        assert!(metrics.get(key).is_some(), "missing {key}");
    }
    assert_eq!(metrics["trial_count"], 1);
    assert!(dir.path().join("scores.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    let mut records = Vec::new();
    for sub in ["a", "b"] {
        let out = leadnav(&["run", "--scenario", "s.toml", "--seed", "4", "--out-dir", sub], dir.path());
        assert!(out.status.success());
        records.push(fs::read(dir.path().join(sub).join("record.csv")).unwrap());
    }
    assert_eq!(records[0], records[1]);
}

#[test]
fn batch_metrics_match_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    let out = leadnav(&["batch", "--scenario", "s.toml", "--records"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let batch = fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    let out = leadnav(
        &["metrics", "record_0.csv", "record_1.csv", "record_2.csv", "--scenario", "s.toml", "-o", "again.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("again.json")).unwrap(), batch);
    let v: serde_json::Value = serde_json::from_str(&batch).unwrap();
    assert_eq!(v["trial_count"], 3);
}

#[test]
fn batch_trial_override() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    let out = leadnav(&["batch", "--scenario", "s.toml", "--trials", "100", "--mode", "raw-sf"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(v["trial_count"], 100);
}

#[test]
fn plot_draws_one_polyline_per_agent_plus_robot() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    assert!(leadnav(&["run", "--scenario", "s.toml"], dir.path()).status.success());
    let out = leadnav(
        &["plot", "record.csv", "-o", "out.svg", "--scenario", "s.toml", "--region-tick", "10"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(dir.path().join("out.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert!(leadnav(&["plot", "record.csv", "-o", "again.svg", "--scenario", "s.toml", "--region-tick", "10"], dir.path())
        .status
        .success());
    assert_eq!(fs::read(dir.path().join("again.svg")).unwrap(), svg.as_bytes());
    assert!(leadnav(&["plot", "record.csv", "-o", "bare.svg"], dir.path()).status.success());
}

#[test]
fn validate_accepts_good_and_rejects_bad_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    let ok = leadnav(&["validate", "s.toml"], dir.path());
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("2 agents"));

    fs::write(dir.path().join("bad.toml"), "[scene]\nrobot_start = [0.0, 0.0]\n").unwrap();
    assert_eq!(leadnav(&["validate", "bad.toml"], dir.path()).status.code(), Some(2));

    fs::write(dir.path().join("crowd.csv"), "frame,id,kind,x,y\n0,1,horse,0,0\n").unwrap();
    let out = leadnav(&["validate", "s.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("crowd.csv:2:"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leadnav(&[], dir.path()).status.code(), Some(1));
    assert_eq!(leadnav(&["fly"], dir.path()).status.code(), Some(1));
    assert_eq!(leadnav(&["run", "--scenario", "s.toml", "--mode", "orca"], dir.path()).status.code(), Some(1));
    assert_eq!(leadnav(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn failed_runs_leave_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path());
    // the output directory path is occupied by a file, so nothing can be written
    fs::write(dir.path().join("blocked"), "").unwrap();
    let out = leadnav(&["run", "--scenario", "s.toml", "--out-dir", "blocked/x"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("blocked/x/record.csv").exists());

    let out = leadnav(&["batch", "--scenario", "s.toml", "--records", "--trials", "2", "--out-dir", "o"], dir.path());
    assert!(out.status.success());
    fs::create_dir(dir.path().join("m")).unwrap();
    fs::create_dir(dir.path().join("m/metrics.json")).unwrap();
    let out = leadnav(&["run", "--scenario", "s.toml", "--out-dir", "m"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("m/record.csv").exists(), "record.csv left behind");
}

#[test]
fn missing_scenario_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = leadnav(&["run", "--scenario", "nope.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("record.csv").exists());
}
