use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use medgate::io::{parse_report, read_csv, report_json};
use medgate_core::synthesis::{find_target, replay_report};

fn medgate(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medgate"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove(medgate::OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn usage_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["weyl", "not-a-gate"][..],
        &["weyl", "toffoli"],
        &["robustness", "--delta-max", "1.5"],
        &["scaling", "--n", "1,4"],
        &["synth", "--target", "nothing"],
        &["derive", "--geometry", "ring-4"],
        &["replay", "--figure", "fig9z"],
    ] {
        let o = medgate(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn non_unitary_gate_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    fs::write(&file, "[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,2]]").unwrap();
    let o = medgate(dir.path(), &["weyl", file.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn matrix_file_with_complex_entries_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("iswap.json");
    fs::write(&file, r#"{"matrix": [[1,0,0,0],[0,0,[0,1],0],[0,[0,1],0,0],[0,0,0,1]]}"#).unwrap();
    let o = medgate(dir.path(), &["weyl", file.to_str().unwrap(), "--restarts", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("weyl-iswap.json")).unwrap()).unwrap();
    assert_eq!(v["perfect_entangler"], true);
    let c3 = v["weyl"][2].as_f64().unwrap();
    assert!(c3.abs() < 1e-12);
}

#[test]
fn unconverged_required_search_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = medgate(dir.path(), &["synth", "--target", "bell", "--depth", "1", "--restarts", "8", "--rounds", "1", "--require-converged"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    // the report is still written
    assert!(dir.path().join("synth-bell.json").exists());
}

#[test]
fn json_and_csv_carry_identical_numbers() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&medgate(dir.path(), &["robustness", "--points", "11", "--format", "json"])), 0);
    assert_eq!(code(&medgate(dir.path(), &["robustness", "--points", "11", "--format", "csv"])), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("robustness.json")).unwrap()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("robustness.csv")).unwrap();
    assert_eq!(header, ["delta", "infidelity"]);
    assert_eq!(rows.len(), 11);
    for (k, row) in rows.iter().enumerate() {
        let d: f64 = row[0].parse().unwrap();
        let y: f64 = row[1].parse().unwrap();
        assert_eq!(d.to_bits(), json["delta"][k].as_f64().unwrap().to_bits());
        assert_eq!(y.to_bits(), json["infidelity"][k].as_f64().unwrap().to_bits());
    }
    let first = fs::read_to_string(dir.path().join("robustness.csv")).unwrap();
    assert!(first.starts_with("# config: {"));
    assert_eq!(json["config"]["command"]["name"], "robustness");
}

#[test]
fn synth_report_round_trips_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let o = medgate(dir.path(), &["--seed", "3", "synth", "--target", "bell", "--depth", "2", "--require-converged"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("synth-bell.json")).unwrap();
    let report = parse_report(&text).unwrap();
    assert!(report.converged && report.depth == 2 && report.seed == 3);
    let mut original: serde_json::Value = serde_json::from_str(&text).unwrap();
    original.as_object_mut().unwrap().remove("config");
    assert_eq!(report_json(&report, false), original);
    // the direct evaluator sums in a different order than the optimizer's
    let objective = replay_report(&report, &find_target("bell").unwrap()).unwrap();
    assert!(objective < 1e-14 && (objective - report.objective).abs() < 1e-15);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        assert_eq!(code(&medgate(&out, &["synth", "--target", "cnot", "--depth", "4"])), 0);
        let text = fs::read_to_string(out.join("synth-cnot.json")).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["wall_time_ms"] = serde_json::Value::Null;
        v["config"]["global"]["out"] = serde_json::Value::Null;
        v
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_medgate"))
        .args(["scaling", "--n", "3"])
        .env(medgate::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&dir.path().join("scaling.csv")).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(String::from_utf8_lossy(&o.stdout).lines().next().unwrap().starts_with("scaling:"));
}

#[test]
fn derive_reports_the_linear_gate_period() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&medgate(dir.path(), &["derive", "--geometry", "linear-3"])), 0);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("derive-linear-3.json")).unwrap()).unwrap();
    let t = v["windows"][0]["t"].as_f64().unwrap();
    assert!((t - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
    assert_eq!(v["windows"][0]["tag"], "U2");
}

#[test]
fn replay_of_an_exact_figure_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = medgate(dir.path(), &["replay", "--figure", "fig3a"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("replay-fig3a.json")).unwrap()).unwrap();
    assert_eq!(v["figures"][0]["passed"], true);
}
