use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktorus")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    v["report"].clone()
}

fn results(args: &[&str]) -> Value {
    report(args)["results"].clone()
}

fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn ktheory_families() {
    for (m, n, tors) in [(2, 3, "6"), (2, 5, "10"), (3, 4, "12")] {
        let r = results(&["ktheory", &format!("ji:{m},{n}")]);
        for k in ["k0", "k1"] {
            assert_eq!(r[k]["free_rank"], 4);
            assert_eq!(r[k]["invariant_factors"], serde_json::json!([tors]));
        }
    }
    let r = results(&["ktheory", "rotation:theta"]);
    assert_eq!((r["k0_display"].as_str(), r["k1_display"].as_str()), (Some("Z^2"), Some("Z^2")));
    let r = results(&["ktheory", "point"]);
    assert_eq!((r["k0_display"].as_str(), r["k1_display"].as_str()), (Some("Z"), Some("Z")));
    let r = results(&["ktheory", "putnam:alpha,beta"]);
    assert_eq!((r["k0_display"].as_str(), r["k1_display"].as_str()), (Some("Z^3"), Some("Z^3")));
}

#[test]
fn map_file_matches_descriptor() {
    let dir = std::env::temp_dir().join(format!("ktorus-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ji23.json");
    std::fs::write(
        &path,
        r#"{
  "basis": {"labels": ["theta"], "values": [0.6180339887498949]},
  "translation": [{"theta": "1"}, {}, {}],
  "linear_part": [[1, 0, 0], [2, 1, 0], [0, 3, 1]]
}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let from_file = results(&["ktheory", p]);
    let from_desc = results(&["ktheory", "ji:2,3"]);
    assert_eq!(from_file, from_desc);
    let v = results(&["elliott", "compare", p, "ji:3,2"]);
    assert_eq!(v["verdict"]["equivalent"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn elliott_verdicts() {
    let eq = |a: &str, b: &str| results(&["elliott", "compare", a, b])["verdict"]["equivalent"].as_bool().unwrap();
    assert!(eq("ji:2,3", "ji:3,2"));
    assert!(eq("ji:2,3", "ji:2,3"));
    assert!(eq("ji:2,5", "ji:10,1"));
    assert!(!eq("ji:2,4", "ji:8,1"));
    assert!(!eq("rotation:t1", "rotation:t2"));
    assert!(eq("rotation:t1", "rotation:t1"));
    let renamed = results(&["elliott", "compare", "rotation:t1", "rotation:t2", "--rename", "t2=t1"]);
    assert_eq!(renamed["verdict"]["equivalent"], true);
}

#[test]
fn tempered_classes() {
    let v = results(&["tempered", "rotation:theta", "--exact"]);
    assert_eq!(v["verdict"]["class"], serde_json::json!({"class": "polynomial", "degree": 0}));
    assert!(v["profile"]["samples"].as_array().unwrap().iter().all(|s| s[1] == 1.0));
    let v = results(&["tempered", "ji:2,3", "--exact"]);
    assert_eq!(v["verdict"]["class"], serde_json::json!({"class": "polynomial", "degree": 2}));
    assert_eq!(v["verdict"]["within_cap"], true);
    let v = results(&["tempered", "ji:2,3"]);
    assert_eq!(v["verdict"]["class"]["degree"], 2);
    let v = results(&["tempered", "sine:0.1"]);
    assert_eq!(v["verdict"]["class"]["class"], "exponential");
    let rate = v["verdict"]["class"]["rate"].as_f64().unwrap();
    let expected = 1.0 + 2.0 * std::f64::consts::PI * 0.1;
    assert!((rate / expected - 1.0).abs() < 0.05);
}

#[test]
fn schweitzer_suite_passes() {
    let r = results(&["schweitzer", "suite", "--cases", "100", "--seed", "7"]);
    assert_eq!(r["passed"], true);
    assert_eq!(r["reciprocal_gap"], 1.0);
    let (lo, hi) = (r["unit_norm"]["lo"].as_f64().unwrap(), r["unit_norm"]["hi"].as_f64().unwrap());
    assert!(lo <= 1.0 && 1.0 <= hi && hi - lo < 1e-14);
}

#[test]
fn conjugacy_reports() {
    let r = results(&["conjugacy", "--ji", "2", "3"]);
    assert_eq!(r["q_similar"], true);
    assert_eq!(r["flip"]["flip_excluded"], true);
    assert_eq!(r["flip"]["direct"]["status"]["status"], "not_similar");
    let r = results(&["conjugacy", "[[1,1],[0,1]]", "[[1,0],[1,1]]"]);
    assert_eq!(r["flip"]["direct"]["status"]["status"], "similar");
    let r = results(&["conjugacy", "[[2,1],[1,1]]", "[[2,0],[0,1]]"]);
    assert_eq!(r["q_similar"], false);
    assert_eq!(r["direct"]["status"]["obstruction"]["kind"], "rational_invariants");
}

#[test]
fn smoothcp_unit_norms() {
    let r = results(&["smoothcp", "bench", "rotation:theta", "--samples", "4"]);
    assert_eq!(r["unit_combined_seminorm"], 1.0);
    assert_eq!(r["delta1_seminorm_0_1"], 2.0);
    assert!(r["probe"]["max_ratio_combined"].as_f64().unwrap().is_finite());
}

#[test]
fn dynamics_commands() {
    let c = |x: &str, y: &str| results(&["dynamics", "collapse", "--", x, y])["image"].clone();
    assert_eq!(c("0", "0.5"), serde_json::json!([0.0, 0.0]));
    assert_eq!(c("0.5", "-0.3"), serde_json::json!([0.5, -0.15]));
    assert_eq!(c("2", "7"), serde_json::json!([2.0, 7.0]));
    let o = results(&["dynamics", "orbit", "rotation:theta", "--steps", "3"]);
    assert_eq!(o["points"].as_array().unwrap().len(), 4);
    let e = results(&["dynamics", "ergodic", "ji:2,3", "--freq", "0,1,0", "--steps", "20000"]);
    assert!(e["modulus"].as_f64().unwrap() < 1e-2);
    let w = results(&["dynamics", "winding", "ji:2,3", "--coord", "0", "--steps", "5000", "--start", "0.1,0.2,0.3"]);
    assert!((w["average_increment"].as_f64().unwrap() - golden()).abs() < 1e-12);
    let d = results(&["dynamics", "distality", "rotation:theta", "--z1", "0.1", "--z2", "0.3", "--horizon", "500"]);
    assert!((d["min_distance"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[test]
fn reports_are_deterministic() {
    let args = ["schweitzer", "suite", "--cases", "50", "--seed", "11"];
    let a = report(&args);
    let b = report(&args);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = report(&["schweitzer", "suite", "--cases", "50", "--seed", "12"]);
    assert_ne!(a["config_hash"], c["config_hash"]);
    for tag in ["column_map", "transpose", "convolution"] {
        assert!(a["conventions"][tag].is_string());
    }
    assert_eq!(a["tool"], "ktorus");
    assert_eq!(a["command"]["seed"], 11);
}

#[test]
fn out_flag_writes_same_body() {
    let path = std::env::temp_dir().join(format!("ktorus-out-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let out = run(&["ktheory", "ji:2,3", "--out", p]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["report"], report(&["ktheory", "ji:2,3"]));
    assert!(written["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&["ktheory", "no-such-family"]), 2);
    assert_eq!(exit_code(&["frobnicate"]), 2);
    assert_eq!(exit_code(&["elliott", "compare", "ji:2,3", "sine:0.1"]), 2);
    assert_eq!(exit_code(&["conjugacy", "[[1,2],[3]]", "[[1]]"]), 2);
    assert_eq!(exit_code(&["conjugacy", "--ji", "2", "3", "--bound", "9"]), 3);
    assert_eq!(exit_code(&["conjugacy", "--ji", "2", "3", "--modcap", "100"]), 3);
    assert_eq!(exit_code(&["dynamics", "orbit", "ji:2,3", "--steps", "1000000"]), 3);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let path = std::env::temp_dir().join(format!("ktorus-bad-{}.json", std::process::id()));
    std::fs::write(&path, "{\n  \"linear_part\": [[1, 0], [1, 1]],\n  \"translation\": [0.1,\n").unwrap();
    let out = run(&["ktheory", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
    std::fs::remove_file(&path).unwrap();
}
