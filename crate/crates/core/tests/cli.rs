use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rankbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankbound"))
        .args(args)
        .env("RANKBOUND_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = rankbound(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn same_output_twice(args: &[&str]) -> Value {
    let a = rankbound(args);
    let b = rankbound(args);
    assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "{args:?} is not deterministic");
    serde_json::from_slice(&a.stdout).unwrap()
}

#[test]
fn dim_and_gbr() {
    let v = json_ok(&["dim", "--format", "3,3,3", "--r", "4"]);
    assert_eq!(v["dim"], 26);
    assert_eq!(v["codim"], 1);
    assert_eq!(v["fiber_dim"], 2);
    let v = json_ok(&["dim", "--format", "8,4,4", "--r", "9"]);
    assert_eq!((v["a"].as_u64(), v["c"].as_u64()), (Some(4), Some(8)));
    assert_eq!(v["codim"], 2);
    let v = json_ok(&["gbr", "--format", "3,3,3"]);
    assert_eq!(v["generic_border_rank"], 5);
}

#[test]
fn bound_and_minq() {
    let v = json_ok(&["bound", "--r", "8", "--dimL", "2", "--q", "104"]);
    let value = v["value"].as_f64().unwrap();
    assert!((value - 8.366128).abs() < 1e-5);
    let v = json_ok(&["minq", "--r", "9", "--dimL", "3", "--target", "10"]);
    assert_eq!(v["q"], 76);
    let out = rankbound(&["minq", "--r", "9", "--dimL", "3", "--target", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no degree improves"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["dim", "--format", "3,3", "--r", "4"][..],
        &["dim", "--format", "3,x,3", "--r", "4"],
        &["dim", "--format", "3,0,3", "--r", "4"],
        &["dim", "--format", "3,3,3", "--r", "0"],
        &["table", "--which", "3"],
        &["frobnicate"],
    ] {
        assert_eq!(rankbound(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = rankbound(&["trace", "--witness", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let ck = dir.path().join("w.json");
    let out = rankbound(&["degree", "--format", "3,3,3", "--r", "5", "--checkpoint", ck.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "filling secant has no witness set");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[tracker]\nmin_step = 2.0\n").unwrap();
    let out = rankbound(&["--config", cfg.to_str().unwrap(), "bound", "--r", "2", "--dimL", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

fn degree_run(ck: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["degree", "--format", "1,2,2", "--r", "1", "--seed", "5", "--checkpoint", ck.to_str().unwrap()];
    args.extend_from_slice(extra);
    json_ok(&args)
}

#[test]
fn degree_trace_interp_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("quadric.json");
    let v = degree_run(&ck, &[]);
    assert_eq!(v["degree_lower_bound"], 2);
    assert_eq!(v["stop_reason"], "Stalled");
    let w = ck.to_str().unwrap();
    let t = json_ok(&["trace", "--witness", w]);
    assert_eq!(t["passed"], true);
    let i = json_ok(&["interp", "--witness", w, "--q", "1"]);
    assert_eq!((i["rank"].as_u64(), i["full_rank"].as_bool()), (Some(2), Some(true)));
    let i = json_ok(&["interp", "--witness", w, "--q", "2"]);
    assert_eq!((i["rank"].as_u64(), i["full_rank"].as_bool()), (Some(2), Some(false)));

    let first = std::fs::read(&ck).unwrap();
    let resumed = degree_run(&ck, &["--resume", "--max-loops", "3", "--stall", "100"]);
    assert_eq!(resumed["degree_lower_bound"], 2);
    assert!(resumed["loops_run"].as_u64() > v["loops_run"].as_u64());
    assert_ne!(std::fs::read(&ck).unwrap(), first);
}

#[test]
fn resume_rejects_a_different_format() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("w.json");
    degree_run(&ck, &["--max-loops", "1"]);
    let out = rankbound(&["degree", "--format", "3,3,3", "--r", "4", "--checkpoint", ck.to_str().unwrap(), "--resume"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seeded_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("w.json");
    let ck = ck.to_str().unwrap();
    same_output_twice(&["dim", "--format", "3,5,5", "--r", "7", "--seed", "3"]);
    same_output_twice(&["gbr", "--format", "4,4,5", "--seed", "3"]);
    same_output_twice(&["bound", "--r", "17", "--dimL", "2", "--q", "1228"]);
    same_output_twice(&["minq", "--r", "7", "--dimL", "4", "--target", "8"]);
    same_output_twice(&["verify-kronecker", "--format", "2,2,2", "--q", "2", "--seed", "3"]);
    same_output_twice(&["degree", "--format", "3,3,3", "--r", "4", "--seed", "3", "--max-loops", "2", "--checkpoint", ck]);
    let a = std::fs::read(ck).unwrap();
    same_output_twice(&["degree", "--format", "3,3,3", "--r", "4", "--seed", "3", "--max-loops", "2", "--checkpoint", ck]);
    assert_eq!(a, std::fs::read(ck).unwrap());
    same_output_twice(&["interp", "--witness", ck, "--q", "2"]);
    same_output_twice(&["trace", "--witness", ck]);
    same_output_twice(&["table", "--which", "2"]);
}

#[test]
fn verify_kronecker_reports_span() {
    let v = json_ok(&["verify-kronecker", "--format", "2,2,2", "--q", "2"]);
    assert_eq!(v["span_dimension"], 36);
    assert_eq!(v["expected_span_dimension"], 36);
    assert!(v["relative_residual"].as_f64().unwrap() <= 1e-12);
    let out = rankbound(&["verify-kronecker", "--format", "7,7,7", "--q", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tables_have_no_numeric_mismatch() {
    let v = json_ok(&["table", "--which", "2"]);
    assert_eq!(v["mismatch_count"], 0, "{v:#}");
    let v = json_ok(&["table", "--which", "1"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let mism: Vec<&str> = row["mismatches"].as_array().unwrap().iter().map(|m| m.as_str().unwrap()).collect();
        // The defective family has a larger chart than its published variable count.
        assert!(mism.iter().all(|m| m.starts_with("# vars") || m.starts_with("# params")), "{mism:?}");
        assert_eq!(row["codim"], 1);
    }
}
