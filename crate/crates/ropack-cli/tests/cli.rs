//! End-to-end runs of the compiled binary.

use std::process::Command;

fn ropack() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ropack"))
}

#[test]
fn gen_opt_run_round_trip() {
    let dir = std::env::temp_dir().join(format!("ropack-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.json");

    let out = ropack()
        .args(["gen", "--n", "10", "--m", "2", "--d", "1", "--seed", "9"])
        .arg("-o")
        .arg(&inst)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(inst.exists());

    let out = ropack()
        .arg("opt")
        .arg(&inst)
        .args(["--method", "enum"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let opt: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(opt["method"], "enumeration");
    assert!(opt["value"].as_f64().unwrap() >= 0.0);

    let report_path = dir.join("report.json");
    let trace_dir = dir.join("traces");
    let out = ropack()
        .args([
            "run", "--algo", "vgap", "--trials", "50", "--seed", "4", "--jobs", "1",
        ])
        .arg("--inst")
        .arg(&inst)
        .arg("-o")
        .arg(&report_path)
        .arg("--trace-dir")
        .arg(&trace_dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["trials"], 50);
    assert_eq!(report["profits"].as_array().unwrap().len(), 50);
    assert!(trace_dir.join("trial_00000.jsonl").exists());

    // identical invocation, identical bytes
    let report2_path = dir.join("report2.json");
    let out = ropack()
        .args([
            "run", "--algo", "vgap", "--trials", "50", "--seed", "4", "--jobs", "2",
        ])
        .arg("--inst")
        .arg(&inst)
        .arg("-o")
        .arg(&report2_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(&report_path).unwrap(),
        std::fs::read(&report2_path).unwrap()
    );

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lbgen_exact_and_float_safe() {
    let dir = std::env::temp_dir().join(format!("ropack-lb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let exact = dir.join("lb_exact.json");
    let out = ropack()
        .args(["lbgen", "--d", "2", "--delta", "1", "--seed", "1"])
        .arg("-o")
        .arg(&exact)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&exact).unwrap();
    assert!(text.contains("0.99999999999636202119290828704833984375"));

    let safe = dir.join("lb_safe.json");
    let out = ropack()
        .args([
            "lbgen",
            "--d",
            "2",
            "--delta",
            "1",
            "--seed",
            "1",
            "--float-safe",
        ])
        .arg("-o")
        .arg(&safe)
        .output()
        .unwrap();
    assert!(out.status.success());

    // a float-safe family the construction cannot support is refused
    let out = ropack()
        .args(["lbgen", "--d", "3", "--delta", "1", "--float-safe"])
        .arg("-o")
        .arg(dir.join("nope.json"))
        .output()
        .unwrap();
    assert!(!out.status.success());

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_filter_runs_fast_criteria() {
    let out = ropack().args(["bench", "--only", "3,8"]).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("PASS 3"));
    assert!(stdout.contains("PASS 8"));
    assert!(stdout.contains("2/2 criteria passed"));
}

#[test]
fn run_rejects_mismatched_algorithm() {
    let dir = std::env::temp_dir().join(format!("ropack-mm-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("general.json");
    let out = ropack()
        .args(["gen", "--n", "4", "--m", "1", "--d", "1", "--seed", "2"])
        .arg("-o")
        .arg(&inst)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = ropack()
        .args(["run", "--algo", "vmkp", "--trials", "5", "--seed", "1"])
        .arg("--inst")
        .arg(&inst)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot run"));
    std::fs::remove_dir_all(&dir).ok();
}
