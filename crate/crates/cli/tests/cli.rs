use std::path::Path;
use std::process::{Command, Output};

fn sns(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sns"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

const BASE: &str = r#"{"d":2,"N":16,"nu":1,"T":0.25,"dt":0.015625,
  "noise":{"g":0.5,"alpha":0.75},"v0":{"kind":"random","seed":1,"radius":3}"#;

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn uniqueness_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = format!(
        r#"{{"base":{BASE}}},"paths":3,"uniqueness":{{"delta0":[0,1e-6],"c_bar":1e-3}},"record_stride":4}}"#
    );
    write(d, "u.json", &cfg);
    for out in ["a", "b"] {
        let o = sns(&["uniqueness", "--config", "u.json", "--seed", "7", "--out-dir", out], d);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["uniqueness.csv", "uniqueness_summary.csv", "run-meta.json"] {
        let a = std::fs::read(d.join("a").join(f)).unwrap();
        let b = std::fs::read(d.join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let o = sns(&["uniqueness", "--config", "u.json", "--seed", "8", "--out-dir", "c"], d);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(
        std::fs::read(d.join("a/uniqueness.csv")).unwrap(),
        std::fs::read(d.join("c/uniqueness.csv")).unwrap()
    );
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = sns(&["simulate", "--config", "absent.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.json"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sns(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(sns(&["verify", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(sns(&["verify", "--suite", "NOPE", "--samples", "2"], dir.path()).status.code(), Some(1));
    assert_eq!(sns(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let unknown_key = BASE.replace("\"v0\"", "\"x\":0,\"v0\"");
    write(d, "s.json", &format!("{unknown_key}}}"));
    assert_eq!(sns(&["simulate", "--config", "s.json"], d).status.code(), Some(1));
    let ragged_step = BASE.replace("\"dt\":0.015625", "\"dt\":0.1");
    write(d, "t.json", &format!("{ragged_step}}}"));
    assert_eq!(sns(&["simulate", "--config", "t.json"], d).status.code(), Some(1));
}

#[test]
fn abort_exits_two_with_partial_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "s.json", &format!("{},\"abort_energy\":0.5}}", BASE));
    let o = sns(&["simulate", "--config", "s.json", "--out", "run"], d);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = std::fs::read_to_string(d.join("run/diagnostics.csv")).unwrap();
    let lines: Vec<&str> = diag.lines().collect();
    assert_eq!(lines[0], "t,E_u,D_u,z_L4,phi,psi,gronwall_majorant");
    assert!(lines.len() >= 2);
    assert!(d.join("run/run-meta.json").exists());
}

#[test]
fn simulate_writes_dumps_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "s.json", &format!("{},\"record_stride\":8}}", BASE));
    let o = sns(&["simulate", "--config", "s.json", "--out", "run", "--export-wiener"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = std::fs::read_to_string(d.join("run/diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 1 + 17);
    let (v, t) = sns_core::io::read_field(&d.join("run/v_00002.snsf")).unwrap();
    assert_eq!(t, 0.25);
    assert!(v.is_solenoidal());
    sns_core::io::read_wiener(&d.join("run/wiener.snsf")).unwrap();
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("run/run-meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["N"], 16);
    assert_eq!(meta["inputs_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_report_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = sns(&["verify", "--suite", "all", "--samples", "4", "--resolution", "16", "--out", "r/report.csv"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.join("r/report.csv")).unwrap();
    assert!(text.starts_with("inequality_id,samples,max_ratio,calibrated_constant,"));
    assert_eq!(text.lines().count(), 10);
    assert!(d.join("r/run-meta.json").exists());
}
