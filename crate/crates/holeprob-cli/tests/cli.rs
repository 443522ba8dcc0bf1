use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CAP: &str = r#"{"surface":"sphere","resolution":16,"hole":{"kind":"cap","radius":0.4},"ensemble":{"n":[1,2],"trials":2000}}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holeprob"))
        .args(args)
        .env("HOLEPROB_CACHE_DIR", dir.join("cache"))
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn equilibrium_reports_a_positive_certified_value() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("cap.json"), CAP).unwrap();
    let out = run(t.path(), &["equilibrium", "-c", "cap.json", "--out", "eq.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&t.path().join("eq.json"));
    let v = r["value"].as_f64().unwrap();
    assert!(v > 0.0 && r["lower_bound"].as_f64().unwrap() <= v);
    assert!(t.path().join("eq.measure.csv").exists());
}

#[test]
fn second_run_is_a_byte_identical_cache_hit() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("cap.json"), CAP).unwrap();
    let args = ["holeprob", "-c", "cap.json", "--out", "hp.json"];
    assert_eq!(run(t.path(), &args).status.code(), Some(0));
    let first = fs::read(t.path().join("hp.json")).unwrap();
    assert_eq!(json(&t.path().join("hp.manifest.json"))["cache_hit"], Value::Bool(false));
    assert_eq!(run(t.path(), &args).status.code(), Some(0));
    assert_eq!(fs::read(t.path().join("hp.json")).unwrap(), first);
    assert_eq!(json(&t.path().join("hp.manifest.json"))["cache_hit"], Value::Bool(true));
}

#[test]
fn manifest_hashes_match_the_files() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("cap.json"), CAP).unwrap();
    assert_eq!(run(t.path(), &["sample", "-c", "cap.json", "-n", "4", "--out", "s.json"]).status.code(), Some(0));
    let m = json(&t.path().join("s.manifest.json"));
    let files = m["files"].as_array().unwrap();
    assert!(files.len() >= 2);
    for f in files {
        let bytes = fs::read(t.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn overrides_change_the_cache_key() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("cap.json"), CAP).unwrap();
    run(t.path(), &["holeprob", "-c", "cap.json", "--out", "a.json", "--seed", "1"]);
    run(t.path(), &["holeprob", "-c", "cap.json", "--out", "a.json", "--seed", "2"]);
    let m = json(&t.path().join("a.manifest.json"));
    assert_eq!(m["cache_hit"], Value::Bool(false));
    assert_eq!(m["config"]["ensemble"]["seed"], Value::from(2));
}

#[test]
fn malformed_config_exits_two_with_a_json_error() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("bad.json"), "{\"surface\": \"sphere\",").unwrap();
    let out = run(t.path(), &["equilibrium", "-c", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"], "config");
}

#[test]
fn unknown_key_exits_two_and_names_it() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("bad.json"), CAP.replace("\"radius\"", "\"radius2\"")).unwrap();
    let out = run(t.path(), &["equilibrium", "-c", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["path"], "hole.radius2");
}

#[test]
fn radii_ladder_is_parsed() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("cap.json"), CAP).unwrap();
    let out = run(t.path(), &["rsweep", "-c", "cap.json", "--radii", "0.2:0.4:2", "--out", "sw.json"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&t.path().join("sw.json"));
    assert_eq!(r["sweep"]["rows"].as_array().map(|a| a.len()), Some(2), "{r}");
    let bad = run(t.path(), &["rsweep", "-c", "cap.json", "--radii", "0.4:0.2:2"]);
    assert_eq!(bad.status.code(), Some(2));
}
