use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_discenv"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/examples").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("spawn discenv")
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn green_writes_summary_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let scen = example("green.json");
    let o = run(&["green", "--scenario", scen.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&dir.path().join("summary.json"));
    assert_eq!(s["status"], "ok");
    assert_eq!(s["command"], "green");
    let csv = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(csv.lines().count(), 64 * 64 + 1);
    assert!(dir.path().join("field.json").exists());
}

#[test]
fn malformed_payload_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"version":1,"command":"green","seed":0,"payload":{"poles":[[0.5,0.0]],"bogus":1}}"#).unwrap();
    let o = run(&["green", "--scenario", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = read_json(&dir.path().join("error.json"));
    assert_eq!(e["error"]["kind"], "validation");
    assert!(e["error"]["message"].as_str().unwrap().contains("bogus"));
}

#[test]
fn pole_outside_disc_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"version":1,"command":"green","seed":0,"payload":{"poles":[[1.5,0.0]]}}"#).unwrap();
    let o = run(&["green", "--scenario", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn subcommand_must_match_file() {
    let dir = tempfile::tempdir().unwrap();
    let scen = example("green.json");
    let o = run(&["lemma1", "--scenario", scen.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = read_json(&dir.path().join("error.json"));
    assert!(e["error"]["message"].as_str().unwrap().starts_with("validation: command"));
}

#[test]
fn lemma1_writes_roots_table() {
    let dir = tempfile::tempdir().unwrap();
    let scen = example("lemma1.json");
    let o = run(&["lemma1", "--scenario", scen.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("roots.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn seed_and_threads_do_not_change_output() {
    let scen = example("envelope_log.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run(&["envelope", "--scenario", scen.to_str().unwrap(), "--seed", "7", "--threads", "1"], a.path());
    let ob = run(&["envelope", "--scenario", scen.to_str().unwrap(), "--seed", "7", "--threads", "2"], b.path());
    assert!(oa.status.success() && ob.status.success());
    let sa = fs::read_to_string(a.path().join("summary.json")).unwrap();
    let sb = fs::read_to_string(b.path().join("summary.json")).unwrap();
    assert_eq!(sa, sb);
    assert_eq!(read_json(&a.path().join("summary.json"))["seed"], 7);
}

#[test]
fn reproduce_a1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "A1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    let r = read_json(&dir.path().join("A1.json"));
    assert_eq!(r["passed"], true);
}

#[test]
fn reproduce_unknown_id() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "A42"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
