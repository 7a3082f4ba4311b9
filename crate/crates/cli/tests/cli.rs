use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn multigap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multigap")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn type_counts() {
    for (n, rows) in [("1", 1), ("2", 8), ("3", 61)] {
        let out = multigap(&["--no-cache", "types", "enum", "--n", n]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert_eq!(text.lines().count(), rows + 2, "{text}");
        assert!(text.ends_with(&format!("count {rows}\n")));
    }
    let out = multigap(&["types", "enum", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n must lie in"));
}

#[test]
fn strong_classes_and_cache() {
    let dir = scratch("strong");
    let cache = dir.to_str().unwrap();
    let last = |args: &[&str]| stdout(&multigap(args)).lines().last().unwrap().to_string();
    assert_eq!(last(&["--cache-dir", cache, "gaps", "enum-strong", "--n", "2"]), "classes 6");
    let cold = stdout(&multigap(&["--no-cache", "gaps", "enum-strong", "--n", "3"]));
    let first = stdout(&multigap(&["--cache-dir", cache, "gaps", "enum-strong", "--n", "3"]));
    let files = std::fs::read_dir(&dir).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("matrix-")).count();
    assert_eq!(files, 2);
    let hit = stdout(&multigap(&["--cache-dir", cache, "gaps", "enum-strong", "--n", "3"]));
    assert_eq!(cold, first);
    assert_eq!(cold, hit);
    assert_eq!(cold.lines().last(), Some("classes 31"));
    let quotient = last(&["--cache-dir", cache, "gaps", "enum-strong", "--n", "3", "--upto-perm"]);
    assert!(quotient.starts_with("classes 9"), "{quotient}");
}

#[test]
fn worked_order_example() {
    let dir = scratch("order");
    let left = write(&dir, "4s.json", r#"{"layer":"first_move","n":2,"m":2,"sides":[["0>0","0>1"],["1>1"]]}"#);
    let right = write(&dir, "st.json", r#"{"layer":"first_move","n":2,"m":2,"sides":[["0>0","1>0"],["1>1"]]}"#);
    let out = multigap(&["--no-cache", "gaps", "order", "--left", &left, "--right", &right]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "LE_witnessed");
}

#[test]
fn critical_gap_breaks() {
    let dir = scratch("break");
    let gap = write(&dir, "c3.json", r#"{"layer":"record","n":3,"m":3,"sides":[["[l0]"],["[l1]"],["[l2]"]]}"#);
    let serial = multigap(&["--no-parallel", "breaking", "check", "--gap", &gap, "--set", "0,1"]);
    let pooled = multigap(&["breaking", "check", "--gap", &gap, "--set", "0,1"]);
    assert!(serial.status.success());
    assert_eq!(serial.stdout, pooled.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&serial)).unwrap();
    assert_eq!(v["verdict"], "BROKEN_witnessed");
    let csv = stdout(&multigap(&["breaking", "jigsaw", "--gap", &gap, "--csv"]));
    assert_eq!(csv.lines().filter(|l| l.contains("BROKEN_witnessed")).count(), 7, "{csv}");
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = scratch("bad");
    let bad = write(&dir, "bad.json", r#"{"layer":"record","n":2,"m":2,"sides":[["[l0]"],["[l0]"]]}"#);
    let garbage = write(&dir, "garbage.json", "not json");
    for args in [
        vec!["breaking", "check", "--gap", bad.as_str(), "--set", "0"],
        vec!["breaking", "check", "--gap", garbage.as_str(), "--set", "0"],
        vec!["gaps", "order", "--left", garbage.as_str(), "--right", bad.as_str()],
        vec!["breaking", "check", "--gap", "/nonexistent/gap.json", "--set", "0"],
    ] {
        assert_eq!(multigap(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn audit_has_no_failures() {
    let dir = scratch("audit");
    let report = dir.join("report.json");
    let out = multigap(&["--cache-dir", dir.to_str().unwrap(), "audit", "paper-tables", "--out", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| e["status"] != "FAIL"));
    let known: Vec<&str> =
        entries.iter().filter(|e| e["status"] == "DISCREPANCY_KNOWN").map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(known, ["D1", "D2"]);
    for id in ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9"] {
        assert_eq!(entries.iter().filter(|e| e["id"] == id).count(), 1, "{id}");
    }
}
