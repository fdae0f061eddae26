//! Pin the exact bytes of user-visible artifacts: the capability tables, a
//! benchmark report for a fixed configuration, and a saved filter container.
//! Any drift in formatting, hashing, layouts, or serialization shows up here
//! as a byte-level diff against the files committed under `tests/golden/`.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bfsk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bfsk"))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn golden_bytes(name: &str) -> Vec<u8> {
    let path = golden_dir().join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn stdout_of(mut cmd: Command) -> Vec<u8> {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn assert_same_bytes(actual: &[u8], golden: &str) {
    let expected = golden_bytes(golden);
    if actual != expected.as_slice() {
        // show a readable diff for text artifacts; fall back to lengths
        let lhs = String::from_utf8_lossy(actual);
        let rhs = String::from_utf8_lossy(&expected);
        let first_diff = lhs
            .lines()
            .zip(rhs.lines())
            .position(|(a, b)| a != b)
            .map(|i| format!("first differing line: {}", i + 1))
            .unwrap_or_else(|| "one output is a prefix of the other".into());
        panic!(
            "{golden} drifted ({} vs {} bytes); {first_diff}",
            actual.len(),
            expected.len()
        );
    }
}

#[test]
fn capability_table_csv_is_byte_stable() {
    let mut cmd = bfsk();
    cmd.arg("capabilities");
    assert_same_bytes(&stdout_of(cmd), "capabilities.csv");
}

#[test]
fn capability_table_json_is_byte_stable() {
    let mut cmd = bfsk();
    cmd.args(["capabilities", "--format", "json"]);
    assert_same_bytes(&stdout_of(cmd), "capabilities.json");
}

#[test]
fn benchmark_report_is_byte_stable_for_a_fixed_config() {
    let config = golden_dir().join("bench_standard.config.json");
    let mut cmd = bfsk();
    cmd.arg("bench-fpp").arg("--config").arg(&config);
    assert_same_bytes(&stdout_of(cmd), "bench_standard.csv");
}

#[test]
fn saved_container_is_byte_stable_for_a_fixed_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fresh.bfsk");
    let config = golden_dir().join("container.config.json");
    let mut cmd = bfsk();
    cmd.arg("save").arg("--config").arg(&config).arg("--out").arg(&out);
    stdout_of(cmd);
    assert_same_bytes(&std::fs::read(&out).unwrap(), "counting.bfsk");
}

#[test]
fn committed_container_still_loads_with_its_members_present() {
    let container = golden_dir().join("counting.bfsk");
    let mut cmd = bfsk();
    cmd.args(["load", "--probe", "item-0", "--probe", "item-119", "--input"])
        .arg(&container);
    let text = String::from_utf8(stdout_of(cmd)).unwrap();
    assert!(
        text.contains("variant=counting seed=5 tracked_items=120"),
        "{text}"
    );
    assert!(text.contains("item-0\tpresent"), "{text}");
    assert!(text.contains("item-119\tpresent"), "{text}");
}
