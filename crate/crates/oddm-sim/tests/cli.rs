//! Process-level contract of the `oddm-sim` binary: argument and
//! configuration errors exit 2, successful runs exit 0 and write the
//! manifest, and identical invocations rewrite identical bytes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_BIN_EXE_oddm-sim"));
    assert!(p.exists(), "binary not built at {}", p.display());
    p = p.canonicalize().unwrap();
    p
}

fn tmp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("oddm-sim-test-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn unknown_experiment_exits_2() {
    let out = Command::new(bin()).args(["frobnicate", "--out", "/tmp/x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_2_with_all_problems() {
    let dir = tmp_dir("badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "m = 0\nbeta = 9\nnonsense = 1\n").unwrap();
    let out = Command::new(bin())
        .args(["waveform", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("m must be"), "{stderr}");
    assert!(stderr.contains("beta"), "{stderr}");
    assert!(stderr.contains("nonsense"), "{stderr}");
    let _ = std::fs::remove_dir_all(&dir);
}

fn run_waveform(out_dir: &Path) {
    let out = Command::new(bin())
        .args([
            "waveform",
            "--set",
            "preset=desk",
            "--set",
            "seed=7",
            "--set",
            "systems=digital",
            "--out",
        ])
        .arg(out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn successful_run_writes_manifest_and_is_deterministic() {
    let dir = tmp_dir("det");
    let a = dir.join("a");
    let b = dir.join("b");
    run_waveform(&a);
    run_waveform(&b);
    let manifest_a = std::fs::read_to_string(a.join("manifest.json")).unwrap();
    let manifest_b = std::fs::read_to_string(b.join("manifest.json")).unwrap();
    assert_eq!(manifest_a, manifest_b);
    let parsed: serde_json::Value = serde_json::from_str(&manifest_a).unwrap();
    let files = parsed["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let name = f["name"].as_str().unwrap();
        let bytes_a = std::fs::read(a.join(name)).unwrap();
        let bytes_b = std::fs::read(b.join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical runs");
        assert_eq!(bytes_a.len() as u64, f["bytes"].as_u64().unwrap());
    }
    // wall time lives outside the manifest
    assert!(a.join("run.log").exists());
    assert!(!manifest_a.contains("wall_time"));
    let _ = std::fs::remove_dir_all(&dir);
}
