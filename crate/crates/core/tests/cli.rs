use std::process::Command;

use ::hecke::cache::read_cache;

fn hecke(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn table_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = hecke(
        dir.path(),
        &["table", "--r-values", "0,0.5,1,1.5,2,2.5,3,3.5,4"],
    );
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(
        lines[0],
        "r,delta_minus,rho_minus,theta,rho_plus,delta_plus"
    );
    assert_eq!(lines[2], "0.5,-0.2929,-0.2113,-0.1512,-0.1185,-0.0652");
    assert_eq!(lines[5], "2,1.0000,1.0000,1.0000,1.0000,1.0000");
    assert_eq!(lines[6], "2.5,1.8284,2.0981,2.1043,2.1115,2.5266");
}

#[test]
fn table_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = hecke(dir.path(), &["table"]).stdout;
    let b = hecke(dir.path(), &["table"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn tau_cache_from_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = hecke(dir.path(), &["tau", "--max", "10", "--backend", "oracle"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = read_cache(dir.path().join("tau.cache")).unwrap();
    assert_eq!(t.bound(), 10);
    assert_eq!(t.tau(2), Some(-24));
}

#[test]
fn envelope_at_one_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = hecke(dir.path(), &["envelope", "--r", "1", "--grid", "1000"]);
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("hecke-out/envelope.txt")).unwrap();
    assert!(report.contains("minus_r1.min = 0\n"), "{report}");
    assert!(report.contains("minus_r1.max = 0\n"), "{report}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hecke(dir.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(
        hecke(dir.path(), &["satotate", "--bins", "3"])
            .status
            .code(),
        Some(2)
    );
    let out = Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(["table"])
        .env("HECKE_THREADS", "0")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_cache_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        hecke(dir.path(), &["tau", "--max", "200", "--output", "t.cache"])
            .status
            .success()
    );
    let path = dir.path().join("t.cache");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[40] ^= 1;
    std::fs::write(&path, bytes).unwrap();
    let out = hecke(dir.path(), &["signs", "--input", "t.cache"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn artifacts_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hecke(dir.path(), &["tau", "--max", "20000"])
        .status
        .success());
    let out = hecke(
        dir.path(),
        &["satotate", "--input", "tau.cache", "--bins", "20"],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("hecke-out/satotate.csv")).unwrap();
    assert!(csv.starts_with("bin,lo,hi,count,expected\n"));
    assert_eq!(csv.lines().count(), 21);
    let out = hecke(dir.path(), &["euler", "--max-p", "50", "--depth", "4"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("hecke-out/euler_residuals.csv")).unwrap();
    assert!(csv.starts_with("p,j,depth,c1,c2,c3,c4\n"));
    let out = hecke(
        dir.path(),
        &["powersum", "--input", "tau.cache", "--r", "0.5"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(dir.path().join("hecke-out/powersum_r0p5.csv").exists());
}
