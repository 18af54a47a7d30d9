use std::process::Command;

use galmckay::mckaybij::{Status, VerificationReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_galmckay"))
}

#[test]
fn verify_g2_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g2.json");
    let st = bin()
        .args(["verify", "--type", "G2", "--q", "11", "--ell", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let rep = VerificationReport::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep.meta.group_type, "G2");
    assert_eq!(rep.status_of("equivariance"), Some(Status::Pass));
}

#[test]
fn type_c_at_two_routes_to_pairing() {
    let out = bin().args(["verify", "--type", "C3", "--q", "3", "--ell", "2"]).output().unwrap();
    assert!(out.status.success());
    let rep = VerificationReport::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(rep.checks.iter().any(|c| c.name == "pair_respecting_matching"));
}

#[test]
fn rationality_b3() {
    let out = bin().args(["rationality", "--type", "B3", "--q", "3"]).output().unwrap();
    assert!(out.status.success());
    let rep = VerificationReport::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rep.status_of("rational_values"), Some(Status::Pass));
}

#[test]
fn excluded_case_is_flagged_not_failed() {
    let out = bin().args(["verify", "--type", "G2", "--q", "7", "--ell", "3"]).output().unwrap();
    assert!(out.status.success());
    let rep = VerificationReport::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(rep.has_flags());
    let strict = bin().args(["verify", "--type", "G2", "--q", "7", "--ell", "3", "--strict"]).output().unwrap();
    assert!(!strict.status.success());
}

#[test]
fn table_cache_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    for expect in ["written", "loaded and verified"] {
        let out = bin().args(["table", "--type", "B3", "--q", "1", "--cache"]).arg(dir.path()).output().unwrap();
        assert!(out.status.success());
        assert!(String::from_utf8(out.stdout).unwrap().contains(expect));
    }
}

#[test]
fn bad_input_is_an_error() {
    let out = bin().args(["verify", "--type", "Q7", "--q", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
