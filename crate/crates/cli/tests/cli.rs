//! End-to-end checks of the command-line surface.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_starweyl"))
}

#[test]
fn classify_fixtures() {
    let out = bin()
        .args(["classify", "--delta", "0.5", "--c", "0", "--delta-prime", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("delta,c,delta_prime,a,b,class"));
    assert!(text.contains("KZero"), "{text}");

    let out = bin()
        .args(["classify", "--delta", "0.5", "--c", "2", "--delta-prime", "0.5"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("KPlus"));

    let out = bin()
        .args(["classify", "--delta", "1", "--c", "0", "--delta-prime", "1"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("NoSingularities"));

    let out = bin()
        .args(["classify", "--delta", "0", "--c", "0", "--delta-prime", "0"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("NonGeneric"));
}

#[test]
fn vacuum_amplitude_at_weyl_ordering() {
    let out = bin()
        .args(["vacuum", "--delta", "0", "--c", "0", "--delta-prime", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let amp = v["amplitude"].as_array().unwrap();
    assert!((amp[0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(amp[1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn matrix_element_e00_equals_vacuum() {
    let vac = bin()
        .args(["vacuum", "--delta", "0.5", "--c", "2", "--delta-prime", "0.5"])
        .output()
        .unwrap();
    let e00 = bin()
        .args([
            "matrix-elements",
            "--p",
            "0",
            "--q",
            "0",
            "--delta",
            "0.5",
            "--c",
            "2",
            "--delta-prime",
            "0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(vac.stdout, e00.stdout);
}

#[test]
fn residues_regular_point_reports_empty() {
    let out = bin()
        .args([
            "residues",
            "--sigma",
            "0.2,1.0",
            "--delta",
            "0.5",
            "--c",
            "0",
            "--delta-prime",
            "0.5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("regular"), "{text}");
}

#[test]
fn comoving_trace_has_small_residuals() {
    let out = bin()
        .args(["comoving", "--t0", "0.2", "--t1", "1.0", "--steps", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6); // header + 5 rows
    for line in text.lines().skip(1) {
        let resid: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(resid < 1e-10);
    }
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = bin().args(["verify", "no-such-suite"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("available"), "{err}");
}

#[test]
fn verify_classification_suite_passes() {
    let out = bin().args(["verify", "classification"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("classification: PASS"), "{text}");
}

#[test]
fn deterministic_output() {
    let args = ["classify", "--delta", "0.3:0.7:3", "--c", "-1:1:5", "--delta-prime", "0.5"];
    let a = bin().args(args).output().unwrap().stdout;
    let b = bin().args(args).output().unwrap().stdout;
    assert_eq!(a, b);
}
