//! Acceptance criteria at their stated tolerances. Each test prints one
//! PASS/FAIL line (visible with `--nocapture`) and fails on FAIL.

use qforge::acceptance::{run, AcceptanceOptions};

fn check(id: usize) {
    let report = run(id, &AcceptanceOptions::default()).expect("known criterion");
    println!("{}", report.line());
    assert!(report.passed, "criterion {id} failed");
}

#[test]
fn criterion_01_table_one() {
    check(1);
}

#[test]
fn criterion_02_variational_envelope() {
    check(2);
}

#[test]
fn criterion_03_anharmonicity_ceiling() {
    check(3);
}

#[test]
fn criterion_04_width_ratio() {
    check(4);
}

#[test]
fn criterion_05_variational_bound() {
    check(5);
}

#[test]
fn criterion_06_infidelity_optimum() {
    check(6);
}

#[test]
fn criterion_07_t1_scaling() {
    check(7);
}

#[test]
fn criterion_08_improved_noise_t1() {
    check(8);
}

#[test]
fn criterion_09_flux_limited_t1() {
    check(9);
}

#[test]
fn criterion_10_spot_values() {
    check(10);
}

#[test]
fn criterion_11_oracle_identities() {
    check(11);
}

#[test]
fn criterion_12_determinism() {
    check(12);
}
