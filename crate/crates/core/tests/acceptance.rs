//! Acceptance gate: one test per criterion, each printing a single
//! `criterion NN [name] PASS/FAIL - details` line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use coldplasma::acceptance::run_criterion;

fn check(id: usize) {
    let outcome = run_criterion(id);
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_characteristic_criterion_grid() {
    check(1);
}

#[test]
fn criterion_02_exact_trajectory_error() {
    check(2);
}

#[test]
fn criterion_03_boundary_band_sign_stability() {
    check(3);
}

#[test]
fn criterion_04_friction_taxonomy() {
    check(4);
}

#[test]
fn criterion_05_density_friction_threshold() {
    check(5);
}

#[test]
fn criterion_06_singularity_classification() {
    check(6);
}

#[test]
fn criterion_07_cole_hopf_convergence() {
    check(7);
}

#[test]
fn criterion_08_moment_system_consistency() {
    check(8);
}

#[test]
fn criterion_09_ensemble_statistics() {
    check(9);
}

#[test]
fn criterion_10_checkpoint_roundtrip() {
    check(10);
}
