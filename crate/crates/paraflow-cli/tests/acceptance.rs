//! Acceptance suite: one test per verification criterion, sharing a
//! single run of the underlying checks. Each test prints its pass/fail
//! line (visible with `--nocapture`).
//!
//! Run with: `cargo test -p paraflow-cli --test acceptance -- --nocapture`

use paraflow_cli::runner::TolOverrides;
use paraflow_cli::selftest::{run_all, CriterionOutcome};
use std::sync::OnceLock;

fn suite() -> &'static [CriterionOutcome] {
    static SUITE: OnceLock<Vec<CriterionOutcome>> = OnceLock::new();
    SUITE.get_or_init(|| run_all(42, &TolOverrides::default()))
}

fn assert_criterion(id: usize) {
    let outcome = suite().iter().find(|o| o.id == id).expect("criterion missing");
    println!("{}", outcome.line());
    for d in &outcome.details {
        println!("    {d}");
    }
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_1_parabolic_helicoid_linear_flow() {
    assert_criterion(1);
}

#[test]
fn criterion_2_s2xs1_explicit_solution() {
    assert_criterion(2);
}

#[test]
fn criterion_3_s1xr2_implicit_relation() {
    assert_criterion(3);
}

#[test]
fn criterion_4_vertical_cylinder_relation() {
    assert_criterion(4);
}

#[test]
fn criterion_5_diagonal_family_cross_routes() {
    assert_criterion(5);
}

#[test]
fn criterion_6_riccati_trace_identity() {
    assert_criterion(6);
}

#[test]
fn criterion_7_type_i_classification() {
    assert_criterion(7);
}

#[test]
fn criterion_8_bump_experiment() {
    assert_criterion(8);
}

#[test]
fn criterion_9_suite_runtime_budget() {
    assert_criterion(9);
}
