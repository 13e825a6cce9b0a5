//! Full verification suite, one test per criterion. Each test prints its
//! pass/fail line (visible with `--nocapture`) and asserts the outcome.
//! `ropack bench` runs the same checks from the CLI.

use ropack::acceptance::{self, CriterionOutcome};

fn assert_outcome(outcome: CriterionOutcome) {
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_1_oracle_exactness() {
    assert_outcome(acceptance::criterion_1_oracle_exactness(0));
}

#[test]
fn criterion_2_lp_dominance() {
    assert_outcome(acceptance::criterion_2_lp_dominance(0));
}

#[test]
fn criterion_3_matching_oracle() {
    assert_outcome(acceptance::criterion_3_matching_oracle(0));
}

#[test]
fn criterion_4_online_invariants() {
    assert_outcome(acceptance::criterion_4_online_invariants(0));
}

#[test]
fn criterion_5_blocked_rounds() {
    assert_outcome(acceptance::criterion_5_blocked_rounds(0));
}

#[test]
fn criterion_6a_gap_d1() {
    assert_outcome(acceptance::criterion_6a_gap_d1(0));
}

#[test]
fn criterion_6b_vgap_d2() {
    assert_outcome(acceptance::criterion_6b_vgap_d2(0));
}

#[test]
fn criterion_6c_vmkp_d1() {
    assert_outcome(acceptance::criterion_6c_vmkp_d1(0));
}

#[test]
fn criterion_7_lower_bound_family() {
    assert_outcome(acceptance::criterion_7_lower_bound_family(0));
}

#[test]
fn criterion_8_determinism() {
    assert_outcome(acceptance::criterion_8_determinism(0));
}
