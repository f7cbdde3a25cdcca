use fracpow::acceptance::{run_criterion, DEFAULT_SEED};
use fracpow::catalog::shipped_operators;
use fracpow::report::{non_finite_paths, to_json};
use fracpow::OperatorSpec;

#[test]
fn shipped_operators_round_trip_through_json() {
    for (name, op) in shipped_operators().unwrap() {
        let text = OperatorSpec::describe(&op).to_json();
        let back = OperatorSpec::from_json(&text).unwrap().build().unwrap();
        assert_eq!(back, op, "{name}");
    }
}

#[test]
fn criteria_are_reproducible() {
    for id in [1, 3, 9, 10] {
        let a = run_criterion(id, DEFAULT_SEED).unwrap();
        let b = run_criterion(id, DEFAULT_SEED).unwrap();
        assert_eq!(to_json(&a), to_json(&b));
        assert!(a.pass, "{}", a.line());
        assert!(non_finite_paths(&a).is_empty());
    }
    assert!(run_criterion(12, DEFAULT_SEED).is_none());
}

#[test]
fn seed_changes_the_cases() {
    let a = run_criterion(1, 1).unwrap();
    let b = run_criterion(1, 2).unwrap();
    assert_ne!(a.measured, b.measured);
    assert!(a.pass && b.pass);
}
