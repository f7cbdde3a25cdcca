use std::time::Instant;

use fracpow::acceptance::{run_suite_with, DEFAULT_SEED};
use fracpow::report::non_finite_paths;

#[test]
fn acceptance_suite() {
    let start = Instant::now();
    let report = run_suite_with(DEFAULT_SEED, |c| println!("{}", c.line()));
    println!("suite finished in {:.1} s", start.elapsed().as_secs_f64());
    assert_eq!(report.criteria.len(), 11);
    assert!(non_finite_paths(&report).is_empty());
    let failed: Vec<u32> = report.criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
