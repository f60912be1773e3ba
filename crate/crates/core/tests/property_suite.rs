use std::time::Instant;

use hypgraph_core::suite::run_property_suite;

#[test]
fn full_suite_passes_within_a_minute() {
    let start = Instant::now();
    let report = run_property_suite(42, 10_000).unwrap();
    let elapsed = start.elapsed();
    for c in &report.checks {
        eprintln!("{:<36} max_error {:.3e} tol {:.0e} failures {}", c.name, c.max_error, c.tolerance, c.failures);
    }
    assert!(report.passed);
    assert_eq!(report.checks.len(), 14);
    assert!(report.checks.iter().all(|c| c.samples == 10_000));
    assert!(elapsed.as_secs_f64() < 60.0, "{elapsed:?}");
}
