//! Acceptance suite: one line per criterion, then a single verdict.

use spinpair::experiments::validate_report;
use spinpair::SpinSystem;

#[test]
fn acceptance() {
    let report = validate_report(&SpinSystem::reference_pair());
    assert_eq!(report.checks.len(), 14);
    print!("\n{}", report.to_text());
    let failed: Vec<u32> = report.checks.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
