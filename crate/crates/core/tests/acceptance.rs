//! The ten acceptance criteria, one line each.

use cycle_walk::verify::{run_criterion, VerifyConfig, CRITERIA};

#[test]
fn acceptance() {
    let config = VerifyConfig::default();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let outcome = run_criterion(c, &config)
            .unwrap_or_else(|e| panic!("criterion {} errored: {e}", c.key));
        println!("{}", outcome.summary_line());
        for check in outcome.checks.iter().filter(|k| !k.passed) {
            println!(
                "       {}: measured {:e}, expected {:e} ± {:e}",
                check.name, check.measured, check.expected, check.tolerance
            );
        }
        if !outcome.passed {
            failed.push(c.key);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
