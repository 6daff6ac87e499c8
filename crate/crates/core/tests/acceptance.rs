//! Acceptance gate: runs every bundled acceptance check at its pinned
//! tolerance and prints one pass/fail line per check before asserting.
//!
//! Run with `cargo test -p kfl-core --test acceptance -- --nocapture` to see
//! the measured constants.

use kfl_core::verify::{acceptance_all, Tolerances};

#[test]
fn acceptance() {
    let reports = acceptance_all(&Tolerances::default());
    let mut failed = Vec::new();
    for rep in &reports {
        println!("{rep}");
        if !rep.pass {
            failed.push(rep.id.clone());
        }
    }
    assert!(
        failed.is_empty(),
        "acceptance checks failed: {}",
        failed.join(", ")
    );
}
