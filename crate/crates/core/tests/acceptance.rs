//! Acceptance suite: runs every criterion (concurrently), prints one
//! `[PASS]`/`[FAIL]` line per criterion in order, and exits nonzero if any
//! fails. Numeric arguments restrict the run to those criterion ids.

use std::process::ExitCode;
use std::thread;

use haar_fisher::harness::acceptance::{self, CriterionReport};

fn main() -> ExitCode {
    // Ignore libtest-style flags such as `--nocapture` forwarded by cargo.
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let ids: Vec<u32> = if only.is_empty() {
        (1..=9).collect()
    } else {
        only
    };

    let reports: Vec<CriterionReport> = thread::scope(|s| {
        let handles: Vec<_> = ids
            .iter()
            .map(|&id| s.spawn(move || acceptance::run_all_filtered(&[id])))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("criterion thread panicked"))
            .collect()
    });

    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed", reports.len());
    if passed == reports.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
