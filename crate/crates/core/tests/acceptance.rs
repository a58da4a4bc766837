//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use meandim_core::cli::verify::{consolidate, determinism_outcome, run_criterion, run_suite};
use meandim_core::cli::RunConfig;

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let mut outcomes = Vec::new();
    for id in 1..=9 {
        let outcome = run_criterion(id, &cfg);
        println!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let first = consolidate(&cfg, &outcomes);
    let start = Instant::now();
    let second = consolidate(&cfg, &run_suite(&cfg));
    let det = determinism_outcome(&cfg, &first, &second, start.elapsed().as_secs_f64());
    println!("{}", det.line());
    outcomes.push(det);

    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
