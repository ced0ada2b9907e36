//! Runs every acceptance check at its pinned tolerance and prints one line
//! per check. Exits nonzero if any check fails.

use std::process::ExitCode;

use mechsim::acceptance::{run_criterion, Tolerances, CRITERIA};

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let mut failed = Vec::new();
    for &(id, name) in &CRITERIA {
        match run_criterion(id, &tol) {
            Ok(r) => {
                println!("{}", r.line());
                if !r.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:02} {name:<22} FAIL  error: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!(
            "acceptance: {} of {} checks passed",
            CRITERIA.len(),
            CRITERIA.len()
        );
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing checks {failed:?}");
        ExitCode::FAILURE
    }
}
