//! Runs every acceptance criterion at its stated tolerance and prints one
//! line per criterion. Exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use kplab::acceptance::{run_criterion, Rig};

fn main() -> ExitCode {
    let rig = Rig::default();
    let mut failed = Vec::new();
    for id in 1..=11 {
        let start = Instant::now();
        let verdict = run_criterion(id, &rig);
        println!("{}  [{:.1}s]", verdict.line(), start.elapsed().as_secs_f64());
        if !verdict.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
