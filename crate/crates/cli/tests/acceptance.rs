//! Runs every acceptance criterion at the reference step and prints one line
//! per criterion. Exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use conesolve_cli::verify::{criteria, run_criterion, Status, VerifyOptions};

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    println!("\nacceptance criteria (h = 1/64)");
    for c in criteria() {
        let start = Instant::now();
        let r = run_criterion(c, &opts);
        println!("{r}  ({:.2}s)", start.elapsed().as_secs_f64());
        if r.status != Status::Pass {
            failed.push(r.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria().len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria {failed:?} did not pass");
        ExitCode::FAILURE
    }
}
