//! Acceptance suite: one line per criterion at the acceptance grids and
//! tolerances. Arguments that parse as integers select criteria, e.g.
//! `cargo test --test acceptance -- 5 6`.

use std::process::ExitCode;
use std::time::Instant;

use kloosterman_al::verify::{run_criterion, GridOptions, CRITERIA};

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: Vec<u8> = CRITERIA.iter().copied().filter(|k| selected.is_empty() || selected.contains(k)).collect();
    let opts = GridOptions::default();
    let mut failed = Vec::new();
    for k in criteria {
        let start = Instant::now();
        let report = run_criterion(k, &opts).expect("known criterion");
        println!("{report} [{:.1}s]", start.elapsed().as_secs_f64());
        for note in &report.notes {
            println!("    note: {note}");
        }
        for f in report.failures.iter().take(3) {
            println!("    failure: {}: {}", f.invariant, f.detail);
        }
        if !report.passed() {
            failed.push(k);
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
