//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs every check by default (the reproduction runs take a while). Select
//! a subset with numeric arguments or `HEOM_ACCEPTANCE=1,2,3`:
//!
//! ```text
//! cargo test -p heom-core --test acceptance -- 1 2 8
//! ```

use std::process::ExitCode;

use heom_core::validation::{Validator, ALL_CHECKS};

fn selected() -> Vec<u8> {
    let mut ids: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if ids.is_empty() {
        if let Ok(v) = std::env::var("HEOM_ACCEPTANCE") {
            ids = v.split(',').filter_map(|s| s.trim().parse().ok()).collect();
        }
    }
    if ids.is_empty() {
        return ALL_CHECKS.to_vec();
    }
    // Keep the suite order so check 6 still sees the others' trajectories.
    ALL_CHECKS
        .iter()
        .copied()
        .filter(|id| ids.contains(id))
        .collect()
}

fn main() -> ExitCode {
    let ids = selected();
    let mut validator = Validator::new().with_log(|m| eprintln!("{m}"));
    let results = validator.run_all(&ids, |r| println!("{}", r.line()));
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({failed:?})")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
