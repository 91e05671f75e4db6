//! Acceptance criteria A1–A10, one line per criterion.
//!
//! `cargo test --test acceptance -- A2 A5` runs a subset.

use discenv::acceptance::{run_criterion, CRITERIA};

fn main() {
    let wanted: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| CRITERIA.contains(&a.as_str()))
        .collect();
    let ids: Vec<&str> = CRITERIA
        .iter()
        .copied()
        .filter(|id| wanted.is_empty() || wanted.iter().any(|w| w == id))
        .collect();
    let mut passed = 0;
    for id in &ids {
        match run_criterion(id) {
            Ok(r) => {
                passed += r.passed as usize;
                println!("{}", r.line());
            }
            Err(e) => println!("{id:<4}FAIL {e}"),
        }
    }
    println!("acceptance: {passed}/{} criteria passed", ids.len());
}
