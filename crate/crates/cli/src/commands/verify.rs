//! `mwp verify`: re-run the independent oracle over a dataset and check
//! that every stored answer (and the final number of every gold chain of
//! thought) agrees.

use std::path::Path;

use anyhow::Result;

use mwp_core::dataset::read_jsonl_lenient;
use mwp_core::oracle::{solve, SolveOutcome};
use mwp_harness::extract_answer;

/// Returns the number of failing records.
pub fn run(dataset: &Path) -> Result<usize> {
    let (records, errors) = read_jsonl_lenient(dataset)?;
    let mut failures = 0usize;
    for (line, message) in &errors {
        eprintln!("line {line}: malformed record: {message}");
        failures += 1;
    }
    for (line, record) in &records {
        let world = match record.world_model() {
            Ok(world) => world,
            Err(e) => {
                eprintln!("line {line} ({}): world model does not parse: {e}", record.id);
                failures += 1;
                continue;
            }
        };
        match solve(&world) {
            Ok(SolveOutcome::Unique(value)) if value == record.answer => {}
            Ok(other) => {
                eprintln!(
                    "line {line} ({}): oracle found {other:?}, dataset says {}",
                    record.id, record.answer
                );
                failures += 1;
                continue;
            }
            Err(e) => {
                eprintln!("line {line} ({}): oracle error: {e}", record.id);
                failures += 1;
                continue;
            }
        }
        if extract_answer(&record.cot_text) != Some(record.answer) {
            eprintln!(
                "line {line} ({}): chain of thought does not end with the answer {}",
                record.id, record.answer
            );
            failures += 1;
        }
    }
    println!(
        "verified {} records from {}: {} failures",
        records.len(),
        dataset.display(),
        failures
    );
    Ok(failures)
}
