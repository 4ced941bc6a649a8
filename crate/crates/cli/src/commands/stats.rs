//! `mwp stats`: per-file counts, shape histograms, and answer ranges.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;

use mwp_core::dataset::read_jsonl_lenient;

pub fn run(dataset: &Path) -> Result<()> {
    let (records, errors) = read_jsonl_lenient(dataset)?;
    for (line, message) in &errors {
        eprintln!("malformed record at line {line}: {message}");
    }
    println!("file: {}", dataset.display());
    println!("n = {}", records.len());
    if records.is_empty() {
        eprintln!("warning: dataset is empty");
        return Ok(());
    }

    let mut families: BTreeMap<String, usize> = BTreeMap::new();
    let mut depths: BTreeMap<usize, usize> = BTreeMap::new();
    let mut widths: BTreeMap<usize, usize> = BTreeMap::new();
    let mut distances: BTreeMap<usize, usize> = BTreeMap::new();
    let mut answer_min = i64::MAX;
    let mut answer_max = i64::MIN;
    let mut answer_sum: i128 = 0;
    for (_, record) in &records {
        *families.entry(record.family.clone()).or_insert(0) += 1;
        *depths.entry(record.depth).or_insert(0) += 1;
        *widths.entry(record.width).or_insert(0) += 1;
        *distances.entry(record.distance).or_insert(0) += 1;
        answer_min = answer_min.min(record.answer);
        answer_max = answer_max.max(record.answer);
        answer_sum += record.answer as i128;
    }
    let histogram = |name: &str, map: &BTreeMap<usize, usize>| {
        let entries: Vec<String> = map.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        println!("{name} histogram: {}", entries.join(" "));
    };
    let families_line: Vec<String> = families.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    println!("families: {}", families_line.join(" "));
    histogram("depth", &depths);
    histogram("width", &widths);
    histogram("distance", &distances);
    println!(
        "answers: min={answer_min} max={answer_max} mean={:.2}",
        answer_sum as f64 / records.len() as f64
    );
    if !errors.is_empty() {
        eprintln!("{} malformed records skipped", errors.len());
    }
    Ok(())
}
