//! `mwp permute`: re-order an existing dataset's bodies by moving one
//! sentence to the front. Only valid for commutative problems (no
//! transfer forms); answers and chains of thought are unchanged.

use anyhow::{bail, Context, Result};

use mwp_core::dataset::{read_jsonl, write_jsonl, DatasetRecord, WorldModelText};
use mwp_core::logic::Predicate;
use mwp_core::oracle::{solve, SolveOutcome};

use crate::config::{write_manifest, PermuteManifest};

pub fn run(manifest: &PermuteManifest) -> Result<()> {
    let records = read_jsonl(&manifest.dataset)?;
    let mut out = Vec::with_capacity(records.len());
    for record in &records {
        out.push(permute_record(record, manifest.distance)?);
    }
    write_jsonl(&manifest.out, &out)?;
    let manifest_file = write_manifest(&manifest.out, manifest)?;
    println!(
        "wrote {} permuted records to {} (manifest {})",
        out.len(),
        manifest.out.display(),
        manifest_file.display()
    );
    Ok(())
}

pub fn permute_record(record: &DatasetRecord, distance: usize) -> Result<DatasetRecord> {
    if record.distance != 0 {
        bail!(
            "{}: dataset is already ordered at distance {}; permute canonical data",
            record.id,
            record.distance
        );
    }
    let world = record
        .world_model()
        .with_context(|| format!("{}: bad world model", record.id))?;
    if world
        .body
        .iter()
        .any(|form| form.predicate() == Predicate::Transfer)
    {
        bail!(
            "{}: transfer statements are order-sensitive; only the canonical ordering is valid",
            record.id
        );
    }
    let sentences = record.body_sentences();
    let n = sentences.len();
    if distance >= n {
        bail!(
            "{}: distance {} out of range for {} sentences",
            record.id,
            distance,
            n
        );
    }
    let order: Vec<usize> = if distance == 0 {
        (0..n).collect()
    } else {
        let mut order = vec![distance];
        order.extend((0..n).filter(|&i| i != distance));
        order
    };
    let body: Vec<_> = order.iter().map(|&i| world.body[i].clone()).collect();
    let body_sentences: Vec<String> = order.iter().map(|&i| sentences[i].clone()).collect();

    let mut permuted = record.clone();
    permuted.distance = distance;
    permuted.body_text = body_sentences.join(" ");
    permuted.world_model = WorldModelText {
        body: body.iter().map(|f| f.encode()).collect(),
        question: record.world_model.question.clone(),
    };
    // reordering a commutative body never changes the answer; check anyway
    let reordered = permuted.world_model()?;
    match solve(&reordered)? {
        SolveOutcome::Unique(value) if value == record.answer => Ok(permuted),
        other => bail!(
            "{}: permuted body solves to {other:?}, expected {}",
            record.id,
            record.answer
        ),
    }
}
