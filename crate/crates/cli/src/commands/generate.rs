//! `mwp generate`: sample a dataset for one problem family, gate every
//! record on oracle agreement, and write JSONL plus a manifest.

use anyhow::{bail, Context, Result};

use mwp_core::dataset::{write_jsonl, DatasetRecord};
use mwp_core::oracle::{solve, SolveOutcome};
use mwp_core::problem::generate_problem;
use mwp_core::realize::TemplateSet;
use mwp_core::sampler::{per_problem_seed, Family, TreeSpec};
use mwp_core::vocab::Vocab;

use crate::config::{write_manifest, GenerateManifest};
use crate::load::{load_templates, load_vocab};

pub fn run(manifest: &GenerateManifest) -> Result<()> {
    let family = Family::parse(&manifest.family)
        .with_context(|| format!("unknown family {}", manifest.family))?;
    let vocab = load_vocab(manifest.vocab.as_deref())?;
    let templates = load_templates(manifest.templates.as_deref())?;
    let records = generate_records(family, manifest, &vocab, &templates)?;
    write_jsonl(&manifest.out, &records)?;
    let manifest_file = write_manifest(&manifest.out, manifest)?;
    println!(
        "wrote {} records to {} (manifest {})",
        records.len(),
        manifest.out.display(),
        manifest_file.display()
    );
    Ok(())
}

pub fn generate_records(
    family: Family,
    manifest: &GenerateManifest,
    vocab: &Vocab,
    templates: &TemplateSet,
) -> Result<Vec<DatasetRecord>> {
    let spec_for = |seed: u64| -> Result<TreeSpec> {
        let spec = match family {
            Family::LinearDepth => {
                let depth = manifest.depth.context("--depth is required for linear-depth")?;
                TreeSpec::linear_depth(depth, seed)
            }
            Family::LinearWidth => {
                let width = manifest.width.context("--width is required for linear-width")?;
                TreeSpec::linear_width(width, seed)
            }
            Family::NonlinearDepth => {
                let depth = manifest
                    .depth
                    .context("--depth is required for nonlinear-depth")?;
                TreeSpec::nonlinear_depth(depth, seed)
            }
            Family::OrderPerturbed => {
                TreeSpec::order_perturbed(manifest.distance.unwrap_or(0), seed)
            }
        };
        spec.validate()?;
        Ok(spec)
    };

    let mut records = Vec::with_capacity(manifest.n);
    for index in 0..manifest.n {
        let seed = per_problem_seed(manifest.seed, index as u64);
        let spec = spec_for(seed)?;
        let id = format!("{}-{index:05}", family.name());
        let problem = generate_problem(&spec, &id, vocab, templates)
            .with_context(|| format!("generating {id}"))?;
        // hard gate: the independent oracle must agree before anything is
        // written
        match solve(&problem.world)? {
            SolveOutcome::Unique(value) if value == problem.answer => {}
            other => bail!(
                "generator bug: oracle found {other:?} but tree evaluation gave {} for {id}",
                problem.answer
            ),
        }
        records.push(DatasetRecord::from_problem(&problem));
    }
    Ok(records)
}
