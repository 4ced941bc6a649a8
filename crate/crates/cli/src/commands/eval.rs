//! `mwp eval`: run one prompt regime over a dataset against a model
//! endpoint or an offline stub, then write metrics JSON and per-problem
//! records JSONL.

use anyhow::{bail, Context, Result};

use mwp_core::dataset::read_jsonl;
use mwp_core::sampler::Family;
use mwp_harness::{
    run_eval, write_eval_records, ConstantClient, EvalOptions, GoldEchoClient, HttpClient,
    ModelClient, PromptSpec, Regime, ScriptedClient,
};

use crate::config::{write_manifest, EvalManifest};
use crate::load::{load_templates, load_vocab};

pub fn run(manifest: &EvalManifest) -> Result<()> {
    let records = read_jsonl(&manifest.dataset)?;
    if records.is_empty() {
        bail!("dataset {} is empty", manifest.dataset.display());
    }
    let regime = Regime::parse(&manifest.regime)
        .with_context(|| format!("unknown regime {}", manifest.regime))?;
    let vocab = load_vocab(manifest.vocab.as_deref())?;
    let templates = load_templates(manifest.templates.as_deref())?;
    let client = build_client(&manifest.model, manifest.base_url.as_deref(), &records)?;

    let prompt_spec = PromptSpec::new(regime, manifest.shots, manifest.seed);
    let options = EvalOptions {
        max_tokens: manifest.max_tokens,
        temperature: manifest.temperature,
        concurrency: manifest.concurrency,
        retries: manifest.retries,
        resamples: manifest.resamples,
        level: 0.95,
        seed: manifest.seed,
    };
    let (metrics, eval_records) =
        run_eval(&records, &prompt_spec, client.as_ref(), &options, &vocab, &templates)?;

    std::fs::write(
        &manifest.out_metrics,
        serde_json::to_string_pretty(&metrics)? + "\n",
    )
    .with_context(|| format!("writing {}", manifest.out_metrics.display()))?;
    write_eval_records(&manifest.out_records, &eval_records)?;
    let manifest_file = write_manifest(&manifest.out_metrics, manifest)?;
    let transport_failures = eval_records.iter().filter(|r| r.transport_failed).count();
    println!(
        "model {} regime {} shots {}: accuracy {:.4} CI [{:.4}, {:.4}] n={} ({} transport failures)",
        client.describe(),
        regime,
        manifest.shots,
        metrics.accuracy,
        metrics.ci_low,
        metrics.ci_high,
        metrics.n,
        transport_failures,
    );
    println!(
        "wrote {} and {} (manifest {})",
        manifest.out_metrics.display(),
        manifest.out_records.display(),
        manifest_file.display()
    );
    Ok(())
}

/// Resolve shot-count defaults: 0 for zero-shot, otherwise 12 (5 for
/// nonlinear problems), based on the first record's family.
pub fn default_shots_for(regime: Regime, family_name: &str) -> usize {
    if regime == Regime::ZeroShot {
        return 0;
    }
    Family::parse(family_name).map_or(12, mwp_harness::default_shots)
}

/// `stub:gold`, `stub:const:<text>`, `stub:script:<file>`, or
/// `http:<model>` (requires `--base-url`; token from `MWP_API_TOKEN`).
fn build_client(
    model: &str,
    base_url: Option<&str>,
    records: &[mwp_core::dataset::DatasetRecord],
) -> Result<Box<dyn ModelClient>> {
    if let Some(rest) = model.strip_prefix("stub:") {
        if rest == "gold" {
            return Ok(Box::new(GoldEchoClient::from_records(records)));
        }
        if let Some(text) = rest.strip_prefix("const:") {
            return Ok(Box::new(ConstantClient(text.to_string())));
        }
        if let Some(path) = rest.strip_prefix("script:") {
            let script = std::fs::read_to_string(path)
                .with_context(|| format!("reading stub script {path}"))?;
            return Ok(Box::new(ScriptedClient::parse(&script)?));
        }
        bail!("unknown stub {model}; use stub:gold, stub:const:<text>, or stub:script:<file>");
    }
    if let Some(name) = model.strip_prefix("http:") {
        let base = base_url.context("--base-url is required for http models")?;
        return Ok(Box::new(HttpClient::new(base, name)?));
    }
    bail!("unknown model {model}; use stub:... or http:<model>");
}
