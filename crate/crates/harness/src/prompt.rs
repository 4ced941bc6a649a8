//! Prompt assembly for the four regimes: zero-shot, primitive, range,
//! and in-distribution. In-context examples are generated fresh for every
//! test problem, written out as `Q: {problem}\nA: {CoT}\n` blocks and
//! followed by `Q: {test problem}\nA:`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use mwp_core::dataset::DatasetRecord;
use mwp_core::inference::RuleId;
use mwp_core::problem::{generate_problem, generate_primitive_problem, GenError, Problem};
use mwp_core::realize::TemplateSet;
use mwp_core::sampler::{Family, TreeSpec};
use mwp_core::vocab::Vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ZeroShot,
    Primitive,
    Range,
    InDistribution,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::ZeroShot,
        Regime::Primitive,
        Regime::Range,
        Regime::InDistribution,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::ZeroShot => "zero-shot",
            Regime::Primitive => "primitive",
            Regime::Range => "range",
            Regime::InDistribution => "in-distribution",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        Regime::ALL.iter().copied().find(|r| r.name() == s)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Default shot count: 12, except 5 for nonlinear problems whose sentence
/// count grows exponentially with depth.
pub fn default_shots(family: Family) -> usize {
    match family {
        Family::NonlinearDepth => 5,
        _ => 12,
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("unknown family: {0}")]
    UnknownFamily(String),
    #[error("zero-shot prompts take no examples")]
    ShotsForZeroShot,
    #[error("the primitive regime is ill-defined for order-perturbed problems")]
    PrimitiveIllDefined,
    #[error("no complexity simpler than {0} exists for the range regime")]
    NoSimplerComplexity(usize),
    #[error("range regime needs at least {needed} shots to cover every complexity, got {got}")]
    TooFewShots { needed: usize, got: usize },
    #[error(transparent)]
    Gen(#[from] GenError),
}

/// Which prompt to build: regime, shot count, optional complexity bounds
/// for the range regime (family defaults otherwise), and the seed that
/// makes example generation reproducible.
#[derive(Debug, Clone)]
pub struct PromptSpec {
    pub regime: Regime,
    pub shots: usize,
    pub range: Option<(usize, usize)>,
    pub seed: u64,
}

impl PromptSpec {
    pub fn new(regime: Regime, shots: usize, seed: u64) -> Self {
        PromptSpec {
            regime,
            shots,
            range: None,
            seed,
        }
    }
}

/// Metadata of one in-context example, for audits that must not re-parse
/// prompt text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotMeta {
    pub complexity: usize,
    pub rule: Option<RuleId>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct AssembledPrompt {
    pub text: String,
    pub shots: Vec<ShotMeta>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Seed for the example set of one test problem.
pub fn shot_seed(prompt_seed: u64, record: &DatasetRecord) -> u64 {
    splitmix(prompt_seed ^ splitmix(record.seed))
}

/// The complexity knob of a dataset record under its family.
pub fn record_complexity(family: Family, record: &DatasetRecord) -> usize {
    match family {
        Family::LinearDepth | Family::NonlinearDepth => record.depth,
        Family::LinearWidth => record.width,
        Family::OrderPerturbed => record.distance,
    }
}

/// Complexities the range regime must cover, all simpler than the test
/// problem. For order perturbations this is every distance 1..=5 except
/// the one under test.
fn range_complexities(
    family: Family,
    test: usize,
    bounds: Option<(usize, usize)>,
) -> Result<Vec<usize>, PromptError> {
    let list: Vec<usize> = match family {
        Family::OrderPerturbed => {
            let (lo, hi) = bounds.unwrap_or((1, 5));
            (lo..=hi).filter(|&d| d != test).collect()
        }
        Family::LinearDepth => {
            let (lo, hi) = bounds.unwrap_or((1, 5));
            (lo..=hi.min(test.saturating_sub(1))).collect()
        }
        Family::LinearWidth => {
            let (lo, hi) = bounds.unwrap_or((2, 6));
            (lo..=hi.min(test.saturating_sub(1))).collect()
        }
        Family::NonlinearDepth => {
            let (lo, hi) = bounds.unwrap_or((1, 2));
            (lo..=hi.min(test.saturating_sub(1))).collect()
        }
    };
    if list.is_empty() {
        return Err(PromptError::NoSimplerComplexity(test));
    }
    Ok(list)
}

fn spec_for(family: Family, complexity: usize, seed: u64) -> TreeSpec {
    match family {
        Family::LinearDepth => TreeSpec::linear_depth(complexity, seed),
        Family::LinearWidth => TreeSpec::linear_width(complexity, seed),
        Family::NonlinearDepth => TreeSpec::nonlinear_depth(complexity, seed),
        Family::OrderPerturbed => TreeSpec::order_perturbed(complexity, seed),
    }
}

/// Generate the in-context example problems for one test record.
pub fn generate_shots(
    spec: &PromptSpec,
    record: &DatasetRecord,
    vocab: &Vocab,
    templates: &TemplateSet,
) -> Result<(Vec<Problem>, Vec<ShotMeta>), PromptError> {
    let family = Family::parse(&record.family)
        .ok_or_else(|| PromptError::UnknownFamily(record.family.clone()))?;
    if spec.regime == Regime::ZeroShot {
        if spec.shots != 0 {
            return Err(PromptError::ShotsForZeroShot);
        }
        return Ok((Vec::new(), Vec::new()));
    }
    let base = shot_seed(spec.seed, record);
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    let test_complexity = record_complexity(family, record);

    // plan one (complexity, rule) pair per shot
    let plan: Vec<(usize, Option<RuleId>)> = match spec.regime {
        Regime::ZeroShot => unreachable!("handled above"),
        Regime::Primitive => {
            if family == Family::OrderPerturbed {
                return Err(PromptError::PrimitiveIllDefined);
            }
            let rules = family.rules();
            (0..spec.shots)
                .map(|_| (1, Some(rules[rng.gen_range(0..rules.len())])))
                .collect()
        }
        Regime::Range => {
            let complexities = range_complexities(family, test_complexity, spec.range)?;
            if spec.shots < complexities.len() {
                return Err(PromptError::TooFewShots {
                    needed: complexities.len(),
                    got: spec.shots,
                });
            }
            // one of each, the rest uniform, then shuffled so no ordering
            // is baked in
            let mut plan: Vec<usize> = complexities.clone();
            while plan.len() < spec.shots {
                plan.push(complexities[rng.gen_range(0..complexities.len())]);
            }
            plan.shuffle(&mut rng);
            plan.into_iter().map(|c| (c, None)).collect()
        }
        Regime::InDistribution => (0..spec.shots).map(|_| (test_complexity, None)).collect(),
    };

    let mut problems = Vec::with_capacity(plan.len());
    let mut metas = Vec::with_capacity(plan.len());
    for (i, (complexity, rule)) in plan.into_iter().enumerate() {
        let seed = splitmix(base.wrapping_add(i as u64 + 1));
        let id = format!("{}-shot-{i}", record.id);
        let problem = match rule {
            Some(rule) => generate_primitive_problem(rule, family, seed, &id, vocab, templates)?,
            None => generate_problem(&spec_for(family, complexity, seed), &id, vocab, templates)?,
        };
        metas.push(ShotMeta {
            complexity,
            rule,
            seed,
        });
        problems.push(problem);
    }
    Ok((problems, metas))
}

/// Build the full prompt for one test record: shot blocks followed by the
/// unanswered test block.
pub fn assemble_prompt(
    spec: &PromptSpec,
    record: &DatasetRecord,
    vocab: &Vocab,
    templates: &TemplateSet,
) -> Result<AssembledPrompt, PromptError> {
    let (problems, shots) = generate_shots(spec, record, vocab, templates)?;
    let mut text = String::new();
    for problem in &problems {
        text.push_str(&format!(
            "Q: {}\nA: {}\n",
            problem.problem_text(),
            problem.cot_text()
        ));
    }
    text.push_str(&format!("Q: {}\nA:", record.problem_text()));
    Ok(AssembledPrompt { text, shots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mwp_core::dataset::DatasetRecord;
    use mwp_core::problem::generate_problem;

    fn record_for(family: Family, complexity: usize, seed: u64) -> DatasetRecord {
        let spec = spec_for(family, complexity, seed);
        let problem = generate_problem(&spec, "test-0", Vocab::builtin(), &TemplateSet::builtin())
            .unwrap();
        DatasetRecord::from_problem(&problem)
    }

    #[test]
    fn zero_shot_contains_only_the_test_problem() {
        let record = record_for(Family::LinearDepth, 4, 1);
        let spec = PromptSpec::new(Regime::ZeroShot, 0, 5);
        let p = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        assert_eq!(p.text, format!("Q: {}\nA:", record.problem_text()));
        assert!(p.shots.is_empty());
    }

    #[test]
    fn twelve_shot_prompt_has_twelve_example_blocks() {
        let record = record_for(Family::LinearDepth, 6, 2);
        let spec = PromptSpec::new(Regime::InDistribution, 12, 5);
        let p = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        assert_eq!(p.text.matches("Q: ").count(), 13);
        assert_eq!(p.shots.len(), 12);
        assert!(p.shots.iter().all(|s| s.complexity == 6));
        assert!(p.text.ends_with("\nA:"));
    }

    #[test]
    fn nonlinear_range_covers_depths_one_and_two() {
        let record = record_for(Family::NonlinearDepth, 4, 3);
        let spec = PromptSpec::new(Regime::Range, 5, 5);
        let p = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        assert_eq!(p.shots.len(), 5);
        let mut seen: Vec<usize> = p.shots.iter().map(|s| s.complexity).collect();
        seen.sort();
        assert!(seen.iter().all(|&c| c == 1 || c == 2));
        assert!(seen.contains(&1) && seen.contains(&2));
    }

    #[test]
    fn order_range_skips_the_test_distance() {
        let record = record_for(Family::OrderPerturbed, 3, 4);
        let spec = PromptSpec::new(Regime::Range, 12, 5);
        let p = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        let seen: Vec<usize> = p.shots.iter().map(|s| s.complexity).collect();
        assert!(!seen.contains(&3));
        for d in [1usize, 2, 4, 5] {
            assert!(seen.contains(&d), "distance {d} missing");
        }
    }

    #[test]
    fn primitive_is_rejected_for_order_family() {
        let record = record_for(Family::OrderPerturbed, 2, 4);
        let spec = PromptSpec::new(Regime::Primitive, 12, 5);
        let err = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin())
            .unwrap_err();
        assert!(matches!(err, PromptError::PrimitiveIllDefined));
    }

    #[test]
    fn primitive_shots_are_single_step_problems() {
        let record = record_for(Family::LinearDepth, 6, 7);
        let spec = PromptSpec::new(Regime::Primitive, 6, 5);
        let (problems, metas) =
            generate_shots(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        for (problem, meta) in problems.iter().zip(&metas) {
            assert_eq!(problem.meta.depth, 1);
            let rule = meta.rule.unwrap();
            assert!(Family::LinearDepth.rules().contains(&rule));
        }
    }

    #[test]
    fn shot_generation_is_deterministic_per_test_problem() {
        let record = record_for(Family::LinearWidth, 8, 9);
        let spec = PromptSpec::new(Regime::Range, 12, 5);
        let a = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        let b = assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        assert_eq!(a.text, b.text);
        // a different test problem gets different examples
        let other = record_for(Family::LinearWidth, 8, 10);
        let c = assemble_prompt(&spec, &other, Vocab::builtin(), &TemplateSet::builtin()).unwrap();
        assert_ne!(
            a.shots.iter().map(|s| s.seed).collect::<Vec<_>>(),
            c.shots.iter().map(|s| s.seed).collect::<Vec<_>>()
        );
    }

    #[test]
    fn range_needs_enough_shots_for_coverage() {
        let record = record_for(Family::LinearDepth, 6, 2);
        let spec = PromptSpec::new(Regime::Range, 3, 5);
        assert!(matches!(
            assemble_prompt(&spec, &record, Vocab::builtin(), &TemplateSet::builtin()),
            Err(PromptError::TooFewShots { needed: 5, got: 3 })
        ));
    }
}
