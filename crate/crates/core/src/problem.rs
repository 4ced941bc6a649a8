//! End-to-end problem generation: sample a tree, instantiate it, realize
//! the text and chain of thought, and assemble the world model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::inference::{evaluate_tree, ProofTree, RuleError};
use crate::logic::{LogicError, LogicalForm, Quantity, WorldModel};
use crate::realize::{realize, OrderingPolicy, Realization, RealizeError, TemplateSet};
use crate::sampler::{instantiate, sample_tree, Family, SampleError, TreeSpec};
use crate::vocab::Vocab;

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Identity and shape metadata of one generated problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemMeta {
    pub id: String,
    pub family: Family,
    pub depth: usize,
    pub width: usize,
    pub distance: usize,
    pub seed: u64,
}

/// A fully realized problem: proof tree, world model, text, trace, answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub meta: ProblemMeta,
    pub tree: ProofTree,
    pub world: WorldModel,
    pub realization: Realization,
    pub answer: i64,
}

impl Problem {
    pub fn body_text(&self) -> String {
        self.realization.body_text()
    }

    pub fn question_text(&self) -> String {
        self.realization.question_sentence.clone()
    }

    pub fn cot_text(&self) -> String {
        self.realization.cot_text()
    }

    /// Body and question joined; the form used inside prompts.
    pub fn problem_text(&self) -> String {
        self.realization.problem_text()
    }

    /// The answer as a logical form (question with placeholder filled).
    pub fn answer_form(&self) -> LogicalForm {
        self.world
            .answer_form(self.answer)
            .expect("question carries exactly one placeholder")
    }
}

/// Generate one problem from a spec. All randomness comes from one stream
/// seeded with `spec.seed`, so identical specs give identical problems.
pub fn generate_problem(
    spec: &TreeSpec,
    id: impl Into<String>,
    vocab: &Vocab,
    templates: &TemplateSet,
) -> Result<Problem, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let abstract_tree = sample_tree(spec, &mut rng)?;
    let policy = match spec.family {
        Family::OrderPerturbed => OrderingPolicy::MoveToFront(spec.move_distance),
        _ => OrderingPolicy::Canonical,
    };
    assemble(
        abstract_tree,
        policy,
        spec.family,
        spec.move_distance,
        spec.seed,
        id.into(),
        vocab,
        templates,
        &mut rng,
    )
}

/// Generate a single proof-step problem for the given rule; used as the
/// primitive in-context examples.
pub fn generate_primitive_problem(
    rule: crate::inference::RuleId,
    family: Family,
    seed: u64,
    id: impl Into<String>,
    vocab: &Vocab,
    templates: &TemplateSet,
) -> Result<Problem, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let abstract_tree = crate::sampler::sample_primitive_tree(rule, &mut rng);
    assemble(
        abstract_tree,
        OrderingPolicy::Canonical,
        family,
        0,
        seed,
        id.into(),
        vocab,
        templates,
        &mut rng,
    )
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    abstract_tree: ProofTree,
    policy: OrderingPolicy,
    family: Family,
    distance: usize,
    seed: u64,
    id: String,
    vocab: &Vocab,
    templates: &TemplateSet,
    rng: &mut ChaCha8Rng,
) -> Result<Problem, GenError> {
    let tree = instantiate(&abstract_tree, vocab, rng)?;
    let realization = realize(&tree, &policy, templates, vocab, rng)?;
    let answer = evaluate_tree(&tree)?;
    tree.check_unique_labels()?;

    let leaves = tree.leaves();
    let body: Vec<LogicalForm> = realization
        .body_order
        .iter()
        .map(|&i| leaves[i].clone())
        .collect();
    let question = tree.label().with_quantity(Quantity::Placeholder);
    let world = WorldModel::new(body, question);
    world.validate()?;

    Ok(Problem {
        meta: ProblemMeta {
            id,
            family,
            depth: tree.depth(),
            width: tree.width(),
            distance,
            seed,
        },
        tree,
        world,
        realization,
        answer,
    })
}
