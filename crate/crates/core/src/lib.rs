//! Generator for arithmetic word problems with controlled proof structure.
//!
//! Problems are built in three steps: sample a proof tree top-down with a
//! chosen shape (depth, width, linear or not), realize its leaves as
//! natural-language sentences, and emit a chain-of-thought trace by
//! post-order traversal. An independent linear-system oracle recomputes
//! every answer without looking at the tree.

pub mod dataset;
pub mod inference;
pub mod logic;
pub mod oracle;
pub mod problem;
pub mod realize;
pub mod sampler;
pub mod vocab;

pub use inference::{
    apply_rule, evaluate_tree, match_conclusion, swap_premises, ProofStep, ProofTree, RuleError,
    RuleId, RuleMatch,
};
pub use logic::{
    substitute_answer, validate_form, Agent, Entity, LogicalForm, Predicate, Quantity, WorldModel,
};
pub use oracle::{solve, SolveOutcome};
pub use problem::{generate_primitive_problem, generate_problem, Problem, ProblemMeta};
pub use realize::{order_leaves, render_cot, render_problem, OrderingPolicy, TemplateSet};
pub use sampler::{
    expected_nonlinear_width, instantiate, per_problem_seed, sample_nonlinear_tree,
    sample_linear_tree, sample_nonlinear_tree_with_root, sample_primitive_tree, sample_tree,
    Family, RootKind, Slots,
    SampleError, TreeSpec,
};
pub use vocab::Vocab;
