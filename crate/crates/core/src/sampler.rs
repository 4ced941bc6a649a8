//! Top-down proof-tree sampling and property instantiation.
//!
//! [`sample_tree`] produces an abstract tree: agents and entities are
//! numbered slots (`#0`, `#e0`) and every quantity is a placeholder.
//! [`instantiate`] then assigns names from a vocabulary, draws axiom
//! quantities, recomputes the internal labels, and rejection-resamples the
//! quantity draws until every container label is nonnegative, a comparison
//! root is nonnegative, and all node labels are distinct.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::inference::{apply_rule, match_conclusion, ProofTree, RuleId};
use crate::logic::{Agent, Entity, LogicalForm, Predicate, Quantity};
use crate::vocab::Vocab;

/// Axiom quantity magnitudes are sampled uniformly from this range.
pub const QUANTITY_RANGE: std::ops::RangeInclusive<i64> = 2..=20;

/// Attempts per round of quantity rejection sampling; the quantity stream
/// is reseeded between rounds.
const RESAMPLE_ROUND: usize = 1_000;
/// Hard cap across all rounds.
const RESAMPLE_MAX: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("unsatisfiable spec: {0}")]
    UnsatisfiableSpec(String),
    #[error("vocabulary exhausted: need {needed} agent names, have {available}")]
    VocabularyExhausted { needed: usize, available: usize },
    #[error("quantity resampling failed to satisfy constraints")]
    ResamplingExhausted,
    #[error("nonlinear width formula requires depth >= 2, got {0}")]
    DepthTooSmall(usize),
}

/// The four problem families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    LinearDepth,
    LinearWidth,
    NonlinearDepth,
    OrderPerturbed,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::LinearDepth,
        Family::LinearWidth,
        Family::NonlinearDepth,
        Family::OrderPerturbed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::LinearDepth => "linear-depth",
            Family::LinearWidth => "linear-width",
            Family::NonlinearDepth => "nonlinear-depth",
            Family::OrderPerturbed => "order-perturbed",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.name() == s)
    }

    /// Rules each family draws from.
    pub fn rules(&self) -> Vec<RuleId> {
        match self {
            Family::LinearDepth => vec![RuleId::CompAdd, RuleId::TransferApply],
            Family::LinearWidth => vec![RuleId::PartWholeSum],
            Family::NonlinearDepth => vec![RuleId::CompAdd, RuleId::CompDeduce, RuleId::CompEqAdd],
            Family::OrderPerturbed => vec![RuleId::CompAdd],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Root label kind for nonlinear trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootKind {
    Container,
    Comparison,
}

/// A generation recipe: family, shape targets, rule set, and seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSpec {
    pub family: Family,
    /// Proof depth (linear-depth, nonlinear-depth, order-perturbed).
    pub depth: usize,
    /// Leaf count target (linear-width only).
    pub width: usize,
    /// Move-to-front distance (order-perturbed only); 0 keeps the
    /// canonical ordering.
    pub move_distance: usize,
    pub rules: Vec<RuleId>,
    pub seed: u64,
}

impl TreeSpec {
    pub fn linear_depth(depth: usize, seed: u64) -> Self {
        TreeSpec {
            family: Family::LinearDepth,
            depth,
            width: 0,
            move_distance: 0,
            rules: Family::LinearDepth.rules(),
            seed,
        }
    }

    pub fn linear_width(width: usize, seed: u64) -> Self {
        TreeSpec {
            family: Family::LinearWidth,
            depth: 1,
            width,
            move_distance: 0,
            rules: Family::LinearWidth.rules(),
            seed,
        }
    }

    pub fn nonlinear_depth(depth: usize, seed: u64) -> Self {
        TreeSpec {
            family: Family::NonlinearDepth,
            depth,
            width: 0,
            move_distance: 0,
            rules: Family::NonlinearDepth.rules(),
            seed,
        }
    }

    /// Depth-5 left-leaning comparison trees with one sentence moved to
    /// the front.
    pub fn order_perturbed(move_distance: usize, seed: u64) -> Self {
        TreeSpec {
            family: Family::OrderPerturbed,
            depth: 5,
            width: 0,
            move_distance,
            rules: Family::OrderPerturbed.rules(),
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        match self.family {
            Family::LinearDepth | Family::NonlinearDepth => {
                if self.depth < 1 {
                    return Err(SampleError::UnsatisfiableSpec("depth must be >= 1".into()));
                }
            }
            Family::LinearWidth => {
                if self.width < 2 {
                    return Err(SampleError::UnsatisfiableSpec("width must be >= 2".into()));
                }
            }
            Family::OrderPerturbed => {
                if self.depth < 1 {
                    return Err(SampleError::UnsatisfiableSpec("depth must be >= 1".into()));
                }
                // a depth-D chain has D+1 leaves; the moved leaf index must
                // stay inside them
                if self.move_distance > self.depth {
                    return Err(SampleError::UnsatisfiableSpec(format!(
                        "move distance {} exceeds leaf range of a depth-{} chain",
                        self.move_distance, self.depth
                    )));
                }
            }
        }
        Ok(())
    }

    /// The family's complexity knob: depth, width, or move distance.
    pub fn complexity(&self) -> usize {
        match self.family {
            Family::LinearDepth | Family::NonlinearDepth => self.depth,
            Family::LinearWidth => self.width,
            Family::OrderPerturbed => self.move_distance,
        }
    }
}

/// Numbered agent/entity slot generator for abstract trees.
pub struct Slots {
    agents: usize,
}

impl Default for Slots {
    fn default() -> Self {
        Slots::new()
    }
}

impl Slots {
    pub fn new() -> Self {
        Slots { agents: 0 }
    }

    pub fn fresh_agent(&mut self) -> Agent {
        let slot = Agent::atomic(format!("#{}", self.agents));
        self.agents += 1;
        slot
    }
}

fn shared_entity() -> Entity {
    Entity::new("#e")
}

fn leaf_entity(i: usize) -> Entity {
    Entity::new(format!("#e{i}"))
}

/// Rename the `?N` fresh variables of a premise template to new slots.
fn bind_fresh(premises: &[LogicalForm], slots: &mut Slots) -> Vec<LogicalForm> {
    let mut map: HashMap<String, Agent> = HashMap::new();
    premises
        .iter()
        .map(|p| rename_agents(p, &mut |name| {
            if let Some(stripped) = name.strip_prefix('?') {
                let key = stripped.to_string();
                map.entry(key)
                    .or_insert_with(|| slots.fresh_agent())
                    .clone()
            } else {
                Agent::atomic(name.to_string())
            }
        }))
        .collect()
}

fn rename_agents(form: &LogicalForm, rename: &mut impl FnMut(&str) -> Agent) -> LogicalForm {
    let map_agent = |agent: &Agent, rename: &mut dyn FnMut(&str) -> Agent| -> Agent {
        if agent.is_atomic() {
            rename(agent.name())
        } else {
            let parts = agent
                .parts()
                .iter()
                .flat_map(|p| rename(p).parts().to_vec())
                .collect();
            Agent::conjunction(parts)
        }
    };
    match form {
        LogicalForm::Container {
            agent,
            quantity,
            entity,
        } => LogicalForm::container(map_agent(agent, rename), *quantity, entity.clone()),
        LogicalForm::Comparison {
            agent_a,
            agent_b,
            quantity,
            entity,
        } => LogicalForm::comparison(
            map_agent(agent_a, rename),
            map_agent(agent_b, rename),
            *quantity,
            entity.clone(),
        ),
        LogicalForm::Transfer {
            receiver,
            sender,
            quantity,
            entity,
        } => LogicalForm::transfer(
            map_agent(receiver, rename),
            map_agent(sender, rename),
            *quantity,
            entity.clone(),
        ),
        LogicalForm::PartWhole {
            whole_agent,
            quantity,
            whole_entity,
        } => LogicalForm::partwhole(
            map_agent(whole_agent, rename),
            *quantity,
            whole_entity.clone(),
        ),
        LogicalForm::CompEq {
            agent_a,
            agent_b,
            agent_c,
            agent_d,
            entity,
        } => LogicalForm::comp_eq(
            map_agent(agent_a, rename),
            map_agent(agent_b, rename),
            map_agent(agent_c, rename),
            map_agent(agent_d, rename),
            entity.clone(),
        ),
    }
}

/// Sample an abstract proof tree for a spec. Quantities are placeholders;
/// agents and entities are slots to be filled by [`instantiate`].
pub fn sample_tree(spec: &TreeSpec, rng: &mut impl Rng) -> Result<ProofTree, SampleError> {
    spec.validate()?;
    let mut slots = Slots::new();
    match spec.family {
        Family::LinearDepth | Family::OrderPerturbed => {
            let target = spec.depth;
            sample_linear_tree(&spec.rules, |depth, _width| depth >= target, rng, &mut slots)
        }
        Family::LinearWidth => {
            let agents: Vec<String> = (0..spec.width)
                .map(|_| slots.fresh_agent().name().to_string())
                .collect();
            let entities: Vec<String> =
                (0..spec.width).map(|i| leaf_entity(i).name().to_string()).collect();
            let goal = LogicalForm::partwhole(
                Agent::conjunction(agents),
                Quantity::Placeholder,
                Entity::conjunction(entities, None, None),
            );
            let matches = match_conclusion(&goal, &[RuleId::PartWholeSum]);
            let premises = matches[0].premises.clone();
            Ok(ProofTree::Step {
                rule: RuleId::PartWholeSum,
                conclusion: goal,
                children: premises.into_iter().map(ProofTree::Axiom).collect(),
            })
        }
        Family::NonlinearDepth => {
            let root = if rng.gen::<bool>() {
                RootKind::Container
            } else {
                RootKind::Comparison
            };
            Ok(nonlinear_tree(spec.depth, root, &mut slots))
        }
    }
}

/// Sample a left-leaning linear tree, growing until the caller-supplied
/// stopping criterion reports that the partial tree is large enough. The
/// predicate sees the current (depth, width) and is consulted before each
/// expansion; the family presets pass depth- or width-reached closures.
///
/// Each step picks uniformly among the allowed rules, transfer steps pick
/// their direction uniformly, and the non-axiom premise is always the
/// left child.
pub fn sample_linear_tree(
    rules: &[RuleId],
    mut stop: impl FnMut(usize, usize) -> bool,
    rng: &mut impl Rng,
    slots: &mut Slots,
) -> Result<ProofTree, SampleError> {
    if rules.is_empty() {
        return Err(SampleError::UnsatisfiableSpec("empty rule set".into()));
    }
    // decide the chain length top-down: a depth-d chain has width d + 1
    let mut steps = 0usize;
    while !stop(steps, steps + 1) {
        steps += 1;
    }
    let root = LogicalForm::container(slots.fresh_agent(), Quantity::Placeholder, shared_entity());
    Ok(expand_linear(root, steps, rules, slots, rng))
}

fn expand_linear(
    goal: LogicalForm,
    remaining: usize,
    rules: &[RuleId],
    slots: &mut Slots,
    rng: &mut impl Rng,
) -> ProofTree {
    if remaining == 0 {
        return ProofTree::Axiom(goal);
    }
    let rule = rules[rng.gen_range(0..rules.len())];
    let matches = match_conclusion(&goal, &[rule]);
    let chosen = if matches.len() > 1 {
        &matches[rng.gen_range(0..matches.len())]
    } else {
        &matches[0]
    };
    let premises = bind_fresh(&chosen.premises, slots);
    let left = expand_linear(premises[0].clone(), remaining - 1, rules, slots, rng);
    let right = ProofTree::Axiom(premises[1].clone());
    ProofTree::Step {
        rule,
        conclusion: goal,
        children: vec![left, right],
    }
}

/// Sample a nonlinear tree with a uniformly chosen root kind.
pub fn sample_nonlinear_tree(depth: usize, rng: &mut impl Rng) -> Result<ProofTree, SampleError> {
    if depth < 1 {
        return Err(SampleError::UnsatisfiableSpec("depth must be >= 1".into()));
    }
    let root = if rng.gen::<bool>() {
        RootKind::Container
    } else {
        RootKind::Comparison
    };
    Ok(sample_nonlinear_tree_with_root(depth, root, rng))
}

/// Sample a nonlinear tree with the given root kind. The expansion is
/// deterministic given the root kind and depth: comparison nodes expand
/// through comp-deduce, container nodes through comp-add one level above
/// the leaves and through comp-eq-add everywhere else, and comp-eq leaves
/// are never expanded. The comparison premise of every comp-eq-add step
/// introduces two agents that occur nowhere else in the tree.
pub fn sample_nonlinear_tree_with_root(
    depth: usize,
    root: RootKind,
    _rng: &mut impl Rng,
) -> ProofTree {
    let mut slots = Slots::new();
    nonlinear_tree(depth, root, &mut slots)
}

fn nonlinear_tree(depth: usize, root: RootKind, slots: &mut Slots) -> ProofTree {
    struct Pending {
        form: LogicalForm,
        level: usize,
        rule: Option<RuleId>,
        children: Vec<usize>,
    }
    let root_form = match root {
        RootKind::Container => LogicalForm::container(
            slots.fresh_agent(),
            Quantity::Placeholder,
            shared_entity(),
        ),
        RootKind::Comparison => LogicalForm::comparison(
            slots.fresh_agent(),
            slots.fresh_agent(),
            Quantity::Placeholder,
            shared_entity(),
        ),
    };
    let mut arena = vec![Pending {
        form: root_form,
        level: 0,
        rule: None,
        children: Vec::new(),
    }];
    // grow in breadth-first order until every non-comp-eq leaf sits at the
    // target depth
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let (form, level) = (arena[idx].form.clone(), arena[idx].level);
        if level == depth || form.predicate() == Predicate::CompEq {
            continue;
        }
        let rule = match form.predicate() {
            Predicate::Comparison => RuleId::CompDeduce,
            Predicate::Container => {
                if level == depth - 1 {
                    RuleId::CompAdd
                } else {
                    RuleId::CompEqAdd
                }
            }
            other => unreachable!("nonlinear trees never expand {other}"),
        };
        let matches = match_conclusion(&form, &[rule]);
        let premises = bind_fresh(&matches[0].premises, slots);
        arena[idx].rule = Some(rule);
        for premise in premises {
            let child = arena.len();
            arena.push(Pending {
                form: premise,
                level: level + 1,
                rule: None,
                children: Vec::new(),
            });
            arena[idx].children.push(child);
            queue.push_back(child);
        }
    }
    fn build(arena: &[Pending], idx: usize) -> ProofTree {
        let node = &arena[idx];
        match node.rule {
            None => ProofTree::Axiom(node.form.clone()),
            Some(rule) => ProofTree::Step {
                rule,
                conclusion: node.form.clone(),
                children: node.children.iter().map(|&c| build(arena, c)).collect(),
            },
        }
    }
    build(&arena, 0)
}

/// Closed-form leaf count of a nonlinear tree: 2^D plus the comp-eq node
/// counts f_c(0..D-2), where f_c follows
/// f_c(d) = f_c(d-1) + 2 f_c(d-2) with base cases set by the root kind.
pub fn expected_nonlinear_width(depth: usize, root: RootKind) -> Result<usize, SampleError> {
    if depth < 2 {
        return Err(SampleError::DepthTooSmall(depth));
    }
    let (f0, f1) = match root {
        RootKind::Container => (1usize, 1usize),
        RootKind::Comparison => (0, 2),
    };
    let mut fc = vec![f0, f1];
    while fc.len() < depth - 1 {
        let d = fc.len();
        fc.push(fc[d - 1] + 2 * fc[d - 2]);
    }
    let comp_eq_total: usize = fc[..depth - 1].iter().sum();
    Ok((1usize << depth) + comp_eq_total)
}

/// Single proof-step tree for the given rule (primitive in-context
/// examples are built from these).
pub fn sample_primitive_tree(rule: RuleId, rng: &mut impl Rng) -> ProofTree {
    let mut slots = Slots::new();
    let goal = match rule {
        RuleId::CompAdd | RuleId::TransferApply | RuleId::CompEqAdd => LogicalForm::container(
            slots.fresh_agent(),
            Quantity::Placeholder,
            shared_entity(),
        ),
        RuleId::CompDeduce => LogicalForm::comparison(
            slots.fresh_agent(),
            slots.fresh_agent(),
            Quantity::Placeholder,
            shared_entity(),
        ),
        RuleId::PartWholeSum => LogicalForm::partwhole(
            Agent::conjunction(vec![
                slots.fresh_agent().name().to_string(),
                slots.fresh_agent().name().to_string(),
            ]),
            Quantity::Placeholder,
            Entity::conjunction(
                vec![
                    leaf_entity(0).name().to_string(),
                    leaf_entity(1).name().to_string(),
                ],
                None,
                None,
            ),
        ),
    };
    let matches = match_conclusion(&goal, &[rule]);
    let chosen = if matches.len() > 1 {
        &matches[rng.gen_range(0..matches.len())]
    } else {
        &matches[0]
    };
    let premises = bind_fresh(&chosen.premises, &mut slots);
    ProofTree::Step {
        rule,
        conclusion: goal,
        children: premises.into_iter().map(ProofTree::Axiom).collect(),
    }
}

// ---------------------------------------------------------------------
// instantiation
// ---------------------------------------------------------------------

/// Compact evaluation plan so rejection attempts only redo integer
/// arithmetic, not tree construction. Nodes are stored in post order, so
/// the subtree of node `i` is the contiguous range `subtree_lo[i]..=i`.
struct QuantityPlan {
    ops: Vec<PlanOp>,
    is_container: Vec<bool>,
    /// Plan indices of leaves in canonical order.
    leaves: Vec<usize>,
    root_is_comparison: bool,
    subtree_lo: Vec<usize>,
    /// For node `i`: descendants whose labels differ from `i`'s only in
    /// the quantity; their values must differ for labels to stay unique.
    clashes_below: Vec<Vec<usize>>,
    /// Same-key pairs that are not nested (checked once at the end).
    global_clashes: Vec<(usize, usize)>,
}

enum PlanOp {
    LeafCont,
    LeafComp,
    LeafTransfer,
    LeafCompEq,
    Add(usize, usize),
    Sub(usize, usize),
    Diff(usize, usize),
    Sum(Vec<usize>),
}

fn build_plan(tree: &ProofTree) -> QuantityPlan {
    let mut plan = QuantityPlan {
        ops: Vec::new(),
        is_container: Vec::new(),
        leaves: Vec::new(),
        root_is_comparison: tree.label().predicate() == Predicate::Comparison,
        subtree_lo: Vec::new(),
        clashes_below: Vec::new(),
        global_clashes: Vec::new(),
    };
    let mut keys: HashMap<String, Vec<usize>> = HashMap::new();
    fn visit(
        node: &ProofTree,
        plan: &mut QuantityPlan,
        keys: &mut HashMap<String, Vec<usize>>,
    ) -> usize {
        let lo = plan.ops.len();
        let children: Vec<usize> = node
            .children()
            .iter()
            .map(|c| visit(c, plan, keys))
            .collect();
        let op = match node {
            ProofTree::Axiom(form) => match form.predicate() {
                Predicate::Container => PlanOp::LeafCont,
                Predicate::Comparison => PlanOp::LeafComp,
                Predicate::Transfer => PlanOp::LeafTransfer,
                Predicate::CompEq => PlanOp::LeafCompEq,
                Predicate::PartWhole => PlanOp::LeafCont,
            },
            ProofTree::Step { rule, children: kids, .. } => match rule {
                RuleId::CompAdd | RuleId::CompEqAdd => PlanOp::Add(children[0], children[1]),
                RuleId::CompDeduce => PlanOp::Diff(children[0], children[1]),
                RuleId::PartWholeSum => PlanOp::Sum(children.clone()),
                RuleId::TransferApply => {
                    // direction: does the chain agent receive or send?
                    let cont_agent = kids[0].label().agents()[0].clone();
                    let receives = matches!(
                        kids[1].label(),
                        LogicalForm::Transfer { receiver, .. } if *receiver == cont_agent
                    );
                    if receives {
                        PlanOp::Add(children[0], children[1])
                    } else {
                        PlanOp::Sub(children[0], children[1])
                    }
                }
            },
        };
        let idx = plan.ops.len();
        plan.ops.push(op);
        plan.subtree_lo.push(lo);
        plan.is_container
            .push(node.label().predicate() == Predicate::Container);
        if node.is_axiom() {
            plan.leaves.push(idx);
        }
        // label uniqueness can only break between nodes that agree on
        // everything except the quantity
        keys.entry(node.label().with_quantity(Quantity::Placeholder).encode())
            .or_default()
            .push(idx);
        idx
    }
    visit(tree, &mut plan, &mut keys);
    plan.clashes_below = vec![Vec::new(); plan.ops.len()];
    for group in keys.into_values().filter(|g| g.len() > 1) {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                // post-order: a < b, nested iff a is inside b's subtree
                if a >= plan.subtree_lo[b] {
                    plan.clashes_below[b].push(a);
                } else {
                    plan.global_clashes.push((a, b));
                }
            }
        }
    }
    plan
}

impl QuantityPlan {
    /// Fill the subtree rooted at `idx` with fresh draws: redraw children
    /// until this node's own constraints hold. Subtrees are disjoint and
    /// every constraint is attached to the lowest node covering its
    /// support, so the result follows the same conditional distribution
    /// as rejecting whole-tree draws, at far lower cost for deep trees.
    fn fill(&self, idx: usize, values: &mut [Option<i64>], rng: &mut impl Rng) -> bool {
        for _ in 0..RESAMPLE_ROUND {
            let value = match &self.ops[idx] {
                PlanOp::LeafCont | PlanOp::LeafTransfer => Some(rng.gen_range(QUANTITY_RANGE)),
                PlanOp::LeafComp => {
                    let magnitude = rng.gen_range(QUANTITY_RANGE);
                    Some(if rng.gen::<bool>() { magnitude } else { -magnitude })
                }
                PlanOp::LeafCompEq => None,
                PlanOp::Add(a, b) | PlanOp::Sub(a, b) | PlanOp::Diff(a, b) => {
                    let (a, b) = (*a, *b);
                    if !self.fill(a, values, rng) || !self.fill(b, values, rng) {
                        return false;
                    }
                    match &self.ops[idx] {
                        PlanOp::Add(..) => values[a].and_then(|x| x.checked_add(values[b].unwrap_or(0))),
                        PlanOp::Sub(..) => values[a].and_then(|x| x.checked_sub(values[b].unwrap_or(0))),
                        _ => values[b].and_then(|x| x.checked_sub(values[a].unwrap_or(0))),
                    }
                }
                PlanOp::Sum(kids) => {
                    let kids = kids.clone();
                    let mut total: Option<i64> = Some(0);
                    for &k in &kids {
                        if !self.fill(k, values, rng) {
                            return false;
                        }
                        total = total
                            .zip(values[k])
                            .and_then(|(t, v)| t.checked_add(v));
                    }
                    total
                }
            };
            values[idx] = value;
            let is_leaf = matches!(
                self.ops[idx],
                PlanOp::LeafCont | PlanOp::LeafComp | PlanOp::LeafTransfer | PlanOp::LeafCompEq
            );
            let overflow = !is_leaf && value.is_none();
            let negative_container =
                self.is_container[idx] && value.is_some_and(|v| v < 0);
            let negative_root = self.root_is_comparison
                && idx == self.ops.len() - 1
                && value.is_some_and(|v| v < 0);
            let clash = self.clashes_below[idx]
                .iter()
                .any(|&other| values[other].is_some() && values[other] == value);
            if !(overflow || negative_container || negative_root || clash) {
                return true;
            }
            if is_leaf {
                // a lone leaf can only fail through a clash; redraw it
                continue;
            }
        }
        false
    }

    /// One full draw over the tree; `None` when the per-node retry budget
    /// ran out or a non-nested label clash remained.
    fn attempt(&self, rng: &mut impl Rng) -> Option<Vec<Option<i64>>> {
        let mut values: Vec<Option<i64>> = vec![None; self.ops.len()];
        if !self.fill(self.ops.len() - 1, &mut values, rng) {
            return None;
        }
        for &(a, b) in &self.global_clashes {
            if values[a].is_some() && values[a] == values[b] {
                return None;
            }
        }
        Some(values)
    }
}

/// Instantiate an abstract tree: assign agent/entity names, draw axiom
/// quantities, and recompute every internal label.
pub fn instantiate(
    tree: &ProofTree,
    vocab: &Vocab,
    rng: &mut impl Rng,
) -> Result<ProofTree, SampleError> {
    // collect slot counts
    let mut agent_slots = 0usize;
    let mut entity_slots: Vec<String> = Vec::new();
    for node in tree.post_order() {
        for agent in node.label().agents() {
            for part in agent.parts() {
                if let Some(idx) = part.strip_prefix('#').and_then(|s| s.parse::<usize>().ok()) {
                    agent_slots = agent_slots.max(idx + 1);
                }
            }
        }
        for part in node.label().entity().parts() {
            if part.starts_with("#e") && !entity_slots.contains(part) {
                entity_slots.push(part.clone());
            }
        }
    }

    // agent names: switch to the extended list when the base one is too
    // small, drawn without replacement either way
    let pool = if agent_slots <= vocab.agents.len() {
        &vocab.agents
    } else if agent_slots <= vocab.extended_agents.len() {
        &vocab.extended_agents
    } else {
        return Err(SampleError::VocabularyExhausted {
            needed: agent_slots,
            available: vocab.extended_agents.len(),
        });
    };
    let names = draw_distinct(pool, agent_slots, rng);
    let agent_names: HashMap<String, String> = (0..agent_slots)
        .map(|i| (format!("#{i}"), names[i].clone()))
        .collect();

    // entity names: one entity per problem, except per-leaf slots for
    // partwhole problems which draw from one hypernym group
    let mut entity_names: HashMap<String, String> = HashMap::new();
    if entity_slots.iter().any(|s| s != "#e") {
        let groups = vocab.hypernym_groups();
        if groups.is_empty() {
            // no hypernym structure: everyone shares one entity
            let entity = vocab.entities[rng.gen_range(0..vocab.entities.len())].clone();
            for slot in &entity_slots {
                entity_names.insert(slot.clone(), entity.clone());
            }
        } else {
            let (_, members) = &groups[rng.gen_range(0..groups.len())];
            for slot in &entity_slots {
                entity_names.insert(
                    slot.clone(),
                    members[rng.gen_range(0..members.len())].clone(),
                );
            }
        }
    } else {
        let entity = vocab.entities[rng.gen_range(0..vocab.entities.len())].clone();
        entity_names.insert("#e".to_string(), entity);
    }

    // problem-wide attribute/unit status, each present or absent uniformly
    let attribute = if rng.gen::<bool>() {
        Some(vocab.attributes[rng.gen_range(0..vocab.attributes.len())].clone())
    } else {
        None
    };
    let unit = if rng.gen::<bool>() {
        Some(vocab.units[rng.gen_range(0..vocab.units.len())].clone())
    } else {
        None
    };

    let named = rename_tree(tree, &agent_names, &entity_names, &attribute, &unit);

    // quantity rejection loop on the compact plan
    let plan = build_plan(&named);
    let mut attempts = 0usize;
    let mut qrng = ChaCha8Rng::seed_from_u64(rng.gen());
    let values = loop {
        if attempts >= RESAMPLE_MAX {
            return Err(SampleError::ResamplingExhausted);
        }
        if attempts > 0 && attempts.is_multiple_of(RESAMPLE_ROUND) {
            qrng = ChaCha8Rng::seed_from_u64(rng.gen());
        }
        attempts += 1;
        if let Some(values) = plan.attempt(&mut qrng) {
            break values;
        }
    };
    let leaf_values: Vec<Option<i64>> = plan.leaves.iter().map(|&i| values[i]).collect();

    // materialize: fill leaf quantities and recompute internal labels
    let mut cursor = 0usize;
    Ok(materialize(&named, &leaf_values, &mut cursor))
}

fn draw_distinct(pool: &[String], count: usize, rng: &mut impl Rng) -> Vec<String> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
        out.push(pool[indices[i]].clone());
    }
    out
}

fn rename_tree(
    tree: &ProofTree,
    agents: &HashMap<String, String>,
    entities: &HashMap<String, String>,
    attribute: &Option<String>,
    unit: &Option<String>,
) -> ProofTree {
    let rename_form = |form: &LogicalForm| -> LogicalForm {
        let renamed = rename_agents(form, &mut |name| {
            Agent::atomic(agents.get(name).cloned().unwrap_or_else(|| name.to_string()))
        });
        // rebuild the entity with real names and problem-wide decor
        let old = renamed.entity().clone();
        let parts: Vec<String> = old
            .parts()
            .iter()
            .map(|p| entities.get(p).cloned().unwrap_or_else(|| p.clone()))
            .collect();
        let entity = Entity::conjunction(parts, attribute.clone(), unit.clone());
        match renamed {
            LogicalForm::Container { agent, quantity, .. } => {
                LogicalForm::container(agent, quantity, entity)
            }
            LogicalForm::Comparison {
                agent_a,
                agent_b,
                quantity,
                ..
            } => LogicalForm::comparison(agent_a, agent_b, quantity, entity),
            LogicalForm::Transfer {
                receiver,
                sender,
                quantity,
                ..
            } => LogicalForm::transfer(receiver, sender, quantity, entity),
            LogicalForm::PartWhole {
                whole_agent,
                quantity,
                ..
            } => LogicalForm::partwhole(whole_agent, quantity, entity),
            LogicalForm::CompEq {
                agent_a,
                agent_b,
                agent_c,
                agent_d,
                ..
            } => LogicalForm::comp_eq(agent_a, agent_b, agent_c, agent_d, entity),
        }
    };
    match tree {
        ProofTree::Axiom(form) => ProofTree::Axiom(rename_form(form)),
        ProofTree::Step {
            rule,
            conclusion,
            children,
        } => ProofTree::Step {
            rule: *rule,
            conclusion: rename_form(conclusion),
            children: children
                .iter()
                .map(|c| rename_tree(c, agents, entities, attribute, unit))
                .collect(),
        },
    }
}

fn materialize(tree: &ProofTree, leaf_values: &[Option<i64>], cursor: &mut usize) -> ProofTree {
    match tree {
        ProofTree::Axiom(form) => {
            let value = leaf_values[*cursor];
            *cursor += 1;
            match value {
                Some(v) => ProofTree::Axiom(form.with_quantity(Quantity::Known(v))),
                None => ProofTree::Axiom(form.clone()),
            }
        }
        ProofTree::Step { rule, children, .. } => {
            let children: Vec<ProofTree> = children
                .iter()
                .map(|c| materialize(c, leaf_values, cursor))
                .collect();
            let premises: Vec<LogicalForm> = children.iter().map(|c| c.label().clone()).collect();
            let conclusion = apply_rule(*rule, &premises)
                .expect("accepted quantity draw always yields a valid tree");
            ProofTree::Step {
                rule: *rule,
                conclusion,
                children,
            }
        }
    }
}

/// Convenience wrapper used by tests: seeded sample + instantiate.
pub fn sample_and_instantiate(
    spec: &TreeSpec,
    vocab: &Vocab,
) -> Result<ProofTree, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let abstract_tree = sample_tree(spec, &mut rng)?;
    instantiate(&abstract_tree, vocab, &mut rng)
}

/// Derive the per-problem seed for one dataset index.
pub fn per_problem_seed(dataset_seed: u64, index: u64) -> u64 {
    dataset_seed ^ index
}
