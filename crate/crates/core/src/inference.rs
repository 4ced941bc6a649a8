//! Inference rules over logical forms, proof steps, and proof trees.
//!
//! Rules are applied forward with [`apply_rule`] (premises -> conclusion) and
//! matched backward with [`match_conclusion`] (goal -> premise templates),
//! which is what the top-down tree sampler drives. [`evaluate_tree`]
//! recomputes every internal label bottom-up and returns the root quantity.

use std::collections::HashSet;

use thiserror::Error;

use crate::logic::{Agent, Entity, LogicalForm, Predicate, Quantity};

/// Identifier of an inference rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    /// container(a,q1,e), comparison(b,a,q2,e) => container(b,q1+q2,e)
    CompAdd,
    /// container(a,q1,e), transfer(r,s,q2,e) => container(a, q1+-q2, e)
    /// where the sign depends on whether `a` receives or sends.
    TransferApply,
    /// container(a,q1,e), container(b,q2,e) => comparison(b,a,q2-q1,e)
    CompDeduce,
    /// container(a_i,q_i,e_i)... => partwhole(AND a_i, sum q_i, AND e_i)
    PartWholeSum,
    /// container(a,q1,e), comparison(d,c,q2,e), comp-eq(b,a,d,c)
    /// => container(b,q1+q2,e)
    CompEqAdd,
}

impl RuleId {
    pub const ALL: [RuleId; 5] = [
        RuleId::CompAdd,
        RuleId::TransferApply,
        RuleId::CompDeduce,
        RuleId::PartWholeSum,
        RuleId::CompEqAdd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RuleId::CompAdd => "comp-add",
            RuleId::TransferApply => "transfer-apply",
            RuleId::CompDeduce => "comp-deduce",
            RuleId::PartWholeSum => "partwhole-sum",
            RuleId::CompEqAdd => "comp-eq-add",
        }
    }

    /// Transfer is the one non-commutative rule: it involves a notion of
    /// time, so premise order carries meaning.
    pub fn is_commutative(&self) -> bool {
        !matches!(self, RuleId::TransferApply)
    }

    /// Fixed arity, or `None` for the variable-arity partwhole sum (n >= 2).
    pub fn arity(&self) -> Option<usize> {
        match self {
            RuleId::CompAdd | RuleId::TransferApply | RuleId::CompDeduce => Some(2),
            RuleId::PartWholeSum => None,
            RuleId::CompEqAdd => Some(3),
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("{rule} expects {expected} premises, got {got}")]
    WrongArity {
        rule: RuleId,
        expected: String,
        got: usize,
    },
    #[error("{rule}: premise {position} must be a {expected}")]
    SchemaMismatch {
        rule: RuleId,
        position: usize,
        expected: Predicate,
    },
    #[error("{rule}: premises disagree on entity")]
    EntityMismatch { rule: RuleId },
    #[error("{rule}: {detail}")]
    AgentLinkage { rule: RuleId, detail: String },
    #[error("{rule}: premise quantities must be instantiated")]
    PlaceholderQuantity { rule: RuleId },
    #[error("arithmetic overflow in {rule}")]
    Overflow { rule: RuleId },
    #[error("partwhole conclusion would repeat agent {0}")]
    DuplicateAgent(String),
    #[error("stored label {stored} disagrees with recomputed {recomputed}")]
    LabelMismatch { stored: String, recomputed: String },
    #[error("root label carries no quantity")]
    NoRootQuantity,
    #[error("leaf axiom is not fully instantiated: {0}")]
    UninstantiatedLeaf(String),
    #[error("duplicate node label in tree: {0}")]
    DuplicateLabel(String),
    #[error("swap attempted on non-commutative rule {0}")]
    NonCommutativeSwap(RuleId),
    #[error("invalid premise permutation")]
    BadPermutation,
}

fn known(q: Quantity, rule: RuleId) -> Result<i64, RuleError> {
    q.value().ok_or(RuleError::PlaceholderQuantity { rule })
}

fn checked_add(a: i64, b: i64, rule: RuleId) -> Result<i64, RuleError> {
    a.checked_add(b).ok_or(RuleError::Overflow { rule })
}

fn checked_sub(a: i64, b: i64, rule: RuleId) -> Result<i64, RuleError> {
    a.checked_sub(b).ok_or(RuleError::Overflow { rule })
}

/// Apply an inference rule to premises given in the rule's canonical order.
///
/// Premise matching is strict: predicates, shared entity (same name,
/// attribute, and unit), and agent linkage must all line up. The partwhole
/// sum is the one rule that may combine premises with differing entity
/// names; attribute and unit must still agree.
pub fn apply_rule(rule: RuleId, premises: &[LogicalForm]) -> Result<LogicalForm, RuleError> {
    if let Some(expected) = rule.arity() {
        if premises.len() != expected {
            return Err(RuleError::WrongArity {
                rule,
                expected: expected.to_string(),
                got: premises.len(),
            });
        }
    }
    match rule {
        RuleId::CompAdd => {
            let (agent_a, q1, entity) = match &premises[0] {
                LogicalForm::Container {
                    agent,
                    quantity,
                    entity,
                } => (agent, *quantity, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 0,
                        expected: Predicate::Container,
                    })
                }
            };
            let (comp_a, comp_b, q2, comp_entity) = match &premises[1] {
                LogicalForm::Comparison {
                    agent_a,
                    agent_b,
                    quantity,
                    entity,
                } => (agent_a, agent_b, *quantity, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 1,
                        expected: Predicate::Comparison,
                    })
                }
            };
            if !entity.matches(comp_entity) {
                return Err(RuleError::EntityMismatch { rule });
            }
            if comp_b != agent_a {
                return Err(RuleError::AgentLinkage {
                    rule,
                    detail: format!(
                        "comparison agentB {comp_b} must match container agent {agent_a}"
                    ),
                });
            }
            let value = checked_add(known(q1, rule)?, known(q2, rule)?, rule)?;
            Ok(LogicalForm::container(
                comp_a.clone(),
                Quantity::Known(value),
                entity.clone(),
            ))
        }
        RuleId::TransferApply => {
            let (agent, q1, entity) = match &premises[0] {
                LogicalForm::Container {
                    agent,
                    quantity,
                    entity,
                } => (agent, *quantity, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 0,
                        expected: Predicate::Container,
                    })
                }
            };
            let (receiver, sender, q2, t_entity) = match &premises[1] {
                LogicalForm::Transfer {
                    receiver,
                    sender,
                    quantity,
                    entity,
                } => (receiver, sender, *quantity, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 1,
                        expected: Predicate::Transfer,
                    })
                }
            };
            if !entity.matches(t_entity) {
                return Err(RuleError::EntityMismatch { rule });
            }
            if receiver == sender {
                return Err(RuleError::AgentLinkage {
                    rule,
                    detail: "transfer to self".into(),
                });
            }
            let q1 = known(q1, rule)?;
            let q2 = known(q2, rule)?;
            let value = if receiver == agent {
                checked_add(q1, q2, rule)?
            } else if sender == agent {
                checked_sub(q1, q2, rule)?
            } else {
                return Err(RuleError::AgentLinkage {
                    rule,
                    detail: format!("transfer does not involve container agent {agent}"),
                });
            };
            Ok(LogicalForm::container(
                agent.clone(),
                Quantity::Known(value),
                entity.clone(),
            ))
        }
        RuleId::CompDeduce => {
            let mut parts = Vec::with_capacity(2);
            for (i, premise) in premises.iter().enumerate() {
                match premise {
                    LogicalForm::Container {
                        agent,
                        quantity,
                        entity,
                    } => parts.push((agent, *quantity, entity)),
                    _ => {
                        return Err(RuleError::SchemaMismatch {
                            rule,
                            position: i,
                            expected: Predicate::Container,
                        })
                    }
                }
            }
            let (agent_a, q1, entity) = parts[0];
            let (agent_b, q2, entity_b) = parts[1];
            if !entity.matches(entity_b) {
                return Err(RuleError::EntityMismatch { rule });
            }
            let value = checked_sub(known(q2, rule)?, known(q1, rule)?, rule)?;
            Ok(LogicalForm::comparison(
                agent_b.clone(),
                agent_a.clone(),
                Quantity::Known(value),
                entity.clone(),
            ))
        }
        RuleId::PartWholeSum => {
            if premises.len() < 2 {
                return Err(RuleError::WrongArity {
                    rule,
                    expected: ">= 2".into(),
                    got: premises.len(),
                });
            }
            let mut agents: Vec<String> = Vec::new();
            let mut entities: Vec<String> = Vec::new();
            let mut sum: i64 = 0;
            let mut attribute: Option<&Option<String>> = None;
            let mut unit: Option<&Option<String>> = None;
            for (i, premise) in premises.iter().enumerate() {
                // fn-style variant: partwhole premises may feed another sum
                let (agent, quantity, entity) = match premise {
                    LogicalForm::Container {
                        agent,
                        quantity,
                        entity,
                    } => (agent, *quantity, entity),
                    LogicalForm::PartWhole {
                        whole_agent,
                        quantity,
                        whole_entity,
                    } => (whole_agent, *quantity, whole_entity),
                    _ => {
                        return Err(RuleError::SchemaMismatch {
                            rule,
                            position: i,
                            expected: Predicate::Container,
                        })
                    }
                };
                match attribute {
                    None => attribute = Some(&entity.attribute),
                    Some(a) if *a == entity.attribute => {}
                    Some(_) => return Err(RuleError::EntityMismatch { rule }),
                }
                match unit {
                    None => unit = Some(&entity.unit),
                    Some(u) if *u == entity.unit => {}
                    Some(_) => return Err(RuleError::EntityMismatch { rule }),
                }
                for part in agent.parts() {
                    if agents.contains(part) {
                        return Err(RuleError::DuplicateAgent(part.clone()));
                    }
                    agents.push(part.clone());
                }
                for part in entity.parts() {
                    if !entities.contains(part) {
                        entities.push(part.clone());
                    }
                }
                sum = checked_add(sum, known(quantity, rule)?, rule)?;
            }
            Ok(LogicalForm::partwhole(
                Agent::conjunction(agents),
                Quantity::Known(sum),
                Entity::conjunction(
                    entities,
                    attribute.cloned().unwrap_or(None),
                    unit.cloned().unwrap_or(None),
                ),
            ))
        }
        RuleId::CompEqAdd => {
            let (agent_a, q1, entity) = match &premises[0] {
                LogicalForm::Container {
                    agent,
                    quantity,
                    entity,
                } => (agent, *quantity, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 0,
                        expected: Predicate::Container,
                    })
                }
            };
            let (comp_d, comp_c, q2, comp_entity) = match &premises[1] {
                LogicalForm::Comparison {
                    agent_a,
                    agent_b,
                    quantity,
                    entity,
                } => (agent_a, agent_b, *quantity, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 1,
                        expected: Predicate::Comparison,
                    })
                }
            };
            let (eq_b, eq_a, eq_d, eq_c, eq_entity) = match &premises[2] {
                LogicalForm::CompEq {
                    agent_a,
                    agent_b,
                    agent_c,
                    agent_d,
                    entity,
                } => (agent_a, agent_b, agent_c, agent_d, entity),
                _ => {
                    return Err(RuleError::SchemaMismatch {
                        rule,
                        position: 2,
                        expected: Predicate::CompEq,
                    })
                }
            };
            if !entity.matches(comp_entity) || !entity.matches(eq_entity) {
                return Err(RuleError::EntityMismatch { rule });
            }
            if eq_a != agent_a {
                return Err(RuleError::AgentLinkage {
                    rule,
                    detail: format!("comp-eq agentB {eq_a} must match container agent {agent_a}"),
                });
            }
            if eq_d != comp_d || eq_c != comp_c {
                return Err(RuleError::AgentLinkage {
                    rule,
                    detail: "comp-eq agentC/agentD must match the comparison agents".into(),
                });
            }
            let value = checked_add(known(q1, rule)?, known(q2, rule)?, rule)?;
            Ok(LogicalForm::container(
                eq_b.clone(),
                Quantity::Known(value),
                entity.clone(),
            ))
        }
    }
}

/// A premise template returned by [`match_conclusion`]. Fresh agents are
/// named `?0`, `?1`, ... and unknown quantities are placeholders;
/// instantiating both and applying the rule reproduces the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub rule: RuleId,
    pub premises: Vec<LogicalForm>,
}

/// Enumerate every way an allowed rule can conclude `goal`.
///
/// Returns an empty list when nothing applies (e.g. no rule concludes a
/// transfer or a comp-eq).
pub fn match_conclusion(goal: &LogicalForm, allowed: &[RuleId]) -> Vec<RuleMatch> {
    let mut out = Vec::new();
    let fresh = |i: usize| Agent::atomic(format!("?{i}"));
    for rule in allowed {
        match (rule, goal) {
            (RuleId::CompAdd, LogicalForm::Container { agent, entity, .. }) => {
                out.push(RuleMatch {
                    rule: RuleId::CompAdd,
                    premises: vec![
                        LogicalForm::container(fresh(0), Quantity::Placeholder, entity.clone()),
                        LogicalForm::comparison(
                            agent.clone(),
                            fresh(0),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                    ],
                });
            }
            (RuleId::TransferApply, LogicalForm::Container { agent, entity, .. }) => {
                // receiving and sending variants
                out.push(RuleMatch {
                    rule: RuleId::TransferApply,
                    premises: vec![
                        LogicalForm::container(
                            agent.clone(),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                        LogicalForm::transfer(
                            agent.clone(),
                            fresh(0),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                    ],
                });
                out.push(RuleMatch {
                    rule: RuleId::TransferApply,
                    premises: vec![
                        LogicalForm::container(
                            agent.clone(),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                        LogicalForm::transfer(
                            fresh(0),
                            agent.clone(),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                    ],
                });
            }
            (RuleId::CompEqAdd, LogicalForm::Container { agent, entity, .. }) => {
                out.push(RuleMatch {
                    rule: RuleId::CompEqAdd,
                    premises: vec![
                        LogicalForm::container(fresh(0), Quantity::Placeholder, entity.clone()),
                        LogicalForm::comparison(
                            fresh(1),
                            fresh(2),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                        LogicalForm::comp_eq(
                            agent.clone(),
                            fresh(0),
                            fresh(1),
                            fresh(2),
                            entity.clone(),
                        ),
                    ],
                });
            }
            (
                RuleId::CompDeduce,
                LogicalForm::Comparison {
                    agent_a,
                    agent_b,
                    entity,
                    ..
                },
            ) => {
                out.push(RuleMatch {
                    rule: RuleId::CompDeduce,
                    premises: vec![
                        LogicalForm::container(
                            agent_b.clone(),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                        LogicalForm::container(
                            agent_a.clone(),
                            Quantity::Placeholder,
                            entity.clone(),
                        ),
                    ],
                });
            }
            (
                RuleId::PartWholeSum,
                LogicalForm::PartWhole {
                    whole_agent,
                    whole_entity,
                    ..
                },
            )
                if whole_agent.parts().len() >= 2 => {
                    let entities = whole_entity.parts();
                    let premises = whole_agent
                        .parts()
                        .iter()
                        .enumerate()
                        .map(|(i, name)| {
                            LogicalForm::container(
                                Agent::atomic(name.clone()),
                                Quantity::Placeholder,
                                Entity::with_decor(
                                    entities[i % entities.len()].clone(),
                                    whole_entity.attribute.clone(),
                                    whole_entity.unit.clone(),
                                ),
                            )
                        })
                        .collect();
                    out.push(RuleMatch {
                        rule: RuleId::PartWholeSum,
                        premises,
                    });
                }
            _ => {}
        }
    }
    out
}

/// One rule application: premises in canonical order plus the conclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub rule: RuleId,
    pub premises: Vec<LogicalForm>,
    pub conclusion: LogicalForm,
}

impl ProofStep {
    /// Build a step by deriving the conclusion from the premises.
    pub fn derive(rule: RuleId, premises: Vec<LogicalForm>) -> Result<ProofStep, RuleError> {
        let conclusion = apply_rule(rule, &premises)?;
        Ok(ProofStep {
            rule,
            premises,
            conclusion,
        })
    }
}

/// Permute the premises of a commutative step, returning an equivalent step
/// whose conclusion is semantically equal to the original one.
pub fn swap_premises(step: &ProofStep, permutation: &[usize]) -> Result<ProofStep, RuleError> {
    if !step.rule.is_commutative() {
        return Err(RuleError::NonCommutativeSwap(step.rule));
    }
    let n = step.premises.len();
    if permutation.len() != n {
        return Err(RuleError::BadPermutation);
    }
    let mut seen = vec![false; n];
    for &i in permutation {
        if i >= n || seen[i] {
            return Err(RuleError::BadPermutation);
        }
        seen[i] = true;
    }
    let premises: Vec<LogicalForm> = permutation
        .iter()
        .map(|&i| step.premises[i].clone())
        .collect();
    let conclusion = match step.rule {
        // positional application is meaningful for homogeneous premises and
        // yields the sign-flipped / reordered equivalent
        RuleId::CompDeduce | RuleId::PartWholeSum => apply_rule(step.rule, &premises)?,
        // heterogeneous premises: re-sort into canonical slots, conclusion
        // is unchanged
        RuleId::CompAdd | RuleId::CompEqAdd => {
            let mut sorted = premises.clone();
            sorted.sort_by_key(|p| match p.predicate() {
                Predicate::Container => 0,
                Predicate::Comparison => 1,
                Predicate::CompEq => 2,
                _ => 3,
            });
            apply_rule(step.rule, &sorted)?
        }
        RuleId::TransferApply => unreachable!("rejected above"),
    };
    Ok(ProofStep {
        rule: step.rule,
        premises,
        conclusion,
    })
}

/// Rooted ordered tree of proof steps; leaves are axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofTree {
    Axiom(LogicalForm),
    Step {
        rule: RuleId,
        conclusion: LogicalForm,
        children: Vec<ProofTree>,
    },
}

impl ProofTree {
    pub fn label(&self) -> &LogicalForm {
        match self {
            ProofTree::Axiom(form) => form,
            ProofTree::Step { conclusion, .. } => conclusion,
        }
    }

    pub fn is_axiom(&self) -> bool {
        matches!(self, ProofTree::Axiom(_))
    }

    pub fn children(&self) -> &[ProofTree] {
        match self {
            ProofTree::Axiom(_) => &[],
            ProofTree::Step { children, .. } => children,
        }
    }

    /// Height: maximum edge count from the root to any leaf.
    pub fn depth(&self) -> usize {
        self.children()
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Number of leaf nodes (axioms).
    pub fn width(&self) -> usize {
        match self {
            ProofTree::Axiom(_) => 1,
            ProofTree::Step { children, .. } => children.iter().map(ProofTree::width).sum(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(ProofTree::node_count)
            .sum::<usize>()
    }

    /// Leaves in canonical (left-to-right) order.
    pub fn leaves(&self) -> Vec<&LogicalForm> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a LogicalForm>) {
        match self {
            ProofTree::Axiom(form) => out.push(form),
            ProofTree::Step { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }

    /// All node labels in post order (children left to right, then parent).
    pub fn post_order(&self) -> Vec<&ProofTree> {
        let mut out = Vec::new();
        self.collect_post_order(&mut out);
        out
    }

    fn collect_post_order<'a>(&'a self, out: &mut Vec<&'a ProofTree>) {
        for child in self.children() {
            child.collect_post_order(out);
        }
        out.push(self);
    }

    /// A proof tree is linear when every step takes at most one premise
    /// that is not an axiom.
    pub fn is_linear(&self) -> bool {
        match self {
            ProofTree::Axiom(_) => true,
            ProofTree::Step { children, .. } => {
                let non_axiom = children.iter().filter(|c| !c.is_axiom()).count();
                non_axiom <= 1 && children.iter().all(ProofTree::is_linear)
            }
        }
    }

    /// True when every step in the tree uses a commutative rule.
    pub fn is_commutative(&self) -> bool {
        match self {
            ProofTree::Axiom(_) => true,
            ProofTree::Step { rule, children, .. } => {
                rule.is_commutative() && children.iter().all(ProofTree::is_commutative)
            }
        }
    }

    /// Check that every node's label is unique within the tree.
    pub fn check_unique_labels(&self) -> Result<(), RuleError> {
        let mut seen = HashSet::new();
        for node in self.post_order() {
            if !seen.insert(node.label().encode()) {
                return Err(RuleError::DuplicateLabel(node.label().encode()));
            }
        }
        Ok(())
    }
}

/// Recompute every internal label bottom-up and return the root quantity.
///
/// Fails if any stored label disagrees with its recomputation, if a leaf
/// still carries a placeholder, or if the root has no quantity.
pub fn evaluate_tree(tree: &ProofTree) -> Result<i64, RuleError> {
    verify_node(tree)?;
    tree.label()
        .quantity()
        .and_then(Quantity::value)
        .ok_or(RuleError::NoRootQuantity)
}

fn verify_node(tree: &ProofTree) -> Result<(), RuleError> {
    match tree {
        ProofTree::Axiom(form) => {
            if form.has_placeholder() {
                return Err(RuleError::UninstantiatedLeaf(form.encode()));
            }
            Ok(())
        }
        ProofTree::Step {
            rule,
            conclusion,
            children,
        } => {
            for child in children {
                verify_node(child)?;
            }
            let premises: Vec<LogicalForm> =
                children.iter().map(|c| c.label().clone()).collect();
            let recomputed = apply_rule(*rule, &premises)?;
            if &recomputed != conclusion {
                return Err(RuleError::LabelMismatch {
                    stored: conclusion.encode(),
                    recomputed: recomputed.encode(),
                });
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apple() -> Entity {
        Entity::new("apple")
    }

    fn cont(name: &str, q: i64) -> LogicalForm {
        LogicalForm::container(Agent::atomic(name), Quantity::Known(q), apple())
    }

    fn comp(a: &str, b: &str, q: i64) -> LogicalForm {
        LogicalForm::comparison(Agent::atomic(a), Agent::atomic(b), Quantity::Known(q), apple())
    }

    #[test]
    fn comp_add_deduces_lucy() {
        let conclusion =
            apply_rule(RuleId::CompAdd, &[cont("Isabella", 17), comp("Lucy", "Isabella", 10)])
                .unwrap();
        assert_eq!(conclusion, cont("Lucy", 27));
    }

    #[test]
    fn comp_add_deduces_bob() {
        let conclusion =
            apply_rule(RuleId::CompAdd, &[cont("Alice", 3), comp("Bob", "Alice", 2)]).unwrap();
        assert_eq!(conclusion, cont("Bob", 5));
    }

    #[test]
    fn comp_add_zero_is_identity() {
        let conclusion =
            apply_rule(RuleId::CompAdd, &[cont("Alice", 3), comp("Bob", "Alice", 0)]).unwrap();
        assert_eq!(conclusion.quantity(), Some(Quantity::Known(3)));
    }

    #[test]
    fn transfer_adds_to_receiver() {
        let premises = [
            cont("Alice", 3),
            LogicalForm::transfer(
                Agent::atomic("Alice"),
                Agent::atomic("Bob"),
                Quantity::Known(2),
                apple(),
            ),
        ];
        let conclusion = apply_rule(RuleId::TransferApply, &premises).unwrap();
        assert_eq!(conclusion, cont("Alice", 5));
    }

    #[test]
    fn transfer_subtracts_from_sender() {
        let premises = [
            cont("Alice", 5),
            LogicalForm::transfer(
                Agent::atomic("Bob"),
                Agent::atomic("Alice"),
                Quantity::Known(2),
                apple(),
            ),
        ];
        let conclusion = apply_rule(RuleId::TransferApply, &premises).unwrap();
        assert_eq!(conclusion, cont("Alice", 3));
    }

    #[test]
    fn comp_deduce_compares_bob_to_alice() {
        let conclusion =
            apply_rule(RuleId::CompDeduce, &[cont("Alice", 3), cont("Bob", 5)]).unwrap();
        assert_eq!(conclusion, comp("Bob", "Alice", 2));
    }

    #[test]
    fn partwhole_combines_entities() {
        let premises = [
            cont("Alice", 3),
            LogicalForm::container(Agent::atomic("Bob"), Quantity::Known(5), Entity::new("banana")),
        ];
        let conclusion = apply_rule(RuleId::PartWholeSum, &premises).unwrap();
        assert_eq!(
            conclusion.encode(),
            "partwhole(whole_agent=Alice∧Bob, quantity=8, whole_entity=apple∧banana)"
        );
    }

    #[test]
    fn comp_eq_add_deduces_bob_nine() {
        let premises = [
            cont("Alice", 7),
            comp("David", "Charlie", 2),
            LogicalForm::comp_eq(
                Agent::atomic("Bob"),
                Agent::atomic("Alice"),
                Agent::atomic("David"),
                Agent::atomic("Charlie"),
                apple(),
            ),
        ];
        let conclusion = apply_rule(RuleId::CompEqAdd, &premises).unwrap();
        assert_eq!(conclusion, cont("Bob", 9));
    }

    #[test]
    fn entity_mismatch_is_rejected() {
        let banana = LogicalForm::comparison(
            Agent::atomic("Bob"),
            Agent::atomic("Alice"),
            Quantity::Known(2),
            Entity::new("banana"),
        );
        let err = apply_rule(RuleId::CompAdd, &[cont("Alice", 3), banana]).unwrap_err();
        assert_eq!(err, RuleError::EntityMismatch { rule: RuleId::CompAdd });
        // attribute is part of the entity identity
        let red = LogicalForm::container(
            Agent::atomic("Alice"),
            Quantity::Known(3),
            Entity::with_decor("apple", Some("red".into()), None),
        );
        assert!(apply_rule(RuleId::CompAdd, &[red, comp("Bob", "Alice", 2)]).is_err());
    }

    #[test]
    fn agent_linkage_is_rejected() {
        // comparison relates Bob to Carol, not to the container agent Alice
        let err =
            apply_rule(RuleId::CompAdd, &[cont("Alice", 3), comp("Bob", "Carol", 2)]).unwrap_err();
        assert!(matches!(err, RuleError::AgentLinkage { .. }));
    }

    #[test]
    fn arity_and_schema_are_checked() {
        assert!(matches!(
            apply_rule(RuleId::CompAdd, &[cont("Alice", 3)]),
            Err(RuleError::WrongArity { got: 1, .. })
        ));
        assert!(matches!(
            apply_rule(RuleId::PartWholeSum, &[cont("Alice", 3)]),
            Err(RuleError::WrongArity { got: 1, .. })
        ));
        // two containers do not fit comp-add's schema
        assert!(matches!(
            apply_rule(RuleId::CompAdd, &[cont("Alice", 3), cont("Bob", 5)]),
            Err(RuleError::SchemaMismatch {
                position: 1,
                expected: Predicate::Comparison,
                ..
            })
        ));
    }

    #[test]
    fn overflow_is_an_error() {
        let err = apply_rule(
            RuleId::CompAdd,
            &[cont("Alice", i64::MAX), comp("Bob", "Alice", 1)],
        )
        .unwrap_err();
        assert_eq!(err, RuleError::Overflow { rule: RuleId::CompAdd });
    }

    #[test]
    fn match_container_goal_with_comp_add() {
        let goal = cont("Bob", 5);
        let matches = match_conclusion(&goal, &[RuleId::CompAdd]);
        assert_eq!(matches.len(), 1);
        let m = &matches[0];
        assert_eq!(m.rule, RuleId::CompAdd);
        assert_eq!(m.premises.len(), 2);
        assert_eq!(
            m.premises[0].encode(),
            "container(agent=?0, quantity=?, entity=apple)"
        );
        assert_eq!(
            m.premises[1].encode(),
            "comparison(agentA=Bob, agentB=?0, quantity=?, entity=apple)"
        );
    }

    #[test]
    fn match_comparison_goal_with_comp_deduce() {
        let goal = comp("Bob", "Alice", 2);
        let matches = match_conclusion(&goal, &[RuleId::CompDeduce]);
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].premises[0], LogicalForm::container(
            Agent::atomic("Alice"),
            Quantity::Placeholder,
            apple(),
        ));
        assert_eq!(matches[0].premises[1], LogicalForm::container(
            Agent::atomic("Bob"),
            Quantity::Placeholder,
            apple(),
        ));
    }

    #[test]
    fn nothing_concludes_a_transfer() {
        let goal = LogicalForm::transfer(
            Agent::atomic("Alice"),
            Agent::atomic("Bob"),
            Quantity::Known(2),
            apple(),
        );
        assert!(match_conclusion(&goal, &RuleId::ALL).is_empty());
    }

    #[test]
    fn instantiated_matches_reproduce_goals() {
        // fill fresh agents and quantities in each template, re-apply, and
        // check the goal comes back
        let goals = [
            cont("Bob", 9),
            comp("Bob", "Alice", -4),
            LogicalForm::partwhole(
                Agent::conjunction(vec!["Alice".into(), "Bob".into(), "Carol".into()]),
                Quantity::Known(12),
                apple(),
            ),
        ];
        for goal in &goals {
            let matches = match_conclusion(goal, &RuleId::ALL);
            assert!(!matches.is_empty(), "no match for {goal}");
            for m in matches {
                let premises = instantiate_template(&m, goal);
                let rebuilt = apply_rule(m.rule, &premises).unwrap();
                assert_eq!(&rebuilt, goal, "rule {} failed", m.rule);
            }
        }
    }

    // deterministic template instantiation used by the test above
    fn instantiate_template(m: &RuleMatch, goal: &LogicalForm) -> Vec<LogicalForm> {
        let goal_q = goal.quantity().and_then(|q| q.value()).unwrap();
        let mut premises: Vec<LogicalForm> = m
            .premises
            .iter()
            .map(rename_fresh)
            .collect();
        match m.rule {
            RuleId::CompAdd | RuleId::CompEqAdd => {
                // pick q1 = goal - 3, q2 = 3 (comparison may be negative)
                let q2 = 3;
                premises[0] = premises[0].with_quantity(Quantity::Known(goal_q - q2));
                premises[1] = premises[1].with_quantity(Quantity::Known(q2));
            }
            RuleId::TransferApply => {
                let receives = matches!(
                    &premises[1],
                    LogicalForm::Transfer { receiver, .. } if receiver == goal.agents()[0]
                );
                let q2 = 2;
                let q1 = if receives { goal_q - q2 } else { goal_q + q2 };
                premises[0] = premises[0].with_quantity(Quantity::Known(q1));
                premises[1] = premises[1].with_quantity(Quantity::Known(q2));
            }
            RuleId::CompDeduce => {
                premises[0] = premises[0].with_quantity(Quantity::Known(5));
                premises[1] = premises[1].with_quantity(Quantity::Known(5 + goal_q));
            }
            RuleId::PartWholeSum => {
                let n = premises.len() as i64;
                let each = goal_q / n;
                let rem = goal_q - each * (n - 1);
                for (i, p) in premises.iter_mut().enumerate() {
                    let q = if i as i64 == n - 1 { rem } else { each };
                    *p = p.with_quantity(Quantity::Known(q));
                }
            }
        }
        premises
    }

    fn rename_fresh(form: &LogicalForm) -> LogicalForm {
        // map ?0 -> Xavier, ?1 -> Yara, ?2 -> Zoe
        let rename = |a: &Agent| -> Agent {
            match a.parts()[0].as_str() {
                "?0" => Agent::atomic("Xavier"),
                "?1" => Agent::atomic("Yara"),
                "?2" => Agent::atomic("Zoe"),
                _ => a.clone(),
            }
        };
        match form {
            LogicalForm::Container {
                agent,
                quantity,
                entity,
            } => LogicalForm::container(rename(agent), *quantity, entity.clone()),
            LogicalForm::Comparison {
                agent_a,
                agent_b,
                quantity,
                entity,
            } => LogicalForm::comparison(rename(agent_a), rename(agent_b), *quantity, entity.clone()),
            LogicalForm::Transfer {
                receiver,
                sender,
                quantity,
                entity,
            } => LogicalForm::transfer(rename(receiver), rename(sender), *quantity, entity.clone()),
            LogicalForm::CompEq {
                agent_a,
                agent_b,
                agent_c,
                agent_d,
                entity,
            } => LogicalForm::comp_eq(
                rename(agent_a),
                rename(agent_b),
                rename(agent_c),
                rename(agent_d),
                entity.clone(),
            ),
            other => other.clone(),
        }
    }

    #[test]
    fn swap_comp_deduce_flips_sign() {
        let step =
            ProofStep::derive(RuleId::CompDeduce, vec![cont("Alice", 5), cont("Bob", 3)]).unwrap();
        assert_eq!(step.conclusion, comp("Bob", "Alice", -2));
        let swapped = swap_premises(&step, &[1, 0]).unwrap();
        assert_eq!(swapped.conclusion, comp("Alice", "Bob", 2));
        assert!(step.conclusion.semantically_equal(&swapped.conclusion));
    }

    #[test]
    fn swap_partwhole_reorders_conjunctions() {
        let step = ProofStep::derive(
            RuleId::PartWholeSum,
            vec![cont("Alice", 3), cont("Bob", 5), cont("Carol", 4)],
        )
        .unwrap();
        let swapped = swap_premises(&step, &[2, 0, 1]).unwrap();
        assert_eq!(
            swapped.conclusion.encode(),
            "partwhole(whole_agent=Carol∧Alice∧Bob, quantity=12, whole_entity=apple)"
        );
        assert!(step.conclusion.semantically_equal(&swapped.conclusion));
    }

    #[test]
    fn swap_transfer_is_rejected() {
        let step = ProofStep::derive(
            RuleId::TransferApply,
            vec![
                cont("Alice", 3),
                LogicalForm::transfer(
                    Agent::atomic("Alice"),
                    Agent::atomic("Bob"),
                    Quantity::Known(2),
                    apple(),
                ),
            ],
        )
        .unwrap();
        assert_eq!(
            swap_premises(&step, &[1, 0]).unwrap_err(),
            RuleError::NonCommutativeSwap(RuleId::TransferApply)
        );
    }

    #[test]
    fn evaluate_single_axiom() {
        let tree = ProofTree::Axiom(cont("A", 5));
        assert_eq!(evaluate_tree(&tree).unwrap(), 5);
    }

    #[test]
    fn evaluate_rejects_corrupted_label() {
        let tree = ProofTree::Step {
            rule: RuleId::CompAdd,
            conclusion: cont("Bob", 6), // stored label is wrong: should be 5
            children: vec![
                ProofTree::Axiom(cont("Alice", 3)),
                ProofTree::Axiom(comp("Bob", "Alice", 2)),
            ],
        };
        assert!(matches!(
            evaluate_tree(&tree),
            Err(RuleError::LabelMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_rejects_placeholder_leaf() {
        let tree = ProofTree::Axiom(LogicalForm::container(
            Agent::atomic("A"),
            Quantity::Placeholder,
            apple(),
        ));
        assert!(matches!(
            evaluate_tree(&tree),
            Err(RuleError::UninstantiatedLeaf(_))
        ));
    }

    #[test]
    fn linearity_detects_chains_and_branches() {
        let chain = ProofTree::Step {
            rule: RuleId::CompAdd,
            conclusion: cont("Carol", 10),
            children: vec![
                ProofTree::Step {
                    rule: RuleId::CompAdd,
                    conclusion: cont("Bob", 5),
                    children: vec![
                        ProofTree::Axiom(cont("Alice", 3)),
                        ProofTree::Axiom(comp("Bob", "Alice", 2)),
                    ],
                },
                ProofTree::Axiom(comp("Carol", "Bob", 5)),
            ],
        };
        assert!(chain.is_linear());
        assert_eq!(chain.depth(), 2);
        assert_eq!(chain.width(), 3);

        let branch = ProofTree::Step {
            rule: RuleId::CompDeduce,
            conclusion: comp("Dave", "Bob", 7),
            children: vec![
                ProofTree::Step {
                    rule: RuleId::CompAdd,
                    conclusion: cont("Bob", 5),
                    children: vec![
                        ProofTree::Axiom(cont("Alice", 3)),
                        ProofTree::Axiom(comp("Bob", "Alice", 2)),
                    ],
                },
                ProofTree::Step {
                    rule: RuleId::CompAdd,
                    conclusion: cont("Dave", 12),
                    children: vec![
                        ProofTree::Axiom(cont("Carol", 10)),
                        ProofTree::Axiom(comp("Dave", "Carol", 2)),
                    ],
                },
            ],
        };
        assert!(!branch.is_linear());
        assert_eq!(evaluate_tree(&branch).unwrap(), 7);
    }
}
