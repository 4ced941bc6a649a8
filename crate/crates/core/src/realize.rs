//! Natural-language realization: leaf ordering, body/question rendering
//! via sampled templates, and chain-of-thought traces via post-order
//! traversal.
//!
//! Template files are line-oriented `predicate|sign|template` records with
//! slots `[a] [b] [c] [d] [q] [e] [k] [u]`. A template is eligible for a
//! form only when its slot set matches the form exactly: templates with
//! `[k]` require an attribute, templates with `[u]` require a unit, and
//! vice versa. Comparison templates carry sign `more` or `fewer` and are
//! selected by the sign of the quantity; everything else uses `any`.

use rand::Rng;
use thiserror::Error;

use crate::inference::{ProofTree, RuleId};
use crate::logic::{Agent, Entity, LogicalForm, Predicate, Quantity};
use crate::vocab::Vocab;

const DEFAULT_DECLARATIVE: &str = include_str!("../templates/declarative.txt");
const DEFAULT_INTERROGATIVE: &str = include_str!("../templates/interrogative.txt");

/// Sign discriminator for comparison templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Any,
    More,
    Fewer,
}

impl Sign {
    fn parse(s: &str) -> Option<Sign> {
        match s {
            "any" => Some(Sign::Any),
            "more" => Some(Sign::More),
            "fewer" => Some(Sign::Fewer),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Sign::Any => "any",
            Sign::More => "more",
            Sign::Fewer => "fewer",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Template {
    pub predicate: Predicate,
    pub sign: Sign,
    pub text: String,
    needs_attribute: bool,
    needs_unit: bool,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("malformed template line: {0}")]
    MalformedLine(String),
    #[error("unknown predicate in template line: {0}")]
    UnknownPredicate(String),
    #[error("unknown sign in template line: {0}")]
    UnknownSign(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealizeError {
    #[error("non-commutative tree only supports the canonical ordering")]
    NonCommutativeOrdering,
    #[error("move distance {distance} out of range for {leaves} leaves")]
    InvalidDistance { distance: usize, leaves: usize },
    #[error("permutation is not a bijection over the leaves")]
    BadPermutation,
    #[error("no {kind} template for {predicate} (sign {sign}, attribute {attribute}, unit {unit})")]
    MissingTemplate {
        kind: &'static str,
        predicate: &'static str,
        sign: &'static str,
        attribute: bool,
        unit: bool,
    },
    #[error("realization requires a concrete tree, found placeholder in {0}")]
    ConcreteTreeRequired(String),
}

/// Declarative and interrogative templates plus the hypernym map used to
/// name entity conjunctions.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    declarative: Vec<Template>,
    interrogative: Vec<Template>,
}

impl TemplateSet {
    pub fn builtin() -> TemplateSet {
        TemplateSet::parse(DEFAULT_DECLARATIVE, DEFAULT_INTERROGATIVE)
            .expect("builtin templates parse")
    }

    pub fn parse(declarative: &str, interrogative: &str) -> Result<TemplateSet, TemplateError> {
        Ok(TemplateSet {
            declarative: parse_lines(declarative)?,
            interrogative: parse_lines(interrogative)?,
        })
    }

    /// Load `declarative.txt` / `interrogative.txt` from a directory,
    /// falling back to the built-in set for a missing file.
    pub fn load_dir(dir: &std::path::Path) -> Result<TemplateSet, TemplateError> {
        let read = |name: &str, fallback: &str| -> Result<String, TemplateError> {
            let path = dir.join(name);
            if path.exists() {
                std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
                    path: path.display().to_string(),
                    source,
                })
            } else {
                Ok(fallback.to_string())
            }
        };
        let declarative = read("declarative.txt", DEFAULT_DECLARATIVE)?;
        let interrogative = read("interrogative.txt", DEFAULT_INTERROGATIVE)?;
        TemplateSet::parse(&declarative, &interrogative)
    }

    fn eligible<'a>(
        pool: &'a [Template],
        form: &LogicalForm,
    ) -> Result<Vec<&'a Template>, RealizeError> {
        let sign = match form {
            LogicalForm::Comparison { quantity, .. } => match quantity {
                Quantity::Known(q) if *q < 0 => Sign::Fewer,
                Quantity::Known(_) => Sign::More,
                Quantity::Placeholder => {
                    return Err(RealizeError::ConcreteTreeRequired(form.encode()))
                }
            },
            _ => Sign::Any,
        };
        let entity = form.entity();
        Ok(pool
            .iter()
            .filter(|t| {
                t.predicate == form.predicate()
                    && t.sign == sign
                    && t.needs_attribute == entity.attribute.is_some()
                    && t.needs_unit == entity.unit.is_some()
            })
            .collect())
    }

    fn pick<'a>(
        pool: &'a [Template],
        kind: &'static str,
        form: &LogicalForm,
        rng: &mut impl Rng,
    ) -> Result<&'a Template, RealizeError> {
        let eligible = TemplateSet::eligible(pool, form)?;
        if eligible.is_empty() {
            let sign = match form.quantity() {
                Some(Quantity::Known(q)) if form.predicate() == Predicate::Comparison && q < 0 => {
                    Sign::Fewer
                }
                _ if form.predicate() == Predicate::Comparison => Sign::More,
                _ => Sign::Any,
            };
            return Err(RealizeError::MissingTemplate {
                kind,
                predicate: form.predicate().name(),
                sign: sign.name(),
                attribute: form.entity().attribute.is_some(),
                unit: form.entity().unit.is_some(),
            });
        }
        Ok(eligible[rng.gen_range(0..eligible.len())])
    }
}

fn parse_lines(text: &str) -> Result<Vec<Template>, TemplateError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(3, '|');
        let (pred, sign, text) = match (parts.next(), parts.next(), parts.next()) {
            (Some(p), Some(s), Some(t)) => (p, s, t),
            _ => return Err(TemplateError::MalformedLine(line.to_string())),
        };
        let predicate = match pred {
            "container" => Predicate::Container,
            "comparison" => Predicate::Comparison,
            "transfer" => Predicate::Transfer,
            "partwhole" => Predicate::PartWhole,
            "comp-eq" => Predicate::CompEq,
            _ => return Err(TemplateError::UnknownPredicate(line.to_string())),
        };
        let sign = Sign::parse(sign).ok_or_else(|| TemplateError::UnknownSign(line.to_string()))?;
        out.push(Template {
            predicate,
            sign,
            text: text.to_string(),
            needs_attribute: text.contains("[k]"),
            needs_unit: text.contains("[u]"),
        });
    }
    Ok(out)
}

/// How body sentences are ordered relative to the canonical left-to-right
/// leaf order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingPolicy {
    Canonical,
    /// Visit the leaf at canonical index `k` first; everything else keeps
    /// its relative order. Distance 0 is the identity.
    MoveToFront(usize),
    /// Arbitrary leaf permutation (commutative trees only).
    Permutation(Vec<usize>),
}

/// Canonical leaf indices in the order mandated by the policy.
pub fn order_leaves(tree: &ProofTree, policy: &OrderingPolicy) -> Result<Vec<usize>, RealizeError> {
    let n = tree.width();
    let identity: Vec<usize> = (0..n).collect();
    let order = match policy {
        OrderingPolicy::Canonical => identity,
        OrderingPolicy::MoveToFront(0) => identity,
        OrderingPolicy::MoveToFront(k) => {
            if *k >= n {
                return Err(RealizeError::InvalidDistance {
                    distance: *k,
                    leaves: n,
                });
            }
            if !tree.is_commutative() {
                return Err(RealizeError::NonCommutativeOrdering);
            }
            let mut order = vec![*k];
            order.extend((0..n).filter(|i| i != k));
            order
        }
        OrderingPolicy::Permutation(p) => {
            if p.len() != n {
                return Err(RealizeError::BadPermutation);
            }
            let mut seen = vec![false; n];
            for &i in p {
                if i >= n || seen[i] {
                    return Err(RealizeError::BadPermutation);
                }
                seen[i] = true;
            }
            if p != &identity && !tree.is_commutative() {
                return Err(RealizeError::NonCommutativeOrdering);
            }
            p.clone()
        }
    };
    Ok(order)
}

/// A realized problem: body sentences (in policy order), the question,
/// and the chain-of-thought sentences (post order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub body_sentences: Vec<String>,
    pub question_sentence: String,
    pub cot_sentences: Vec<String>,
    /// Canonical leaf index behind each body sentence.
    pub body_order: Vec<usize>,
}

impl Realization {
    pub fn body_text(&self) -> String {
        self.body_sentences.join(" ")
    }

    pub fn cot_text(&self) -> String {
        self.cot_sentences.join(" ")
    }

    pub fn problem_text(&self) -> String {
        format!("{} {}", self.body_text(), self.question_sentence)
    }
}

/// Full realization pass: one declarative template draw per leaf (in
/// canonical order), one interrogative draw for the root, body ordering
/// per policy, and the post-order chain of thought reusing the exact leaf
/// sentences.
pub fn realize(
    tree: &ProofTree,
    policy: &OrderingPolicy,
    templates: &TemplateSet,
    vocab: &Vocab,
    rng: &mut impl Rng,
) -> Result<Realization, RealizeError> {
    let order = order_leaves(tree, policy)?;
    let leaves = tree.leaves();
    let mut leaf_sentences = Vec::with_capacity(leaves.len());
    for leaf in &leaves {
        if leaf.has_placeholder() {
            return Err(RealizeError::ConcreteTreeRequired(leaf.encode()));
        }
        let template = TemplateSet::pick(&templates.declarative, "declarative", leaf, rng)?;
        leaf_sentences.push(fill_template(&template.text, leaf, vocab));
    }
    let root = tree.label();
    let question_template =
        TemplateSet::pick(&templates.interrogative, "interrogative", root, rng)?;
    let question_sentence = fill_template(&question_template.text, root, vocab);

    let body_sentences: Vec<String> = order.iter().map(|&i| leaf_sentences[i].clone()).collect();

    let mut cot_sentences = Vec::new();
    let mut cursor = 0usize;
    for node in tree.post_order() {
        match node {
            ProofTree::Axiom(_) => {
                cot_sentences.push(leaf_sentences[cursor].clone());
                cursor += 1;
            }
            ProofTree::Step {
                rule,
                conclusion,
                children,
            } => {
                cot_sentences.push(step_sentence(*rule, conclusion, children, vocab));
            }
        }
    }
    if tree.is_axiom() {
        // degenerate single-axiom problem: restate the answer so the trace
        // ends with it
        let value = root.quantity().and_then(|q| q.value()).unwrap_or(0);
        cot_sentences.push(format!("The answer is {value}."));
    }

    Ok(Realization {
        body_sentences,
        question_sentence,
        cot_sentences,
        body_order: order,
    })
}

/// Render just the problem text (body + question).
pub fn render_problem(
    tree: &ProofTree,
    policy: &OrderingPolicy,
    templates: &TemplateSet,
    vocab: &Vocab,
    rng: &mut impl Rng,
) -> Result<(Vec<String>, String), RealizeError> {
    let r = realize(tree, policy, templates, vocab, rng)?;
    Ok((r.body_sentences, r.question_sentence))
}

/// Render just the chain of thought.
pub fn render_cot(
    tree: &ProofTree,
    policy: &OrderingPolicy,
    templates: &TemplateSet,
    vocab: &Vocab,
    rng: &mut impl Rng,
) -> Result<Vec<String>, RealizeError> {
    let r = realize(tree, policy, templates, vocab, rng)?;
    Ok(r.cot_sentences)
}

/// Fixed per-rule explanation sentence for one internal proof step.
fn step_sentence(
    rule: RuleId,
    conclusion: &LogicalForm,
    children: &[ProofTree],
    vocab: &Vocab,
) -> String {
    let value = |form: &LogicalForm| form.quantity().and_then(|q| q.value()).unwrap_or(0);
    let noun = entity_phrase(conclusion.entity(), vocab);
    match rule {
        RuleId::CompAdd | RuleId::CompEqAdd | RuleId::TransferApply => {
            let agent = render_agent(conclusion.agents()[0]);
            let base = value(children[0].label());
            let total = value(conclusion);
            let (op, amount) = if total >= base {
                ('+', total - base)
            } else {
                ('-', base - total)
            };
            format!("So {agent} has {base}{op}{amount}={total} {noun}.")
        }
        RuleId::CompDeduce => {
            let a = render_agent(children[0].label().agents()[0]);
            let b = render_agent(children[1].label().agents()[0]);
            let qa = value(children[0].label());
            let qb = value(children[1].label());
            if qb >= qa {
                format!("So {b} has {qb}-{qa}={} more {noun} than {a}.", qb - qa)
            } else {
                format!("So {b} has {qa}-{qb}={} fewer {noun} than {a}.", qa - qb)
            }
        }
        RuleId::PartWholeSum => {
            let list = render_agent(conclusion.agents()[0]);
            let terms: Vec<String> = children
                .iter()
                .map(|c| value(c.label()).to_string())
                .collect();
            let total = value(conclusion);
            format!("Together, {list} have {}={total} {noun}.", terms.join("+"))
        }
    }
}

/// Substitute the slots of one template for one logical form.
fn fill_template(template: &str, form: &LogicalForm, vocab: &Vocab) -> String {
    let entity = form.entity();
    let mut text = template.to_string();
    let quantity = match form.quantity() {
        Some(Quantity::Known(q)) => {
            if form.predicate() == Predicate::Comparison {
                q.abs()
            } else {
                q
            }
        }
        _ => 0,
    };
    let agent_slots: Vec<(&str, String)> = match form {
        LogicalForm::Container { agent, .. } => vec![("[a]", render_agent(agent))],
        LogicalForm::Comparison {
            agent_a, agent_b, ..
        } => vec![("[a]", render_agent(agent_a)), ("[b]", render_agent(agent_b))],
        // Table lettering: the sender gives, the receiver gets
        LogicalForm::Transfer {
            receiver, sender, ..
        } => vec![("[a]", render_agent(sender)), ("[b]", render_agent(receiver))],
        LogicalForm::PartWhole { whole_agent, .. } => vec![("[a]", render_agent(whole_agent))],
        LogicalForm::CompEq {
            agent_a,
            agent_b,
            agent_c,
            agent_d,
            ..
        } => vec![
            ("[a]", render_agent(agent_a)),
            ("[b]", render_agent(agent_b)),
            ("[c]", render_agent(agent_c)),
            ("[d]", render_agent(agent_d)),
        ],
    };
    for (slot, value) in agent_slots {
        text = text.replace(slot, &value);
    }
    text = text.replace("[q]", &quantity.to_string());
    text = text.replace("[e]", &entity_base(entity, vocab));
    if let Some(attr) = &entity.attribute {
        text = text.replace("[k]", attr);
    }
    if let Some(unit) = &entity.unit {
        text = text.replace("[u]", &pluralize(unit));
    }
    text
}

/// "Alice", "Lucy and Emma", or "Alice, Bob, and Carol".
fn render_agent(agent: &Agent) -> String {
    let parts = agent.parts();
    match parts.len() {
        1 => parts[0].clone(),
        2 => format!("{} and {}", parts[0], parts[1]),
        _ => {
            let head = parts[..parts.len() - 1].join(", ");
            format!("{}, and {}", head, parts[parts.len() - 1])
        }
    }
}

/// Plural noun for an entity or entity conjunction, before attribute and
/// unit decoration: "apples", or the shared hypernym ("fruits") for mixed
/// conjunctions, with "items" as the fallback.
fn entity_base(entity: &Entity, vocab: &Vocab) -> String {
    let mut names: Vec<&str> = Vec::new();
    for part in entity.parts() {
        if !names.contains(&part.as_str()) {
            names.push(part);
        }
    }
    if names.len() == 1 {
        return pluralize(names[0]);
    }
    let hypernyms: Vec<&str> = names.iter().map(|n| vocab.hypernym(n)).collect();
    if hypernyms.windows(2).all(|w| w[0] == w[1]) {
        pluralize(hypernyms[0])
    } else {
        "items".to_string()
    }
}

/// Full noun phrase including attribute/unit, used by the fixed
/// chain-of-thought templates: "red bottles of soap".
fn entity_phrase(entity: &Entity, vocab: &Vocab) -> String {
    let base = entity_base(entity, vocab);
    match (&entity.attribute, &entity.unit) {
        (None, None) => base,
        (Some(k), None) => format!("{k} {base}"),
        (None, Some(u)) => format!("{} of {base}", pluralize(u)),
        (Some(k), Some(u)) => format!("{k} {} of {base}", pluralize(u)),
    }
}

/// s-suffix pluralization with the usual -es/-ies rules and a small
/// irregulars table for mass nouns.
pub fn pluralize(word: &str) -> String {
    const IRREGULAR: &[(&str, &str)] = &[("soap", "soap")];
    if let Some((_, plural)) = IRREGULAR.iter().find(|(w, _)| *w == word) {
        return plural.to_string();
    }
    if let Some(stem) = word.strip_suffix('y') {
        let before = stem.chars().last();
        if before.is_some_and(|c| !"aeiou".contains(c)) {
            return format!("{stem}ies");
        }
    }
    for suffix in ["s", "x", "z", "ch", "sh"] {
        if word.ends_with(suffix) {
            return format!("{word}es");
        }
    }
    format!("{word}s")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn apple() -> Entity {
        Entity::new("apple")
    }

    fn cont(name: &str, q: i64) -> LogicalForm {
        LogicalForm::container(Agent::atomic(name), Quantity::Known(q), apple())
    }

    fn comp(a: &str, b: &str, q: i64) -> LogicalForm {
        LogicalForm::comparison(Agent::atomic(a), Agent::atomic(b), Quantity::Known(q), apple())
    }

    /// Depth-3 left-leaning chain whose third sentence reads
    /// "Lucy has 11 more apples than John."
    fn apple_chain() -> ProofTree {
        let step1 = ProofTree::Step {
            rule: RuleId::CompAdd,
            conclusion: cont("John", 11),
            children: vec![
                ProofTree::Axiom(cont("Daniel", 7)),
                ProofTree::Axiom(comp("John", "Daniel", 4)),
            ],
        };
        let step2 = ProofTree::Step {
            rule: RuleId::CompAdd,
            conclusion: cont("Lucy", 22),
            children: vec![step1, ProofTree::Axiom(comp("Lucy", "John", 11))],
        };
        ProofTree::Step {
            rule: RuleId::CompAdd,
            conclusion: cont("Henry", 17),
            children: vec![step2, ProofTree::Axiom(comp("Henry", "Lucy", -5))],
        }
    }

    fn single_template_set() -> TemplateSet {
        TemplateSet::parse(
            "container|any|[a] has [q] [e].\n\
             comparison|more|[a] has [q] more [e] than [b].\n\
             comparison|fewer|[a] has [q] fewer [e] than [b].\n\
             transfer|any|[a] gave [b] [q] [e].\n\
             partwhole|any|[a] have [q] [e] combined.\n\
             comp-eq|any|The number of [e] that [a] has more than [b] is the same as the difference between the number of [e] that [c] has compared to [d].\n",
            "container|any|How many [e] does [a] have?\n\
             comparison|more|How many more [e] does [a] have than [b]?\n\
             comparison|fewer|How many fewer [e] does [a] have than [b]?\n\
             partwhole|any|How many [e] do [a] have combined?\n",
        )
        .unwrap()
    }

    #[test]
    fn canonical_order_is_left_to_right() {
        let tree = apple_chain();
        assert_eq!(
            order_leaves(&tree, &OrderingPolicy::Canonical).unwrap(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn move_to_front_places_one_leaf_first() {
        let tree = apple_chain();
        assert_eq!(
            order_leaves(&tree, &OrderingPolicy::MoveToFront(2)).unwrap(),
            vec![2, 0, 1, 3]
        );
        // distance 0 is the identity
        assert_eq!(
            order_leaves(&tree, &OrderingPolicy::MoveToFront(0)).unwrap(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(
            order_leaves(&tree, &OrderingPolicy::MoveToFront(9)).unwrap_err(),
            RealizeError::InvalidDistance { distance: 9, leaves: 4 }
        );
    }

    #[test]
    fn transfer_trees_reject_reordering() {
        let tree = ProofTree::Step {
            rule: RuleId::TransferApply,
            conclusion: cont("Alice", 5),
            children: vec![
                ProofTree::Axiom(cont("Alice", 3)),
                ProofTree::Axiom(LogicalForm::transfer(
                    Agent::atomic("Alice"),
                    Agent::atomic("Bob"),
                    Quantity::Known(2),
                    apple(),
                )),
            ],
        };
        assert_eq!(
            order_leaves(&tree, &OrderingPolicy::MoveToFront(1)).unwrap_err(),
            RealizeError::NonCommutativeOrdering
        );
        assert_eq!(
            order_leaves(&tree, &OrderingPolicy::Permutation(vec![1, 0])).unwrap_err(),
            RealizeError::NonCommutativeOrdering
        );
        // canonical and identity are always fine
        assert!(order_leaves(&tree, &OrderingPolicy::Canonical).is_ok());
        assert!(order_leaves(&tree, &OrderingPolicy::MoveToFront(0)).is_ok());
    }

    #[test]
    fn distance_two_move_puts_lucy_sentence_first() {
        let tree = apple_chain();
        let templates = single_template_set();
        let vocab = Vocab::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let canonical = realize(&tree, &OrderingPolicy::Canonical, &templates, vocab, &mut rng)
            .unwrap();
        assert_eq!(
            canonical.body_sentences,
            vec![
                "Daniel has 7 apples.",
                "John has 4 more apples than Daniel.",
                "Lucy has 11 more apples than John.",
                "Henry has 5 fewer apples than Lucy.",
            ]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let moved = realize(&tree, &OrderingPolicy::MoveToFront(2), &templates, vocab, &mut rng)
            .unwrap();
        assert_eq!(moved.body_sentences[0], "Lucy has 11 more apples than John.");
        assert_eq!(
            moved.body_sentences[1..],
            canonical.body_sentences[..2].iter().chain(&canonical.body_sentences[3..]).cloned().collect::<Vec<_>>()[..]
        );
        // multiset unchanged, exactly one sentence repositioned
        let mut a = canonical.body_sentences.clone();
        let mut b = moved.body_sentences.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        let displaced = canonical
            .body_sentences
            .iter()
            .zip(&moved.body_sentences)
            .filter(|(x, y)| x != y)
            .count();
        assert_eq!(displaced, 3); // positions 0..2 shift, 3 unchanged
    }

    #[test]
    fn cot_repeats_axioms_in_canonical_order_and_ends_with_answer() {
        let tree = apple_chain();
        let templates = single_template_set();
        let vocab = Vocab::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = realize(&tree, &OrderingPolicy::Canonical, &templates, vocab, &mut rng).unwrap();
        assert_eq!(r.cot_sentences.len(), tree.node_count());
        // axiom sentences appear inside the trace in canonical order
        let axiom_positions: Vec<usize> = r
            .body_sentences
            .iter()
            .map(|s| r.cot_sentences.iter().position(|c| c == s).unwrap())
            .collect();
        assert!(axiom_positions.windows(2).all(|w| w[0] < w[1]));
        // internal steps state the arithmetic
        assert!(r.cot_sentences.contains(&"So John has 7+4=11 apples.".to_string()));
        assert!(r.cot_sentences.contains(&"So Lucy has 11+11=22 apples.".to_string()));
        assert_eq!(r.cot_sentences.last().unwrap(), "So Henry has 22-5=17 apples.");
        assert_eq!(r.question_sentence, "How many apples does Henry have?");
    }

    #[test]
    fn every_internal_step_follows_its_premises() {
        let tree = apple_chain();
        let templates = single_template_set();
        let vocab = Vocab::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = realize(&tree, &OrderingPolicy::Canonical, &templates, vocab, &mut rng).unwrap();
        // post order interleaves each step right after its premises
        assert_eq!(
            r.cot_sentences,
            vec![
                "Daniel has 7 apples.",
                "John has 4 more apples than Daniel.",
                "So John has 7+4=11 apples.",
                "Lucy has 11 more apples than John.",
                "So Lucy has 11+11=22 apples.",
                "Henry has 5 fewer apples than Lucy.",
                "So Henry has 22-5=17 apples.",
            ]
        );
    }

    #[test]
    fn single_axiom_cot_is_sentence_plus_answer() {
        let tree = ProofTree::Axiom(cont("Alice", 5));
        let templates = single_template_set();
        let vocab = Vocab::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = realize(&tree, &OrderingPolicy::Canonical, &templates, vocab, &mut rng).unwrap();
        assert_eq!(
            r.cot_sentences,
            vec!["Alice has 5 apples.".to_string(), "The answer is 5.".to_string()]
        );
    }

    #[test]
    fn same_seed_same_text() {
        let tree = apple_chain();
        let templates = TemplateSet::builtin();
        let vocab = Vocab::builtin();
        let a = realize(
            &tree,
            &OrderingPolicy::Canonical,
            &templates,
            vocab,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        let b = realize(
            &tree,
            &OrderingPolicy::Canonical,
            &templates,
            vocab,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decorated_entities_render_attribute_and_unit() {
        let soap = Entity::with_decor("soap", Some("red".into()), Some("bottle".into()));
        let form = LogicalForm::container(Agent::atomic("Jackson"), Quantity::Known(16), soap);
        let templates = TemplateSet::builtin();
        let vocab = Vocab::builtin();
        let eligible = TemplateSet::eligible(&templates.declarative, &form).unwrap();
        assert!(!eligible.is_empty());
        let text = fill_template("[a] has [q] [k] [u] of [e].", &form, vocab);
        assert_eq!(text, "Jackson has 16 red bottles of soap.");
    }

    #[test]
    fn fewer_sentence_comes_from_negative_quantity() {
        let form = LogicalForm::comparison(
            Agent::atomic("Lucy"),
            Agent::atomic("Nicholas"),
            Quantity::Known(-6),
            Entity::new("computer"),
        );
        let text = fill_template("[a] has [q] fewer [e] than [b].", &form, Vocab::builtin());
        assert_eq!(text, "Lucy has 6 fewer computers than Nicholas.");
    }

    #[test]
    fn missing_template_is_reported() {
        let set = TemplateSet::parse("container|any|[a] has [q] [e].\n", "").unwrap();
        let form = LogicalForm::container(
            Agent::atomic("A"),
            Quantity::Known(3),
            Entity::with_decor("apple", Some("red".into()), None),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = TemplateSet::pick(&set.declarative, "declarative", &form, &mut rng).unwrap_err();
        assert!(matches!(err, RealizeError::MissingTemplate { attribute: true, .. }));
    }

    #[test]
    fn partwhole_conjunctions_use_hypernyms() {
        let vocab = Vocab::builtin();
        let mixed = Entity::conjunction(
            vec!["apple".into(), "banana".into(), "grape".into()],
            None,
            None,
        );
        assert_eq!(entity_base(&mixed, vocab), "fruits");
        let same = Entity::conjunction(vec!["apple".into()], None, None);
        assert_eq!(entity_base(&same, vocab), "apples");
        let unrelated = Entity::conjunction(vec!["apple".into(), "computer".into()], None, None);
        assert_eq!(entity_base(&unrelated, vocab), "items");
    }

    #[test]
    fn pluralize_handles_rules_and_irregulars() {
        assert_eq!(pluralize("apple"), "apples");
        assert_eq!(pluralize("cherry"), "cherries");
        assert_eq!(pluralize("peach"), "peaches");
        assert_eq!(pluralize("box"), "boxes");
        assert_eq!(pluralize("soap"), "soap");
        assert_eq!(pluralize("key"), "keys");
    }
}
