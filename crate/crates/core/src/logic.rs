//! Logical forms: typed truth statements about agents owning entities.
//!
//! A logical form pairs a predicate with predicate-specific properties and
//! represents the semantics of a single sentence. A world model is the
//! ordered sequence of logical forms for a whole problem, split into a
//! body (facts) and a question (one form with a placeholder quantity).

use std::fmt;

use thiserror::Error;

/// Separator used when encoding agent/entity conjunctions.
pub const CONJ_SEP: &str = "∧";

/// An agent or conjunction of agents ("Alice", "Lucy∧Emma").
///
/// Most forms use atomic agents; `partwhole` conclusions combine several.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Agent {
    parts: Vec<String>,
}

impl Agent {
    pub fn atomic(name: impl Into<String>) -> Self {
        Agent {
            parts: vec![name.into()],
        }
    }

    pub fn conjunction(names: Vec<String>) -> Self {
        assert!(!names.is_empty(), "agent conjunction must be nonempty");
        Agent { parts: names }
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }

    pub fn is_atomic(&self) -> bool {
        self.parts.len() == 1
    }

    /// Name of an atomic agent; panics on conjunctions.
    pub fn name(&self) -> &str {
        assert!(self.is_atomic(), "name() called on agent conjunction");
        &self.parts[0]
    }

    fn encode(&self) -> String {
        self.parts.join(CONJ_SEP)
    }

    fn decode(s: &str) -> Self {
        Agent {
            parts: s.split(CONJ_SEP).map(str::to_string).collect(),
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

/// An entity (or conjunction of entities) together with the problem-wide
/// attribute/unit decoration, e.g. "red bottles of soap".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entity {
    parts: Vec<String>,
    pub attribute: Option<String>,
    pub unit: Option<String>,
}

impl Entity {
    pub fn new(name: impl Into<String>) -> Self {
        Entity {
            parts: vec![name.into()],
            attribute: None,
            unit: None,
        }
    }

    pub fn with_decor(
        name: impl Into<String>,
        attribute: Option<String>,
        unit: Option<String>,
    ) -> Self {
        Entity {
            parts: vec![name.into()],
            attribute,
            unit,
        }
    }

    pub fn conjunction(names: Vec<String>, attribute: Option<String>, unit: Option<String>) -> Self {
        assert!(!names.is_empty(), "entity conjunction must be nonempty");
        Entity {
            parts: names,
            attribute,
            unit,
        }
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }

    pub fn is_atomic(&self) -> bool {
        self.parts.len() == 1
    }

    pub fn name(&self) -> &str {
        assert!(self.is_atomic(), "name() called on entity conjunction");
        &self.parts[0]
    }

    /// True when two entities refer to the same things: equal name parts,
    /// attribute, and unit. Used for premise compatibility checks.
    pub fn matches(&self, other: &Entity) -> bool {
        self == other
    }

    fn encode(&self) -> String {
        self.parts.join(CONJ_SEP)
    }
}

/// An exact integer quantity or the question placeholder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Known(i64),
    Placeholder,
}

impl Quantity {
    pub fn value(self) -> Option<i64> {
        match self {
            Quantity::Known(v) => Some(v),
            Quantity::Placeholder => None,
        }
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self, Quantity::Placeholder)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Known(v) => write!(f, "{v}"),
            Quantity::Placeholder => write!(f, "?"),
        }
    }
}

/// The five predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    Container,
    Comparison,
    Transfer,
    PartWhole,
    CompEq,
}

impl Predicate {
    pub fn name(&self) -> &'static str {
        match self {
            Predicate::Container => "container",
            Predicate::Comparison => "comparison",
            Predicate::Transfer => "transfer",
            Predicate::PartWhole => "partwhole",
            Predicate::CompEq => "comp-eq",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single truth statement.
///
/// Sign conventions:
/// - `Comparison { agent_a, agent_b, quantity: q, .. }` asserts
///   `count(agent_a) = count(agent_b) + q`; negative `q` renders as "fewer".
/// - `Transfer` moves `quantity` of `entity` from `sender` to `receiver`.
/// - `CompEq { agent_a: a, agent_b: b, agent_c: c, agent_d: d, .. }` asserts
///   `count(a) - count(b) = count(c) - count(d)` and carries no quantity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LogicalForm {
    Container {
        agent: Agent,
        quantity: Quantity,
        entity: Entity,
    },
    Comparison {
        agent_a: Agent,
        agent_b: Agent,
        quantity: Quantity,
        entity: Entity,
    },
    Transfer {
        receiver: Agent,
        sender: Agent,
        quantity: Quantity,
        entity: Entity,
    },
    PartWhole {
        whole_agent: Agent,
        quantity: Quantity,
        whole_entity: Entity,
    },
    CompEq {
        agent_a: Agent,
        agent_b: Agent,
        agent_c: Agent,
        agent_d: Agent,
        entity: Entity,
    },
}

impl LogicalForm {
    pub fn container(agent: Agent, quantity: Quantity, entity: Entity) -> Self {
        LogicalForm::Container {
            agent,
            quantity,
            entity,
        }
    }

    pub fn comparison(agent_a: Agent, agent_b: Agent, quantity: Quantity, entity: Entity) -> Self {
        LogicalForm::Comparison {
            agent_a,
            agent_b,
            quantity,
            entity,
        }
    }

    pub fn transfer(receiver: Agent, sender: Agent, quantity: Quantity, entity: Entity) -> Self {
        LogicalForm::Transfer {
            receiver,
            sender,
            quantity,
            entity,
        }
    }

    pub fn partwhole(whole_agent: Agent, quantity: Quantity, whole_entity: Entity) -> Self {
        LogicalForm::PartWhole {
            whole_agent,
            quantity,
            whole_entity,
        }
    }

    pub fn comp_eq(
        agent_a: Agent,
        agent_b: Agent,
        agent_c: Agent,
        agent_d: Agent,
        entity: Entity,
    ) -> Self {
        LogicalForm::CompEq {
            agent_a,
            agent_b,
            agent_c,
            agent_d,
            entity,
        }
    }

    pub fn predicate(&self) -> Predicate {
        match self {
            LogicalForm::Container { .. } => Predicate::Container,
            LogicalForm::Comparison { .. } => Predicate::Comparison,
            LogicalForm::Transfer { .. } => Predicate::Transfer,
            LogicalForm::PartWhole { .. } => Predicate::PartWhole,
            LogicalForm::CompEq { .. } => Predicate::CompEq,
        }
    }

    /// The quantity property, if the predicate has one (comp-eq does not).
    pub fn quantity(&self) -> Option<Quantity> {
        match self {
            LogicalForm::Container { quantity, .. }
            | LogicalForm::Comparison { quantity, .. }
            | LogicalForm::Transfer { quantity, .. }
            | LogicalForm::PartWhole { quantity, .. } => Some(*quantity),
            LogicalForm::CompEq { .. } => None,
        }
    }

    pub fn has_placeholder(&self) -> bool {
        self.quantity().is_some_and(|q| q.is_placeholder())
    }

    pub fn entity(&self) -> &Entity {
        match self {
            LogicalForm::Container { entity, .. }
            | LogicalForm::Comparison { entity, .. }
            | LogicalForm::Transfer { entity, .. }
            | LogicalForm::CompEq { entity, .. } => entity,
            LogicalForm::PartWhole { whole_entity, .. } => whole_entity,
        }
    }

    /// All agents mentioned by the form, in property order.
    pub fn agents(&self) -> Vec<&Agent> {
        match self {
            LogicalForm::Container { agent, .. } => vec![agent],
            LogicalForm::Comparison {
                agent_a, agent_b, ..
            } => vec![agent_a, agent_b],
            LogicalForm::Transfer {
                receiver, sender, ..
            } => vec![receiver, sender],
            LogicalForm::PartWhole { whole_agent, .. } => vec![whole_agent],
            LogicalForm::CompEq {
                agent_a,
                agent_b,
                agent_c,
                agent_d,
                ..
            } => vec![agent_a, agent_b, agent_c, agent_d],
        }
    }

    /// Replace the quantity slot, keeping everything else.
    pub fn with_quantity(&self, quantity: Quantity) -> Self {
        let mut form = self.clone();
        match &mut form {
            LogicalForm::Container { quantity: q, .. }
            | LogicalForm::Comparison { quantity: q, .. }
            | LogicalForm::Transfer { quantity: q, .. }
            | LogicalForm::PartWhole { quantity: q, .. } => *q = quantity,
            LogicalForm::CompEq { .. } => {}
        }
        form
    }

    /// Semantic equality: literal equality plus the comparison sign-flip
    /// equivalence comp(a,b,q) == comp(b,a,-q), partwhole premise
    /// permutations, and the two symmetries of comp-eq.
    pub fn semantically_equal(&self, other: &LogicalForm) -> bool {
        if self == other {
            return true;
        }
        match (self, other) {
            (
                LogicalForm::Comparison {
                    agent_a: a1,
                    agent_b: b1,
                    quantity: Quantity::Known(q1),
                    entity: e1,
                },
                LogicalForm::Comparison {
                    agent_a: a2,
                    agent_b: b2,
                    quantity: Quantity::Known(q2),
                    entity: e2,
                },
            ) => a1 == b2 && b1 == a2 && *q1 == -*q2 && e1 == e2,
            (
                LogicalForm::PartWhole {
                    whole_agent: a1,
                    quantity: q1,
                    whole_entity: e1,
                },
                LogicalForm::PartWhole {
                    whole_agent: a2,
                    quantity: q2,
                    whole_entity: e2,
                },
            ) => {
                let mut x = a1.parts().to_vec();
                let mut y = a2.parts().to_vec();
                x.sort();
                y.sort();
                let mut ex = e1.parts().to_vec();
                let mut ey = e2.parts().to_vec();
                ex.sort();
                ey.sort();
                q1 == q2
                    && x == y
                    && ex == ey
                    && e1.attribute == e2.attribute
                    && e1.unit == e2.unit
            }
            (
                LogicalForm::CompEq {
                    agent_a: a1,
                    agent_b: b1,
                    agent_c: c1,
                    agent_d: d1,
                    entity: e1,
                },
                LogicalForm::CompEq {
                    agent_a: a2,
                    agent_b: b2,
                    agent_c: c2,
                    agent_d: d2,
                    entity: e2,
                },
            ) => {
                // a-b = c-d  <=>  c-d = a-b  <=>  b-a = d-c
                e1 == e2
                    && ((a1 == c2 && b1 == d2 && c1 == a2 && d1 == b2)
                        || (a1 == b2 && b1 == a2 && c1 == d2 && d1 == c2))
            }
            _ => false,
        }
    }

    /// Canonical textual encoding `predicate(prop=value, ...)` with the
    /// property order fixed per predicate.
    pub fn encode(&self) -> String {
        let mut props: Vec<(&str, String)> = Vec::new();
        let entity = self.entity();
        match self {
            LogicalForm::Container {
                agent, quantity, ..
            } => {
                props.push(("agent", agent.encode()));
                props.push(("quantity", quantity.to_string()));
                props.push(("entity", entity.encode()));
            }
            LogicalForm::Comparison {
                agent_a,
                agent_b,
                quantity,
                ..
            } => {
                props.push(("agentA", agent_a.encode()));
                props.push(("agentB", agent_b.encode()));
                props.push(("quantity", quantity.to_string()));
                props.push(("entity", entity.encode()));
            }
            LogicalForm::Transfer {
                receiver,
                sender,
                quantity,
                ..
            } => {
                props.push(("receiver_agent", receiver.encode()));
                props.push(("sender_agent", sender.encode()));
                props.push(("quantity", quantity.to_string()));
                props.push(("entity", entity.encode()));
            }
            LogicalForm::PartWhole {
                whole_agent,
                quantity,
                ..
            } => {
                props.push(("whole_agent", whole_agent.encode()));
                props.push(("quantity", quantity.to_string()));
                props.push(("whole_entity", entity.encode()));
            }
            LogicalForm::CompEq {
                agent_a,
                agent_b,
                agent_c,
                agent_d,
                ..
            } => {
                props.push(("agentA", agent_a.encode()));
                props.push(("agentB", agent_b.encode()));
                props.push(("agentC", agent_c.encode()));
                props.push(("agentD", agent_d.encode()));
                props.push(("entity", entity.encode()));
            }
        }
        if let Some(attr) = &entity.attribute {
            props.push(("attribute", attr.clone()));
        }
        if let Some(unit) = &entity.unit {
            props.push(("unit", unit.clone()));
        }
        let body: Vec<String> = props.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.predicate(), body.join(", "))
    }

    /// Parse the canonical encoding produced by [`LogicalForm::encode`].
    pub fn parse(input: &str) -> Result<LogicalForm, ParseError> {
        let input = input.trim();
        let open = input
            .find('(')
            .ok_or_else(|| ParseError::Malformed(input.to_string()))?;
        if !input.ends_with(')') {
            return Err(ParseError::Malformed(input.to_string()));
        }
        let pred_name = &input[..open];
        let inner = &input[open + 1..input.len() - 1];
        let mut props: Vec<(String, String)> = Vec::new();
        for piece in inner.split(", ") {
            let (k, v) = piece
                .split_once('=')
                .ok_or_else(|| ParseError::Malformed(input.to_string()))?;
            props.push((k.trim().to_string(), v.to_string()));
        }
        let get = |key: &str| -> Result<&str, ParseError> {
            props
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| ParseError::MissingProperty {
                    predicate: pred_name.to_string(),
                    property: key.to_string(),
                })
        };
        let quantity = |key: &str| -> Result<Quantity, ParseError> {
            let raw = get(key)?;
            if raw == "?" {
                Ok(Quantity::Placeholder)
            } else {
                raw.parse::<i64>()
                    .map(Quantity::Known)
                    .map_err(|_| ParseError::BadQuantity(raw.to_string()))
            }
        };
        let attribute = props
            .iter()
            .find(|(k, _)| k == "attribute")
            .map(|(_, v)| v.clone());
        let unit = props
            .iter()
            .find(|(k, _)| k == "unit")
            .map(|(_, v)| v.clone());
        let entity = |key: &str| -> Result<Entity, ParseError> {
            let raw = get(key)?;
            Ok(Entity {
                parts: raw.split(CONJ_SEP).map(str::to_string).collect(),
                attribute: attribute.clone(),
                unit: unit.clone(),
            })
        };
        let form = match pred_name {
            "container" => LogicalForm::Container {
                agent: Agent::decode(get("agent")?),
                quantity: quantity("quantity")?,
                entity: entity("entity")?,
            },
            "comparison" => LogicalForm::Comparison {
                agent_a: Agent::decode(get("agentA")?),
                agent_b: Agent::decode(get("agentB")?),
                quantity: quantity("quantity")?,
                entity: entity("entity")?,
            },
            "transfer" => LogicalForm::Transfer {
                receiver: Agent::decode(get("receiver_agent")?),
                sender: Agent::decode(get("sender_agent")?),
                quantity: quantity("quantity")?,
                entity: entity("entity")?,
            },
            "partwhole" => LogicalForm::PartWhole {
                whole_agent: Agent::decode(get("whole_agent")?),
                quantity: quantity("quantity")?,
                whole_entity: entity("whole_entity")?,
            },
            "comp-eq" => LogicalForm::CompEq {
                agent_a: Agent::decode(get("agentA")?),
                agent_b: Agent::decode(get("agentB")?),
                agent_c: Agent::decode(get("agentC")?),
                agent_d: Agent::decode(get("agentD")?),
                entity: entity("entity")?,
            },
            other => return Err(ParseError::UnknownPredicate(other.to_string())),
        };
        Ok(form)
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed logical form: {0}")]
    Malformed(String),
    #[error("{predicate}: {property} required")]
    MissingProperty { predicate: String, property: String },
    #[error("bad quantity: {0}")]
    BadQuantity(String),
    #[error("unknown predicate: {0}")]
    UnknownPredicate(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("no placeholder present in {0}")]
    NoPlaceholder(String),
    #[error("more than one placeholder present")]
    MultiplePlaceholders,
    #[error("invalid world model: {0}")]
    InvalidWorldModel(String),
}

/// Substitute the answer value into a question's placeholder.
pub fn substitute_answer(question: &LogicalForm, value: i64) -> Result<LogicalForm, LogicError> {
    if !question.has_placeholder() {
        return Err(LogicError::NoPlaceholder(question.encode()));
    }
    Ok(question.with_quantity(Quantity::Known(value)))
}

/// One violated invariant found by [`validate_form`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyName(&'static str),
    DuplicateConjunct { kind: &'static str, member: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyName(kind) => write!(f, "empty {kind} name"),
            Violation::DuplicateConjunct { kind, member } => {
                write!(f, "duplicate {kind} in conjunction: {member}")
            }
        }
    }
}

/// Report every violated value-level invariant of a form. Total function:
/// a structurally well-typed form always yields a (possibly empty) report.
pub fn validate_form(form: &LogicalForm) -> Vec<Violation> {
    let mut violations = Vec::new();
    for agent in form.agents() {
        let mut seen = std::collections::HashSet::new();
        for part in agent.parts() {
            if part.is_empty() {
                violations.push(Violation::EmptyName("agent"));
            }
            if !seen.insert(part.clone()) {
                violations.push(Violation::DuplicateConjunct {
                    kind: "agent",
                    member: part.clone(),
                });
            }
        }
    }
    let entity = form.entity();
    let mut seen = std::collections::HashSet::new();
    for part in entity.parts() {
        if part.is_empty() {
            violations.push(Violation::EmptyName("entity"));
        }
        if !seen.insert(part.clone()) {
            violations.push(Violation::DuplicateConjunct {
                kind: "entity",
                member: part.clone(),
            });
        }
    }
    violations
}

/// Ordered logical forms of a whole problem: body facts plus one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldModel {
    pub body: Vec<LogicalForm>,
    pub question: LogicalForm,
}

impl WorldModel {
    pub fn new(body: Vec<LogicalForm>, question: LogicalForm) -> Self {
        WorldModel { body, question }
    }

    /// Check the body/question placement invariants: nonempty body with no
    /// placeholders, exactly one placeholder in the question, and a
    /// question predicate that has a surface interrogative form.
    pub fn validate(&self) -> Result<(), LogicError> {
        if self.body.is_empty() {
            return Err(LogicError::InvalidWorldModel("empty body".into()));
        }
        for form in &self.body {
            if form.has_placeholder() {
                return Err(LogicError::InvalidWorldModel(format!(
                    "unexpected placeholder in body form {form}"
                )));
            }
            if !validate_form(form).is_empty() {
                return Err(LogicError::InvalidWorldModel(format!(
                    "invalid body form {form}"
                )));
            }
        }
        if !self.question.has_placeholder() {
            return Err(LogicError::NoPlaceholder(self.question.encode()));
        }
        match self.question.predicate() {
            Predicate::Container | Predicate::Comparison | Predicate::PartWhole => Ok(()),
            p => Err(LogicError::InvalidWorldModel(format!(
                "{p} cannot be a question"
            ))),
        }
    }

    /// The answer form: question with the placeholder filled in.
    pub fn answer_form(&self, value: i64) -> Result<LogicalForm, LogicError> {
        substitute_answer(&self.question, value)
    }
}
