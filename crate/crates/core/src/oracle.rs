//! Independent ground-truth checker.
//!
//! Compiles a world model into a system of linear equations over one
//! integer unknown per (agent, timestamp) pair and solves it exactly,
//! without ever touching the proof tree or the inference rules. This is
//! the anti-correlated oracle for tree evaluation: the two must agree on
//! every generated problem.
//!
//! Timestamps make the non-commutative transfer semantics operational:
//! each transfer advances the clock for its two agents, and containers or
//! comparisons bind to whatever the current timestamp is at their body
//! position.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::logic::{Agent, LogicalForm, WorldModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("invalid world model: {0}")]
    InvalidWorldModel(String),
    #[error("system pins the answer to the non-integer value {0}")]
    NonIntegerSolution(String),
}

/// Result of solving a world model for its question placeholder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Unique(i64),
    Underdetermined,
    Inconsistent,
}

/// Sparse linear system built from a world model body.
pub struct LinearSystem {
    /// Index of the current variable for each agent name.
    current: HashMap<String, usize>,
    var_count: usize,
    /// Each equation: (coefficient per variable index, right-hand side).
    equations: Vec<(HashMap<usize, i64>, i64)>,
}

impl LinearSystem {
    pub fn new() -> Self {
        LinearSystem {
            current: HashMap::new(),
            var_count: 0,
            equations: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    fn var(&mut self, agent: &str) -> usize {
        if let Some(&idx) = self.current.get(agent) {
            return idx;
        }
        let idx = self.var_count;
        self.var_count += 1;
        self.current.insert(agent.to_string(), idx);
        idx
    }

    fn fresh_var(&mut self, agent: &str) -> usize {
        let idx = self.var_count;
        self.var_count += 1;
        self.current.insert(agent.to_string(), idx);
        idx
    }

    fn push(&mut self, coeffs: HashMap<usize, i64>, rhs: i64) {
        self.equations.push((coeffs, rhs));
    }

    /// Add the constraint expressed by one body form. Agent conjunctions
    /// contribute the sum of their members' counts, so partwhole forms can
    /// stand in for container premises.
    pub fn add_form(&mut self, form: &LogicalForm) -> Result<(), OracleError> {
        let q = |form: &LogicalForm| -> Result<i64, OracleError> {
            form.quantity()
                .and_then(|q| q.value())
                .ok_or_else(|| OracleError::InvalidWorldModel(format!("placeholder in body: {form}")))
        };
        match form {
            LogicalForm::Container { agent, .. } => {
                let rhs = q(form)?;
                let coeffs = self.sum_coeffs(&[(agent, 1)]);
                self.push(coeffs, rhs);
            }
            LogicalForm::Comparison {
                agent_a, agent_b, ..
            } => {
                let rhs = q(form)?;
                let coeffs = self.sum_coeffs(&[(agent_a, 1), (agent_b, -1)]);
                self.push(coeffs, rhs);
            }
            LogicalForm::Transfer {
                receiver, sender, ..
            } => {
                if !receiver.is_atomic() || !sender.is_atomic() {
                    return Err(OracleError::InvalidWorldModel(
                        "transfer between agent groups is not defined".into(),
                    ));
                }
                let amount = q(form)?;
                let recv_old = self.var(receiver.name());
                let send_old = self.var(sender.name());
                let recv_new = self.fresh_var(receiver.name());
                let send_new = self.fresh_var(sender.name());
                // x_recv' - x_recv = q ; x_send' - x_send = -q
                self.push(HashMap::from([(recv_new, 1), (recv_old, -1)]), amount);
                self.push(HashMap::from([(send_new, 1), (send_old, -1)]), -amount);
            }
            LogicalForm::PartWhole { whole_agent, .. } => {
                let rhs = q(form)?;
                let coeffs = self.sum_coeffs(&[(whole_agent, 1)]);
                self.push(coeffs, rhs);
            }
            LogicalForm::CompEq {
                agent_a,
                agent_b,
                agent_c,
                agent_d,
                ..
            } => {
                // count(a) - count(b) = count(c) - count(d)
                let coeffs =
                    self.sum_coeffs(&[(agent_a, 1), (agent_b, -1), (agent_c, -1), (agent_d, 1)]);
                self.push(coeffs, 0);
            }
        }
        Ok(())
    }

    fn sum_coeffs(&mut self, terms: &[(&Agent, i64)]) -> HashMap<usize, i64> {
        let mut coeffs = HashMap::new();
        for (agent, weight) in terms {
            for part in agent.parts() {
                let x = self.var(part);
                *coeffs.entry(x).or_insert(0) += weight;
            }
        }
        coeffs
    }

    /// The linear functional asked for by a question form.
    fn objective(&mut self, question: &LogicalForm) -> Result<HashMap<usize, i64>, OracleError> {
        match question {
            LogicalForm::Container { agent, .. } => Ok(self.sum_coeffs(&[(agent, 1)])),
            LogicalForm::Comparison {
                agent_a, agent_b, ..
            } => Ok(self.sum_coeffs(&[(agent_a, 1), (agent_b, -1)])),
            LogicalForm::PartWhole { whole_agent, .. } => {
                Ok(self.sum_coeffs(&[(whole_agent, 1)]))
            }
            other => Err(OracleError::InvalidWorldModel(format!(
                "{} cannot be a question",
                other.predicate()
            ))),
        }
    }
}

impl Default for LinearSystem {
    fn default() -> Self {
        Self::new()
    }
}

/// Solve a world model for the integer value of its question placeholder.
// index loops: rows[r] is updated against rows[pivot_row] in place
#[allow(clippy::needless_range_loop)]
pub fn solve(world: &WorldModel) -> Result<SolveOutcome, OracleError> {
    world
        .validate()
        .map_err(|e| OracleError::InvalidWorldModel(e.to_string()))?;
    let mut system = LinearSystem::new();
    for form in &world.body {
        system.add_form(form)?;
    }
    let objective = system.objective(&world.question)?;

    let n = system.var_count;
    let mut rows: Vec<Vec<BigRational>> = system
        .equations
        .iter()
        .map(|(coeffs, rhs)| {
            let mut row = vec![BigRational::zero(); n + 1];
            for (&x, &c) in coeffs {
                row[x] = BigRational::from(BigInt::from(c));
            }
            row[n] = BigRational::from(BigInt::from(*rhs));
            row
        })
        .collect();

    // reduced row echelon form with partial pivoting on magnitude
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..n {
        let best = (pivot_row..rows.len())
            .filter(|&r| !rows[r][col].is_zero())
            .max_by_key(|&r| rows[r][col].abs());
        let Some(best) = best else { continue };
        rows.swap(pivot_row, best);
        let pivot = rows[pivot_row][col].clone();
        for val in rows[pivot_row].iter_mut() {
            *val /= pivot.clone();
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..=n {
                    let sub = factor.clone() * rows[pivot_row][c].clone();
                    rows[r][c] -= sub;
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }

    // a row 0 = nonzero means the body contradicts itself
    for row in rows.iter().skip(pivot_row) {
        if row[..n].iter().all(Zero::is_zero) && !row[n].is_zero() {
            return Ok(SolveOutcome::Inconsistent);
        }
    }

    // express the objective in terms of free variables; it is determined
    // exactly when every free-variable coefficient cancels
    let mut value = BigRational::zero();
    let mut residual: HashMap<usize, BigRational> = objective
        .iter()
        .map(|(&x, &c)| (x, BigRational::from(BigInt::from(c))))
        .collect();
    for (r, &col) in pivot_cols.iter().enumerate() {
        let Some(coef) = residual.remove(&col) else {
            continue;
        };
        if coef.is_zero() {
            continue;
        }
        // x_col = rhs_r - sum over non-pivot columns of row r
        value += coef.clone() * rows[r][n].clone();
        for c in 0..n {
            if c != col && !rows[r][c].is_zero() {
                let delta = coef.clone() * rows[r][c].clone();
                let entry = residual.entry(c).or_insert_with(BigRational::zero);
                *entry -= delta;
            }
        }
    }
    if residual.values().any(|c| !c.is_zero()) {
        return Ok(SolveOutcome::Underdetermined);
    }
    if !value.is_integer() {
        return Err(OracleError::NonIntegerSolution(value.to_string()));
    }
    let value = value.to_integer();
    let value = i64::try_from(value)
        .map_err(|_| OracleError::NonIntegerSolution("out of i64 range".into()))?;
    Ok(SolveOutcome::Unique(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Agent, Entity, Quantity};

    fn cont(name: &str, q: i64, entity: &str) -> LogicalForm {
        LogicalForm::container(Agent::atomic(name), Quantity::Known(q), Entity::new(entity))
    }

    fn comp(a: &str, b: &str, q: i64, entity: &str) -> LogicalForm {
        LogicalForm::comparison(
            Agent::atomic(a),
            Agent::atomic(b),
            Quantity::Known(q),
            Entity::new(entity),
        )
    }

    fn comp_eq(a: &str, b: &str, c: &str, d: &str, entity: &str) -> LogicalForm {
        LogicalForm::comp_eq(
            Agent::atomic(a),
            Agent::atomic(b),
            Agent::atomic(c),
            Agent::atomic(d),
            Entity::new(entity),
        )
    }

    #[test]
    fn combined_apple_problem_solves_to_37() {
        // two-step proof on the left (Isabella -> Lucy), comp-eq on the
        // right (Emma pinned only through a difference of free agents)
        let world = WorldModel::new(
            vec![
                cont("Isabella", 17, "apple"),
                comp("Lucy", "Isabella", 10, "apple"),
                cont("Mia", 6, "apple"),
                comp("Noah", "Leo", 4, "apple"),
                comp_eq("Emma", "Mia", "Noah", "Leo", "apple"),
            ],
            LogicalForm::partwhole(
                Agent::conjunction(vec!["Lucy".into(), "Emma".into()]),
                Quantity::Placeholder,
                Entity::new("apple"),
            ),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Unique(37));
    }

    #[test]
    fn fruit_sum_solves_to_80() {
        let world = WorldModel::new(
            vec![
                cont("Emily", 5, "apple"),
                cont("Lily", 8, "banana"),
                cont("Abigail", 9, "banana"),
                cont("Benjamin", 11, "grape"),
                cont("Christopher", 20, "apple"),
                cont("Mila", 16, "grape"),
                cont("Sophia", 11, "watermelon"),
            ],
            LogicalForm::partwhole(
                Agent::conjunction(
                    ["Emily", "Lily", "Abigail", "Benjamin", "Christopher", "Mila", "Sophia"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                ),
                Quantity::Placeholder,
                Entity::conjunction(
                    vec!["apple".into(), "banana".into(), "grape".into(), "watermelon".into()],
                    None,
                    None,
                ),
            ),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Unique(80));
    }

    #[test]
    fn soap_chain_solves_to_34() {
        // comparison orientations as written in the problem text
        let e = "soap";
        let world = WorldModel::new(
            vec![
                cont("Jackson", 16, e),
                comp("Jackson", "Abigail", 10, e),
                comp("Joseph", "Abigail", 18, e),
                comp("Joseph", "James", -14, e),
                comp("Michael", "James", 2, e),
                comp("Ryan", "Michael", -16, e),
                comp("Mia", "Ryan", 10, e),
            ],
            LogicalForm::container(Agent::atomic("Mia"), Quantity::Placeholder, Entity::new(e)),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Unique(34));
    }

    #[test]
    fn plate_comp_eq_problem_solves_to_58() {
        let e = "plate";
        let world = WorldModel::new(
            vec![
                cont("Ella", 11, e),
                comp("Ella", "Jacob", -19, e),
                cont("Evelyn", 16, e),
                cont("Daniel", 10, e),
                comp_eq("Emma", "Jacob", "Evelyn", "Daniel", e),
                cont("Lucy", 2, e),
                comp("Amelia", "Lucy", 6, e),
                cont("Layla", 17, e),
                comp("Layla", "Sophia", -13, e),
                comp_eq("Emma", "Henry", "Amelia", "Sophia", e),
            ],
            LogicalForm::container(Agent::atomic("Henry"), Quantity::Placeholder, Entity::new(e)),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Unique(58));
    }

    #[test]
    fn partwhole_facts_constrain_their_members() {
        // a stated combined total plus one member pins the other member
        let world = WorldModel::new(
            vec![
                LogicalForm::partwhole(
                    Agent::conjunction(vec!["Alice".into(), "Bob".into()]),
                    Quantity::Known(8),
                    Entity::new("apple"),
                ),
                cont("Alice", 3, "apple"),
            ],
            LogicalForm::container(Agent::atomic("Bob"), Quantity::Placeholder, Entity::new("apple")),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Unique(5));
    }

    #[test]
    fn missing_agent_is_underdetermined() {
        let world = WorldModel::new(
            vec![cont("A", 5, "apple")],
            LogicalForm::container(Agent::atomic("B"), Quantity::Placeholder, Entity::new("apple")),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Underdetermined);
    }

    #[test]
    fn contradictory_body_is_inconsistent() {
        let world = WorldModel::new(
            vec![cont("A", 5, "apple"), cont("A", 6, "apple")],
            LogicalForm::container(Agent::atomic("A"), Quantity::Placeholder, Entity::new("apple")),
        );
        assert_eq!(solve(&world).unwrap(), SolveOutcome::Inconsistent);
    }

    #[test]
    fn transfer_advances_time() {
        let transfer = |recv: &str, send: &str, q: i64| {
            LogicalForm::transfer(
                Agent::atomic(recv),
                Agent::atomic(send),
                Quantity::Known(q),
                Entity::new("apple"),
            )
        };
        // container stated before the outgoing transfer: 5 - 2 = 3
        let before = WorldModel::new(
            vec![cont("Alice", 5, "apple"), transfer("Bob", "Alice", 2)],
            LogicalForm::container(Agent::atomic("Alice"), Quantity::Placeholder, Entity::new("apple")),
        );
        assert_eq!(solve(&before).unwrap(), SolveOutcome::Unique(3));
        // container stated after the transfer pins the current value: 5
        let after = WorldModel::new(
            vec![transfer("Bob", "Alice", 2), cont("Alice", 5, "apple")],
            LogicalForm::container(Agent::atomic("Alice"), Quantity::Placeholder, Entity::new("apple")),
        );
        assert_eq!(solve(&after).unwrap(), SolveOutcome::Unique(5));
    }

    #[test]
    fn commutative_bodies_solve_the_same_under_permutation() {
        let e = "apple";
        let body = vec![
            cont("Nicholas", 19, e),
            comp("Lucy", "Nicholas", -6, e),
            comp("Harper", "Lucy", -6, e),
            comp("John", "Harper", 10, e),
        ];
        let question =
            LogicalForm::container(Agent::atomic("John"), Quantity::Placeholder, Entity::new(e));
        let expected = solve(&WorldModel::new(body.clone(), question.clone())).unwrap();
        assert_eq!(expected, SolveOutcome::Unique(17));
        // rotate through a handful of permutations
        let perms: [[usize; 4]; 4] = [[3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1], [3, 0, 1, 2]];
        for perm in perms {
            let permuted: Vec<LogicalForm> = perm.iter().map(|&i| body[i].clone()).collect();
            assert_eq!(
                solve(&WorldModel::new(permuted, question.clone())).unwrap(),
                expected
            );
        }
    }
}
