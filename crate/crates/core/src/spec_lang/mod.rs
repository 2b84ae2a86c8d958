//! A small language of arithmetic matrices with bounded quantifiers.

mod ast;
mod lexer;
mod parser;
mod render;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

pub use ast::{CmpOp, Formula, Matrix, Quantifier, TermExpr};
pub use parser::{parse_document, parse_formula, parse_formula_with, parse_term, Document};
pub use render::{render_formula, render_matrix, render_term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("syntax error at byte {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax { position: usize, expected: Vec<String>, found: String },
    #[error("unbound variable `{name}` at byte {position}")]
    UnboundVariable { name: String, position: usize },
    #[error("quantifier at byte {position} needs a bound, as in `exists v <= t . phi`")]
    UnboundedQuantifier { position: usize },
    #[error("variable `{name}` at byte {position} is already bound")]
    Rebound { name: String, position: usize },
    #[error("at byte {position}: {message}")]
    Structure { position: usize, message: String },
    #[error("{0}")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for variable `{0}`")]
    MissingVariable(String),
}

pub type Assignment = BTreeMap<String, u64>;

fn slot_values(used: &BTreeSet<usize>, vars: &[String], env: &Assignment) -> Result<Vec<u64>, EvalError> {
    let mut values = vec![0; vars.len()];
    for &slot in used {
        let name = vars.get(slot).map(String::as_str).unwrap_or("?");
        values[slot] = *env.get(name).ok_or_else(|| EvalError::MissingVariable(name.to_string()))?;
    }
    Ok(values)
}

/// Evaluates `phi`, whose free slots are named by `vars`.
pub fn eval_formula(phi: &Formula, vars: &[String], env: &Assignment) -> Result<bool, EvalError> {
    let mut used = BTreeSet::new();
    phi.free_slots(vars.len(), &mut used);
    let mut values = slot_values(&used, vars, env)?;
    Ok(phi.eval(&mut values))
}

pub fn eval_term(t: &TermExpr, vars: &[String], env: &Assignment) -> Result<u64, EvalError> {
    let mut used = BTreeSet::new();
    t.free_slots(&mut used);
    Ok(t.eval(&slot_values(&used, vars, env)?))
}

impl Matrix {
    pub fn eval(&self, env: &Assignment) -> Result<bool, EvalError> {
        eval_formula(&self.body, &self.params, env)
    }
}

/// `forall x exists y A(x,y,c) <-> exists z forall u B(z,u,c)`, given by its two matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delta2Spec {
    a: Matrix,
    b: Matrix,
    p: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn decided(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }
}

impl Delta2Spec {
    pub fn from_document(doc: &Document) -> Result<Self, SpecError> {
        let get = |name: &str, params: [&str; 3]| -> Result<Matrix, SpecError> {
            let m = doc.declaration(name).ok_or_else(|| SpecError::Missing(format!("no declaration of {name}")))?;
            if m.params != params {
                return Err(SpecError::Missing(format!(
                    "{name} must be declared over ({}), found ({})",
                    params.join(","),
                    m.params.join(",")
                )));
            }
            Ok(m.clone())
        };
        Ok(Self::new(get("A", ["x", "y", "c"])?, get("B", ["z", "u", "c"])?))
    }

    fn new(a: Matrix, b: Matrix) -> Self {
        let p = combine(&a, &b);
        Delta2Spec { a, b, p }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn a_holds(&self, x: u64, y: u64, c: u64) -> bool {
        self.a.holds(&[x, y, c])
    }

    pub fn b_holds(&self, z: u64, u: u64, c: u64) -> bool {
        self.b.holds(&[z, u, c])
    }

    /// The matrix `p(x,y,c)`, true when `p(x,y,c) = 0`.
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn p_holds(&self, x: u64, y: u64, c: u64) -> bool {
        self.p.holds(&[x, y, c])
    }

    pub fn render(&self) -> String {
        format!("{}\n{}\n", render_matrix(&self.a), render_matrix(&self.b))
    }

    /// Window verdict on whether `c` belongs to the set.
    ///
    /// The B side holds when some `z <= w` survives every `u <= 2w`; the
    /// refutation side when some `x <= w` has no `y <= 2w` with `A`. Exactly one
    /// side must hold for a decided verdict.
    pub fn brute_truth(&self, c: u64, w: u64) -> Truth {
        let wide = w.saturating_mul(2);
        let b_side = (0..=w).any(|z| (0..=wide).all(|u| self.b_holds(z, u, c)));
        let not_a_side = (0..=w).any(|x| (0..=wide).all(|y| !self.a_holds(x, y, c)));
        match (b_side, not_a_side) {
            (true, false) => Truth::True,
            (false, true) => Truth::False,
            _ => Truth::Unknown,
        }
    }
}

pub fn parse_spec(src: &str) -> Result<Delta2Spec, SpecError> {
    Delta2Spec::from_document(&parse_document(src)?)
}

/// `p(x,y,c)`: `A(p0(x), p0(y), c) -> B(p1(x), p1(y), c)`.
pub fn combine_to_p(spec: &Delta2Spec) -> Matrix {
    spec.p.clone()
}

fn combine(a: &Matrix, b: &Matrix) -> Matrix {
    let params: Vec<String> = ["x", "y", "c"].iter().map(|s| s.to_string()).collect();
    let v = |i: usize| Box::new(TermExpr::Var(i));
    let left = [TermExpr::Left(v(0)), TermExpr::Left(v(1)), TermExpr::Var(2)];
    let right = [TermExpr::Right(v(0)), TermExpr::Right(v(1)), TermExpr::Var(2)];
    let mut names = params.clone();
    let lhs = parser::instantiate(&a.body, &left, 3, &mut names);
    let rhs = parser::instantiate(&b.body, &right, 3, &mut names);
    Matrix { name: "p".into(), params, body: Formula::Implies(Box::new(lhs), Box::new(rhs)) }
}

/// The last declaration of a document, used as a standalone predicate.
pub fn parse_predicate(src: &str) -> Result<Matrix, SpecError> {
    let doc = parse_document(src)?;
    doc.declarations.last().cloned().ok_or_else(|| SpecError::Missing("no declaration found".into()))
}

#[cfg(test)]
mod tests;
