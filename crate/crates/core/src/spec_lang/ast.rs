use std::collections::BTreeSet;

use crate::limr::coding;

/// Variables are stored as slot indices into an evaluation stack. Declared
/// parameters occupy the first slots, each bounded quantifier pushes one more.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermExpr {
    Const(u64),
    Var(usize),
    Add(Box<TermExpr>, Box<TermExpr>),
    Mul(Box<TermExpr>, Box<TermExpr>),
    /// Truncated subtraction.
    Monus(Box<TermExpr>, Box<TermExpr>),
    Pair(Box<TermExpr>, Box<TermExpr>),
    Left(Box<TermExpr>),
    Right(Box<TermExpr>),
    Tuple(Vec<TermExpr>),
    /// `proj_k_i`, with `index` counted from 1.
    TupleProj {
        arity: usize,
        index: usize,
        arg: Box<TermExpr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Le,
    Lt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, TermExpr, TermExpr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Binds slot `env.len()` at the point of evaluation; `bound` is read in the outer scope.
    Bounded {
        quantifier: Quantifier,
        var: String,
        bound: TermExpr,
        body: Box<Formula>,
    },
}

impl TermExpr {
    pub fn eval(&self, env: &[u64]) -> u64 {
        match self {
            TermExpr::Const(n) => *n,
            TermExpr::Var(i) => env[*i],
            TermExpr::Add(a, b) => a.eval(env).saturating_add(b.eval(env)),
            TermExpr::Mul(a, b) => a.eval(env).saturating_mul(b.eval(env)),
            TermExpr::Monus(a, b) => a.eval(env).saturating_sub(b.eval(env)),
            TermExpr::Pair(a, b) => coding::pair(a.eval(env), b.eval(env)),
            TermExpr::Left(a) => coding::left(a.eval(env)),
            TermExpr::Right(a) => coding::right(a.eval(env)),
            TermExpr::Tuple(xs) => {
                let vals: Vec<u64> = xs.iter().map(|x| x.eval(env)).collect();
                coding::encode(&vals)
            }
            TermExpr::TupleProj { arity, index, arg } => coding::project(*arity, *index, arg.eval(env)),
        }
    }

    pub fn free_slots(&self, out: &mut BTreeSet<usize>) {
        match self {
            TermExpr::Const(_) => {}
            TermExpr::Var(i) => {
                out.insert(*i);
            }
            TermExpr::Add(a, b) | TermExpr::Mul(a, b) | TermExpr::Monus(a, b) | TermExpr::Pair(a, b) => {
                a.free_slots(out);
                b.free_slots(out);
            }
            TermExpr::Left(a) | TermExpr::Right(a) => a.free_slots(out),
            TermExpr::TupleProj { arg, .. } => arg.free_slots(out),
            TermExpr::Tuple(xs) => xs.iter().for_each(|x| x.free_slots(out)),
        }
    }

    /// Replaces every slot `i < subst.len()` by `subst[i]`.
    pub fn substitute(&self, subst: &[TermExpr]) -> TermExpr {
        let go = |t: &TermExpr| Box::new(t.substitute(subst));
        match self {
            TermExpr::Const(n) => TermExpr::Const(*n),
            TermExpr::Var(i) => subst.get(*i).cloned().unwrap_or(TermExpr::Var(*i)),
            TermExpr::Add(a, b) => TermExpr::Add(go(a), go(b)),
            TermExpr::Mul(a, b) => TermExpr::Mul(go(a), go(b)),
            TermExpr::Monus(a, b) => TermExpr::Monus(go(a), go(b)),
            TermExpr::Pair(a, b) => TermExpr::Pair(go(a), go(b)),
            TermExpr::Left(a) => TermExpr::Left(go(a)),
            TermExpr::Right(a) => TermExpr::Right(go(a)),
            TermExpr::Tuple(xs) => TermExpr::Tuple(xs.iter().map(|x| x.substitute(subst)).collect()),
            TermExpr::TupleProj { arity, index, arg } => {
                TermExpr::TupleProj { arity: *arity, index: *index, arg: go(arg) }
            }
        }
    }
}

impl CmpOp {
    pub fn holds(self, a: u64, b: u64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
        }
    }
}

impl Formula {
    /// `env` must hold a value for every free slot. It is restored on return.
    pub fn eval(&self, env: &mut Vec<u64>) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Cmp(op, a, b) => op.holds(a.eval(env), b.eval(env)),
            Formula::Not(a) => !a.eval(env),
            Formula::And(a, b) => a.eval(env) && b.eval(env),
            Formula::Or(a, b) => a.eval(env) || b.eval(env),
            Formula::Implies(a, b) => !a.eval(env) || b.eval(env),
            Formula::Bounded { quantifier, bound, body, .. } => {
                let limit = bound.eval(env);
                let want = *quantifier == Quantifier::Exists;
                let slot = env.len();
                env.push(0);
                let mut result = !want;
                let mut v = 0u64;
                loop {
                    env[slot] = v;
                    if body.eval(env) == want {
                        result = want;
                        break;
                    }
                    if v == limit {
                        break;
                    }
                    v += 1;
                }
                env.pop();
                result
            }
        }
    }

    /// Slots below `base` that the formula reads; slots from `base` up belong
    /// to its own quantifiers.
    pub fn free_slots(&self, base: usize, out: &mut BTreeSet<usize>) {
        let mut all = BTreeSet::new();
        self.all_slots(&mut all);
        out.extend(all.into_iter().filter(|&i| i < base));
    }

    fn all_slots(&self, out: &mut BTreeSet<usize>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                a.free_slots(out);
                b.free_slots(out);
            }
            Formula::Not(a) => a.all_slots(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.all_slots(out);
                b.all_slots(out);
            }
            Formula::Bounded { bound, body, .. } => {
                bound.free_slots(out);
                body.all_slots(out);
            }
        }
    }

    /// Substitutes terms for the first `subst.len()` slots. The substituted
    /// terms must only mention those same outer slots.
    pub fn substitute(&self, subst: &[TermExpr]) -> Formula {
        let go = |f: &Formula| Box::new(f.substitute(subst));
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, a.substitute(subst), b.substitute(subst)),
            Formula::Not(a) => Formula::Not(go(a)),
            Formula::And(a, b) => Formula::And(go(a), go(b)),
            Formula::Or(a, b) => Formula::Or(go(a), go(b)),
            Formula::Implies(a, b) => Formula::Implies(go(a), go(b)),
            Formula::Bounded { quantifier, var, bound, body } => Formula::Bounded {
                quantifier: *quantifier,
                var: var.clone(),
                bound: bound.substitute(subst),
                body: go(body),
            },
        }
    }
}

/// A named declaration `NAME(params) := body;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub name: String,
    pub params: Vec<String>,
    pub body: Formula,
}

impl Matrix {
    /// Evaluates with positional arguments.
    ///
    /// # Panics
    /// If `args.len()` differs from the number of parameters.
    pub fn holds(&self, args: &[u64]) -> bool {
        assert_eq!(args.len(), self.params.len(), "arity mismatch for {}", self.name);
        let mut env = Vec::with_capacity(args.len() + 4);
        env.extend_from_slice(args);
        self.body.eval(&mut env)
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}
