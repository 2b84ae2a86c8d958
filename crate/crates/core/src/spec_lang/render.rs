use super::ast::{Formula, Matrix, Quantifier, TermExpr};

fn term_prec(t: &TermExpr) -> u8 {
    match t {
        TermExpr::Add(..) | TermExpr::Monus(..) => 1,
        TermExpr::Mul(..) => 2,
        _ => 3,
    }
}

pub fn render_term(t: &TermExpr, names: &[String]) -> String {
    let mut out = String::new();
    write_term(t, names, &mut out);
    out
}

fn write_term(t: &TermExpr, names: &[String], out: &mut String) {
    let wrapped = |t: &TermExpr, min: u8, out: &mut String| {
        if term_prec(t) < min {
            out.push('(');
            write_term(t, names, out);
            out.push(')');
        } else {
            write_term(t, names, out);
        }
    };
    let binary = |a: &TermExpr, op: &str, b: &TermExpr, prec: u8, out: &mut String| {
        wrapped(a, prec, out);
        out.push_str(op);
        wrapped(b, prec + 1, out);
    };
    match t {
        TermExpr::Const(n) => out.push_str(&n.to_string()),
        TermExpr::Var(i) => match names.get(*i) {
            Some(n) => out.push_str(n),
            None => out.push_str(&format!("_{i}")),
        },
        TermExpr::Add(a, b) => binary(a, " + ", b, 1, out),
        TermExpr::Monus(a, b) => binary(a, " - ", b, 1, out),
        TermExpr::Mul(a, b) => binary(a, " * ", b, 2, out),
        TermExpr::Pair(a, b) => {
            out.push('<');
            write_term(a, names, out);
            out.push_str(", ");
            write_term(b, names, out);
            out.push('>');
        }
        TermExpr::Left(a) | TermExpr::Right(a) => {
            out.push_str(if matches!(t, TermExpr::Left(_)) { "p0(" } else { "p1(" });
            write_term(a, names, out);
            out.push(')');
        }
        TermExpr::Tuple(xs) => {
            out.push_str(&format!("tup_{}(", xs.len()));
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(x, names, out);
            }
            out.push(')');
        }
        TermExpr::TupleProj { arity, index, arg } => {
            out.push_str(&format!("proj_{arity}_{index}("));
            write_term(arg, names, out);
            out.push(')');
        }
    }
}

// Quantifiers extend as far right as possible, so they only appear bare at
// the top or as the body of another quantifier.
fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Bounded { .. } => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        _ => 4,
    }
}

pub fn render_formula(f: &Formula, names: &[String]) -> String {
    let mut scope = names.to_vec();
    let mut out = String::new();
    write_formula(f, &mut scope, &mut out);
    out
}

fn write_formula(f: &Formula, scope: &mut Vec<String>, out: &mut String) {
    fn wrapped(f: &Formula, min: u8, scope: &mut Vec<String>, out: &mut String) {
        if formula_prec(f) < min {
            out.push('(');
            write_formula(f, scope, out);
            out.push(')');
        } else {
            write_formula(f, scope, out);
        }
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Cmp(op, a, b) => {
            write_term(a, scope, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_term(b, scope, out);
        }
        Formula::Not(a) => {
            out.push('!');
            let bare = matches!(**a, Formula::True | Formula::False | Formula::Not(_));
            wrapped(a, if bare { 0 } else { 5 }, scope, out);
        }
        Formula::And(a, b) => {
            wrapped(a, 3, scope, out);
            out.push_str(" && ");
            wrapped(b, 4, scope, out);
        }
        Formula::Or(a, b) => {
            wrapped(a, 2, scope, out);
            out.push_str(" || ");
            wrapped(b, 3, scope, out);
        }
        Formula::Implies(a, b) => {
            wrapped(a, 2, scope, out);
            out.push_str(" -> ");
            wrapped(b, 1, scope, out);
        }
        Formula::Bounded { quantifier, var, bound, body } => {
            out.push_str(match quantifier {
                Quantifier::Exists => "exists ",
                Quantifier::Forall => "forall ",
            });
            out.push_str(var);
            out.push_str(" <= ");
            write_term(bound, scope, out);
            out.push_str(" . ");
            scope.push(var.clone());
            write_formula(body, scope, out);
            scope.pop();
        }
    }
}

pub fn render_matrix(m: &Matrix) -> String {
    format!("{}({}) := {};", m.name, m.params.join(", "), render_formula(&m.body, &m.params))
}
