use super::*;
use crate::limr::coding;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

fn env(pairs: &[(&str, u64)]) -> Assignment {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn parses_two_matrices() {
    let spec = parse_spec("A(x,y,c) := y = x + c; B(z,u,c) := z = c").unwrap();
    assert!(matches!(parse_spec("A(x,y,c) := y = x + c B(z,u,c) := z = c"), Err(SpecError::Syntax { .. })));
    assert!(spec.a_holds(2, 7, 5));
    assert!(!spec.a_holds(2, 8, 5));
    assert!(spec.b_holds(4, 99, 4));
}

#[test]
fn bounded_existential() {
    let doc = parse_document("B(z,u,c) := exists v <= u . v*2 = c;").unwrap();
    let b = doc.declaration("B").unwrap();
    assert!(matches!(b.body, Formula::Bounded { quantifier: Quantifier::Exists, .. }));
    assert!(b.holds(&[0, 3, 6]));
    assert!(!b.holds(&[0, 2, 6]));
    assert!(!b.holds(&[0, 9, 7]));
}

#[test]
fn unbounded_quantifier_rejected() {
    let err = parse_document("B(z,u,c) := exists v . v = c;").unwrap_err();
    assert_eq!(err, SpecError::UnboundedQuantifier { position: 12 });
}

#[test]
fn unbound_variable_rejected() {
    let err = parse_document("A(x,y,c) := y = q;").unwrap_err();
    assert_eq!(err, SpecError::UnboundVariable { name: "q".into(), position: 16 });
}

#[test]
fn syntax_error_lists_expectations() {
    match parse_formula("x = ", &["x"]).unwrap_err() {
        SpecError::Syntax { position, expected, found } => {
            assert_eq!(position, 4);
            assert!(expected.iter().any(|e| e.contains("number")));
            assert_eq!(found, "end of input");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn rebinding_rejected() {
    assert!(matches!(parse_formula("exists x <= 3 . x = 1", &["x"]), Err(SpecError::Rebound { .. })));
    assert!(matches!(parse_document("A(x,x,c) := true;"), Err(SpecError::Rebound { .. })));
}

#[test]
fn missing_declarations() {
    assert!(matches!(parse_spec("A(x,y,c) := true;"), Err(SpecError::Missing(_))));
    assert!(matches!(parse_spec("A(x,c,y) := true; B(z,u,c) := true;"), Err(SpecError::Missing(_))));
}

#[test]
fn pairing_inverse_term() {
    let t = parse_term("p0(<2,3>)", &[]).unwrap();
    assert_eq!(eval_term(&t, &[], &Assignment::new()).unwrap(), 2);
    let t = parse_term("p1(<2,3>) + proj_3_3(tup_3(4, 5, 6))", &[]).unwrap();
    assert_eq!(eval_term(&t, &[], &Assignment::new()).unwrap(), 9);
}

#[test]
fn eval_with_assignment() {
    let vars = names(&["x", "y", "c"]);
    let phi = parse_formula("y = x + c", &["x", "y", "c"]).unwrap();
    assert!(eval_formula(&phi, &vars, &env(&[("x", 2), ("y", 7), ("c", 5)])).unwrap());
    assert_eq!(eval_formula(&phi, &vars, &env(&[("x", 2), ("y", 7)])), Err(EvalError::MissingVariable("c".into())));
}

#[test]
fn truncated_subtraction() {
    let phi = parse_formula("forall v <= 3 . v - 5 = 0", &[]).unwrap();
    assert!(eval_formula(&phi, &[], &Assignment::new()).unwrap());
    let t = parse_term("7 - 2 - 1", &[]).unwrap();
    assert_eq!(t.eval(&[]), 4);
}

#[test]
fn precedence() {
    let f = parse_formula("a = 1 || b = 1 && c = 1 -> d = 1 -> e = 1", &["a", "b", "c", "d", "e"]).unwrap();
    let shape = render_formula(&f, &names(&["a", "b", "c", "d", "e"]));
    assert_eq!(shape, "a = 1 || b = 1 && c = 1 -> d = 1 -> e = 1");
    match f {
        Formula::Implies(lhs, rhs) => {
            assert!(matches!(*lhs, Formula::Or(..)));
            assert!(matches!(*rhs, Formula::Implies(..)));
        }
        other => panic!("{other:?}"),
    }
    let t = parse_term("1 + 2 * 3 - 4", &[]).unwrap();
    assert_eq!(t.eval(&[]), 3);
}

#[test]
fn parenthesised_terms_and_formulas() {
    let f = parse_formula("((x + 1) * 2 = 6 && !(x = 3))", &["x"]).unwrap();
    assert!(f.clone().eval(&mut vec![2]));
    assert!(!f.eval(&mut vec![3]));
}

#[test]
fn declarations_can_be_applied() {
    let doc = parse_document(
        "Even(n) := exists h <= n . h * 2 = n;
         A(x,y,c) := Even(c) && y = x;
         B(z,u,c) := exists h <= c . Even(z + h) && h = 1;",
    )
    .unwrap();
    let spec = Delta2Spec::from_document(&doc).unwrap();
    assert!(spec.a_holds(3, 3, 4));
    assert!(!spec.a_holds(3, 3, 5));
    assert!(spec.b_holds(1, 0, 2));
    assert!(!spec.b_holds(2, 0, 2));
    let rendered = render_matrix(spec.b());
    assert!(rendered.contains("exists h1 <="), "{rendered}");
    let again = parse_document(&rendered).unwrap();
    assert_eq!(&again.declarations[0], spec.b());
}

#[test]
fn herbrand_block_parses_and_checks_discipline() {
    let doc = parse_document(
        "A(x,y,c) := true; B(z,u,c) := true;
         herbrand { r = 1; t0 = 0; s0 = c + 1; t1 = b0; s1 = a0 * 2; }",
    )
    .unwrap();
    let cert = doc.herbrand.unwrap();
    assert_eq!(cert.r, 1);
    assert_eq!(cert.t[1], TermExpr::Var(2));
    let err = parse_document("herbrand { r = 0; t0 = a0; s0 = c; }").unwrap_err();
    assert!(matches!(err, SpecError::Structure { position: 23, .. }), "{err:?}");
    assert!(parse_document("herbrand { r = 1; t0 = 0; s0 = 0; t1 = 0; }").is_err());
    assert!(parse_document("herbrand { r = 0; t0 = 0; s0 = 0; t0 = 1; }").is_err());
}

#[test]
fn sigma2_block() {
    let doc = parse_document("sigma2 { s0 = c + 1; s1 = b0 - 1; }").unwrap();
    assert_eq!(doc.sigma2.unwrap().len(), 2);
    assert!(matches!(parse_document("sigma2 { }"), Err(SpecError::Structure { .. })));
    assert!(matches!(parse_document("sigma2 { s0 = b0; }"), Err(SpecError::UnboundVariable { .. })));
    assert!(matches!(parse_document("sigma2 { s1 = c; }"), Err(SpecError::Structure { .. })));
}

#[test]
fn combine_tautologies() {
    let spec = parse_spec("A(x,y,c) := y = x; B(z,u,c) := u = u;").unwrap();
    let p = combine_to_p(&spec);
    for x in 0..20 {
        for y in 0..20 {
            assert!(p.holds(&[x, y, 3]));
        }
    }
    let spec = parse_spec("A(x,y,c) := true; B(z,u,c) := false;").unwrap();
    let p = combine_to_p(&spec);
    for x in 0..20 {
        for y in 0..20 {
            assert!(!p.holds(&[x, y, 1]));
        }
    }
}

#[test]
fn combine_matches_direct_implication() {
    let spec = parse_spec("A(x,y,c) := y = x + c; B(z,u,c) := z = c;").unwrap();
    let p = combine_to_p(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (x0, x1, y0, y1, c) =
            (rng.gen_range(0..8), rng.gen_range(0..8), rng.gen_range(0..16), rng.gen_range(0..8), rng.gen_range(0..8));
        let x = coding::pair(x0, x1);
        let y = coding::pair(y0, y1);
        let direct = !(y0 == x0 + c) || x1 == c;
        assert_eq!(p.holds(&[x, y, c]), direct);
    }
}

#[test]
fn combine_renames_clashing_binders() {
    let spec = parse_spec("A(x,y,c) := true; B(z,u,c) := exists x <= u . x = z;").unwrap();
    let p = combine_to_p(&spec);
    let text = render_matrix(&p);
    let back = parse_document(&text).unwrap();
    assert_eq!(back.declarations[0], p);
}

#[test]
fn brute_truth_examples() {
    let spec = parse_spec("A(x,y,c) := y = x + c; B(z,u,c) := z = c;").unwrap();
    assert_eq!(spec.brute_truth(4, 10), Truth::True);
    let spec = parse_spec("A(x,y,c) := false; B(z,u,c) := false;").unwrap();
    assert_eq!(spec.brute_truth(4, 10), Truth::False);
    let spec = parse_spec("A(x,y,c) := y = x; B(z,u,c) := z = 12;").unwrap();
    assert_eq!(spec.brute_truth(0, 10), Truth::Unknown);
    assert_eq!(spec.brute_truth(0, 20), Truth::True);
}

// Random ASTs for the round trip.

fn gen_term(rng: &mut ChaCha8Rng, slots: usize, depth: u32) -> TermExpr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return if slots > 0 && rng.gen_bool(0.6) {
            TermExpr::Var(rng.gen_range(0..slots))
        } else {
            TermExpr::Const(rng.gen_range(0..20))
        };
    }
    fn sub(rng: &mut ChaCha8Rng, slots: usize, depth: u32) -> Box<TermExpr> {
        Box::new(gen_term(rng, slots, depth - 1))
    }
    match rng.gen_range(0..9) {
        0 => TermExpr::Add(sub(rng, slots, depth), sub(rng, slots, depth)),
        1 => TermExpr::Mul(sub(rng, slots, depth), sub(rng, slots, depth)),
        2 => TermExpr::Monus(sub(rng, slots, depth), sub(rng, slots, depth)),
        3 => TermExpr::Pair(sub(rng, slots, depth), sub(rng, slots, depth)),
        4 => TermExpr::Left(sub(rng, slots, depth)),
        5 => TermExpr::Right(sub(rng, slots, depth)),
        6 => {
            let k = rng.gen_range(1..4);
            TermExpr::Tuple((0..k).map(|_| gen_term(rng, slots, depth - 1)).collect())
        }
        7 => {
            let arity = rng.gen_range(1..4);
            let index = rng.gen_range(1..=arity);
            TermExpr::TupleProj { arity, index, arg: sub(rng, slots, depth) }
        }
        _ => TermExpr::Const(rng.gen_range(0..1000)),
    }
}

fn gen_formula(rng: &mut ChaCha8Rng, slots: usize, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            k => {
                let op = [CmpOp::Eq, CmpOp::Le, CmpOp::Lt][k % 3];
                Formula::Cmp(op, gen_term(rng, slots, 2), gen_term(rng, slots, 2))
            }
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::Not(Box::new(gen_formula(rng, slots, depth - 1))),
        1 => Formula::And(Box::new(gen_formula(rng, slots, depth - 1)), Box::new(gen_formula(rng, slots, depth - 1))),
        2 => Formula::Or(Box::new(gen_formula(rng, slots, depth - 1)), Box::new(gen_formula(rng, slots, depth - 1))),
        3 => {
            Formula::Implies(Box::new(gen_formula(rng, slots, depth - 1)), Box::new(gen_formula(rng, slots, depth - 1)))
        }
        _ => Formula::Bounded {
            quantifier: if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall },
            var: format!("v{slots}"),
            bound: gen_term(rng, slots, 1),
            body: Box::new(gen_formula(rng, slots + 1, depth - 1)),
        },
    }
}

#[test]
fn render_parse_roundtrip_on_random_asts() {
    let vars = ["x", "y", "c"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..2000 {
        let f = gen_formula(&mut rng, 3, 4);
        let text = render_formula(&f, &names(&vars));
        let back = parse_formula(&text, &vars).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(back, f, "{text}");
        let t = gen_term(&mut rng, 3, 4);
        let text = render_term(&t, &names(&vars));
        assert_eq!(parse_term(&text, &vars).unwrap(), t, "{text}");
    }
}

fn expand(f: &Formula, env: &mut Vec<u64>) -> bool {
    match f {
        Formula::Bounded { quantifier, bound, body, .. } => {
            let n = bound.eval(env);
            let mut values = Vec::new();
            for v in 0..=n {
                env.push(v);
                values.push(expand(body, env));
                env.pop();
            }
            match quantifier {
                Quantifier::Exists => values.into_iter().fold(false, |a, b| a | b),
                Quantifier::Forall => values.into_iter().fold(true, |a, b| a & b),
            }
        }
        Formula::Not(a) => !expand(a, env),
        Formula::And(a, b) => expand(a, env) & expand(b, env),
        Formula::Or(a, b) => expand(a, env) | expand(b, env),
        Formula::Implies(a, b) => !expand(a, env) | expand(b, env),
        other => other.eval(env),
    }
}

#[test]
fn quantifiers_agree_with_finite_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 500 {
        let mut f = gen_formula(&mut rng, 2, 3);
        cap_bounds(&mut f);
        let mut env = vec![rng.gen_range(0..6), rng.gen_range(0..6)];
        assert_eq!(f.eval(&mut env.clone()), expand(&f, &mut env));
        checked += 1;
    }
}

fn cap_bounds(f: &mut Formula) {
    match f {
        Formula::Bounded { bound, body, .. } => {
            *bound = TermExpr::Const(bound.eval(&[0; 8]) % 6);
            cap_bounds(body);
        }
        Formula::Not(a) => cap_bounds(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            cap_bounds(a);
            cap_bounds(b);
        }
        _ => {}
    }
}
