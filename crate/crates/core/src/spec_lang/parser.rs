use super::ast::{CmpOp, Formula, Matrix, Quantifier, TermExpr};
use super::lexer::{tokenize, Tok, Token};
use super::SpecError;
use crate::herbrand::HerbrandCertificate;

/// Everything a `.d2` file can contain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub declarations: Vec<Matrix>,
    pub herbrand: Option<HerbrandCertificate>,
    pub sigma2: Option<Vec<TermExpr>>,
}

impl Document {
    pub fn declaration(&self, name: &str) -> Option<&Matrix> {
        self.declarations.iter().find(|m| m.name == name)
    }
}

pub(crate) fn is_reserved(name: &str) -> bool {
    matches!(name, "exists" | "forall" | "true" | "false" | "p0" | "p1" | "herbrand" | "sigma2")
        || tuple_arity(name).is_some()
        || proj_indices(name).is_some()
}

fn tuple_arity(name: &str) -> Option<usize> {
    let k: usize = name.strip_prefix("tup_")?.parse().ok()?;
    (k >= 1).then_some(k)
}

fn proj_indices(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("proj_")?;
    let (k, i) = rest.split_once('_')?;
    let (k, i): (usize, usize) = (k.parse().ok()?, i.parse().ok()?);
    (k >= 1 && i >= 1 && i <= k).then_some((k, i))
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<String>,
    decls: &'a [Matrix],
}

impl<'a> Parser<'a> {
    fn new(src: &str, decls: &'a [Matrix]) -> Result<Self, SpecError> {
        Ok(Parser { toks: tokenize(src)?, pos: 0, scope: Vec::new(), decls })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> usize {
        self.toks[self.pos].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, SpecError> {
        Err(SpecError::Syntax {
            position: self.here(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), SpecError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.fail(&[&format!("`{s}`")])
        }
    }

    fn ident(&mut self) -> Result<(String, usize), SpecError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.here();
                self.bump();
                Ok((s, p))
            }
            _ => self.fail(&["an identifier"]),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // formulas

    fn formula(&mut self) -> Result<Formula, SpecError> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.formula()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SpecError> {
        let mut lhs = self.conjunction()?;
        while self.eat("||") {
            let rhs = self.conjunction()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SpecError> {
        let mut lhs = self.unary()?;
        while self.eat("&&") {
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SpecError> {
        if self.eat("!") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.is_keyword("exists") || self.is_keyword("forall") {
            return self.quantified();
        }
        self.atom()
    }

    fn quantified(&mut self) -> Result<Formula, SpecError> {
        let kw_pos = self.here();
        let quantifier = if self.is_keyword("exists") { Quantifier::Exists } else { Quantifier::Forall };
        self.bump();
        let (var, var_pos) = self.ident()?;
        if is_reserved(&var) {
            return Err(SpecError::Syntax {
                position: var_pos,
                expected: vec!["a variable name".into()],
                found: format!("reserved word `{var}`"),
            });
        }
        if self.scope.contains(&var) {
            return Err(SpecError::Rebound { name: var, position: var_pos });
        }
        if !self.eat("<=") {
            if self.is_sym(".") {
                return Err(SpecError::UnboundedQuantifier { position: kw_pos });
            }
            return self.fail(&["`<=`"]);
        }
        let bound = self.term()?;
        self.expect(".")?;
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        Ok(Formula::Bounded { quantifier, var, bound, body: Box::new(body?) })
    }

    fn atom(&mut self) -> Result<Formula, SpecError> {
        if self.is_keyword("true") {
            self.bump();
            return Ok(Formula::True);
        }
        if self.is_keyword("false") {
            self.bump();
            return Ok(Formula::False);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Sym("(")) {
                if let Some(decl) = self.decls.iter().find(|d| d.name == name) {
                    return self.application(decl);
                }
            }
        }
        if self.is_sym("(") {
            let save = self.pos;
            if let Ok(f) = self.comparison() {
                return Ok(f);
            }
            self.pos = save;
            self.bump();
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        self.comparison()
    }

    fn application(&mut self, decl: &Matrix) -> Result<Formula, SpecError> {
        let at = self.here();
        self.bump();
        self.expect("(")?;
        let args = self.term_list()?;
        if args.len() != decl.arity() {
            return Err(SpecError::Structure {
                position: at,
                message: format!("`{}` takes {} arguments, got {}", decl.name, decl.arity(), args.len()),
            });
        }
        let mut names = self.scope.clone();
        Ok(instantiate(&decl.body, &args, decl.arity(), &mut names))
    }

    fn comparison(&mut self) -> Result<Formula, SpecError> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            _ => return self.fail(&["`=`", "`<=`", "`<`"]),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Cmp(op, lhs, rhs))
    }

    // terms

    fn term(&mut self) -> Result<TermExpr, SpecError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat("+") {
                lhs = TermExpr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat("-") {
                lhs = TermExpr::Monus(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<TermExpr, SpecError> {
        let mut lhs = self.primary()?;
        while self.eat("*") {
            lhs = TermExpr::Mul(Box::new(lhs), Box::new(self.primary()?));
        }
        Ok(lhs)
    }

    fn term_list(&mut self) -> Result<Vec<TermExpr>, SpecError> {
        let mut args = vec![self.term()?];
        while self.eat(",") {
            args.push(self.term()?);
        }
        self.expect(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<TermExpr, SpecError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(TermExpr::Const(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Tok::Sym("<") => {
                self.bump();
                let a = self.term()?;
                self.expect(",")?;
                let b = self.term()?;
                self.expect(">")?;
                Ok(TermExpr::Pair(Box::new(a), Box::new(b)))
            }
            Tok::Ident(name) => {
                let at = self.here();
                if matches!(self.peek_at(1), Tok::Sym("(")) {
                    return self.builtin(&name, at);
                }
                self.bump();
                if is_reserved(&name) {
                    return Err(SpecError::Syntax {
                        position: at,
                        expected: vec!["a term".into()],
                        found: format!("reserved word `{name}`"),
                    });
                }
                match self.scope.iter().position(|v| *v == name) {
                    Some(slot) => Ok(TermExpr::Var(slot)),
                    None => Err(SpecError::UnboundVariable { name, position: at }),
                }
            }
            _ => self.fail(&["a number", "a variable", "`(`", "`<`"]),
        }
    }

    fn builtin(&mut self, name: &str, at: usize) -> Result<TermExpr, SpecError> {
        self.bump();
        self.bump();
        let unknown = || SpecError::Structure { position: at, message: format!("unknown function `{name}`") };
        let mut args = self.term_list()?;
        let arity_err = |want: usize, got: usize| SpecError::Structure {
            position: at,
            message: format!("`{name}` takes {want} argument(s), got {got}"),
        };
        match name {
            "p0" | "p1" => {
                if args.len() != 1 {
                    return Err(arity_err(1, args.len()));
                }
                let a = Box::new(args.pop().unwrap());
                Ok(if name == "p0" { TermExpr::Left(a) } else { TermExpr::Right(a) })
            }
            _ => {
                if let Some(k) = tuple_arity(name) {
                    if args.len() != k {
                        return Err(arity_err(k, args.len()));
                    }
                    Ok(TermExpr::Tuple(args))
                } else if let Some((arity, index)) = proj_indices(name) {
                    if args.len() != 1 {
                        return Err(arity_err(1, args.len()));
                    }
                    Ok(TermExpr::TupleProj { arity, index, arg: Box::new(args.pop().unwrap()) })
                } else {
                    Err(unknown())
                }
            }
        }
    }

    // declarations and blocks

    fn declaration(&mut self) -> Result<Matrix, SpecError> {
        let (name, name_pos) = self.ident()?;
        if is_reserved(&name) {
            return Err(SpecError::Structure { position: name_pos, message: format!("`{name}` is reserved") });
        }
        if self.decls.iter().any(|d| d.name == name) {
            return Err(SpecError::Structure { position: name_pos, message: format!("`{name}` is declared twice") });
        }
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let (p, p_pos) = self.ident()?;
                if is_reserved(&p) || params.contains(&p) {
                    return Err(SpecError::Rebound { name: p, position: p_pos });
                }
                params.push(p);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        self.expect(":=")?;
        self.scope = params.clone();
        let body = self.formula()?;
        self.scope.clear();
        if !self.at_eof() {
            self.expect(";")?;
        }
        Ok(Matrix { name, params, body })
    }

    fn scoped_term(&mut self, scope: Vec<String>) -> Result<TermExpr, SpecError> {
        self.scope = scope;
        let t = self.term();
        self.scope.clear();
        t
    }

    fn herbrand_block(&mut self) -> Result<HerbrandCertificate, SpecError> {
        let block_pos = self.here();
        self.bump();
        self.expect("{")?;
        let (r_name, r_pos) = self.ident()?;
        if r_name != "r" {
            return Err(SpecError::Syntax {
                position: r_pos,
                expected: vec!["`r`".into()],
                found: format!("`{r_name}`"),
            });
        }
        self.expect("=")?;
        let r = match self.peek() {
            Tok::Num(n) if *n <= 64 => *n as usize,
            _ => return self.fail(&["a number of levels (at most 64)"]),
        };
        self.bump();
        self.expect(";")?;
        let scope = HerbrandCertificate::slot_names(r);
        let mut t: Vec<Option<TermExpr>> = vec![None; r + 1];
        let mut s: Vec<Option<TermExpr>> = vec![None; r + 1];
        while !self.is_sym("}") {
            let (name, name_pos) = self.ident()?;
            let slot = entry_index(&name, &['t', 's']).filter(|(_, i)| *i <= r);
            let Some((kind, i)) = slot else {
                return Err(SpecError::Structure {
                    position: name_pos,
                    message: format!("expected t0..t{r} or s0..s{r}, found `{name}`"),
                });
            };
            self.expect("=")?;
            let term_pos = self.here();
            let term = self.scoped_term(scope.clone())?;
            self.expect(";")?;
            if let Some(bad) = HerbrandCertificate::discipline_violation(&term, i) {
                return Err(SpecError::Structure {
                    position: term_pos,
                    message: format!("{name} may only use c and a_j, b_j with j < {i}, found `{bad}`"),
                });
            }
            let target = if kind == 't' { &mut t[i] } else { &mut s[i] };
            if target.replace(term).is_some() {
                return Err(SpecError::Structure { position: name_pos, message: format!("`{name}` is given twice") });
            }
        }
        self.bump();
        let mut ts = Vec::new();
        let mut ss = Vec::new();
        for i in 0..=r {
            match (t[i].take(), s[i].take()) {
                (Some(a), Some(b)) => {
                    ts.push(a);
                    ss.push(b);
                }
                _ => {
                    return Err(SpecError::Structure {
                        position: block_pos,
                        message: format!("herbrand block is missing t{i} or s{i}"),
                    })
                }
            }
        }
        Ok(HerbrandCertificate { r, t: ts, s: ss })
    }

    fn sigma2_block(&mut self) -> Result<Vec<TermExpr>, SpecError> {
        let block_pos = self.here();
        self.bump();
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            let (name, name_pos) = self.ident()?;
            if entry_index(&name, &['s']) != Some(('s', out.len())) {
                return Err(SpecError::Structure {
                    position: name_pos,
                    message: format!("expected `s{}`, found `{name}`", out.len()),
                });
            }
            self.expect("=")?;
            let mut scope = vec!["c".to_string()];
            scope.extend((0..out.len()).map(|j| format!("b{j}")));
            let term = self.scoped_term(scope)?;
            self.expect(";")?;
            out.push(term);
        }
        self.bump();
        if out.is_empty() {
            return Err(SpecError::Structure {
                position: block_pos,
                message: "sigma2 block lists no candidates".into(),
            });
        }
        Ok(out)
    }
}

fn entry_index(name: &str, kinds: &[char]) -> Option<(char, usize)> {
    let mut chars = name.chars();
    let kind = chars.next()?;
    if !kinds.contains(&kind) {
        return None;
    }
    let digits = chars.as_str();
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    Some((kind, digits.parse().ok()?))
}

fn fresh_name(base: &str, taken: &[String]) -> String {
    if !taken.iter().any(|t| t == base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !taken.contains(n)).expect("unbounded supply")
}

/// Inlines `body` (over `n` parameters) at the current scope depth.
pub(crate) fn instantiate(body: &Formula, args: &[TermExpr], n: usize, names: &mut Vec<String>) -> Formula {
    let depth = names.len();
    fn term(t: &TermExpr, args: &[TermExpr], n: usize, shift_to: usize) -> TermExpr {
        let shifted = |i: usize| if i < n { args[i].clone() } else { TermExpr::Var(i - n + shift_to) };
        match t {
            TermExpr::Var(i) => shifted(*i),
            _ => map_term_children(t, &|c| term(c, args, n, shift_to)),
        }
    }
    fn go(f: &Formula, args: &[TermExpr], n: usize, base: usize, names: &mut Vec<String>) -> Formula {
        let rec = |x: &Formula, names: &mut Vec<String>| Box::new(go(x, args, n, base, names));
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, term(a, args, n, base), term(b, args, n, base)),
            Formula::Not(a) => Formula::Not(rec(a, names)),
            Formula::And(a, b) => Formula::And(rec(a, names), rec(b, names)),
            Formula::Or(a, b) => Formula::Or(rec(a, names), rec(b, names)),
            Formula::Implies(a, b) => Formula::Implies(rec(a, names), rec(b, names)),
            Formula::Bounded { quantifier, var, bound, body } => {
                let bound = term(bound, args, n, base);
                let var = fresh_name(var, names);
                names.push(var.clone());
                let body = rec(body, names);
                names.pop();
                Formula::Bounded { quantifier: *quantifier, var, bound, body }
            }
        }
    }
    go(body, args, n, depth, names)
}

fn map_term_children(t: &TermExpr, f: &dyn Fn(&TermExpr) -> TermExpr) -> TermExpr {
    let b = |x: &TermExpr| Box::new(f(x));
    match t {
        TermExpr::Const(_) | TermExpr::Var(_) => t.clone(),
        TermExpr::Add(x, y) => TermExpr::Add(b(x), b(y)),
        TermExpr::Mul(x, y) => TermExpr::Mul(b(x), b(y)),
        TermExpr::Monus(x, y) => TermExpr::Monus(b(x), b(y)),
        TermExpr::Pair(x, y) => TermExpr::Pair(b(x), b(y)),
        TermExpr::Left(x) => TermExpr::Left(b(x)),
        TermExpr::Right(x) => TermExpr::Right(b(x)),
        TermExpr::Tuple(xs) => TermExpr::Tuple(xs.iter().map(f).collect()),
        TermExpr::TupleProj { arity, index, arg } => TermExpr::TupleProj { arity: *arity, index: *index, arg: b(arg) },
    }
}

pub fn parse_document(src: &str) -> Result<Document, SpecError> {
    let mut doc = Document::default();
    let toks = tokenize(src)?;
    let mut pos = 0;
    loop {
        let mut p = Parser { toks: toks.clone(), pos, scope: Vec::new(), decls: &doc.declarations };
        if p.at_eof() {
            break;
        }
        if p.is_keyword("herbrand") && matches!(p.peek_at(1), Tok::Sym("{")) {
            let at = p.here();
            let block = p.herbrand_block()?;
            if doc.herbrand.replace(block).is_some() {
                return Err(SpecError::Structure { position: at, message: "more than one herbrand block".into() });
            }
        } else if p.is_keyword("sigma2") && matches!(p.peek_at(1), Tok::Sym("{")) {
            let at = p.here();
            let block = p.sigma2_block()?;
            if doc.sigma2.replace(block).is_some() {
                return Err(SpecError::Structure { position: at, message: "more than one sigma2 block".into() });
            }
        } else {
            let decl = p.declaration()?;
            pos = p.pos;
            doc.declarations.push(decl);
            continue;
        }
        pos = p.pos;
    }
    Ok(doc)
}

/// Parses a single formula over the given free variables.
pub fn parse_formula(src: &str, vars: &[&str]) -> Result<Formula, SpecError> {
    parse_formula_with(src, vars, &[])
}

/// Like [`parse_formula`], with earlier declarations available for application.
pub fn parse_formula_with(src: &str, vars: &[&str], decls: &[Matrix]) -> Result<Formula, SpecError> {
    let mut p = Parser::new(src, decls)?;
    p.scope = vars.iter().map(|s| s.to_string()).collect();
    let f = p.formula()?;
    if !p.at_eof() {
        return p.fail(&["end of input"]);
    }
    Ok(f)
}

pub fn parse_term(src: &str, vars: &[&str]) -> Result<TermExpr, SpecError> {
    let mut p = Parser::new(src, &[])?;
    p.scope = vars.iter().map(|s| s.to_string()).collect();
    let t = p.term()?;
    if !p.at_eof() {
        return p.fail(&["end of input"]);
    }
    Ok(t)
}
