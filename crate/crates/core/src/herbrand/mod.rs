//! Finite-level witness pairs built from Herbrand term lists.

mod decompose;
mod sigma2;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::ershov::{countdown, Provenance, Trace, WitnessPair};
use crate::ordinal::Ordinal;
use crate::spec_lang::{render_term, Delta2Spec, TermExpr};

pub use decompose::{boolean_decomposition, DecompositionReport};
pub use sigma2::{sigma2_witness_finite, Sigma2Error, Sigma2Pair};

/// Terms `t_0..t_r`, `s_0..s_r` over `c` and `a_j, b_j` (`j < i` in `t_i, s_i`).
///
/// Terms are evaluated on the slot vector `[c, a_0, b_0, a_1, b_1, ...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HerbrandCertificate {
    pub r: usize,
    pub t: Vec<TermExpr>,
    pub s: Vec<TermExpr>,
}

pub fn a_slot(i: usize) -> usize {
    1 + 2 * i
}

pub fn b_slot(i: usize) -> usize {
    2 + 2 * i
}

impl HerbrandCertificate {
    pub fn new(t: Vec<TermExpr>, s: Vec<TermExpr>) -> Result<Self, String> {
        if t.is_empty() || t.len() != s.len() {
            return Err(format!("need equally many t and s terms, got {} and {}", t.len(), s.len()));
        }
        let cert = HerbrandCertificate { r: t.len() - 1, t, s };
        for i in 0..=cert.r {
            for (kind, term) in [("t", &cert.t[i]), ("s", &cert.s[i])] {
                if let Some(bad) = Self::discipline_violation(term, i) {
                    return Err(format!("{kind}{i} may only use c and a_j, b_j with j < {i}, found `{bad}`"));
                }
            }
        }
        Ok(cert)
    }

    pub fn slot_names(r: usize) -> Vec<String> {
        let mut names = vec!["c".to_string()];
        for i in 0..=r {
            names.push(format!("a{i}"));
            names.push(format!("b{i}"));
        }
        names
    }

    /// The first variable in `term` that level `i` may not mention.
    pub fn discipline_violation(term: &TermExpr, level: usize) -> Option<String> {
        let mut used = BTreeSet::new();
        term.free_slots(&mut used);
        let bad = used.into_iter().find(|&s| s >= a_slot(level))?;
        let j = (bad - 1) / 2;
        Some(if bad % 2 == 1 { format!("a{j}") } else { format!("b{j}") })
    }

    /// `K = 1 + 2r + 2`.
    pub fn bound(&self) -> u64 {
        2 * self.r as u64 + 3
    }

    pub fn max_changes(&self) -> u64 {
        2 * self.r as u64 + 1
    }

    pub fn render(&self) -> String {
        let names = Self::slot_names(self.r);
        let mut out = format!("herbrand {{ r = {};", self.r);
        for i in 0..=self.r {
            out.push_str(&format!(
                " t{i} = {}; s{i} = {};",
                render_term(&self.t[i], &names),
                render_term(&self.s[i], &names)
            ));
        }
        out.push_str(" }");
        out
    }

    fn slots_after(&self, level: usize) -> Vec<usize> {
        let mut used = BTreeSet::new();
        for j in level + 1..=self.r {
            self.t[j].free_slots(&mut used);
            self.s[j].free_slots(&mut used);
        }
        used.into_iter().filter(|&s| s > 0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub c: u64,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateVerdict {
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
    pub budget_exhausted: bool,
    pub nodes: u64,
}

/// Searches `a_i, b_i <= window` and `c` in range for an assignment making every
/// disjunct `A(t_i,a_i,c) -> B(s_i,b_i,c)` false.
///
/// Values of `a_i, b_i` that no later term reads are interchangeable, so only
/// the least one is tried; repeated states are skipped.
pub fn check_certificate(
    cert: &HerbrandCertificate,
    spec: &Delta2Spec,
    c_range: RangeInclusive<u64>,
    window: u64,
    node_budget: u64,
) -> CertificateVerdict {
    let later: Vec<Vec<usize>> = (0..=cert.r).map(|i| cert.slots_after(i)).collect();
    let mut nodes = 0u64;
    for c in c_range {
        let mut search = Search {
            cert,
            spec,
            c,
            window,
            later: &later,
            a_lists: HashMap::new(),
            b_lists: HashMap::new(),
            seen: HashSet::new(),
            nodes: &mut nodes,
            budget: node_budget,
        };
        let mut env = vec![c];
        match search.dfs(0, &mut env) {
            Ok(Some(found)) => {
                let a = (0..=cert.r).map(|i| found[a_slot(i)]).collect();
                let b = (0..=cert.r).map(|i| found[b_slot(i)]).collect();
                return CertificateVerdict {
                    passed: false,
                    counterexample: Some(Counterexample { c, a, b }),
                    budget_exhausted: false,
                    nodes,
                };
            }
            Ok(None) => {}
            Err(()) => {
                return CertificateVerdict { passed: false, counterexample: None, budget_exhausted: true, nodes }
            }
        }
    }
    CertificateVerdict { passed: true, counterexample: None, budget_exhausted: false, nodes }
}

struct Search<'a> {
    cert: &'a HerbrandCertificate,
    spec: &'a Delta2Spec,
    c: u64,
    window: u64,
    later: &'a [Vec<usize>],
    a_lists: HashMap<u64, Vec<u64>>,
    b_lists: HashMap<u64, Vec<u64>>,
    seen: HashSet<(usize, Vec<u64>)>,
    nodes: &'a mut u64,
    budget: u64,
}

impl Search<'_> {
    fn a_list(&mut self, t: u64) -> Vec<u64> {
        let (spec, c, window) = (self.spec, self.c, self.window);
        self.a_lists.entry(t).or_insert_with(|| (0..=window).filter(|&a| spec.a_holds(t, a, c)).collect()).clone()
    }

    fn b_list(&mut self, s: u64) -> Vec<u64> {
        let (spec, c, window) = (self.spec, self.c, self.window);
        self.b_lists.entry(s).or_insert_with(|| (0..=window).filter(|&b| !spec.b_holds(s, b, c)).collect()).clone()
    }

    fn dfs(&mut self, level: usize, env: &mut Vec<u64>) -> Result<Option<Vec<u64>>, ()> {
        *self.nodes += 1;
        if *self.nodes > self.budget {
            return Err(());
        }
        let t = self.cert.t[level].eval(env);
        let s = self.cert.s[level].eval(env);
        let a_all = self.a_list(t);
        let b_all = self.b_list(s);
        if a_all.is_empty() || b_all.is_empty() {
            return Ok(None);
        }
        if level == self.cert.r {
            let mut found = env.clone();
            found.push(a_all[0]);
            found.push(b_all[0]);
            return Ok(Some(found));
        }
        let later = &self.later[level];
        let a_opts = if later.contains(&a_slot(level)) { a_all } else { vec![a_all[0]] };
        let b_opts = if later.contains(&b_slot(level)) { b_all } else { vec![b_all[0]] };
        for &a in &a_opts {
            for &b in &b_opts {
                env.push(a);
                env.push(b);
                let key = (level + 1, later.iter().filter_map(|&i| env.get(i).copied()).collect::<Vec<_>>());
                let result = if self.seen.insert(key) { self.dfs(level + 1, env) } else { Ok(None) };
                env.truncate(env.len() - 2);
                if let Some(found) = result? {
                    return Ok(Some(found));
                }
            }
        }
        Ok(None)
    }
}

/// One rung of the least-witness chain at a given parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level {
    pub t: u64,
    pub s: u64,
    /// Least `a` with `A(t,a,c)`, if one lies within the horizon.
    pub a: Option<u64>,
    /// Least `b` with `!B(s,b,c)`, if one lies within the horizon.
    pub b: Option<u64>,
}

/// The pair `(f, h)` with `K = 2r + 3`.
///
/// `f(c,w) = 0` iff some level `j` is reached with `t_j, s_j <= w`, a witness
/// `a_j <= w` for `A(t_j, ., c)` and no `b <= w` refuting `B(s_j, ., c)`. A level
/// is reached when every earlier level has its least `a_i, b_i <= w` and its
/// `t_i, s_i <= w`; these least values feed the later terms.
#[derive(Debug, Clone)]
pub struct HerbrandPair {
    spec: Delta2Spec,
    cert: HerbrandCertificate,
}

pub fn build_pair(cert: &HerbrandCertificate, spec: &Delta2Spec) -> HerbrandPair {
    HerbrandPair { spec: spec.clone(), cert: cert.clone() }
}

impl HerbrandPair {
    pub fn certificate(&self) -> &HerbrandCertificate {
        &self.cert
    }

    pub fn spec(&self) -> &Delta2Spec {
        &self.spec
    }

    pub fn chain(&self, c: u64, horizon: u64) -> Vec<Level> {
        let mut env = vec![c];
        let mut levels = Vec::new();
        for i in 0..=self.cert.r {
            let t = self.cert.t[i].eval(&env);
            let s = self.cert.s[i].eval(&env);
            let a = (0..=horizon).find(|&a| self.spec.a_holds(t, a, c));
            let b = (0..=horizon).find(|&b| !self.spec.b_holds(s, b, c));
            levels.push(Level { t, s, a, b });
            match (a, b) {
                (Some(a), Some(b)) => {
                    env.push(a);
                    env.push(b);
                }
                _ => break,
            }
        }
        levels
    }

    fn f_from_chain(levels: &[Level], w: u64) -> u64 {
        for lv in levels {
            if lv.t > w || lv.s > w || !lv.a.is_some_and(|a| a <= w) {
                return 1;
            }
            if !lv.b.is_some_and(|b| b <= w) {
                return 0;
            }
        }
        1
    }

    /// `f(c,w)` evaluated from scratch with searches bounded by `w`.
    pub fn f_direct(&self, c: u64, w: u64) -> u64 {
        Self::f_from_chain(&self.chain(c, w), w)
    }

    pub fn f_trace(&self, c: u64, window: u64) -> Vec<u64> {
        let levels = self.chain(c, window);
        (0..=window).map(|w| Self::f_from_chain(&levels, w)).collect()
    }
}

/// `h(c,0) = K-1`, dropping by one (truncated) whenever `f` changes.
pub fn build_h(cert: &HerbrandCertificate, f: &[u64]) -> (Vec<Ordinal>, Ordinal) {
    let k = cert.bound();
    (countdown(f, k - 1), Ordinal::from(k))
}

impl WitnessPair for HerbrandPair {
    fn bound(&self, _c: u64) -> Option<Ordinal> {
        Some(Ordinal::from(self.cert.bound()))
    }

    fn provenance(&self) -> Provenance {
        Provenance::Herbrand
    }

    fn trace(&self, c: u64, window: u64) -> Trace {
        let f = self.f_trace(c, window);
        let (h, _) = build_h(&self.cert, &f);
        Trace { c, f, h }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeBoundVerdict {
    pub passed: bool,
    pub limit: u64,
    pub worst_c: u64,
    pub worst_changes: u64,
}

/// Every `c` in range changes `f` at most `limit` times on the window.
pub fn change_bound_check(
    pair: &dyn WitnessPair,
    limit: u64,
    c_range: RangeInclusive<u64>,
    window: u64,
) -> ChangeBoundVerdict {
    let mut worst = (*c_range.start(), 0u64);
    for c in c_range {
        let n = pair.trace(c, window).changes() as u64;
        if n > worst.1 {
            worst = (c, n);
        }
    }
    ChangeBoundVerdict { passed: worst.1 <= limit, limit, worst_c: worst.0, worst_changes: worst.1 }
}
